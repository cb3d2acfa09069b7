// nlverify: compositional memory-safety analysis for C programs.
//
// Exit codes: 0 success; 1 verdict FALSE under --fail-on-issue; 2 usage or
// configuration error; 3 environment error (store, endpoint, inputs).

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "nlverify/config.hpp"
#include "nlverify/driver.hpp"
#include "nlverify/errors.hpp"
#include "nlverify/harness.hpp"
#include "nlverify/serialize.hpp"
#include "nlverify/util.hpp"

namespace fs = std::filesystem;
using namespace nlverify;

namespace {

void apply_log_level(const std::string& level) {
    if (level == "debug") set_log_level(LogLevel::Debug);
    else if (level == "info") set_log_level(LogLevel::Info);
    else if (level == "warn") set_log_level(LogLevel::Warn);
    else set_log_level(LogLevel::Error);
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
    } else {
        write_file(out_path, content);
    }
}

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string log_level;
    std::string provider;
    std::string endpoint;
    std::string model;
    double temperature = -1;
    std::string templates_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value)");
    cmd->add_option("--log-level", opts.log_level, "debug|info|warn|error");
    cmd->add_option("--provider", opts.provider, "rule|http");
    cmd->add_option("--endpoint", opts.endpoint, "OpenAI-compatible base URL");
    cmd->add_option("--model", opts.model, "model identifier");
    cmd->add_option("--temperature", opts.temperature, "sampling temperature");
    cmd->add_option("--templates", opts.templates_dir, "prompt template override dir");
}

RunConfig make_config(const CommonOpts& opts) {
    RunConfig cfg = load_run_config(opts.config_path);
    if (!opts.log_level.empty()) cfg.log_level = opts.log_level;
    if (!opts.provider.empty()) cfg.provider = opts.provider;
    if (!opts.endpoint.empty()) cfg.provider_cfg.endpoint = opts.endpoint;
    if (!opts.model.empty()) cfg.provider_cfg.model = opts.model;
    if (opts.temperature >= 0) cfg.provider_cfg.temperature = opts.temperature;
    if (!opts.templates_dir.empty()) cfg.template_dir = opts.templates_dir;
    cfg.check();
    apply_log_level(cfg.log_level);
    if (log_level() <= LogLevel::Debug) {
        log_debug("effective config: provider=" + cfg.provider +
                  " endpoint=" + cfg.provider_cfg.endpoint +
                  " model=" + cfg.provider_cfg.model +
                  " block_budget=" + std::to_string(cfg.pipeline.block_budget) +
                  " fixpoint_bound=" + std::to_string(cfg.pipeline.fixpoint_bound) +
                  " store=" + cfg.store_path);
    }
    return cfg;
}

VerificationReport analyze_program(const Program& program, const RunConfig& cfg,
                                   const std::string& program_id,
                                   const std::string& property, const std::string& mode,
                                   const std::string& store_path,
                                   std::shared_ptr<Provider> provider) {
    CallGraph graph = build_call_graph(program.functions, program.callsites);
    AnalysisOrder order = compute_analysis_order(graph);
    SummaryStore store(store_path);
    PromptRenderer renderer(cfg.template_dir.empty() ? TemplateSet()
                                                     : TemplateSet(cfg.template_dir));
    Driver driver(program, graph, order, store, std::move(provider), std::move(renderer),
                  cfg.pipeline);
    return mode == "baseline" ? driver.run_baseline(program_id, property)
                              : driver.run_property(program_id, property);
}

int cmd_extract(const CommonOpts& common, const std::string& compdb,
                const std::string& preprocess, size_t block_budget,
                const std::string& out_path) {
    RunConfig cfg = make_config(common);
    auto commands = load_compilation_db(compdb);
    Program program = extract_program(commands, preprocess == "on");
    json out = program_to_json(program);
    if (block_budget > 0) {
        json blocks = json::object();
        for (const auto& fn : program.functions) {
            if (fn.is_external) continue;
            json list = json::array();
            for (const auto& b : split_function_blocks(fn, block_budget))
                list.push_back({{"index", b.index},
                                {"boundary_kind", boundary_kind_name(b.boundary_kind)},
                                {"chars", b.source.size()}});
            blocks[fn.name] = list;
        }
        out["blocks"] = blocks;
    }
    write_output(out_path, out.dump(2));
    return 0;
}

int cmd_analyze(const CommonOpts& common, const std::string& compdb,
                const std::vector<std::string>& sources, const std::string& property,
                const std::string& mode, const std::string& store_path,
                int fixpoint_bound, const std::string& entry,
                const std::string& preprocess, size_t block_budget,
                size_t baseline_budget, const std::string& program_id,
                const std::string& out_path, bool fail_on_issue) {
    RunConfig cfg = make_config(common);
    if (!store_path.empty()) cfg.store_path = store_path;
    if (fixpoint_bound > 0) cfg.pipeline.fixpoint_bound = fixpoint_bound;
    if (!entry.empty()) cfg.pipeline.entry_function = entry;
    if (block_budget > 0) cfg.pipeline.block_budget = block_budget;
    if (baseline_budget > 0) cfg.pipeline.baseline_context_budget = baseline_budget;
    cfg.check();

    Program program;
    std::string id = program_id;
    if (!compdb.empty()) {
        program = extract_program(load_compilation_db(compdb), preprocess == "on");
        if (id.empty()) id = fs::path(compdb).parent_path().filename().string();
    } else if (!sources.empty()) {
        program = extract_files(sources);
        if (id.empty()) id = fs::path(sources[0]).stem().string();
    } else {
        throw ConfigError("input", "one of --compdb or --source is required");
    }
    if (id.empty()) id = "program";

    auto provider = make_provider(cfg.provider, cfg.provider_cfg);
    provider->preflight();
    VerificationReport report =
        analyze_program(program, cfg, id, property, mode, cfg.store_path, provider);
    write_output(out_path, report.to_json().dump(2));
    if (fail_on_issue && report.verdict == "FALSE") return 1;
    return 0;
}

int cmd_bench(const CommonOpts& common, const std::string& tasks_root,
              const std::string& subset, const std::string& mode,
              const std::string& import_csv, const std::string& format, int jobs,
              const std::string& store_dir, const std::string& categories_path,
              const std::string& out_path) {
    RunConfig cfg = make_config(common);
    if (jobs > 0) cfg.jobs = jobs;
    cfg.check();

    CategoryMap categories =
        categories_path.empty() ? builtin_categories() : load_categories(categories_path);

    std::vector<JudgedTask> judged;

    if (!import_csv.empty()) {
        auto tasks = load_tasks(tasks_root, subset, categories);
        std::map<std::string, const BenchTask*> by_id;
        for (const auto& t : tasks) by_id[t.id] = &t;
        for (const auto& v : load_verdict_csv(import_csv)) {
            auto it = by_id.find(v.task_id);
            if (it == by_id.end()) {
                log_warn("imported verdict for unknown task " + v.task_id);
                continue;
            }
            const BenchTask& task = *it->second;
            judged.push_back({v.tool, task.property, task.category, task.id,
                              task.expected_verdict, v.verdict,
                              judge_verdict(v.verdict, task.expected_verdict)});
        }
    } else {
        auto tasks = load_tasks(tasks_root, subset, categories);
        if (tasks.empty()) log_warn("no benchmark tasks found under " + tasks_root);
        std::vector<std::string> modes;
        if (mode == "both") modes = {"compositional", "baseline"};
        else modes = {mode};

        fs::path stores = store_dir.empty() ? fs::path("nlverify-bench-stores")
                                            : fs::path(store_dir);
        fs::create_directories(stores);
        auto provider = make_provider(cfg.provider, cfg.provider_cfg);

        struct Job {
            const BenchTask* task;
            std::string mode;
        };
        std::vector<Job> jobs_list;
        for (const auto& t : tasks)
            for (const auto& m : modes) jobs_list.push_back({&t, m});

        std::vector<JudgedTask> results(jobs_list.size());
        std::atomic<size_t> next{0};
        auto worker = [&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= jobs_list.size()) break;
                const Job& job = jobs_list[i];
                const BenchTask& task = *job.task;
                std::string store_path =
                    (stores / (sanitize_id(task.id) + "." + task.property + "." +
                               job.mode + ".jsonl"))
                        .string();
                VerificationReport report;
                try {
                    Program program = extract_files(task.input_files);
                    report = analyze_program(program, cfg, task.id, task.property,
                                             job.mode, store_path, provider);
                } catch (const std::exception& e) {
                    log_error("task " + task.id + " failed: " + e.what());
                    report.program_id = task.id;
                    report.property = task.property;
                    report.mode = job.mode;
                    report.verdict = "UNKNOWN";
                    report.failed_functions.push_back({"<harness>", "run", e.what()});
                }
                Outcome outcome = judge(report, task);
                results[i] = {job.mode,       task.property,        task.category,
                              task.id,        task.expected_verdict, report.verdict,
                              outcome.cls};
            }
        };
        size_t n_workers = std::min<size_t>(cfg.jobs, std::max<size_t>(1, jobs_list.size()));
        std::vector<std::thread> pool;
        for (size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        judged = std::move(results);
    }

    std::string rendered = emit_report(aggregate(judged), format);
    write_output(out_path, rendered);
    return 0;
}

int cmd_show_summary(const CommonOpts& common, const std::string& function,
                     const std::string& pass_tag, const std::string& store_path) {
    make_config(common);
    auto pass = pass_from_name(pass_tag);
    if (!pass) {
        std::cerr << "unknown pass: " << pass_tag << "\n";
        return 2;
    }
    SummaryStore store(store_path);
    auto rec = store.latest(function, *pass);
    if (!rec) {
        std::cerr << "no " << pass_tag << " summary stored for " << function << "\n";
        return 3;
    }
    std::cout << rec->data.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compositional memory-safety analysis for C programs"};
    app.require_subcommand(1);

    CommonOpts common;

    // extract
    auto* extract = app.add_subcommand("extract", "extract functions and callsites");
    std::string compdb, preprocess = "off", out_path;
    size_t block_budget = 0;
    extract->add_option("--compdb", compdb, "compile_commands.json path")->required();
    extract->add_option("--preprocess", preprocess, "on|off");
    extract->add_option("--block-budget", block_budget,
                        "also report block splits at this budget");
    extract->add_option("--out", out_path, "output path (default stdout)");
    add_common(extract, common);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "run a verification property");
    std::string a_compdb, a_property, a_mode = "compositional", a_store, a_entry,
                a_preprocess = "off", a_program_id, a_out;
    std::vector<std::string> a_sources;
    int a_fixpoint = 0;
    size_t a_block_budget = 0, a_baseline_budget = 0;
    bool a_fail_on_issue = false;
    analyze->add_option("--compdb", a_compdb, "compile_commands.json path");
    analyze->add_option("--source", a_sources, "C source file(s)");
    analyze->add_option("--property", a_property,
                        "valid-memsafety|valid-memcleanup|no-overflow")
        ->required();
    analyze->add_option("--mode", a_mode, "compositional|baseline");
    analyze->add_option("--store", a_store, "summary store path");
    analyze->add_option("--fixpoint-bound", a_fixpoint, "bounded SCC iterations");
    analyze->add_option("--entry", a_entry, "entry function (default main)");
    analyze->add_option("--preprocess", a_preprocess, "on|off");
    analyze->add_option("--block-budget", a_block_budget, "block split budget, chars");
    analyze->add_option("--baseline-budget", a_baseline_budget,
                        "baseline context budget, chars");
    analyze->add_option("--program-id", a_program_id, "report program id");
    analyze->add_option("--out", a_out, "report output path (default stdout)");
    analyze->add_flag("--fail-on-issue", a_fail_on_issue, "exit 1 on verdict FALSE");
    add_common(analyze, common);

    // bench
    auto* bench = app.add_subcommand("bench", "run benchmark tasks and score results");
    std::string b_tasks, b_subset, b_mode = "compositional", b_import, b_format = "json",
                b_store_dir, b_categories, b_out;
    int b_jobs = 0;
    bench->add_option("--tasks", b_tasks, "benchmark task root")->required();
    bench->add_option("--subset", b_subset,
                      "category filter: juliet|data_structure|control_flow|array|"
                      "linked_list|other");
    bench->add_option("--mode", b_mode, "compositional|baseline|both");
    bench->add_option("--import-verdicts", b_import, "CSV of task_id,verdict[,tool]");
    bench->add_option("--format", b_format, "json|table");
    bench->add_option("--jobs", b_jobs, "concurrent tasks");
    bench->add_option("--store-dir", b_store_dir, "per-task store directory");
    bench->add_option("--categories", b_categories, "category glob JSON file");
    bench->add_option("--out", b_out, "report output path (default stdout)");
    add_common(bench, common);

    // show-summary
    auto* show = app.add_subcommand("show-summary", "print the latest stored summary");
    std::string s_function, s_pass, s_store;
    show->add_option("function", s_function, "function name")->required();
    show->add_option("pass", s_pass, "alloc|free|init|memsafe|leak|int|external|verify")
        ->required();
    show->add_option("--store", s_store, "summary store path")->required();
    add_common(show, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (extract->parsed())
            return cmd_extract(common, compdb, preprocess, block_budget, out_path);
        if (analyze->parsed())
            return cmd_analyze(common, a_compdb, a_sources, a_property, a_mode, a_store,
                               a_fixpoint, a_entry, a_preprocess, a_block_budget,
                               a_baseline_budget, a_program_id, a_out, a_fail_on_issue);
        if (bench->parsed())
            return cmd_bench(common, b_tasks, b_subset, b_mode, b_import, b_format,
                             b_jobs, b_store_dir, b_categories, b_out);
        if (show->parsed()) return cmd_show_summary(common, s_function, s_pass, s_store);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
