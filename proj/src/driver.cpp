#include "nlverify/driver.hpp"

#include <chrono>

#include "nlverify/blocks.hpp"
#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

PassPlan pass_plan(const std::string& property) {
    if (property == "valid-memsafety")
        return {property, {Pass::Alloc, Pass::Free, Pass::Init, Pass::Memsafe, Pass::Verify}};
    if (property == "valid-memcleanup")
        return {property, {Pass::Alloc, Pass::Free, Pass::Leak}};
    if (property == "no-overflow") return {property, {Pass::Int}};
    throw ConfigError("property", "unsupported property '" + property +
                                      "' (expected valid-memsafety, valid-memcleanup, "
                                      "or no-overflow)");
}

json VerificationReport::to_json() const {
    json failed = json::array();
    for (const auto& f : failed_functions)
        failed.push_back({{"function", f.function}, {"pass", f.pass}, {"reason", f.reason}});
    return {{"program", program_id},
            {"property", property},
            {"mode", mode},
            {"verdict", verdict},
            {"issues", issues},
            {"failed_functions", failed},
            {"unstable_functions", unstable_functions},
            {"context_overflow", context_overflow},
            {"wall_seconds", wall_seconds},
            {"provider_calls", provider_calls}};
}

Driver::Driver(const Program& program, const CallGraph& graph, const AnalysisOrder& order,
               SummaryStore& store, std::shared_ptr<Provider> provider,
               PromptRenderer renderer, PipelineConfig cfg)
    : program_(program),
      graph_(graph),
      order_(order),
      store_(store),
      counting_(std::make_shared<CountingProvider>(std::move(provider))),
      renderer_(std::move(renderer)),
      cfg_(std::move(cfg)) {}

json Driver::complete_and_parse(const PromptBundle& bundle) {
    // One re-prompt on malformed JSON; the second failure propagates.
    CompletionResult first = counting_->complete(bundle);
    try {
        return extract_json(first.text);
    } catch (const JsonExtractError&) {
        PromptBundle retry = bundle;
        retry.user += "\n\nRespond with JSON only.";
        CompletionResult second = counting_->complete(retry);
        return extract_json(second.text);
    }
}

OwnContext Driver::own_context(const FunctionRecord& fn) const {
    OwnContext own;
    if (auto a = store_.latest(fn.name, Pass::Alloc)) own.alloc = a->data;
    if (auto f = store_.latest(fn.name, Pass::Free)) own.free_ = f->data;
    own.is_entry_point = fn.name == cfg_.entry_function;
    return own;
}

void Driver::ensure_external_summary(const std::string& name, PassReport& report) {
    const std::string version = renderer_.templates().version(Pass::External);
    SummaryKey key{"ext::" + name, pass_name(Pass::External), fnv1a64_hex(name + "\0" + version)};
    if (store_.lookup(key)) return;
    try {
        PromptBundle bundle = renderer_.render_external_prompt(name);
        json raw = complete_and_parse(bundle);
        const FunctionRecord& stub = graph_.nodes.at(name);
        SummaryRecord rec = validate(Pass::External, raw, &stub);
        store_.upsert(key, rec);
    } catch (const std::exception& e) {
        report.failed.push_back({"ext::" + name, pass_name(Pass::External), e.what()});
    }
}

Driver::Outcome Driver::summarize_function(Pass pass, const FunctionRecord& fn) {
    Outcome out;
    CalleeContext ctx = callee_context(store_, fn, graph_, pass);
    const std::string version = renderer_.templates().version(pass);
    SummaryKey key{fn.name, pass_name(pass), input_hash(fn, pass, version, ctx)};

    if (auto cached = store_.lookup(key)) {
        auto latest = store_.latest(fn.name, pass);
        if (!latest || latest->data != cached->data)
            store_.upsert(key, *cached);  // refresh recency for consumers
        out.record = cached;
        out.from_cache = true;
        return out;
    }

    auto attempt = [&](bool retry) -> SummaryRecord {
        json raw;
        if (fn.body.size() > cfg_.block_budget &&
            (pass == Pass::Alloc || pass == Pass::Free || pass == Pass::Init ||
             pass == Pass::Memsafe || pass == Pass::Verify)) {
            // Block-wise: summarize each block with prior summaries threaded
            // through, then merge into the whole-function schema.
            json own_contracts = json::array();
            if (pass == Pass::Verify) {
                if (auto m = store_.latest(fn.name, Pass::Memsafe))
                    own_contracts = m->data.value("contracts", json::array());
            }
            std::vector<Block> blocks = split_function_blocks(fn, cfg_.block_budget);
            std::vector<std::string> prior;
            for (const Block& b : blocks) {
                PromptBundle bundle =
                    renderer_.render_block_prompt(pass, fn, b, prior, own_contracts);
                json r = complete_and_parse(bundle);
                prior.push_back(r.value("summary", ""));
            }
            PromptBundle merge = renderer_.render_merge_prompt(pass, fn, prior);
            raw = complete_and_parse(merge);
        } else {
            PromptBundle bundle;
            if (pass == Pass::Verify) {
                json own_contracts = json::array();
                if (auto m = store_.latest(fn.name, Pass::Memsafe))
                    own_contracts = m->data.value("contracts", json::array());
                AnnotatedSource annotated = renderer_.annotate_callsites(fn, graph_, store_);
                bundle = renderer_.render_verifier_prompt(fn, own_contracts, annotated, ctx,
                                                          program_.types, own_context(fn));
            } else {
                bundle = renderer_.render_summarizer_prompt(pass, fn, ctx, program_.types,
                                                            cfg_.cache_mode, own_context(fn));
            }
            if (retry) bundle.user += "\n\nRespond with JSON only.";
            raw = complete_and_parse(bundle);
        }
        return validate(pass, raw, &fn);
    };

    try {
        try {
            out.record = attempt(false);
        } catch (const SchemaError& e) {
            log_warn(fn.name + "/" + pass_name(pass) +
                     ": schema violation, re-prompting: " + e.what());
            out.record = attempt(true);
        }
        store_.upsert(key, *out.record);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

PassReport Driver::run_pass(Pass pass) {
    PassReport report;
    report.pass = pass;
    const int calls_before = counting_->calls();

    for (size_t si = 0; si < order_.sccs.size(); ++si) {
        const auto& scc = order_.sccs[si];
        if (scc.size() == 1 && graph_.is_external(scc[0])) {
            ensure_external_summary(scc[0], report);
            continue;
        }
        const bool recursive = order_.is_recursive[si];
        int iterations = 0;
        bool changed = true;
        std::set<std::string> failed_members;

        while (changed) {
            ++iterations;
            changed = false;
            for (const auto& member : scc) {
                auto node = graph_.nodes.find(member);
                if (node == graph_.nodes.end() || node->second.is_external) continue;
                auto previous = store_.latest(member, pass);
                Outcome out = summarize_function(pass, node->second);
                if (!out.error.empty()) {
                    if (failed_members.insert(member).second)
                        report.failed.push_back({member, pass_name(pass), out.error});
                    continue;
                }
                if (!previous || !equal_ignoring_descriptions(*out.record, *previous))
                    changed = true;
            }
            if (!recursive) break;
            if (changed && iterations >= cfg_.fixpoint_bound) {
                for (const auto& member : scc) report.unstable.push_back(member);
                log_warn("SCC containing " + scc[0] + " did not stabilize after " +
                         std::to_string(iterations) + " iterations; keeping last summaries");
                break;
            }
        }
        report.scc_iterations[scc[0]] = iterations;
    }
    report.provider_calls = counting_->calls() - calls_before;
    return report;
}

namespace {

bool severity_is_fatal(const json& issue) {
    std::string sev = issue.value("severity", "high");
    return sev == "high" || sev == "medium";
}

}  // namespace

VerificationReport Driver::run_property(const std::string& program_id,
                                        const std::string& property) {
    const auto t0 = std::chrono::steady_clock::now();
    const int calls_before = counting_->calls();
    PassPlan plan = pass_plan(property);

    VerificationReport report;
    report.program_id = program_id;
    report.property = property;
    report.mode = "compositional";

    for (Pass pass : plan.passes) {
        PassReport pr = run_pass(pass);
        for (auto& f : pr.failed) report.failed_functions.push_back(std::move(f));
        for (auto& u : pr.unstable) report.unstable_functions.push_back(std::move(u));
    }

    // Collect per-function issues for the verdict.
    bool fatal = false;
    for (const auto& [name, node] : graph_.nodes) {
        if (node.is_external) continue;
        if (property == "valid-memsafety") {
            if (auto v = store_.latest(name, Pass::Verify)) {
                for (const auto& is : v->data.value("issues", json::array())) {
                    json annotated = is;
                    annotated["function"] = name;
                    fatal |= severity_is_fatal(is);
                    report.issues.push_back(annotated);
                }
            }
        } else if (property == "valid-memcleanup") {
            if (auto l = store_.latest(name, Pass::Leak)) {
                for (const auto& leak : l->data.value("leaks", json::array())) {
                    json issue = {{"location", leak.value("allocation", "?")},
                                  {"issue_kind", "memory_leak"},
                                  {"description", leak.value("reason", "")},
                                  {"severity", leak.value("severity", "high")},
                                  {"function", name}};
                    fatal |= severity_is_fatal(issue);
                    report.issues.push_back(issue);
                }
            }
        } else if (property == "no-overflow") {
            if (auto i = store_.latest(name, Pass::Int)) {
                for (const auto& is : i->data.value("issues", json::array())) {
                    json annotated = is;
                    annotated["function"] = name;
                    fatal |= severity_is_fatal(is);
                    report.issues.push_back(annotated);
                }
            }
        }
    }

    if (fatal) report.verdict = "FALSE";
    else if (report.failed_functions.empty()) report.verdict = "TRUE";
    else report.verdict = "UNKNOWN";

    report.provider_calls = counting_->calls() - calls_before;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

VerificationReport Driver::run_baseline(const std::string& program_id,
                                        const std::string& property) {
    const auto t0 = std::chrono::steady_clock::now();
    const int calls_before = counting_->calls();

    VerificationReport report;
    report.program_id = program_id;
    report.property = property;
    report.mode = "baseline";

    try {
        PromptBundle bundle = renderer_.render_baseline_prompt(
            program_, property, cfg_.baseline_context_budget);
        json raw = complete_and_parse(bundle);
        SummaryRecord rec =
            validate(Pass::Verify, raw, nullptr, IssueKindSet::WholeProgram);

        static const std::map<std::string, std::set<std::string>> relevant = {
            {"valid-memsafety",
             {"null_deref", "buffer_overflow", "use_after_free", "double_free",
              "uninitialized_use", "invalid_free"}},
            {"valid-memcleanup", {"memory_leak"}},
            {"no-overflow", {"integer_overflow", "division_by_zero", "shift_ub"}}};
        const auto& kinds = relevant.at(property);

        bool fatal = false;
        for (const auto& is : rec.data.value("issues", json::array())) {
            if (!kinds.count(is.value("issue_kind", ""))) continue;
            fatal |= severity_is_fatal(is);
            report.issues.push_back(is);
        }
        report.verdict = fatal ? "FALSE" : "TRUE";
    } catch (const ContextOverflowError& e) {
        report.verdict = "UNKNOWN";
        report.context_overflow = true;
        log_warn(std::string("baseline: ") + e.what());
    } catch (const std::exception& e) {
        report.verdict = "UNKNOWN";
        report.failed_functions.push_back({"<whole-program>", "verify", e.what()});
    }

    report.provider_calls = counting_->calls() - calls_before;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace nlverify
