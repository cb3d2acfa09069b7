#include "nlverify/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace fs = std::filesystem;

namespace nlverify {

const char* outcome_name(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::TP: return "TP";
        case OutcomeClass::FP: return "FP";
        case OutcomeClass::TN: return "TN";
        case OutcomeClass::FN: return "FN";
        case OutcomeClass::UNK: return "UNK";
    }
    return "?";
}

CategoryMap builtin_categories() {
    return {
        {"control_flow",
         {"ntdrivers-simplified/*.yml", "openssl-simplified/*.yml", "locks/*.yml",
          "ntdrivers/*.yml", "openssl/*.yml", "memory-model/*.yml",
          "unsignedintegeroverflow-sas23/*.yml", "longjmp/*.yml",
          "signedintegeroverflow-regression/*.yml", "infeasible-control-flow/*.yml"}},
        {"data_structure",
         {"ldv-regression/*.yml", "list-ext-properties/*.yml",
          "list-ext2-properties/*.yml", "ldv-sets/*.yml", "heap-data/*.yml",
          "memsafety/*.yml", "memsafety-ext/*.yml", "memsafety-ext2/*.yml",
          "memsafety-ext3/*.yml", "memsafety-cve/*.yml", "memsafety-bftpd/*.yml",
          "memory-alloca/*.yml", "ldv-memsafety/*.yml",
          "ldv-memsafety-bitfields/*.yml"}},
        {"array",
         {"array-examples/*.yml", "array-industry-pattern/*.yml",
          "reducercommutativity/*.yml", "array-tiling/*.yml", "array-programs/*.yml",
          "array-crafted/*.yml", "array-multidimensional/*.yml", "array-patterns/*.yml",
          "array-cav19/*.yml", "array-lopstr16/*.yml", "array-fpi/*.yml",
          "array-memsafety/*.yml", "array-memsafety-realloc/*.yml"}},
        {"linked_list",
         {"memsafety-broom/*.yml", "heap-manipulation/*.yml", "forester-heap/*.yml",
          "list-properties/*.yml", "ddv-machzwd/*.yml", "list-simple/*.yml",
          "list-ext3-properties/*.yml"}},
        {"juliet", {"juliet_TEST/*.yml", "juliet*/*.yml"}},
    };
}

CategoryMap load_categories(const std::string& path) {
    json parsed = json::parse(read_file(path));
    CategoryMap out;
    for (auto it = parsed.begin(); it != parsed.end(); ++it) {
        std::vector<std::string> globs;
        for (const auto& g : it.value()) globs.push_back(g.get<std::string>());
        out.emplace_back(it.key(), std::move(globs));
    }
    return out;
}

namespace {

// fnmatch-lite: '*' matches any run of characters, '?' matches one.
bool glob_match(std::string_view pattern, std::string_view text) {
    size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t] || pattern[p] == '?')) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::optional<std::string> property_from_file(const std::string& property_file) {
    std::string base = fs::path(property_file).filename().string();
    for (const char* p : {"valid-memsafety", "valid-memcleanup", "no-overflow"})
        if (base.find(p) != std::string::npos) return std::string(p);
    return std::nullopt;
}

}  // namespace

std::string categorize(const std::string& rel_path, const CategoryMap& categories) {
    for (const auto& [category, globs] : categories)
        for (const auto& g : globs)
            if (glob_match(g, rel_path)) return category;
    return "other";
}

std::vector<BenchTask> load_tasks(const std::string& root, const std::string& subset,
                                  const CategoryMap& categories) {
    if (!fs::exists(root)) throw FileNotFoundError(root);

    std::vector<fs::path> yml_files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".yml")
            yml_files.push_back(entry.path());
    }
    std::sort(yml_files.begin(), yml_files.end());

    std::vector<BenchTask> tasks;
    for (const auto& path : yml_files) {
        std::string rel = fs::relative(path, root).string();
        YAML::Node doc;
        try {
            doc = YAML::LoadFile(path.string());
        } catch (const YAML::Exception& e) {
            log_warn("skipping malformed task " + rel + ": " + e.what());
            continue;
        }
        if (!doc["input_files"] || !doc["properties"]) {
            log_warn("skipping malformed task " + rel + ": missing input_files/properties");
            continue;
        }

        std::vector<std::string> inputs;
        const auto resolve = [&](const std::string& f) {
            fs::path p(f);
            if (p.is_relative()) p = path.parent_path() / p;
            return p.string();
        };
        if (doc["input_files"].IsSequence()) {
            for (const auto& f : doc["input_files"])
                inputs.push_back(resolve(f.as<std::string>()));
        } else {
            inputs.push_back(resolve(doc["input_files"].as<std::string>()));
        }

        std::string id = rel;
        if (ends_with(id, ".yml")) id = id.substr(0, id.size() - 4);
        std::string category = categorize(rel, categories);

        for (const auto& prop : doc["properties"]) {
            if (!prop["property_file"]) continue;
            auto tag = property_from_file(prop["property_file"].as<std::string>());
            if (!tag) {
                log_info("skipping unsupported property in " + rel);
                continue;
            }
            if (!prop["expected_verdict"]) {
                log_warn("skipping " + rel + ": property without expected_verdict");
                continue;
            }
            BenchTask task;
            task.id = id;
            task.input_files = inputs;
            task.property = *tag;
            task.expected_verdict = prop["expected_verdict"].as<bool>();
            task.category = category;
            if (subset.empty() || task.category == subset) tasks.push_back(std::move(task));
        }
    }
    return tasks;
}

OutcomeClass judge_verdict(const std::string& verdict, bool expected_verdict) {
    if (verdict == "UNKNOWN") return OutcomeClass::UNK;
    const bool reported_bug = verdict == "FALSE";
    const bool bug_present = !expected_verdict;
    if (bug_present && reported_bug) return OutcomeClass::TP;
    if (!bug_present && !reported_bug) return OutcomeClass::TN;
    if (!bug_present && reported_bug) return OutcomeClass::FP;
    return OutcomeClass::FN;
}

Outcome judge(const VerificationReport& report, const BenchTask& task) {
    if (report.program_id != task.id)
        log_warn("judging report for '" + report.program_id + "' against task '" +
                 task.id + "'");
    return {task.id, judge_verdict(report.verdict, task.expected_verdict)};
}

long svcomp_score(const ConfusionCounts& c) {
    return c.tp * 1 + c.tn * 2 - c.fp * 16 - c.fn * 32;
}

MetricValues metrics(const ConfusionCounts& c) {
    MetricValues m;
    const long total = c.total();
    m.accuracy = total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / total;
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    const long positives = c.tp + c.fn + c.unk_pos;
    if (positives > 0) m.recall = static_cast<double>(c.tp) / positives;
    return m;
}

std::vector<ReportRow> aggregate(const std::vector<JudgedTask>& judged) {
    std::map<std::tuple<std::string, std::string, std::string>, ConfusionCounts> groups;
    for (const auto& j : judged) {
        ConfusionCounts& c = groups[{j.category, j.tool, j.property}];
        switch (j.cls) {
            case OutcomeClass::TP: ++c.tp; break;
            case OutcomeClass::FP: ++c.fp; break;
            case OutcomeClass::TN: ++c.tn; break;
            case OutcomeClass::FN: ++c.fn; break;
            case OutcomeClass::UNK:
                ++c.unk;
                if (!j.expected_verdict) ++c.unk_pos;
                break;
        }
    }
    std::vector<ReportRow> rows;
    for (const auto& [key, counts] : groups) {
        rows.push_back({std::get<1>(key), std::get<2>(key), std::get<0>(key), counts});
    }
    return rows;  // map order = (category, tool, property)
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "none";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4) << *v;
    return ss.str();
}

}  // namespace

std::string emit_report(const std::vector<ReportRow>& rows, const std::string& format) {
    if (format == "json") {
        json out = json::array();
        for (const auto& r : rows) {
            MetricValues m = metrics(r.counts);
            json row = {{"category", r.category},
                        {"tool", r.tool},
                        {"property", r.property},
                        {"tp", r.counts.tp},
                        {"fp", r.counts.fp},
                        {"tn", r.counts.tn},
                        {"fn", r.counts.fn},
                        {"unk", r.counts.unk},
                        {"score", svcomp_score(r.counts)},
                        {"accuracy", m.accuracy},
                        {"precision", m.precision ? json(*m.precision) : json()},
                        {"recall", m.recall ? json(*m.recall) : json()}};
            out.push_back(row);
        }
        return out.dump(2) + "\n";
    }

    // table
    std::ostringstream ss;
    ss << std::left << std::setw(16) << "Category" << std::setw(16) << "Tool"
       << std::setw(20) << "Property" << std::right << std::setw(6) << "TP"
       << std::setw(6) << "FP" << std::setw(6) << "TN" << std::setw(6) << "FN"
       << std::setw(6) << "UNK" << std::setw(8) << "Score" << std::setw(10)
       << "Accuracy" << std::setw(10) << "Prec" << std::setw(10) << "Recall" << "\n";
    for (const auto& r : rows) {
        MetricValues m = metrics(r.counts);
        std::ostringstream acc;
        acc << std::fixed << std::setprecision(4) << m.accuracy;
        ss << std::left << std::setw(16) << r.category << std::setw(16) << r.tool
           << std::setw(20) << r.property << std::right << std::setw(6) << r.counts.tp
           << std::setw(6) << r.counts.fp << std::setw(6) << r.counts.tn << std::setw(6)
           << r.counts.fn << std::setw(6) << r.counts.unk << std::setw(8)
           << svcomp_score(r.counts) << std::setw(10) << acc.str() << std::setw(10)
           << fmt_opt(m.precision) << std::setw(10) << fmt_opt(m.recall) << "\n";
    }
    return ss.str();
}

std::vector<ImportedVerdict> load_verdict_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    std::vector<ImportedVerdict> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(t);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::string c = trim(cell);
            if (c.size() >= 2 && c.front() == '"' && c.back() == '"')
                c = c.substr(1, c.size() - 2);
            cells.push_back(c);
        }
        if (cells.size() < 2) continue;
        if (cells[0] == "task_id" || cells[0] == "task") continue;  // header
        ImportedVerdict v;
        v.task_id = cells[0];
        v.verdict = cells[1];
        if (cells.size() > 2 && !cells[2].empty()) v.tool = cells[2];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace nlverify
