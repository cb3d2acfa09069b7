#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlverify/driver.hpp"

namespace nlverify {

struct BenchTask {
    std::string id;  // task path relative to the benchmark root, without .yml
    std::vector<std::string> input_files;  // absolute or root-relative paths
    std::string property;
    bool expected_verdict = true;  // true = property holds
    std::string category;          // juliet|data_structure|control_flow|array|linked_list|other
};

enum class OutcomeClass { TP, FP, TN, FN, UNK };
const char* outcome_name(OutcomeClass c);

struct Outcome {
    std::string task_id;
    OutcomeClass cls = OutcomeClass::UNK;
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0, unk = 0;
    long unk_pos = 0;  // UNK tasks whose ground truth is bug-present
    long total() const { return tp + fp + tn + fn + unk; }
};

// Appendix-style category globs ("openssl-simplified/*.yml" -> control_flow).
using CategoryMap = std::vector<std::pair<std::string, std::vector<std::string>>>;
CategoryMap builtin_categories();
CategoryMap load_categories(const std::string& path);
std::string categorize(const std::string& rel_path, const CategoryMap& categories);

// Loads task YAMLs under root. Unsupported properties are skipped with a log
// line; malformed tasks are skipped. `subset` filters by category when set.
std::vector<BenchTask> load_tasks(const std::string& root, const std::string& subset = "",
                                  const CategoryMap& categories = builtin_categories());

// Positive class = property violated (bug present).
Outcome judge(const VerificationReport& report, const BenchTask& task);
OutcomeClass judge_verdict(const std::string& verdict, bool expected_verdict);

long svcomp_score(const ConfusionCounts& c);

struct MetricValues {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
};
MetricValues metrics(const ConfusionCounts& c);

// One aggregated row per (tool, property, category).
struct ReportRow {
    std::string tool;
    std::string property;
    std::string category;
    ConfusionCounts counts;
};

struct JudgedTask {
    std::string tool;
    std::string property;
    std::string category;
    std::string task_id;
    bool expected_verdict = true;
    std::string verdict;
    OutcomeClass cls = OutcomeClass::UNK;
};

std::vector<ReportRow> aggregate(const std::vector<JudgedTask>& judged);

// Deterministic ordering: category, then tool, then property. Table columns
// follow TP FP TN FN UNK plus score/accuracy/precision/recall.
std::string emit_report(const std::vector<ReportRow>& rows, const std::string& format);

// (task id, verdict[, tool]) rows from a CSV of externally produced verdicts.
struct ImportedVerdict {
    std::string task_id;
    std::string verdict;
    std::string tool = "imported";
};
std::vector<ImportedVerdict> load_verdict_csv(const std::string& path);

}  // namespace nlverify
