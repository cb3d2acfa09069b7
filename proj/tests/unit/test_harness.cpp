#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nlverify/harness.hpp"

using namespace nlverify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path make_task_tree() {
    fs::path root = fs::temp_directory_path() / "nlv_tasks";
    fs::remove_all(root);
    fs::create_directories(root / "openssl-simplified");
    fs::create_directories(root / "array-memsafety");
    fs::create_directories(root / "juliet_TEST");

    auto write_task = [&](const fs::path& dir, const std::string& name,
                          const std::string& prop, const std::string& verdict,
                          bool extra_unsupported = false) {
        std::ofstream c(dir / (name + ".c"));
        c << "int main(void){return 0;}\n";
        std::ofstream y(dir / (name + ".yml"));
        y << "format_version: '2.0'\n";
        y << "input_files: '" << name << ".c'\n";
        y << "properties:\n";
        if (extra_unsupported)
            y << "  - property_file: ../properties/unreach-call.prp\n"
              << "    expected_verdict: true\n";
        y << "  - property_file: ../properties/" << prop << ".prp\n"
          << "    expected_verdict: " << verdict << "\n";
    };
    write_task(root / "openssl-simplified", "s1", "valid-memsafety", "true");
    write_task(root / "array-memsafety", "a1", "valid-memsafety", "false");
    write_task(root / "juliet_TEST", "j1", "valid-memcleanup", "false", true);
    // reachability-only task: skipped entirely
    {
        std::ofstream y(root / "openssl-simplified" / "skip.yml");
        y << "format_version: '2.0'\ninput_files: 's1.c'\nproperties:\n"
          << "  - property_file: ../properties/unreach-call.prp\n"
          << "    expected_verdict: true\n";
    }
    return root;
}

ConfusionCounts counts(long tp, long fp, long tn, long fn, long unk, long unk_pos = 0) {
    ConfusionCounts c;
    c.tp = tp;
    c.fp = fp;
    c.tn = tn;
    c.fn = fn;
    c.unk = unk;
    c.unk_pos = unk_pos;
    return c;
}

}  // namespace

TEST_CASE("task loading assigns categories and skips unsupported properties") {
    fs::path root = make_task_tree();
    auto tasks = load_tasks(root.string());
    REQUIRE(tasks.size() == 3);

    std::map<std::string, const BenchTask*> by_id;
    for (const auto& t : tasks) by_id[t.id] = &t;

    REQUIRE(by_id.count("openssl-simplified/s1"));
    CHECK(by_id["openssl-simplified/s1"]->category == "control_flow");
    CHECK(by_id["openssl-simplified/s1"]->expected_verdict == true);

    REQUIRE(by_id.count("array-memsafety/a1"));
    CHECK(by_id["array-memsafety/a1"]->category == "array");
    CHECK(by_id["array-memsafety/a1"]->expected_verdict == false);

    REQUIRE(by_id.count("juliet_TEST/j1"));
    CHECK(by_id["juliet_TEST/j1"]->category == "juliet");
    CHECK(by_id["juliet_TEST/j1"]->property == "valid-memcleanup");
}

TEST_CASE("subset filter narrows by category") {
    fs::path root = make_task_tree();
    auto tasks = load_tasks(root.string(), "array");
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].id == "array-memsafety/a1");
}

TEST_CASE("categorize handles unknown directories") {
    CHECK(categorize("mystery-dir/task.yml", builtin_categories()) == "other");
    CHECK(categorize("ntdrivers/t.yml", builtin_categories()) == "control_flow");
    CHECK(categorize("list-simple/t.yml", builtin_categories()) == "linked_list");
    CHECK(categorize("ldv-memsafety/t.yml", builtin_categories()) == "data_structure");
}

TEST_CASE("judging follows the bug-present-positive convention") {
    CHECK(judge_verdict("FALSE", false) == OutcomeClass::TP);
    CHECK(judge_verdict("FALSE", true) == OutcomeClass::FP);
    CHECK(judge_verdict("TRUE", true) == OutcomeClass::TN);
    CHECK(judge_verdict("TRUE", false) == OutcomeClass::FN);
    CHECK(judge_verdict("UNKNOWN", true) == OutcomeClass::UNK);
    CHECK(judge_verdict("UNKNOWN", false) == OutcomeClass::UNK);
}

TEST_CASE("svcomp score formula") {
    CHECK(svcomp_score(counts(0, 0, 0, 0, 0)) == 0);
    CHECK(svcomp_score(counts(1, 1, 1, 1, 1)) == 1 + 2 - 16 - 32);
    CHECK(svcomp_score(counts(1, 1, 1, 1, 1)) == -45);
    CHECK(svcomp_score(counts(921, 98, 830, 0, 0)) == 1013);
}

TEST_CASE("score monotonicity") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<long> d(0, 500);
    for (int i = 0; i < 200; ++i) {
        ConfusionCounts c = counts(d(rng), d(rng), d(rng), d(rng), d(rng));
        long base = svcomp_score(c);
        ConfusionCounts up = c;
        ++up.tp;
        CHECK(svcomp_score(up) >= base);
        up = c;
        ++up.tn;
        CHECK(svcomp_score(up) >= base);
        up = c;
        ++up.fp;
        CHECK(svcomp_score(up) < base);
        up = c;
        ++up.fn;
        CHECK(svcomp_score(up) < base);
    }
}

TEST_CASE("metrics match the worked examples") {
    MetricValues m = metrics(counts(1, 0, 1, 0, 0));
    CHECK(m.accuracy == doctest::Approx(1.0));
    CHECK(m.precision.value() == doctest::Approx(1.0));
    CHECK(m.recall.value() == doctest::Approx(1.0));

    MetricValues none = metrics(counts(0, 0, 5, 0, 0));
    CHECK(none.accuracy == doctest::Approx(1.0));
    CHECK_FALSE(none.precision.has_value());
    CHECK_FALSE(none.recall.has_value());

    // two bug-present tasks (one TP, one UNK), two safe (both TN)
    MetricValues mixed = metrics(counts(1, 0, 2, 0, 1, /*unk_pos=*/1));
    CHECK(mixed.accuracy == doctest::Approx(0.75));
    CHECK(mixed.precision.value() == doctest::Approx(1.0));
    CHECK(mixed.recall.value() == doctest::Approx(0.5));
}

TEST_CASE("aggregation conserves task counts") {
    std::vector<JudgedTask> judged;
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> cls(0, 4);
    for (int i = 0; i < 60; ++i) {
        JudgedTask j;
        j.tool = i % 2 ? "compositional" : "baseline";
        j.property = "valid-memsafety";
        j.category = i % 3 ? "array" : "juliet";
        j.task_id = "t" + std::to_string(i);
        j.expected_verdict = i % 2 == 0;
        j.cls = static_cast<OutcomeClass>(cls(rng));
        judged.push_back(j);
    }
    auto rows = aggregate(judged);
    long total = 0;
    for (const auto& r : rows) total += r.counts.total();
    CHECK(total == 60);
}

TEST_CASE("report ordering and formats") {
    std::vector<JudgedTask> judged;
    auto add = [&](const std::string& tool, OutcomeClass cls, bool expected) {
        JudgedTask j;
        j.tool = tool;
        j.property = "valid-memsafety";
        j.category = "juliet";
        j.task_id = "t";
        j.expected_verdict = expected;
        j.cls = cls;
        judged.push_back(j);
    };
    add("baseline", OutcomeClass::TP, false);
    add("baseline", OutcomeClass::FP, true);
    add("compositional", OutcomeClass::TP, false);
    add("compositional", OutcomeClass::TN, true);

    auto rows = aggregate(judged);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].tool == "baseline");
    CHECK(rows[1].tool == "compositional");
    CHECK(rows[0].counts.tp == 1);
    CHECK(rows[0].counts.fp == 1);
    CHECK(rows[1].counts.tn == 1);

    std::string table = emit_report(rows, "table");
    CHECK(table.find("Category") != std::string::npos);
    CHECK(table.find("baseline") < table.find("compositional"));

    json parsed = json::parse(emit_report(rows, "json"));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["score"] == 1 - 16);
    CHECK(parsed[1]["score"] == 1 + 2);

    std::string empty_table = emit_report({}, "table");
    CHECK(empty_table.find("Category") != std::string::npos);
}

TEST_CASE("verdict CSV import") {
    fs::path p = fs::temp_directory_path() / "nlv_verdicts.csv";
    std::ofstream(p) << "task_id,verdict,tool\n"
                     << "a/t1,FALSE,cpachecker\n"
                     << "a/t2,UNKNOWN\n"
                     << "# comment\n"
                     << "\"a/t3\",TRUE,uautomizer\n";
    auto rows = load_verdict_csv(p.string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].tool == "cpachecker");
    CHECK(rows[1].tool == "imported");
    CHECK(rows[2].task_id == "a/t3");
}
