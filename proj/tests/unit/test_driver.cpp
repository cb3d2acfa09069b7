#include <doctest.h>

#include <filesystem>

#include "nlverify/driver.hpp"
#include "nlverify/errors.hpp"

using namespace nlverify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Records every completed prompt; answers via the rule provider.
struct RecordingProvider : Provider {
    RuleProvider inner;
    std::vector<std::string> prompts;
    CompletionResult complete(const PromptBundle& bundle) override {
        prompts.push_back((bundle.system ? *bundle.system + "\n" : "") + bundle.user);
        return inner.complete(bundle);
    }
    std::string name() const override { return "recording"; }
};

// Valid output that differs structurally on every call.
struct AdversarialProvider : Provider {
    RuleProvider inner;
    int counter = 0;
    CompletionResult complete(const PromptBundle& bundle) override {
        CompletionResult r = inner.complete(bundle);
        json parsed = json::parse(r.text);
        parsed["x_nonce"] = ++counter;
        r.text = parsed.dump();
        return r;
    }
    std::string name() const override { return "adversarial"; }
};

struct MalformedProvider : Provider {
    CompletionResult complete(const PromptBundle&) override {
        return {"sorry, I cannot produce structured output", 0, 0, 1};
    }
    std::string name() const override { return "malformed"; }
};

struct Pipeline {
    Program program;
    CallGraph graph;
    AnalysisOrder order;
    SummaryStore store;

    Pipeline(const std::string& src, const std::string& store_name) {
        auto tu = extract_source(src, "fixture.c");
        program.functions = tu.functions;
        program.callsites = tu.callsites;
        program.types = tu.types;
        graph = build_call_graph(program.functions, program.callsites);
        order = compute_analysis_order(graph);
        fs::path p = fs::temp_directory_path() / store_name;
        fs::remove(p);
        store.open(p.string());
    }

    Driver driver(std::shared_ptr<Provider> provider, PipelineConfig cfg = {}) {
        return Driver(program, graph, order, store, std::move(provider),
                      PromptRenderer(TemplateSet{}), cfg);
    }
};

const char* kChainSrc =
    "int leaf(int x) { return x + 1; }\n"
    "int helper(int x) { return leaf(x); }\n"
    "int main(void) { return helper(1); }\n";

const char* kDoubleFreeSrc =
    "#include <stdlib.h>\n"
    "void release(char *p) {\n"
    "    free(p);\n"
    "}\n"
    "int main(void) {\n"
    "    char *buf = malloc(10);\n"
    "    release(buf);\n"
    "    free(buf);\n"
    "    return 0;\n"
    "}\n";

const char* kSafeSrc =
    "#include <stdlib.h>\n"
    "void release(char *p) {\n"
    "    (void)p;\n"
    "}\n"
    "int main(void) {\n"
    "    char *buf = malloc(10);\n"
    "    release(buf);\n"
    "    free(buf);\n"
    "    return 0;\n"
    "}\n";

std::string summarized_function(const std::string& prompt) {
    size_t pos = prompt.find("Function: ");
    if (pos == std::string::npos) return "";
    size_t eol = prompt.find('\n', pos);
    return prompt.substr(pos + 10, eol - pos - 10);
}

}  // namespace

TEST_CASE("pass plans match the property table") {
    CHECK(pass_plan("valid-memsafety").passes ==
          std::vector<Pass>{Pass::Alloc, Pass::Free, Pass::Init, Pass::Memsafe,
                            Pass::Verify});
    CHECK(pass_plan("valid-memcleanup").passes ==
          std::vector<Pass>{Pass::Alloc, Pass::Free, Pass::Leak});
    CHECK(pass_plan("no-overflow").passes == std::vector<Pass>{Pass::Int});
    CHECK_THROWS_AS(pass_plan("unreach-call"), ConfigError);
}

TEST_CASE("functions are summarized callee-first") {
    Pipeline pipe(kChainSrc, "drv_order.jsonl");
    auto provider = std::make_shared<RecordingProvider>();
    Driver driver = pipe.driver(provider);
    driver.run_pass(Pass::Alloc);

    std::vector<std::string> order;
    for (const auto& prompt : provider->prompts) {
        std::string fn = summarized_function(prompt);
        if (!fn.empty()) order.push_back(fn);
    }
    REQUIRE(order.size() == 3);
    CHECK(order[0] == "leaf");
    CHECK(order[1] == "helper");
    CHECK(order[2] == "main");
}

TEST_CASE("recursive SCCs reach a fixed point in two iterations") {
    Pipeline pipe(
        "int even(int n) { return n == 0 ? 1 : odd(n - 1); }\n"
        "int odd(int n) { return n == 0 ? 0 : even(n - 1); }\n",
        "drv_scc.jsonl");
    Driver driver = pipe.driver(std::make_shared<RuleProvider>());
    PassReport report = driver.run_pass(Pass::Alloc);
    CHECK(report.unstable.empty());
    REQUIRE(report.scc_iterations.count("even") == 1);
    CHECK(report.scc_iterations.at("even") == 2);
}

TEST_CASE("adversarial providers stop at the fixpoint bound with UNSTABLE flags") {
    Pipeline pipe(
        "int even(int n) { return n == 0 ? 1 : odd(n - 1); }\n"
        "int odd(int n) { return n == 0 ? 0 : even(n - 1); }\n",
        "drv_adversarial.jsonl");
    auto provider = std::make_shared<AdversarialProvider>();
    PipelineConfig cfg;
    cfg.fixpoint_bound = 3;
    Driver driver = pipe.driver(provider, cfg);
    PassReport report = driver.run_pass(Pass::Alloc);
    REQUIRE(report.scc_iterations.count("even") == 1);
    CHECK(report.scc_iterations.at("even") == 3);
    CHECK(report.unstable == std::vector<std::string>{"even", "odd"});
    // each iteration summarizes both members
    CHECK(report.provider_calls == 6);
}

TEST_CASE("warm store makes a second run free of provider calls") {
    Pipeline pipe(kDoubleFreeSrc, "drv_warm.jsonl");
    {
        Driver driver = pipe.driver(std::make_shared<RuleProvider>());
        auto report = driver.run_property("prog", "valid-memsafety");
        CHECK(report.provider_calls > 0);
    }
    {
        Driver driver = pipe.driver(std::make_shared<RuleProvider>());
        auto report = driver.run_property("prog", "valid-memsafety");
        CHECK(report.provider_calls == 0);
        CHECK(report.verdict == "FALSE");
    }
}

TEST_CASE("double-free propagation flips the verdict") {
    Pipeline buggy(kDoubleFreeSrc, "drv_df.jsonl");
    auto report = buggy.driver(std::make_shared<RuleProvider>())
                      .run_property("prog", "valid-memsafety");
    CHECK(report.verdict == "FALSE");
    bool found = false;
    for (const auto& is : report.issues)
        if (is["issue_kind"] == "double_free") found = true;
    CHECK(found);

    Pipeline safe(kSafeSrc, "drv_safe.jsonl");
    auto safe_report = safe.driver(std::make_shared<RuleProvider>())
                           .run_property("prog", "valid-memsafety");
    CHECK(safe_report.verdict == "TRUE");
    CHECK(safe_report.issues.empty());
}

TEST_CASE("failed functions push the verdict to UNKNOWN") {
    Pipeline pipe(kChainSrc, "drv_failed.jsonl");
    auto report = pipe.driver(std::make_shared<MalformedProvider>())
                      .run_property("prog", "valid-memsafety");
    CHECK(report.verdict == "UNKNOWN");
    CHECK_FALSE(report.failed_functions.empty());
}

TEST_CASE("baseline mode renders one whole-program prompt") {
    Pipeline pipe(kDoubleFreeSrc, "drv_base.jsonl");
    auto provider = std::make_shared<RecordingProvider>();
    auto report = pipe.driver(provider).run_baseline("prog", "valid-memsafety");
    CHECK(report.verdict == "FALSE");
    REQUIRE(provider->prompts.size() == 1);
    CHECK(provider->prompts[0].find("### release") != std::string::npos);
    CHECK(provider->prompts[0].find("### main") != std::string::npos);
}

TEST_CASE("baseline overflow yields UNKNOWN") {
    Pipeline pipe(kDoubleFreeSrc, "drv_overflow.jsonl");
    PipelineConfig cfg;
    cfg.baseline_context_budget = 50;
    auto report =
        pipe.driver(std::make_shared<RuleProvider>(), cfg).run_baseline("prog", "valid-memsafety");
    CHECK(report.verdict == "UNKNOWN");
    CHECK(report.context_overflow);
}

TEST_CASE("baseline with persistently malformed output yields UNKNOWN") {
    Pipeline pipe(kDoubleFreeSrc, "drv_badbase.jsonl");
    auto report = pipe.driver(std::make_shared<MalformedProvider>())
                      .run_baseline("prog", "valid-memsafety");
    CHECK(report.verdict == "UNKNOWN");
    REQUIRE(report.failed_functions.size() == 1);
    CHECK(report.failed_functions[0].function == "<whole-program>");
    CHECK(report.failed_functions[0].pass == "verify");
}

TEST_CASE("oversized functions go through block prompts and a merge") {
    std::string body = "void wide(void) {\n";
    for (int i = 0; i < 8; ++i) {
        body += "    if (x > " + std::to_string(i) + ") { x = x + " + std::to_string(i) +
                "; } else { x = x - " + std::to_string(i) + "; }\n";
    }
    body += "}\n";
    Pipeline pipe(body, "drv_blocks.jsonl");

    auto provider = std::make_shared<RecordingProvider>();
    PipelineConfig cfg;
    cfg.block_budget = 120;
    Driver driver = pipe.driver(provider, cfg);
    driver.run_pass(Pass::Alloc);

    int block_prompts = 0;
    bool saw_merge = false, saw_prior = false;
    for (const auto& p : provider->prompts) {
        if (p.find("You are analyzing a code block") == 0) {
            ++block_prompts;
            if (p.find("/* BLOCK 0: ") != std::string::npos) saw_prior = true;
        }
        if (p.find("You are combining block-level summaries") == 0) saw_merge = true;
    }
    CHECK(block_prompts >= 2);
    CHECK(saw_prior);
    CHECK(saw_merge);
    CHECK(pipe.store.latest("wide", Pass::Alloc).has_value());
}

TEST_CASE("leak property reports the entry function's unfreed allocation") {
    Pipeline pipe(
        "#include <stdlib.h>\n"
        "int main(void) {\n"
        "    char *buf = malloc(32);\n"
        "    buf[0] = 1;\n"
        "    return 0;\n"
        "}\n",
        "drv_leak.jsonl");
    auto report = pipe.driver(std::make_shared<RuleProvider>())
                      .run_property("prog", "valid-memcleanup");
    CHECK(report.verdict == "FALSE");
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0]["issue_kind"] == "memory_leak");
}

TEST_CASE("no-overflow property relies on the int pass") {
    Pipeline pipe("int f(int x) { return x << 40; }\nint main(void){ return f(1); }\n",
                  "drv_intp.jsonl");
    auto report =
        pipe.driver(std::make_shared<RuleProvider>()).run_property("prog", "no-overflow");
    CHECK(report.verdict == "FALSE");
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0]["issue_kind"] == "shift_ub");
}

TEST_CASE("report json carries the contract fields") {
    Pipeline pipe(kDoubleFreeSrc, "drv_json.jsonl");
    auto report = pipe.driver(std::make_shared<RuleProvider>())
                      .run_property("prog", "valid-memsafety");
    json j = report.to_json();
    CHECK(j["program"] == "prog");
    CHECK(j["property"] == "valid-memsafety");
    CHECK(j["mode"] == "compositional");
    CHECK(j["verdict"] == "FALSE");
    CHECK(j["provider_calls"].get<int>() > 0);
    CHECK(j["issues"].is_array());
}
