#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nlverify/callgraph.hpp"
#include "nlverify/extract.hpp"
#include "nlverify/llm.hpp"
#include "nlverify/prompts.hpp"
#include "nlverify/summaries.hpp"

namespace nlverify {

struct PassPlan {
    std::string property;
    std::vector<Pass> passes;
};

// valid-memsafety -> alloc, free, init, memsafe, verify
// valid-memcleanup -> alloc, free, leak
// no-overflow -> int
PassPlan pass_plan(const std::string& property);

struct PipelineConfig {
    size_t block_budget = 24000;
    int fixpoint_bound = 3;
    size_t baseline_context_budget = 120000;
    std::string entry_function = "main";
    CacheMode cache_mode = CacheMode::None;
};

struct FailedFunction {
    std::string function;
    std::string pass;
    std::string reason;
};

struct PassReport {
    Pass pass = Pass::Alloc;
    std::vector<FailedFunction> failed;
    std::vector<std::string> unstable;  // SCC members that never stabilized
    std::map<std::string, int> scc_iterations;  // keyed by smallest member
    int provider_calls = 0;
};

struct VerificationReport {
    std::string program_id;
    std::string property;
    std::string mode;     // compositional | baseline
    std::string verdict;  // TRUE | FALSE | UNKNOWN
    json issues = json::array();
    std::vector<FailedFunction> failed_functions;
    std::vector<std::string> unstable_functions;
    bool context_overflow = false;
    double wall_seconds = 0.0;
    int provider_calls = 0;

    json to_json() const;
};

class Driver {
public:
    Driver(const Program& program, const CallGraph& graph, const AnalysisOrder& order,
           SummaryStore& store, std::shared_ptr<Provider> provider,
           PromptRenderer renderer, PipelineConfig cfg);

    PassReport run_pass(Pass pass);
    VerificationReport run_property(const std::string& program_id,
                                    const std::string& property);
    VerificationReport run_baseline(const std::string& program_id,
                                    const std::string& property);

    int provider_calls() const { return counting_->calls(); }

private:
    struct Outcome {
        std::optional<SummaryRecord> record;
        std::string error;
        bool from_cache = false;
    };

    void ensure_external_summary(const std::string& name, PassReport& report);
    Outcome summarize_function(Pass pass, const FunctionRecord& fn);
    json complete_and_parse(const PromptBundle& bundle);
    OwnContext own_context(const FunctionRecord& fn) const;

    const Program& program_;
    const CallGraph& graph_;
    const AnalysisOrder& order_;
    SummaryStore& store_;
    std::shared_ptr<CountingProvider> counting_;
    PromptRenderer renderer_;
    PipelineConfig cfg_;
};

}  // namespace nlverify
