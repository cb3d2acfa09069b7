#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlverify/blocks.hpp"
#include "nlverify/callgraph.hpp"
#include "nlverify/extract.hpp"
#include "nlverify/summaries.hpp"

namespace nlverify {

enum class CacheMode { None, Instructions, Source };

std::optional<CacheMode> cache_mode_from_name(const std::string& name);

struct PromptBundle {
    std::optional<std::string> system;
    std::string user;
    enum class Cacheable { None, System } cacheable = Cacheable::None;
};

struct AnnotatedSource {
    std::string text;
    struct Substitution {
        int line = 0;  // body line (1-based) of the callsite
        std::string formal;
        std::string actual;
    };
    std::vector<Substitution> substitutions;
};

// Removes inserted `/* PRE[...] */` and `/* POST[...] */` comment lines;
// inverse of annotate_callsites.
std::string strip_annotations(const std::string& text);

// Prompt templates are plain text files with {placeholder} syntax. The
// built-in set is compiled in; a directory can override any file by name.
class TemplateSet {
public:
    TemplateSet();  // built-in templates
    explicit TemplateSet(const std::string& override_dir);

    const std::string& get(const std::string& name) const;

    // Version string folded into SummaryKey.input_hash so template edits
    // invalidate cached summaries.
    std::string version(Pass pass) const;
    std::string version_all() const;

private:
    std::map<std::string, std::string> templates_;
};

// Per-function context the driver threads in beyond the callee context: the
// function's own earlier-pass summaries (leak and verify prompts show them)
// and whether this is the program entry point.
struct OwnContext {
    json alloc;   // own allocation summary, if available
    json free_;   // own free summary, if available
    bool is_entry_point = false;
};

class PromptRenderer {
public:
    explicit PromptRenderer(TemplateSet templates) : tset_(std::move(templates)) {}
    const TemplateSet& templates() const { return tset_; }

    PromptBundle render_summarizer_prompt(Pass pass, const FunctionRecord& fn,
                                          const CalleeContext& ctx,
                                          const TypeContext& type_ctx,
                                          CacheMode cache_mode,
                                          const OwnContext& own = OwnContext()) const;

    PromptBundle render_block_prompt(Pass pass, const FunctionRecord& fn,
                                     const Block& block,
                                     const std::vector<std::string>& prior_summaries,
                                     const json& own_contracts = json::array()) const;

    PromptBundle render_merge_prompt(Pass pass, const FunctionRecord& fn,
                                     const std::vector<std::string>& block_summaries) const;

    PromptBundle render_external_prompt(const std::string& name) const;

    AnnotatedSource annotate_callsites(const FunctionRecord& fn, const CallGraph& graph,
                                       const SummaryStore& store) const;

    PromptBundle render_verifier_prompt(const FunctionRecord& fn,
                                        const json& own_contracts,
                                        const AnnotatedSource& annotated,
                                        const CalleeContext& ctx,
                                        const TypeContext& type_ctx,
                                        const OwnContext& own = OwnContext()) const;

    // Throws ContextOverflowError when the rendered prompt exceeds the budget.
    PromptBundle render_baseline_prompt(const Program& program,
                                        const std::string& property,
                                        size_t context_budget) const;

private:
    TemplateSet tset_;
};

// Rendering of shared sections, exposed for the rule provider's parser.
std::string render_callee_section(const CalleeContext& ctx);
std::string render_contract_lines(const json& contracts);
std::string render_type_defs_section(const TypeContext& type_ctx);

}  // namespace nlverify
