#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nlverify/extract.hpp"

namespace nlverify {

struct CallGraph {
    // Keys are function names; name collisions across translation units were
    // already flagged at extraction time and resolve to the first definition.
    std::map<std::string, FunctionRecord> nodes;
    std::set<std::pair<std::string, std::string>> edges;  // (caller, callee)
    std::vector<CallsiteRecord> skipped_callsites;        // unresolved indirect calls
    std::vector<CallsiteRecord> direct_callsites;         // resolved, in source order

    bool is_external(const std::string& key) const {
        auto it = nodes.find(key);
        return it != nodes.end() && it->second.is_external;
    }
    std::vector<std::string> callees_of(const std::string& key) const;
    std::vector<std::string> callers_of(const std::string& key) const;
};

struct AnalysisOrder {
    std::vector<std::vector<std::string>> sccs;  // callee-first
    std::vector<bool> is_recursive;              // size > 1 or a self-loop
};

// Built-in attribute table for common libc/POSIX names (noreturn, allocator,
// deallocator); `extra` entries extend or override it.
std::map<std::string, std::set<std::string>> builtin_lib_attrs();

CallGraph build_call_graph(
    const std::vector<FunctionRecord>& functions,
    const std::vector<CallsiteRecord>& callsites,
    const std::map<std::string, std::set<std::string>>& lib_attrs = builtin_lib_attrs());

AnalysisOrder compute_analysis_order(const CallGraph& graph);

// `changed` plus all transitive callers of `changed`.
std::set<std::string> affected_functions(const CallGraph& graph,
                                         const std::set<std::string>& changed);

}  // namespace nlverify
