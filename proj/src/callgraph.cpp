#include "nlverify/callgraph.hpp"

#include <algorithm>
#include <deque>
#include <queue>

#include "nlverify/util.hpp"

namespace nlverify {

std::vector<std::string> CallGraph::callees_of(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
        if (from == key) out.push_back(to);
    return out;
}

std::vector<std::string> CallGraph::callers_of(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
        if (to == key) out.push_back(from);
    return out;
}

std::map<std::string, std::set<std::string>> builtin_lib_attrs() {
    using S = std::set<std::string>;
    static const std::map<std::string, std::set<std::string>> table = {
        {"exit", S{"noreturn"}},
        {"_exit", S{"noreturn"}},
        {"_Exit", S{"noreturn"}},
        {"quick_exit", S{"noreturn"}},
        {"abort", S{"noreturn"}},
        {"longjmp", S{"noreturn"}},
        {"siglongjmp", S{"noreturn"}},
        {"pthread_exit", S{"noreturn"}},
        {"err", S{"noreturn"}},
        {"errx", S{"noreturn"}},
        {"verr", S{"noreturn"}},
        {"verrx", S{"noreturn"}},
        {"__assert_fail", S{"noreturn"}},
        {"malloc", S{"allocator"}},
        {"calloc", S{"allocator"}},
        {"realloc", S{"allocator", "deallocator"}},
        {"reallocarray", S{"allocator", "deallocator"}},
        {"aligned_alloc", S{"allocator"}},
        {"valloc", S{"allocator"}},
        {"memalign", S{"allocator"}},
        {"posix_memalign", S{"allocator"}},
        {"strdup", S{"allocator"}},
        {"strndup", S{"allocator"}},
        {"asprintf", S{"allocator"}},
        {"vasprintf", S{"allocator"}},
        {"getline", S{"allocator"}},
        {"free", S{"deallocator"}},
        {"cfree", S{"deallocator"}},
        {"memcpy", S{}},
        {"memmove", S{}},
        {"memset", S{}},
        {"memcmp", S{}},
        {"strcpy", S{}},
        {"strncpy", S{}},
        {"strcat", S{}},
        {"strncat", S{}},
        {"strlen", S{}},
        {"strcmp", S{}},
        {"strncmp", S{}},
        {"printf", S{}},
        {"fprintf", S{}},
        {"snprintf", S{}},
        {"open", S{}},
        {"close", S{}},
        {"read", S{}},
        {"write", S{}},
    };
    return table;
}

CallGraph build_call_graph(
    const std::vector<FunctionRecord>& functions,
    const std::vector<CallsiteRecord>& callsites,
    const std::map<std::string, std::set<std::string>>& lib_attrs) {
    CallGraph g;
    for (const auto& f : functions) {
        if (!g.nodes.emplace(f.name, f).second)
            log_warn("duplicate definition of " + f.name + "; keeping the first");
    }
    for (const auto& cs : callsites) {
        if (cs.is_indirect) {
            g.skipped_callsites.push_back(cs);
            continue;
        }
        if (!g.nodes.count(cs.callee_name)) {
            FunctionRecord stub;
            stub.name = cs.callee_name;
            stub.is_external = true;
            auto it = lib_attrs.find(cs.callee_name);
            if (it != lib_attrs.end()) stub.lib_attrs = it->second;
            g.nodes.emplace(stub.name, std::move(stub));
        }
        if (!g.nodes.count(cs.caller)) continue;  // caller outside the program
        if (g.is_external(cs.caller)) continue;   // stubs have no outgoing edges
        g.edges.emplace(cs.caller, cs.callee_name);
        g.direct_callsites.push_back(cs);
    }
    return g;
}

namespace {

// Iterative Tarjan; SCC member lists come out sorted for determinism.
struct TarjanState {
    const std::map<std::string, std::vector<std::string>>& adj;
    std::map<std::string, int> index, lowlink;
    std::map<std::string, bool> on_stack;
    std::vector<std::string> stack;
    int counter = 0;
    std::vector<std::vector<std::string>> sccs;

    void run(const std::string& root) {
        struct Frame {
            std::string node;
            size_t child = 0;
        };
        std::vector<Frame> frames{{root, 0}};
        index[root] = lowlink[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;

        while (!frames.empty()) {
            Frame& fr = frames.back();
            const auto& children = adj.at(fr.node);
            if (fr.child < children.size()) {
                const std::string& w = children[fr.child++];
                if (!index.count(w)) {
                    index[w] = lowlink[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    lowlink[fr.node] = std::min(lowlink[fr.node], index[w]);
                }
                continue;
            }
            if (lowlink[fr.node] == index[fr.node]) {
                std::vector<std::string> scc;
                while (true) {
                    std::string w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    scc.push_back(w);
                    if (w == fr.node) break;
                }
                std::sort(scc.begin(), scc.end());
                sccs.push_back(std::move(scc));
            }
            std::string done = fr.node;
            frames.pop_back();
            if (!frames.empty())
                lowlink[frames.back().node] =
                    std::min(lowlink[frames.back().node], lowlink[done]);
        }
    }
};

}  // namespace

AnalysisOrder compute_analysis_order(const CallGraph& graph) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [k, _] : graph.nodes) adj[k];
    for (const auto& [from, to] : graph.edges) adj[from].push_back(to);
    for (auto& [_, v] : adj) std::sort(v.begin(), v.end());

    TarjanState tarjan{adj};
    for (const auto& [k, _] : graph.nodes)
        if (!tarjan.index.count(k)) tarjan.run(k);

    // Condensation.
    std::map<std::string, int> comp_of;
    for (size_t c = 0; c < tarjan.sccs.size(); ++c)
        for (const auto& n : tarjan.sccs[c]) comp_of[n] = static_cast<int>(c);

    size_t n_comp = tarjan.sccs.size();
    // Callee-first order: component A precedes B when B calls into A, so count
    // unprocessed callees per component and release components whose callees
    // are all done.
    std::vector<std::set<int>> callee_comps(n_comp);
    for (const auto& [from, to] : graph.edges) {
        int cf = comp_of[from], ct = comp_of[to];
        if (cf != ct) callee_comps[cf].insert(ct);
    }
    std::vector<std::set<int>> caller_comps(n_comp);
    std::vector<int> pending(n_comp, 0);
    for (size_t c = 0; c < n_comp; ++c) {
        pending[c] = static_cast<int>(callee_comps[c].size());
        for (int callee : callee_comps[c]) caller_comps[callee].insert(static_cast<int>(c));
    }

    // Deterministic selection: external stubs first, then lexicographic by the
    // component's smallest member key.
    auto comp_key = [&](int c) -> const std::string& { return tarjan.sccs[c][0]; };
    auto better = [&](int a, int b) {
        bool ea = graph.is_external(comp_key(a));
        bool eb = graph.is_external(comp_key(b));
        if (ea != eb) return ea;  // stubs first
        return comp_key(a) < comp_key(b);
    };

    std::vector<int> ready;
    for (size_t c = 0; c < n_comp; ++c)
        if (pending[c] == 0) ready.push_back(static_cast<int>(c));

    AnalysisOrder order;
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end(), better);
        int c = *it;
        ready.erase(it);
        order.sccs.push_back(tarjan.sccs[c]);
        bool self_loop = false;
        for (const auto& m : tarjan.sccs[c])
            if (graph.edges.count({m, m})) self_loop = true;
        order.is_recursive.push_back(tarjan.sccs[c].size() > 1 || self_loop);
        for (int caller : caller_comps[c])
            if (--pending[caller] == 0) ready.push_back(caller);
    }
    return order;
}

std::set<std::string> affected_functions(const CallGraph& graph,
                                         const std::set<std::string>& changed) {
    std::map<std::string, std::vector<std::string>> callers;
    for (const auto& [from, to] : graph.edges) callers[to].push_back(from);

    std::set<std::string> out = changed;
    std::deque<std::string> work(changed.begin(), changed.end());
    while (!work.empty()) {
        std::string cur = work.front();
        work.pop_front();
        for (const auto& caller : callers[cur])
            if (out.insert(caller).second) work.push_back(caller);
    }
    return out;
}

}  // namespace nlverify
