#include "nlverify/serialize.hpp"

namespace nlverify {

using nlohmann::json;

json function_record_to_json(const FunctionRecord& fn) {
    json params = json::array();
    for (const auto& [name, type] : fn.params)
        params.push_back({{"name", name}, {"type", type}});
    json attrs = json::array();
    for (const auto& a : fn.lib_attrs) attrs.push_back(a);
    return {{"name", fn.name},
            {"signature", fn.signature},
            {"params", params},
            {"file_path", fn.file_path},
            {"line_start", fn.line_start},
            {"line_end", fn.line_end},
            {"body", fn.body},
            {"is_external", fn.is_external},
            {"lib_attrs", attrs}};
}

json callsite_to_json(const CallsiteRecord& cs) {
    return {{"caller", cs.caller},
            {"callee", cs.callee_name},
            {"args", cs.arg_exprs},
            {"line", cs.line},
            {"is_indirect", cs.is_indirect}};
}

json type_context_to_json(const TypeContext& tc) {
    json structs = json::object();
    for (const auto& [key, fields] : tc.structs) {
        json fs = json::array();
        for (const auto& f : fields) {
            json fj = {{"name", f.name}, {"type", f.type_text}};
            if (f.byte_offset) fj["byte_offset"] = *f.byte_offset;
            fs.push_back(fj);
        }
        structs[key] = fs;
    }
    return {{"typedefs", tc.typedefs},
            {"structs", structs},
            {"sizeof_values", tc.sizeof_values},
            {"macros", tc.macros}};
}

json program_to_json(const Program& program) {
    json functions = json::array();
    for (const auto& f : program.functions) functions.push_back(function_record_to_json(f));
    json callsites = json::array();
    for (const auto& c : program.callsites) callsites.push_back(callsite_to_json(c));
    return {{"functions", functions},
            {"callsites", callsites},
            {"types", type_context_to_json(program.types)},
            {"skipped_files", program.skipped_files}};
}

json call_graph_to_json(const CallGraph& graph) {
    json nodes = json::array();
    for (const auto& [name, fn] : graph.nodes) {
        json attrs = json::array();
        for (const auto& a : fn.lib_attrs) attrs.push_back(a);
        nodes.push_back(
            {{"name", name}, {"is_external", fn.is_external}, {"lib_attrs", attrs}});
    }
    json edges = json::array();
    for (const auto& [from, to] : graph.edges) edges.push_back({from, to});
    json skipped = json::array();
    for (const auto& cs : graph.skipped_callsites) skipped.push_back(callsite_to_json(cs));
    return {{"nodes", nodes}, {"edges", edges}, {"skipped_callsites", skipped}};
}

}  // namespace nlverify
