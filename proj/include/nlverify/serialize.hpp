#pragma once

#include <json.hpp>

#include "nlverify/callgraph.hpp"
#include "nlverify/extract.hpp"

namespace nlverify {

nlohmann::json function_record_to_json(const FunctionRecord& fn);
nlohmann::json callsite_to_json(const CallsiteRecord& cs);
nlohmann::json type_context_to_json(const TypeContext& tc);
nlohmann::json program_to_json(const Program& program);
nlohmann::json call_graph_to_json(const CallGraph& graph);

}  // namespace nlverify
