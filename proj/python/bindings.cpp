#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlverify/config.hpp"
#include "nlverify/driver.hpp"
#include "nlverify/harness.hpp"
#include "nlverify/serialize.hpp"

namespace py = pybind11;
using namespace nlverify;
using nlohmann::json;

namespace {

py::object json_to_py(const json& v) {
    switch (v.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(v.get<bool>());
        case json::value_t::number_integer: return py::int_(v.get<long long>());
        case json::value_t::number_unsigned:
            return py::int_(v.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(v.get<double>());
        case json::value_t::string: return py::str(v.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& e : v) out.append(json_to_py(e));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = v.begin(); it != v.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json out = json::array();
        for (const auto& e : obj) out.push_back(py_to_json(e));
        return out;
    }
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (auto item : obj.cast<py::dict>())
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        return out;
    }
    throw py::type_error("value is not JSON-convertible");
}

Program extract_program_py(const std::vector<std::string>& files) {
    return extract_files(files);
}

py::dict run_property_py(const std::vector<std::string>& files,
                         const std::string& property, const std::string& mode,
                         const std::string& store_path, const std::string& entry,
                         int fixpoint_bound) {
    Program program = extract_files(files);
    CallGraph graph = build_call_graph(program.functions, program.callsites);
    AnalysisOrder order = compute_analysis_order(graph);
    SummaryStore store(store_path);
    PipelineConfig cfg;
    if (!entry.empty()) cfg.entry_function = entry;
    if (fixpoint_bound > 0) cfg.fixpoint_bound = fixpoint_bound;
    Driver driver(program, graph, order, store, std::make_shared<RuleProvider>(),
                  PromptRenderer(TemplateSet()), cfg);
    VerificationReport report =
        mode == "baseline" ? driver.run_baseline("program", property)
                           : driver.run_property("program", property);
    return json_to_py(report.to_json());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "compositional memory-safety analysis for C programs";

    m.def(
        "load_compilation_db",
        [](const std::string& path) {
            py::list out;
            for (const auto& cc : load_compilation_db(path)) {
                py::dict d;
                d["directory"] = cc.directory;
                d["file"] = cc.file;
                d["arguments"] = cc.arguments;
                out.append(d);
            }
            return out;
        },
        py::arg("path"), "Load a compile_commands.json database.");

    m.def(
        "extract",
        [](const std::vector<std::string>& files) {
            return json_to_py(program_to_json(extract_program_py(files)));
        },
        py::arg("files"), "Extract functions, callsites, and types from C files.");

    m.def(
        "split_blocks",
        [](const std::string& source, const std::string& name, size_t budget) {
            FunctionRecord fn;
            fn.name = name;
            fn.body = source;
            py::list out;
            for (const auto& b : split_function_blocks(fn, budget)) {
                py::dict d;
                d["index"] = b.index;
                d["source"] = b.source;
                d["boundary_kind"] = boundary_kind_name(b.boundary_kind);
                out.append(d);
            }
            return out;
        },
        py::arg("source"), py::arg("name"), py::arg("budget"),
        "Split a function body into syntax-bounded blocks.");

    m.def(
        "call_graph",
        [](const std::vector<std::string>& files) {
            Program program = extract_program_py(files);
            CallGraph graph = build_call_graph(program.functions, program.callsites);
            AnalysisOrder order = compute_analysis_order(graph);
            py::dict out;
            out["graph"] = json_to_py(call_graph_to_json(graph));
            py::list sccs;
            for (size_t i = 0; i < order.sccs.size(); ++i) {
                py::dict scc;
                scc["members"] = order.sccs[i];
                scc["recursive"] = static_cast<bool>(order.is_recursive[i]);
                sccs.append(scc);
            }
            out["order"] = sccs;
            return out;
        },
        py::arg("files"),
        "Build the call graph and its callee-first analysis order.");

    m.def(
        "validate_summary",
        [](const std::string& pass_tag, const py::handle& record) {
            auto pass = pass_from_name(pass_tag);
            if (!pass) throw py::value_error("unknown pass: " + pass_tag);
            SummaryRecord rec = validate(*pass, py_to_json(record));
            return json_to_py(rec.data);
        },
        py::arg("pass_tag"), py::arg("record"),
        "Validate a summary record against its pass schema.");

    m.def(
        "extract_json",
        [](const std::string& text) { return json_to_py(extract_json(text)); },
        py::arg("text"), "Extract the first JSON object from completion text.");

    m.def(
        "rule_complete",
        [](const std::string& user, const std::string& system) {
            PromptBundle bundle;
            if (!system.empty()) bundle.system = system;
            bundle.user = user;
            RuleProvider provider;
            return provider.complete(bundle).text;
        },
        py::arg("user"), py::arg("system") = "",
        "Run the deterministic rule provider on a rendered prompt.");

    m.def(
        "render_external_prompt",
        [](const std::string& name) {
            PromptRenderer renderer((TemplateSet()));
            return renderer.render_external_prompt(name).user;
        },
        py::arg("name"), "Render the external-stub summarization prompt.");

    m.def(
        "svcomp_score",
        [](long tp, long fp, long tn, long fn, long unk) {
            ConfusionCounts c;
            c.tp = tp;
            c.fp = fp;
            c.tn = tn;
            c.fn = fn;
            c.unk = unk;
            return svcomp_score(c);
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"), py::arg("unk"),
        "SV-COMP weighted score: TP*1 + TN*2 - FP*16 - FN*32.");

    m.def(
        "metrics",
        [](long tp, long fp, long tn, long fn, long unk, long unk_pos) {
            ConfusionCounts c;
            c.tp = tp;
            c.fp = fp;
            c.tn = tn;
            c.fn = fn;
            c.unk = unk;
            c.unk_pos = unk_pos;
            MetricValues m = metrics(c);
            py::dict out;
            out["accuracy"] = m.accuracy;
            out["precision"] = m.precision ? py::object(py::float_(*m.precision))
                                           : py::object(py::none());
            out["recall"] =
                m.recall ? py::object(py::float_(*m.recall)) : py::object(py::none());
            return out;
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"), py::arg("unk"),
        py::arg("unk_pos") = 0, "Accuracy, precision, and recall for a count set.");

    m.def("run_property", &run_property_py, py::arg("files"), py::arg("property"),
          py::arg("mode") = "compositional", py::arg("store_path") = "store.jsonl",
          py::arg("entry") = "main", py::arg("fixpoint_bound") = 0,
          "Run a property end to end with the offline rule provider.");

    m.attr("__version__") = "0.1.0";
}
