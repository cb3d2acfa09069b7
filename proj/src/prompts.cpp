#include "nlverify/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace fs = std::filesystem;

namespace nlverify {

namespace detail {
const std::map<std::string, std::string>& builtin_templates();  // generated
}

std::optional<CacheMode> cache_mode_from_name(const std::string& name) {
    if (name == "none") return CacheMode::None;
    if (name == "instructions") return CacheMode::Instructions;
    if (name == "source") return CacheMode::Source;
    return std::nullopt;
}

namespace {

// Replaces `{key}` for known keys only; everything else (JSON braces,
// unknown placeholders) passes through untouched.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            size_t close = tmpl.find('}', i);
            if (close != std::string::npos) {
                auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

// Template files end with a newline; when a file is spliced in as a value the
// surrounding template already supplies the line break.
std::string chomp(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

std::string severity_or(const json& v, const char* field, const char* fallback) {
    if (v.contains(field) && v[field].is_string()) return v[field].get<std::string>();
    return fallback;
}

}  // namespace

TemplateSet::TemplateSet() : templates_(detail::builtin_templates()) {}

TemplateSet::TemplateSet(const std::string& override_dir)
    : templates_(detail::builtin_templates()) {
    if (override_dir.empty()) return;
    for (const auto& entry : fs::directory_iterator(override_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        templates_[entry.path().stem().string()] = read_file(entry.path().string());
    }
}

const std::string& TemplateSet::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end())
        throw std::out_of_range("unknown prompt template: " + name);
    return it->second;
}

std::string TemplateSet::version(Pass pass) const {
    std::string prefix = pass_name(pass);
    std::string material;
    for (const auto& [name, text] : templates_) {
        bool shared = name == "source_system" || name == "merge" ||
                      starts_with(name, "external") || starts_with(name, "verify");
        if (starts_with(name, prefix) || (pass == Pass::Verify && shared) ||
            (pass == Pass::External && starts_with(name, "external"))) {
            material += name;
            material += '\0';
            material += text;
            material += '\0';
        }
        if (name == "source_system" &&
            (pass == Pass::Alloc || pass == Pass::Free || pass == Pass::Init)) {
            material += text;
        }
    }
    return fnv1a64_hex(material);
}

std::string TemplateSet::version_all() const {
    std::string material;
    for (const auto& [name, text] : templates_) {
        material += name;
        material += '\0';
        material += text;
    }
    return fnv1a64_hex(material);
}

// ---- shared section renderers -------------------------------------------------

std::string render_callee_section(const CalleeContext& ctx) {
    if (ctx.empty()) return "(none)";
    std::string out;
    for (const auto& e : ctx.callees) {
        out += "### " + e.name + (e.is_external ? " (external)" : "") + "\n";
        if (e.summaries.empty()) {
            out += "(no summary yet)\n";
            continue;
        }
        for (const auto& [p, v] : e.summaries)
            out += "- " + p + ": " + v.dump() + "\n";
    }
    return chomp(std::move(out));
}

std::string render_contract_lines(const json& contracts) {
    if (!contracts.is_array() || contracts.empty()) return "(none)";
    std::string out;
    for (const auto& c : contracts) out += "- " + c.dump() + "\n";
    return chomp(std::move(out));
}

std::string render_type_defs_section(const TypeContext& t) {
    if (t.typedefs.empty() && t.structs.empty() && t.macros.empty()) return "";
    std::string out = "## Type Definitions\n";
    for (const auto& [name, expansion] : t.macros)
        out += "#define " + name + " " + expansion + "\n";
    for (const auto& [_, text] : t.typedefs) out += text + "\n";
    for (const auto& [key, fields] : t.structs) {
        out += key + ":";
        for (const auto& f : fields) {
            out += " " + f.name;
            if (f.byte_offset) out += "@" + std::to_string(*f.byte_offset);
            out += ";";
        }
        auto sz = t.sizeof_values.find(key);
        if (sz != t.sizeof_values.end())
            out += " sizeof=" + std::to_string(sz->second);
        out += "\n";
    }
    return out;  // keeps trailing newline: placeholder sits on its own line
}

namespace {

std::string schema_name(Pass pass) {
    switch (pass) {
        case Pass::Alloc: return "alloc_schema";
        case Pass::Free: return "free_schema";
        case Pass::Init: return "init_schema";
        case Pass::Memsafe: return "memsafe_schema";
        case Pass::Leak: return "leak_schema";
        case Pass::Int: return "int_schema";
        case Pass::Verify: return "verify_schema";
        case Pass::External: return "external_schema";
    }
    throw UnknownPassError("?");
}

std::string pass_title(Pass pass) {
    switch (pass) {
        case Pass::Alloc: return "memory allocation";
        case Pass::Free: return "deallocation (free)";
        case Pass::Init: return "initialization";
        case Pass::Memsafe: return "safety pre-condition contract";
        case Pass::Verify: return "memory-safety verification";
        default: return pass_name(pass);
    }
}

// Flat callee safety-contract list for the memsafe prompt.
std::string render_callee_note(const CalleeContext& ctx) {
    if (ctx.empty()) return "";
    std::string out = "## Callee Safety Contracts\n";
    for (const auto& e : ctx.callees) {
        out += "### " + e.name + (e.is_external ? " (external)" : "") + "\n";
        auto it = e.summaries.find("memsafe");
        if (it == e.summaries.end() || !it->second.contains("contracts") ||
            !it->second["contracts"].is_array() || it->second["contracts"].empty()) {
            out += "(no summary yet)\n";
            continue;
        }
        for (const auto& c : it->second["contracts"]) out += "- " + c.dump() + "\n";
    }
    return chomp(std::move(out));
}

std::string render_own_alloc_free(const OwnContext& own) {
    if (own.alloc.is_null() && own.free_.is_null()) return "";
    std::string out = "## This Function's Allocation and Free Summaries\n";
    if (!own.alloc.is_null()) out += "- alloc: " + own.alloc.dump() + "\n";
    if (!own.free_.is_null()) out += "- free: " + own.free_.dump() + "\n";
    return out;
}

}  // namespace

PromptBundle PromptRenderer::render_summarizer_prompt(Pass pass, const FunctionRecord& fn,
                                                      const CalleeContext& ctx,
                                                      const TypeContext& type_ctx,
                                                      CacheMode cache_mode,
                                                      const OwnContext& own) const {
    if (fn.is_external) throw std::invalid_argument("cannot summarize an external stub");

    std::map<std::string, std::string> vars = {
        {"source", fn.body},
        {"name", fn.name},
        {"signature", fn.signature},
        {"file_path", fn.file_path},
    };
    vars["json_schema"] = chomp(tset_.get(schema_name(pass)));

    PromptBundle bundle;
    switch (pass) {
        case Pass::Alloc:
        case Pass::Free:
        case Pass::Init: {
            std::string prefix = pass_name(pass);
            vars["instructions"] = chomp(tset_.get(prefix + "_instructions"));
            vars["callee_summaries"] = render_callee_section(ctx);
            if (cache_mode == CacheMode::None) {
                bundle.user = render_template(tset_.get(prefix + "_single"), vars);
                bundle.cacheable = PromptBundle::Cacheable::None;
            } else if (cache_mode == CacheMode::Instructions) {
                bundle.system =
                    render_template(tset_.get(prefix + "_system_instructions"), vars);
                bundle.user = render_template(tset_.get(prefix + "_user_instructions"), vars);
                bundle.cacheable = PromptBundle::Cacheable::System;
            } else {
                bundle.system = render_template(tset_.get("source_system"), vars);
                bundle.user = render_template(tset_.get(prefix + "_user_source"), vars);
                bundle.cacheable = PromptBundle::Cacheable::System;
            }
            return bundle;
        }
        case Pass::Memsafe: {
            vars["instructions"] = chomp(tset_.get("memsafe_instructions"));
            vars["callee_note"] = render_callee_note(ctx);
            vars["alias_context"] = "";  // not defined by this pipeline; renders empty
            bundle.user = render_template(tset_.get("memsafe_single"), vars);
            bundle.cacheable = PromptBundle::Cacheable::None;
            return bundle;
        }
        case Pass::Leak: {
            vars["instructions"] = chomp(tset_.get("leak_instructions"));
            vars["matching_rules"] = chomp(tset_.get("leak_matching_rules"));
            vars["alloc_section"] = own.alloc.is_null() ? "(none)" : own.alloc.dump();
            vars["free_section"] = own.free_.is_null() ? "(none)" : own.free_.dump();
            vars["callee_section"] = render_callee_section(ctx);
            vars["entry_note"] = own.is_entry_point ? chomp(tset_.get("leak_entry_note")) : "";
            bundle.system = render_template(tset_.get("leak_system"), vars);
            bundle.user = render_template(tset_.get("leak_user"), vars);
            bundle.cacheable = PromptBundle::Cacheable::System;
            return bundle;
        }
        case Pass::Int: {
            vars["instructions"] = chomp(tset_.get("int_instructions"));
            vars["callee_section"] = render_callee_section(ctx);
            bundle.system = render_template(tset_.get("int_system"), vars);
            bundle.user = render_template(tset_.get("int_user"), vars);
            bundle.cacheable = PromptBundle::Cacheable::System;
            return bundle;
        }
        default:
            throw UnknownPassError(pass_name(pass));
    }
}

PromptBundle PromptRenderer::render_block_prompt(
    Pass pass, const FunctionRecord& fn, const Block& block,
    const std::vector<std::string>& prior_summaries, const json& own_contracts) const {
    std::string tmpl_name;
    switch (pass) {
        case Pass::Alloc: tmpl_name = "alloc_block"; break;
        case Pass::Free: tmpl_name = "free_block"; break;
        case Pass::Init: tmpl_name = "init_block"; break;
        case Pass::Memsafe: tmpl_name = "memsafe_block"; break;
        case Pass::Verify: tmpl_name = "verify_block"; break;
        default: throw UnknownPassError(pass_name(pass));
    }

    // Earlier blocks appear as compact summary comments ahead of this block.
    std::string block_source;
    for (size_t i = 0; i < prior_summaries.size(); ++i)
        block_source += "/* BLOCK " + std::to_string(i) + ": " + prior_summaries[i] + " */\n";
    block_source += block.source;

    std::map<std::string, std::string> vars = {
        {"name", fn.name},
        {"signature", fn.signature},
        {"file_path", fn.file_path},
        {"block_source", block_source},
    };
    if (pass == Pass::Verify)
        vars["own_contracts"] = render_contract_lines(own_contracts);

    PromptBundle bundle;
    bundle.user = render_template(tset_.get(tmpl_name), vars);
    return bundle;
}

PromptBundle PromptRenderer::render_merge_prompt(
    Pass pass, const FunctionRecord& fn,
    const std::vector<std::string>& block_summaries) const {
    std::string lines;
    for (size_t i = 0; i < block_summaries.size(); ++i)
        lines += "- BLOCK " + std::to_string(i) + ": " + block_summaries[i] + "\n";

    std::map<std::string, std::string> vars = {
        {"name", fn.name},
        {"signature", fn.signature},
        {"file_path", fn.file_path},
        {"block_summaries", chomp(std::move(lines))},
        {"pass_title", pass_title(pass)},
        {"json_schema", chomp(tset_.get(schema_name(pass)))},
    };
    PromptBundle bundle;
    bundle.user = render_template(tset_.get("merge"), vars);
    return bundle;
}

PromptBundle PromptRenderer::render_external_prompt(const std::string& name) const {
    if (name.empty())
        throw std::invalid_argument("external prompt requires a function name");
    std::map<std::string, std::string> vars = {
        {"name", name},
        {"json_schema", chomp(tset_.get("external_schema"))},
    };
    PromptBundle bundle;
    bundle.user = render_template(tset_.get("external"), vars);
    return bundle;
}

// ---- callsite annotation -------------------------------------------------------

namespace {

std::string contract_phrase(const json& c, const std::string& size_sub) {
    std::string kind = c.value("contract_kind", "");
    std::string phrase;
    if (kind == "disallow_null") phrase = "must not be NULL";
    else if (kind == "allow_null") phrase = "may be NULL";
    else if (kind == "not_freed") phrase = "must not have been freed";
    else if (kind == "initialized") phrase = "must be initialized";
    else if (kind == "non_negative") phrase = "must be non-negative";
    else if (kind == "buffer_size") {
        std::string rel = c.value("relationship", "byte_count");
        phrase = "must point to at least " + (size_sub.empty() ? "?" : size_sub) + " " +
                 (rel == "element_count" ? "elements" : "bytes");
    } else {
        phrase = kind;
    }
    if (c.contains("condition") && c["condition"].is_string() &&
        !c["condition"].get<std::string>().empty())
        phrase += " when " + c["condition"].get<std::string>();
    return phrase;
}

// Formal parameter names of a callee, positionally aligned with callsite args.
std::vector<std::string> callee_formals(const CallGraph& graph, const std::string& name) {
    std::vector<std::string> out;
    auto it = graph.nodes.find(name);
    if (it == graph.nodes.end()) return out;
    for (const auto& [pname, _] : it->second.params) out.push_back(pname);
    return out;
}

struct CalleeFacts {
    json contracts = json::array();  // preconditions to check before the call
    json alloc;                      // postcondition sources
    json free_;
    json init;
    bool noreturn_attr = false;
};

CalleeFacts gather_callee_facts(const CallGraph& graph, const SummaryStore& store,
                                const std::string& callee) {
    CalleeFacts facts;
    bool external = graph.is_external(callee);
    if (external) {
        auto ext = store.latest("ext::" + callee, Pass::External);
        if (ext) {
            const json& d = ext->data;
            if (d.contains("memsafe") && d["memsafe"].is_object() &&
                d["memsafe"].contains("contracts"))
                facts.contracts = d["memsafe"]["contracts"];
            if (d.contains("allocation") && !d["allocation"].is_null())
                facts.alloc = d["allocation"];
            if (d.contains("free") && !d["free"].is_null()) facts.free_ = d["free"];
            if (d.contains("init") && !d["init"].is_null()) facts.init = d["init"];
        }
        auto node = graph.nodes.find(callee);
        if (node != graph.nodes.end() && node->second.lib_attrs.count("noreturn"))
            facts.noreturn_attr = true;
        return facts;
    }
    // Prefer verify-simplified contracts; fall back to raw memsafe contracts.
    if (auto v = store.latest(callee, Pass::Verify)) {
        if (v->data.contains("simplified_contracts"))
            facts.contracts = v->data["simplified_contracts"];
    } else if (auto m = store.latest(callee, Pass::Memsafe)) {
        if (m->data.contains("contracts")) facts.contracts = m->data["contracts"];
    }
    if (auto a = store.latest(callee, Pass::Alloc)) facts.alloc = a->data;
    if (auto f = store.latest(callee, Pass::Free)) facts.free_ = f->data;
    if (auto i = store.latest(callee, Pass::Init)) facts.init = i->data;
    return facts;
}

// Substitutes formals with actuals across `text`; returns whether anything
// changed.
std::pair<std::string, bool> substitute_formals(
    const std::string& text, const std::vector<std::string>& formals,
    const std::vector<std::string>& actuals) {
    std::string out = text;
    bool changed = false;
    for (size_t i = 0; i < formals.size() && i < actuals.size(); ++i) {
        if (formals[i].empty()) continue;
        std::string next = substitute_token(out, formals[i], actuals[i]);
        if (next != out) changed = true;
        out = std::move(next);
    }
    return {out, changed};
}

}  // namespace

std::string strip_annotations(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        size_t eol = text.find('\n', i);
        size_t line_end = eol == std::string::npos ? text.size() : eol + 1;
        std::string_view line(text.data() + i, line_end - i);
        std::string t = trim(line);
        if (starts_with(t, "/* PRE[") || starts_with(t, "/* POST[")) {
            i = line_end;
            continue;
        }
        out.append(line);
        i = line_end;
    }
    return out;
}

AnnotatedSource PromptRenderer::annotate_callsites(const FunctionRecord& fn,
                                                   const CallGraph& graph,
                                                   const SummaryStore& store) const {
    AnnotatedSource result;
    std::vector<std::string> lines = split_lines(fn.body);
    // pre/post comment lines keyed by 0-based body line index
    std::map<size_t, std::vector<std::string>> pre, post;

    for (const auto& cs : graph.direct_callsites) {
        if (cs.caller != fn.name) continue;
        size_t line_index = 0;
        long rel = cs.line - fn.line_start;
        bool located = false;
        if (rel >= 0 && rel < static_cast<long>(lines.size()) &&
            lines[rel].find(cs.callee_name) != std::string::npos) {
            line_index = static_cast<size_t>(rel);
            located = true;
        } else {
            for (size_t li = 0; li < lines.size(); ++li) {
                if (lines[li].find(cs.callee_name + "(") != std::string::npos) {
                    line_index = li;
                    located = true;
                    break;
                }
            }
        }
        if (!located) continue;

        CalleeFacts facts = gather_callee_facts(graph, store, cs.callee_name);
        std::vector<std::string> formals = callee_formals(graph, cs.callee_name);
        if (formals.empty() && cs.arg_exprs.size() == 1 && facts.contracts.is_array() &&
            !facts.contracts.empty()) {
            // External stubs have no declared formals; a single-argument call
            // still substitutes unambiguously.
            std::set<std::string> targets;
            for (const auto& c : facts.contracts)
                if (c.contains("target") && c["target"].is_string())
                    targets.insert(c["target"].get<std::string>());
            formals.assign(targets.begin(), targets.end());
        }
        std::vector<std::string> actuals = cs.arg_exprs;
        if (formals.size() == 1 && actuals.size() == 1 && formals[0].empty())
            formals.clear();
        while (formals.size() > actuals.size()) formals.pop_back();
        if (formals.size() == 1 && actuals.size() > 1) {
            // single known formal for a stub: map it to the first argument
            actuals.resize(1);
        }

        for (const auto& c : facts.contracts) {
            if (!c.is_object()) continue;
            std::string target = c.value("target", "");
            auto [target_sub, changed] = substitute_formals(target, formals, actuals);
            std::string size_expr = c.value("size_expr", "");
            auto [size_sub, size_changed] = substitute_formals(size_expr, formals, actuals);
            std::string phrase = contract_phrase(c, size_sub);
            std::string line;
            if (changed) {
                line = "/* PRE[" + cs.callee_name + "]: " + target + " -> " + target_sub +
                       " " + phrase + " */";
                result.substitutions.push_back(
                    {static_cast<int>(line_index) + 1, target, target_sub});
            } else {
                line = "/* PRE[" + cs.callee_name + "]: " + target + " " + phrase +
                       " (formal) */";
            }
            pre[line_index].push_back(std::move(line));
        }

        auto post_line = [&](const std::string& text) {
            post[line_index].push_back("/* POST[" + cs.callee_name + "]: " + text + " */");
        };
        if (facts.free_.is_object() && facts.free_.contains("frees"))
            for (const auto& f : facts.free_["frees"]) {
                if (!f.is_object()) continue;
                auto [tgt, _] =
                    substitute_formals(f.value("target", ""), formals, actuals);
                std::string text = "frees " + tgt;
                if (f.value("conditional", false) && f.contains("condition") &&
                    f["condition"].is_string())
                    text += " when " + f["condition"].get<std::string>();
                post_line(text);
            }
        if (facts.alloc.is_object() && facts.alloc.contains("allocations"))
            for (const auto& a : facts.alloc["allocations"]) {
                if (!a.is_object()) continue;
                std::string text = "allocates via " + a.value("source", "?");
                if (a.contains("size_expr") && a["size_expr"].is_string()) {
                    auto [sz, _] = substitute_formals(
                        a["size_expr"].get<std::string>(), formals, actuals);
                    text += " size=" + sz;
                }
                if (a.value("returned", false)) text += ", returned";
                if (a.contains("stored_to") && a["stored_to"].is_string())
                    text += ", stored to " + a["stored_to"].get<std::string>();
                if (a.value("may_be_null", false)) text += ", may be NULL";
                post_line(text);
            }
        if (facts.init.is_object()) {
            if (facts.init.contains("inits"))
                for (const auto& e : facts.init["inits"]) {
                    if (!e.is_object()) continue;
                    auto [tgt, _] =
                        substitute_formals(e.value("target", ""), formals, actuals);
                    post_line("initializes " + tgt);
                }
            if (facts.init.value("noreturn", false)) post_line("does not return");
        } else if (facts.noreturn_attr) {
            post_line("does not return");
        }
    }

    std::string out;
    for (size_t li = 0; li < lines.size(); ++li) {
        std::string indent = lines[li].substr(0, lines[li].find_first_not_of(" \t"));
        if (indent.size() == lines[li].size()) indent.clear();
        if (auto it = pre.find(li); it != pre.end())
            for (const auto& l : it->second) out += indent + l + "\n";
        out += lines[li];
        if (li + 1 < lines.size()) out += "\n";
        if (auto it = post.find(li); it != post.end())
            for (const auto& l : it->second) {
                if (out.empty() || out.back() != '\n') out += "\n";
                out += indent + l + "\n";
            }
    }
    // Keep trailing-newline parity with the original body.
    if (!fn.body.empty() && fn.body.back() == '\n' && (out.empty() || out.back() != '\n'))
        out += "\n";
    result.text = std::move(out);
    return result;
}

PromptBundle PromptRenderer::render_verifier_prompt(const FunctionRecord& fn,
                                                    const json& own_contracts,
                                                    const AnnotatedSource& annotated,
                                                    const CalleeContext& ctx,
                                                    const TypeContext& type_ctx,
                                                    const OwnContext& own) const {
    std::map<std::string, std::string> vars = {
        {"source", annotated.text},
        {"name", fn.name},
        {"signature", fn.signature},
        {"file_path", fn.file_path},
        {"type_defs_section", render_type_defs_section(type_ctx)},
        {"own_contracts", render_contract_lines(own_contracts)},
        {"own_alloc_free_section", render_own_alloc_free(own)},
        {"callee_section", render_callee_section(ctx)},
        {"alias_context", ""},
        {"instructions", chomp(tset_.get("verify_instructions"))},
        {"json_schema", chomp(tset_.get("verify_schema"))},
    };
    PromptBundle bundle;
    bundle.user = render_template(tset_.get("verify_single"), vars);
    return bundle;
}

PromptBundle PromptRenderer::render_baseline_prompt(const Program& program,
                                                    const std::string& property,
                                                    size_t context_budget) const {
    std::string note;
    if (property == "valid-memsafety")
        note = "valid-memsafety: no out-of-bounds access, null-pointer dereference, "
               "use-after-free, double free, or invalid free occurs.";
    else if (property == "valid-memcleanup")
        note = "valid-memcleanup: all allocated memory is deallocated before the "
               "program terminates.";
    else if (property == "no-overflow")
        note = "no-overflow: no signed integer overflow, division by zero, or "
               "undefined shift occurs.";
    else
        note = property;

    std::string sources;
    for (const auto& fn : program.functions) {
        if (fn.is_external) continue;
        sources += "### " + fn.name + " (" + fn.file_path + ":" +
                   std::to_string(fn.line_start) + ")\n```c\n" + fn.body + "\n```\n\n";
    }
    std::string tds = render_type_defs_section(program.types);
    if (!tds.empty()) {
        // drop the heading; the baseline template has its own section header
        size_t nl = tds.find('\n');
        tds = nl == std::string::npos ? "" : tds.substr(nl + 1);
    }
    if (tds.empty()) tds = "(none)\n";

    std::map<std::string, std::string> vars = {
        {"property_note", note},
        {"type_defs_section", chomp(std::move(tds))},
        {"program_source", chomp(trim(sources) + "\n")},
        {"json_schema", chomp(tset_.get("baseline_schema"))},
    };
    PromptBundle bundle;
    bundle.user = render_template(tset_.get("baseline"), vars);
    if (bundle.user.size() > context_budget)
        throw ContextOverflowError("baseline prompt is " +
                                   std::to_string(bundle.user.size()) +
                                   " chars; budget is " + std::to_string(context_budget));
    return bundle;
}

}  // namespace nlverify
