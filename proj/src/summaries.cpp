#include "nlverify/summaries.hpp"

#include <algorithm>
#include <array>
#include <ctime>
#include <fstream>

#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

const char* pass_name(Pass p) {
    switch (p) {
        case Pass::Alloc: return "alloc";
        case Pass::Free: return "free";
        case Pass::Init: return "init";
        case Pass::Memsafe: return "memsafe";
        case Pass::Leak: return "leak";
        case Pass::Int: return "int";
        case Pass::External: return "external";
        case Pass::Verify: return "verify";
    }
    return "?";
}

std::optional<Pass> pass_from_name(const std::string& name) {
    static const std::map<std::string, Pass> m = {
        {"alloc", Pass::Alloc}, {"free", Pass::Free},     {"init", Pass::Init},
        {"memsafe", Pass::Memsafe}, {"leak", Pass::Leak}, {"int", Pass::Int},
        {"external", Pass::External}, {"verify", Pass::Verify}};
    auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

namespace {

json drop_descriptions(const json& v) {
    if (v.is_object()) {
        json out = json::object();
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (it.key() == "description") continue;
            out[it.key()] = drop_descriptions(it.value());
        }
        return out;
    }
    if (v.is_array()) {
        json out = json::array();
        for (const auto& e : v) out.push_back(drop_descriptions(e));
        return out;
    }
    return v;
}

// ---- schema checking -------------------------------------------------------

struct Checker {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    void err(const std::string& path, const std::string& msg) {
        errors.push_back(path + ": " + msg);
    }
    void warn(const std::string& path, const std::string& msg) {
        warnings.push_back(path + ": " + msg);
    }

    bool require_string(const json& obj, const std::string& path, const char* field) {
        if (!obj.contains(field)) {
            err(path + "." + field, "missing required field");
            return false;
        }
        if (!obj[field].is_string()) {
            err(path + "." + field, "expected string");
            return false;
        }
        return true;
    }
    bool require_bool(const json& obj, const std::string& path, const char* field) {
        if (!obj.contains(field)) {
            err(path + "." + field, "missing required field");
            return false;
        }
        if (!obj[field].is_boolean()) {
            err(path + "." + field, "expected boolean");
            return false;
        }
        return true;
    }
    // Optional string that may also be null.
    void optional_string(const json& obj, const std::string& path, const char* field) {
        if (obj.contains(field) && !obj[field].is_string() && !obj[field].is_null())
            err(path + "." + field, "expected string or null");
    }
    bool require_enum(const json& obj, const std::string& path, const char* field,
                      const std::vector<std::string_view>& allowed) {
        if (!require_string(obj, path, field)) return false;
        std::string v = obj[field].get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string opts;
            for (auto a : allowed) {
                if (!opts.empty()) opts += "|";
                opts += a;
            }
            err(path + "." + field, "'" + v + "' not one of " + opts);
            return false;
        }
        return true;
    }
    const json* require_array(const json& obj, const std::string& path,
                              const char* field, bool required) {
        if (!obj.contains(field)) {
            if (required) err(path + "." + field, "missing required field");
            return nullptr;
        }
        if (!obj[field].is_array()) {
            err(path + "." + field, "expected array");
            return nullptr;
        }
        return &obj[field];
    }
};

const std::vector<std::string_view> kSeverities = {"high", "medium", "low"};
const std::vector<std::string_view> kContractKinds = {
    "disallow_null", "allow_null", "not_freed", "initialized", "buffer_size",
    "non_negative"};
const std::vector<std::string_view> kMemsafetyIssueKinds = {
    "null_deref", "buffer_overflow", "use_after_free", "double_free",
    "uninitialized_use", "invalid_free"};
const std::vector<std::string_view> kIntIssueKinds = {
    "integer_overflow", "division_by_zero", "shift_ub"};
const std::vector<std::string_view> kWholeProgramIssueKinds = {
    "null_deref", "buffer_overflow", "use_after_free", "double_free",
    "uninitialized_use", "invalid_free", "integer_overflow", "division_by_zero",
    "shift_ub", "memory_leak"};

void check_header(Checker& ck, const json& v, const std::string& path) {
    if (!v.is_object()) {
        ck.err(path, "expected object");
        return;
    }
    ck.require_string(v, path, "function");
    ck.require_string(v, path, "description");
}

void check_contract(Checker& ck, const json& c, const std::string& path) {
    if (!c.is_object()) {
        ck.err(path, "expected object");
        return;
    }
    ck.require_string(c, path, "target");
    ck.require_enum(c, path, "contract_kind", kContractKinds);
    ck.optional_string(c, path, "description");
    ck.optional_string(c, path, "size_expr");
    ck.optional_string(c, path, "condition");
    if (c.contains("relationship") && c["relationship"].is_string()) {
        std::string r = c["relationship"].get<std::string>();
        if (r != "byte_count" && r != "element_count")
            ck.warn(path + ".relationship", "unexpected value '" + r + "'");
    }
    if (c.contains("contract_kind") && c["contract_kind"].is_string()) {
        bool is_buf = c["contract_kind"] == "buffer_size";
        bool has_size = c.contains("size_expr") && !c["size_expr"].is_null();
        if (is_buf && !has_size)
            ck.warn(path, "buffer_size contract without size_expr");
        if (!is_buf && has_size)
            ck.warn(path, "size_expr present on a non-buffer_size contract");
    }
}

void check_alloc(Checker& ck, const json& v, const FunctionRecord* fn) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (v.contains("parameters") && !v["parameters"].is_object())
        ck.err("$.parameters", "expected object");
    if (const json* allocs = ck.require_array(v, "$", "allocations", true)) {
        int i = 0;
        for (const auto& a : *allocs) {
            std::string p = "$.allocations[" + std::to_string(i++) + "]";
            if (!a.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_enum(a, p, "type",
                            {"heap", "static", "parameter_derived", "escaped_stack"});
            ck.require_string(a, p, "source");
            ck.require_bool(a, p, "returned");
            ck.require_bool(a, p, "may_be_null");
            ck.optional_string(a, p, "size_expr");
            ck.optional_string(a, p, "stored_to");
            if (a.contains("size_params")) {
                if (!a["size_params"].is_array()) {
                    ck.err(p + ".size_params", "expected array");
                } else if (fn) {
                    for (const auto& sp : a["size_params"]) {
                        if (sp.is_string() && !fn->has_param(sp.get<std::string>()))
                            ck.warn(p + ".size_params",
                                    "'" + sp.get<std::string>() +
                                        "' is not a declared parameter");
                    }
                }
            }
        }
    }
    if (const json* pairs = ck.require_array(v, "$", "buffer_size_pairs", false)) {
        int i = 0;
        for (const auto& b : *pairs) {
            std::string p = "$.buffer_size_pairs[" + std::to_string(i++) + "]";
            if (!b.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(b, p, "buffer");
            ck.require_string(b, p, "size");
            ck.require_enum(b, p, "kind", {"param_pair", "struct_field", "flexible_array"});
        }
    }
}

void check_free_entry(Checker& ck, const json& f, const std::string& p,
                      bool allow_all_target_kinds) {
    if (!f.is_object()) {
        ck.err(p, "expected object");
        return;
    }
    ck.require_string(f, p, "target");
    if (allow_all_target_kinds)
        ck.require_enum(f, p, "target_kind", {"parameter", "field", "local", "return_value"});
    else
        ck.require_enum(f, p, "target_kind", {"parameter", "field"});
    ck.require_string(f, p, "deallocator");
    ck.require_bool(f, p, "conditional");
    ck.optional_string(f, p, "condition");
    if (f.contains("condition") && !f["condition"].is_null() &&
        f.contains("conditional") && f["conditional"].is_boolean() &&
        !f["conditional"].get<bool>())
        ck.err(p, "condition present but conditional is false");
}

void check_free(Checker& ck, const json& v) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (const json* frees = ck.require_array(v, "$", "frees", true)) {
        int i = 0;
        for (const auto& f : *frees) {
            std::string p = "$.frees[" + std::to_string(i++) + "]";
            check_free_entry(ck, f, p, true);
            if (f.is_object() && !f.contains("nulled_after"))
                ck.warn(p + ".nulled_after", "missing; assuming false");
        }
    }
    if (const json* rel = ck.require_array(v, "$", "resource_releases", false)) {
        int i = 0;
        for (const auto& f : *rel)
            check_free_entry(ck, f, "$.resource_releases[" + std::to_string(i++) + "]",
                             true);
    }
}

void check_init(Checker& ck, const json& v) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (const json* inits = ck.require_array(v, "$", "inits", true)) {
        int i = 0;
        for (const auto& e : *inits) {
            std::string p = "$.inits[" + std::to_string(i++) + "]";
            if (!e.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(e, p, "target");
            ck.require_enum(e, p, "target_kind", {"parameter", "field", "return_value"});
            ck.require_string(e, p, "initializer");
            ck.optional_string(e, p, "byte_count");
            ck.optional_string(e, p, "condition");
        }
    }
    if (const json* ranges = ck.require_array(v, "$", "output_ranges", false)) {
        int i = 0;
        for (const auto& r : *ranges) {
            std::string p = "$.output_ranges[" + std::to_string(i++) + "]";
            if (!r.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(r, p, "target");
            ck.require_string(r, p, "range");
        }
    }
    if (!v.contains("noreturn"))
        ck.err("$.noreturn", "missing required field");
    else if (!v["noreturn"].is_boolean())
        ck.err("$.noreturn", "expected boolean");
    if (v.contains("noreturn_condition") && !v["noreturn_condition"].is_null()) {
        if (!v["noreturn_condition"].is_string())
            ck.err("$.noreturn_condition", "expected string");
        else if (v.contains("noreturn") && v["noreturn"].is_boolean() &&
                 !v["noreturn"].get<bool>())
            ck.warn("$.noreturn_condition", "present although noreturn is false");
    }
}

void check_memsafe(Checker& ck, const json& v, const FunctionRecord* fn) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (const json* contracts = ck.require_array(v, "$", "contracts", true)) {
        int i = 0;
        for (const auto& c : *contracts) {
            std::string p = "$.contracts[" + std::to_string(i++) + "]";
            check_contract(ck, c, p);
            if (fn && c.is_object() && c.contains("target") && c["target"].is_string()) {
                std::string t = c["target"].get<std::string>();
                bool mentions_param = false;
                for (const auto& [pn, _] : fn->params)
                    if (!pn.empty() && contains_token(t, pn)) mentions_param = true;
                if (!mentions_param && !fn->params.empty())
                    ck.warn(p + ".target",
                            "'" + t + "' does not reference a parameter");
            }
        }
    }
}

void check_leak(Checker& ck, const json& v) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (const json* leaks = ck.require_array(v, "$", "leaks", true)) {
        int i = 0;
        for (const auto& l : *leaks) {
            std::string p = "$.leaks[" + std::to_string(i++) + "]";
            if (!l.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(l, p, "allocation");
            ck.require_string(l, p, "reason");
            ck.require_enum(l, p, "severity", kSeverities);
            ck.optional_string(l, p, "stored_to");
        }
    }
    if (const json* sa = ck.require_array(v, "$", "simplified_allocations", false)) {
        int i = 0;
        for (const auto& a : *sa) {
            std::string p = "$.simplified_allocations[" + std::to_string(i++) + "]";
            if (!a.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(a, p, "source");
            ck.require_bool(a, p, "returned");
            ck.require_bool(a, p, "may_be_null");
            ck.optional_string(a, p, "size_expr");
            ck.optional_string(a, p, "stored_to");
        }
    }
    if (const json* sf = ck.require_array(v, "$", "simplified_frees", false)) {
        int i = 0;
        for (const auto& f : *sf)
            check_free_entry(ck, f, "$.simplified_frees[" + std::to_string(i++) + "]",
                             false);
    }
}

void check_range_list(Checker& ck, const json& v, const char* field, bool required) {
    if (const json* arr = ck.require_array(v, "$", field, required)) {
        int i = 0;
        for (const auto& r : *arr) {
            std::string p = "$." + std::string(field) + "[" + std::to_string(i++) + "]";
            if (!r.is_object()) {
                ck.err(p, "expected object");
                continue;
            }
            ck.require_string(r, p, "target");
            ck.require_string(r, p, "range");
        }
    }
}

void check_issue(Checker& ck, const json& is, const std::string& p,
                 const std::vector<std::string_view>& kinds) {
    if (!is.is_object()) {
        ck.err(p, "expected object");
        return;
    }
    ck.require_string(is, p, "location");
    ck.require_enum(is, p, "issue_kind", kinds);
    ck.require_string(is, p, "description");
    ck.require_enum(is, p, "severity", kSeverities);
    ck.optional_string(is, p, "callee");
    if (is.contains("callee") && !is["callee"].is_null() &&
        (!is.contains("contract_kind") || is["contract_kind"].is_null()))
        ck.warn(p, "callee present without contract_kind");
}

void check_int(Checker& ck, const json& v) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    check_range_list(ck, v, "constraints", true);
    check_range_list(ck, v, "output_ranges", false);
    if (const json* issues = ck.require_array(v, "$", "issues", true)) {
        int i = 0;
        for (const auto& is : *issues)
            check_issue(ck, is, "$.issues[" + std::to_string(i++) + "]", kIntIssueKinds);
    }
}

void check_verify(Checker& ck, const json& v, IssueKindSet kindset) {
    check_header(ck, v, "$");
    if (!v.is_object()) return;
    if (const json* sc = ck.require_array(v, "$", "simplified_contracts", true)) {
        int i = 0;
        for (const auto& c : *sc)
            check_contract(ck, c, "$.simplified_contracts[" + std::to_string(i++) + "]");
    }
    const auto& kinds = kindset == IssueKindSet::Memsafety ? kMemsafetyIssueKinds
                                                           : kWholeProgramIssueKinds;
    if (const json* issues = ck.require_array(v, "$", "issues", true)) {
        int i = 0;
        for (const auto& is : *issues)
            check_issue(ck, is, "$.issues[" + std::to_string(i++) + "]", kinds);
    }
}

// External summaries nest per-pass records; contracts outside the known kinds
// are dropped with a warning rather than rejected.
json check_external(Checker& ck, const json& v, const FunctionRecord* fn) {
    if (!v.is_object()) {
        ck.err("$", "expected object");
        return v;
    }
    json cleaned = v;
    for (const char* part : {"allocation", "free", "init", "memsafe"}) {
        if (!v.contains(part) || v[part].is_null()) continue;
        const json& sub = v[part];
        Checker sub_ck;
        if (std::string(part) == "allocation") check_alloc(sub_ck, sub, fn);
        else if (std::string(part) == "free") check_free(sub_ck, sub);
        else if (std::string(part) == "init") check_init(sub_ck, sub);
        else {
            // memsafe: filter unknown contract kinds instead of failing
            check_header(sub_ck, sub, "$");
            if (sub.is_object() && sub.contains("contracts") && sub["contracts"].is_array()) {
                json kept = json::array();
                int i = 0;
                for (const auto& c : sub["contracts"]) {
                    std::string p = "$.memsafe.contracts[" + std::to_string(i++) + "]";
                    if (c.is_object() && c.contains("contract_kind") &&
                        c["contract_kind"].is_string() &&
                        std::find(kContractKinds.begin(), kContractKinds.end(),
                                  c["contract_kind"].get<std::string>()) ==
                            kContractKinds.end()) {
                        ck.warn(p, "dropping contract with unknown kind '" +
                                       c["contract_kind"].get<std::string>() + "'");
                        continue;
                    }
                    Checker cck;
                    check_contract(cck, c, p);
                    for (auto& e : cck.errors) ck.errors.push_back(e);
                    kept.push_back(c);
                }
                cleaned[part]["contracts"] = kept;
            }
        }
        for (auto& e : sub_ck.errors) ck.errors.push_back("$." + std::string(part) + e.substr(1));
        for (auto& w : sub_ck.warnings) ck.warnings.push_back("$." + std::string(part) + w.substr(1));
    }
    return cleaned;
}

}  // namespace

bool equal_ignoring_descriptions(const SummaryRecord& a, const SummaryRecord& b) {
    return a.pass == b.pass && drop_descriptions(a.data) == drop_descriptions(b.data);
}

SummaryRecord validate(Pass pass, const json& raw, const FunctionRecord* fn,
                       IssueKindSet kinds) {
    if (raw.dump().size() > kSummarySizeCap)
        throw SchemaError({"$: serialized summary exceeds 64 KiB"});

    Checker ck;
    json data = raw;
    switch (pass) {
        case Pass::Alloc: check_alloc(ck, raw, fn); break;
        case Pass::Free: check_free(ck, raw); break;
        case Pass::Init: check_init(ck, raw); break;
        case Pass::Memsafe: check_memsafe(ck, raw, fn); break;
        case Pass::Leak: check_leak(ck, raw); break;
        case Pass::Int: check_int(ck, raw); break;
        case Pass::Verify: check_verify(ck, raw, kinds); break;
        case Pass::External: data = check_external(ck, raw, fn); break;
    }
    for (const auto& w : ck.warnings)
        log_warn(std::string(pass_name(pass)) + " summary: " + w);
    if (!ck.errors.empty()) throw SchemaError(ck.errors);
    return SummaryRecord{pass, data};
}

// ---- store ------------------------------------------------------------------

SummaryStore::SummaryStore(const std::string& path) { open(path); }

void SummaryStore::open(const std::string& path) {
    std::lock_guard lock(mutex_);
    path_ = path;
    by_key_.clear();
    latest_.clear();
    load();
}

void SummaryStore::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh store
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception&) {
            log_warn(path_ + ":" + std::to_string(lineno) + ": skipping corrupt line");
            continue;
        }
        if (!entry.contains("key") || !entry.contains("record")) continue;
        const json& k = entry["key"];
        SummaryKey key{k.value("function", ""), k.value("pass", ""),
                       k.value("input_hash", "")};
        by_key_[key] = entry["record"];
        latest_[{key.function, key.pass}] = entry["record"];
    }
}

std::optional<SummaryRecord> SummaryStore::upsert(const SummaryKey& key,
                                                  const SummaryRecord& rec) {
    std::lock_guard lock(mutex_);
    if (path_.empty()) throw StoreIOError("store not opened");

    std::optional<SummaryRecord> previous;
    auto it = by_key_.find(key);
    auto pass = pass_from_name(key.pass);
    if (it != by_key_.end())
        previous = SummaryRecord{pass.value_or(rec.pass), it->second};

    json entry = {{"key",
                   {{"function", key.function},
                    {"pass", key.pass},
                    {"input_hash", key.input_hash}}},
                  {"record", rec.data},
                  {"ts", static_cast<long>(std::time(nullptr))}};
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw StoreIOError("cannot append to " + path_);
    out << entry.dump() << "\n";
    out.flush();
    if (!out) throw StoreIOError("write failed for " + path_);

    by_key_[key] = rec.data;
    latest_[{key.function, key.pass}] = rec.data;
    return previous;
}

std::optional<SummaryRecord> SummaryStore::lookup(const SummaryKey& key) const {
    std::lock_guard lock(mutex_);
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    auto pass = pass_from_name(key.pass);
    return SummaryRecord{pass.value_or(Pass::Alloc), it->second};
}

std::optional<SummaryRecord> SummaryStore::latest(const std::string& function,
                                                  Pass pass) const {
    std::lock_guard lock(mutex_);
    auto it = latest_.find({function, pass_name(pass)});
    if (it == latest_.end()) return std::nullopt;
    return SummaryRecord{pass, it->second};
}

std::vector<std::string> SummaryStore::functions_with(Pass pass) const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, _] : latest_)
        if (k.second == pass_name(pass)) out.push_back(k.first);
    return out;
}

// ---- callee context ----------------------------------------------------------

namespace {

// Which stored passes each pass consumes from callees.
std::vector<Pass> consumed_passes(Pass pass) {
    switch (pass) {
        case Pass::Alloc: return {Pass::Alloc};
        case Pass::Free: return {Pass::Free};
        case Pass::Init: return {Pass::Init};
        case Pass::Memsafe: return {Pass::Memsafe};
        case Pass::Leak: return {Pass::Alloc, Pass::Free, Pass::Leak};
        case Pass::Int: return {Pass::Int};
        case Pass::Verify:
            return {Pass::Verify, Pass::Memsafe, Pass::Alloc, Pass::Free,
                    Pass::Init,   Pass::Leak,    Pass::Int};
        case Pass::External: return {};
    }
    return {};
}

const char* external_part_for(Pass pass) {
    switch (pass) {
        case Pass::Alloc: return "allocation";
        case Pass::Free: return "free";
        case Pass::Init: return "init";
        case Pass::Memsafe: return "memsafe";
        default: return nullptr;
    }
}

}  // namespace

std::string CalleeContext::canonical() const {
    json j = json::array();
    for (const auto& e : callees) {
        json sub = {{"name", e.name}, {"external", e.is_external}};
        json sums = json::object();
        for (const auto& [p, v] : e.summaries) sums[p] = v;
        sub["summaries"] = sums;
        json attrs = json::array();
        for (const auto& a : e.lib_attrs) attrs.push_back(a);
        sub["lib_attrs"] = attrs;
        j.push_back(sub);
    }
    return j.dump();
}

CalleeContext callee_context(const SummaryStore& store, const FunctionRecord& fn,
                             const CallGraph& graph, Pass pass) {
    CalleeContext ctx;
    std::set<std::string> seen;
    for (const auto& callee : graph.callees_of(fn.name)) {
        if (!seen.insert(callee).second) continue;
        CalleeContext::Entry entry;
        entry.name = callee;
        entry.is_external = graph.is_external(callee);
        if (auto it = graph.nodes.find(callee); it != graph.nodes.end())
            entry.lib_attrs = it->second.lib_attrs;

        if (entry.is_external) {
            auto ext = store.latest("ext::" + callee, Pass::External);
            for (Pass consumed : consumed_passes(pass)) {
                if (const char* part = external_part_for(consumed)) {
                    if (ext && ext->data.contains(part) && !ext->data[part].is_null())
                        entry.summaries[pass_name(consumed)] = ext->data[part];
                }
            }
            if (ext && entry.summaries.empty() && pass == Pass::Verify) {
                // verify consumes the memsafe part as simplified contracts
                if (ext->data.contains("memsafe") && !ext->data["memsafe"].is_null())
                    entry.summaries["memsafe"] = ext->data["memsafe"];
            }
        } else {
            for (Pass consumed : consumed_passes(pass)) {
                auto rec = store.latest(callee, consumed);
                if (rec) entry.summaries[pass_name(consumed)] = rec->data;
            }
        }
        ctx.callees.push_back(std::move(entry));
    }
    std::sort(ctx.callees.begin(), ctx.callees.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    return ctx;
}

std::string input_hash(const FunctionRecord& fn, Pass pass,
                       const std::string& template_version, const CalleeContext& ctx) {
    std::string material;
    material.reserve(fn.body.size() + 128);
    material += fn.body;
    material += '\0';
    material += pass_name(pass);
    material += '\0';
    material += template_version;
    material += '\0';
    material += ctx.canonical();
    return fnv1a64_hex(material);
}

}  // namespace nlverify
