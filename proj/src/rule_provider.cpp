// Deterministic rule-based provider. Lexically scans the source embedded in a
// rendered prompt and answers with schema-conformant JSON. The rules are
// deliberately shallow: they give the pipeline a reproducible offline oracle
// for propagation and schema flow, not a real analysis.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "clex.hpp"
#include "nlverify/extract.hpp"
#include "nlverify/llm.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

using clex::Token;
using Kind = clex::Token::Kind;
using nlohmann::json;

namespace {

bool is_punct(const Token& t, std::string_view p) {
    return t.kind == Kind::Punct && t.text == p;
}

std::string section_after(const std::string& text, const std::string& header) {
    size_t pos = text.find(header);
    if (pos == std::string::npos) return "";
    pos += header.size();
    size_t end = text.find("\n## ", pos);
    if (end == std::string::npos) end = text.size();
    return text.substr(pos, end - pos);
}

std::string line_value(const std::string& text, const std::string& prefix) {
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        if (starts_with(line, prefix))
            return trim(line.substr(prefix.size()));
        pos = eol + 1;
    }
    return "";
}

std::string fenced_c_block(const std::string& text) {
    size_t open = text.find("```c\n");
    if (open == std::string::npos) return "";
    size_t body = open + 5;
    size_t close = text.find("\n```", body);
    if (close == std::string::npos) return "";
    return text.substr(body, close - body);
}

struct SourceFacts {
    struct Alloc {
        std::string source;      // malloc/calloc/...
        std::string size_expr;
        std::vector<std::string> size_params;
        std::string stored_to;   // identifier or empty
        bool returned = false;
        size_t pos = 0;
    };
    struct FreeCall {
        std::string target;
        size_t pos = 0;
    };
    std::vector<Alloc> allocs;
    std::vector<FreeCall> frees;
    std::set<std::string> dereferenced;          // identifiers behind *x / x-> / x[
    std::map<std::string, size_t> first_deref_after;  // ident -> earliest deref pos
    bool has_return = false;
    bool calls_noreturn = false;
    std::vector<json> int_issues;
    std::vector<json> int_constraints;
};

const std::set<std::string>& allocator_names() {
    static const std::set<std::string> names = {"malloc", "calloc", "realloc",
                                                "strdup", "strndup", "aligned_alloc"};
    return names;
}

// Token scan of a C source chunk; params drive which facts become contracts.
SourceFacts scan_source(const std::string& source,
                        const std::vector<std::string>& params) {
    SourceFacts facts;
    clex::LexResult lexed = clex::lex(source, "<prompt>", false);
    const auto& toks = lexed.tokens;
    std::set<std::string> param_set(params.begin(), params.end());

    auto slice_text = [&](size_t b, size_t e) {
        if (b >= e) return std::string();
        return trim(source.substr(toks[b].begin, toks[e - 1].end - toks[b].begin));
    };

    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind != Kind::Ident) continue;

        if (t.text == "return") facts.has_return = true;
        if ((t.text == "exit" || t.text == "abort") && i + 1 < toks.size() &&
            is_punct(toks[i + 1], "("))
            facts.calls_noreturn = true;

        // allocation calls
        if (allocator_names().count(std::string(t.text)) && i + 1 < toks.size() &&
            is_punct(toks[i + 1], "(")) {
            size_t rp = clex::match_forward(toks, i + 1);
            if (rp == clex::npos) continue;
            SourceFacts::Alloc a;
            a.source = std::string(t.text);
            a.size_expr = slice_text(i + 2, rp);
            a.pos = t.begin;
            for (size_t k = i + 2; k < rp; ++k)
                if (toks[k].kind == Kind::Ident && param_set.count(std::string(toks[k].text)))
                    a.size_params.push_back(std::string(toks[k].text));
            std::sort(a.size_params.begin(), a.size_params.end());
            a.size_params.erase(std::unique(a.size_params.begin(), a.size_params.end()),
                                a.size_params.end());
            // `x = malloc(...)` or `return malloc(...)`
            if (i >= 2 && is_punct(toks[i - 1], "=") && toks[i - 2].kind == Kind::Ident)
                a.stored_to = std::string(toks[i - 2].text);
            if (i >= 1 && toks[i - 1].kind == Kind::Ident && toks[i - 1].text == "return")
                a.returned = true;
            // `return p;` later also counts as returning the stored pointer
            facts.allocs.push_back(std::move(a));
            continue;
        }

        if (t.text == "free" && i + 1 < toks.size() && is_punct(toks[i + 1], "(")) {
            size_t rp = clex::match_forward(toks, i + 1);
            if (rp == clex::npos) continue;
            facts.frees.push_back({slice_text(i + 2, rp), t.begin});
            continue;
        }

        // dereferences: *x (unary), x->, x[
        if (i + 1 < toks.size()) {
            if (is_punct(toks[i + 1], "->") || is_punct(toks[i + 1], "[")) {
                facts.dereferenced.insert(std::string(t.text));
                auto [it, fresh] =
                    facts.first_deref_after.emplace(std::string(t.text), t.begin);
                if (!fresh) it->second = std::min(it->second, t.begin);
            }
        }
        if (i >= 1 && is_punct(toks[i - 1], "*")) {
            bool unary = i < 2 || (toks[i - 2].kind == Kind::Punct &&
                                   toks[i - 2].text != ")" && toks[i - 2].text != "]");
            if (i >= 2 && toks[i - 2].kind == Kind::Ident &&
                clex::is_keyword(toks[i - 2].text))
                unary = false;  // declaration like `char *p`
            if (unary) {
                facts.dereferenced.insert(std::string(t.text));
                auto [it, fresh] =
                    facts.first_deref_after.emplace(std::string(t.text), t.begin);
                if (!fresh) it->second = std::min(it->second, t.begin);
            }
        }

        // mark `return p;` for stored allocations
        if (t.text == "return" && i + 1 < toks.size() && toks[i + 1].kind == Kind::Ident) {
            std::string name(toks[i + 1].text);
            for (auto& a : facts.allocs)
                if (a.stored_to == name) a.returned = true;
        }
    }

    // integer-UB patterns: literal zero divisor, oversized literal shifts,
    // parameter divisors become constraints
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
        if (is_punct(toks[i], "/") || is_punct(toks[i], "%")) {
            const Token& d = toks[i + 1];
            if (d.kind == Kind::Number && trim(std::string(d.text)) == "0") {
                facts.int_issues.push_back({{"location", std::string(toks[i].text) + " at line " +
                                                              std::to_string(d.line)},
                                            {"issue_kind", "division_by_zero"},
                                            {"description", "divisor is the constant 0"},
                                            {"severity", "high"}});
            } else if (d.kind == Kind::Ident && param_set.count(std::string(d.text))) {
                facts.int_constraints.push_back(
                    {{"target", std::string(d.text)},
                     {"range", "!= 0"},
                     {"description", "used as a divisor"}});
            }
        }
        if (is_punct(toks[i], "<<") && toks[i + 1].kind == Kind::Number) {
            long amount = 0;
            try {
                amount = std::stol(std::string(toks[i + 1].text));
            } catch (...) {
                continue;
            }
            if (amount >= 32)
                facts.int_issues.push_back(
                    {{"location", "shift at line " + std::to_string(toks[i].line)},
                     {"issue_kind", "shift_ub"},
                     {"description", "shift count " + std::to_string(amount) +
                                         " reaches the bit width of int"},
                     {"severity", "high"}});
        }
    }
    return facts;
}

bool caller_visible_store(const std::string& stored_to,
                          const std::set<std::string>& param_set) {
    if (stored_to.empty()) return false;
    if (param_set.count(stored_to)) return true;
    return stored_to.find("->") != std::string::npos ||
           stored_to.find('.') != std::string::npos ||
           stored_to.find('*') != std::string::npos;
}

json alloc_entry(const SourceFacts::Alloc& a) {
    json e = {{"type", "heap"},
              {"source", a.source},
              {"size_expr", a.size_expr.empty() ? json() : json(a.size_expr)},
              {"size_params", a.size_params},
              {"returned", a.returned},
              {"stored_to", a.stored_to.empty() ? json() : json(a.stored_to)},
              {"may_be_null", true}};
    return e;
}

json make_alloc_summary(const std::string& fn_name, const SourceFacts& facts,
                        const std::vector<std::string>& params) {
    json parameters = json::object();
    for (const auto& p : params) {
        bool used = false;
        for (const auto& a : facts.allocs)
            for (const auto& sp : a.size_params)
                if (sp == p) used = true;
        parameters[p] = {{"role", used ? "allocation size input" : "input"},
                         {"used_in_allocation", used}};
    }
    json allocations = json::array();
    for (const auto& a : facts.allocs) allocations.push_back(alloc_entry(a));
    return {{"function", fn_name},
            {"description", allocations.empty()
                                ? "Does not allocate caller-visible memory."
                                : "Allocates heap memory."},
            {"parameters", parameters},
            {"allocations", allocations},
            {"buffer_size_pairs", json::array()}};
}

json make_free_summary(const std::string& fn_name, const SourceFacts& facts,
                       const std::set<std::string>& param_set,
                       const std::string& source) {
    json frees = json::array();
    for (const auto& f : facts.frees) {
        std::string kind = "local";
        if (param_set.count(f.target)) kind = "parameter";
        else if (f.target.find("->") != std::string::npos ||
                 f.target.find('.') != std::string::npos)
            kind = "field";
        bool nulled = false;
        size_t assign = source.find(f.target + " = NULL", f.pos);
        if (assign == std::string::npos) assign = source.find(f.target + " = 0", f.pos);
        nulled = assign != std::string::npos;
        frees.push_back({{"target", f.target},
                         {"target_kind", kind},
                         {"deallocator", "free"},
                         {"conditional", false},
                         {"nulled_after", nulled}});
    }
    return {{"function", fn_name},
            {"description",
             frees.empty() ? "Does not free memory." : "Frees heap memory."},
            {"frees", frees},
            {"resource_releases", json::array()}};
}

json make_init_summary(const std::string& fn_name, const SourceFacts& facts,
                       const std::vector<std::string>& params,
                       const std::string& source) {
    json inits = json::array();
    for (const auto& p : params) {
        if (p.empty()) continue;
        if (source.find("*" + p + " = ") != std::string::npos)
            inits.push_back({{"target", "*" + p},
                             {"target_kind", "parameter"},
                             {"initializer", "assignment"},
                             {"conditional", false}});
    }
    bool noreturn = facts.calls_noreturn && !facts.has_return;
    return {{"function", fn_name},
            {"description", inits.empty() ? "No guaranteed caller-visible initialization."
                                          : "Initializes output parameters."},
            {"inits", inits},
            {"output_ranges", json::array()},
            {"noreturn", noreturn}};
}

json make_memsafe_summary(const std::string& fn_name, const SourceFacts& facts,
                          const std::vector<std::string>& params) {
    std::set<std::string> param_set(params.begin(), params.end());
    json contracts = json::array();
    for (const auto& p : params) {
        if (p.empty()) continue;
        if (facts.dereferenced.count(p))
            contracts.push_back({{"target", p},
                                 {"contract_kind", "disallow_null"},
                                 {"description", p + " must not be NULL"}});
    }
    for (const auto& f : facts.frees) {
        if (param_set.count(f.target))
            contracts.push_back(
                {{"target", f.target},
                 {"contract_kind", "not_freed"},
                 {"description", f.target + " must not have been previously freed"}});
    }
    return {{"function", fn_name},
            {"description", contracts.empty() ? "No preconditions required."
                                              : "Pointer parameters carry preconditions."},
            {"contracts", contracts}};
}

json make_int_summary(const std::string& fn_name, const SourceFacts& facts) {
    return {{"function", fn_name},
            {"description", facts.int_issues.empty() ? "No integer UB found."
                                                     : "Integer UB detected."},
            {"constraints", facts.int_constraints},
            {"output_ranges", json::array()},
            {"issues", facts.int_issues}};
}

// ---- leak pass -------------------------------------------------------------

json parse_section_json(const std::string& text) {
    size_t brace = text.find('{');
    if (brace == std::string::npos) return json();
    auto parsed = json::parse(text.substr(brace), nullptr, false);
    if (parsed.is_discarded()) return json();
    return parsed;
}

// Callees whose free summary releases a parameter, per the callee
// post-conditions section.
std::set<std::string> param_freeing_callees(const std::string& callee_section) {
    std::set<std::string> out;
    std::string current;
    for (const auto& line : split_lines(callee_section)) {
        if (starts_with(line, "### ")) {
            current = trim(line.substr(4));
            size_t sp = current.find(' ');
            if (sp != std::string::npos) current = current.substr(0, sp);
            continue;
        }
        if (starts_with(line, "- free: ") && !current.empty()) {
            auto rec = json::parse(line.substr(8), nullptr, false);
            if (rec.is_discarded() || !rec.contains("frees")) continue;
            for (const auto& f : rec["frees"])
                if (f.value("target_kind", "") == "parameter") out.insert(current);
        }
    }
    return out;
}

json make_leak_summary(const std::string& fn_name, const std::string& user_prompt,
                       const std::vector<std::string>& params) {
    std::string source = fenced_c_block(user_prompt);
    const bool is_entry =
        user_prompt.find("Note: this function is the program entry point") !=
        std::string::npos;
    json own_alloc =
        parse_section_json(section_after(user_prompt, "## This Function's Allocation Summary"));
    json own_free =
        parse_section_json(section_after(user_prompt, "## This Function's Free Summary"));
    std::set<std::string> freeing_callees =
        param_freeing_callees(section_after(user_prompt, "## Callee Post-conditions"));
    std::set<std::string> param_set(params.begin(), params.end());

    // free events per identifier: own frees plus calls into callees that free
    // their parameter
    std::set<std::string> freed;
    if (own_free.is_object() && own_free.contains("frees"))
        for (const auto& f : own_free["frees"]) freed.insert(f.value("target", ""));
    for (const auto& callee : freeing_callees) {
        size_t pos = 0;
        while ((pos = source.find(callee + "(", pos)) != std::string::npos) {
            size_t close = source.find(')', pos);
            if (close == std::string::npos) break;
            std::string arg =
                trim(source.substr(pos + callee.size() + 1, close - pos - callee.size() - 1));
            size_t comma = arg.find(',');
            if (comma != std::string::npos) arg = trim(arg.substr(0, comma));
            if (!arg.empty()) freed.insert(arg);
            pos = close;
        }
    }

    json leaks = json::array();
    json simplified_allocs = json::array();
    if (own_alloc.is_object() && own_alloc.contains("allocations")) {
        for (const auto& a : own_alloc["allocations"]) {
            std::string stored = a.contains("stored_to") && a["stored_to"].is_string()
                                     ? a["stored_to"].get<std::string>()
                                     : "";
            bool returned = a.value("returned", false);
            bool resolved_by_free = !stored.empty() && freed.count(stored);
            bool visible = returned || caller_visible_store(stored, param_set);
            if (resolved_by_free) continue;
            if (visible && !is_entry) {
                json sa = {{"source", a.value("source", "?")},
                           {"size_expr", a.contains("size_expr") ? a["size_expr"] : json()},
                           {"returned", returned},
                           {"stored_to", stored.empty() ? json() : json(stored)},
                           {"may_be_null", a.value("may_be_null", true)}};
                simplified_allocs.push_back(sa);
                continue;
            }
            std::string expr = a.value("source", "?") + "(" +
                               (a.contains("size_expr") && a["size_expr"].is_string()
                                    ? a["size_expr"].get<std::string>()
                                    : "") +
                               ")";
            leaks.push_back({{"allocation", expr},
                             {"stored_to", stored.empty() ? json() : json(stored)},
                             {"reason", is_entry ? "never freed before program exit"
                                                 : "not freed, returned, or stored"},
                             {"severity", "high"}});
        }
    }
    json simplified_frees = json::array();
    if (own_free.is_object() && own_free.contains("frees"))
        for (const auto& f : own_free["frees"])
            if (f.value("target_kind", "") == "parameter" ||
                f.value("target_kind", "") == "field")
                simplified_frees.push_back({{"target", f.value("target", "")},
                                            {"target_kind", f.value("target_kind", "")},
                                            {"deallocator", f.value("deallocator", "free")},
                                            {"conditional", f.value("conditional", false)}});

    return {{"function", fn_name},
            {"description",
             leaks.empty() ? "No leaks found." : "Unreleased heap allocations found."},
            {"leaks", leaks},
            {"simplified_allocations", simplified_allocs},
            {"simplified_frees", simplified_frees}};
}

// ---- verify pass -----------------------------------------------------------

struct PreContract {
    std::string callee;
    std::string kind;
    std::string target;
    size_t pos = 0;
};

struct PostFact {
    std::string callee;
    std::string text;
    size_t pos = 0;
};

void parse_annotations(const std::string& source, std::vector<PreContract>& pres,
                       std::vector<PostFact>& posts) {
    size_t offset = 0;
    for (const auto& line : split_lines(source)) {
        std::string t = trim(line);
        size_t line_pos = offset;
        offset += line.size() + 1;
        bool is_pre = starts_with(t, "/* PRE[");
        bool is_post = starts_with(t, "/* POST[");
        if (!is_pre && !is_post) continue;
        size_t open = t.find('[');
        size_t close = t.find("]:", open);
        if (open == std::string::npos || close == std::string::npos) continue;
        std::string callee = t.substr(open + 1, close - open - 1);
        std::string rest = t.substr(close + 2);
        if (ends_with(rest, "*/")) rest = rest.substr(0, rest.size() - 2);
        rest = trim(rest);
        if (is_post) {
            posts.push_back({callee, rest, line_pos});
            continue;
        }
        PreContract pc;
        pc.callee = callee;
        pc.pos = line_pos;
        if (rest.find("must not have been freed") != std::string::npos)
            pc.kind = "not_freed";
        else if (rest.find("must not be NULL") != std::string::npos)
            pc.kind = "disallow_null";
        else
            pc.kind = "";
        size_t arrow = rest.find(" -> ");
        size_t phrase = rest.find(" must");
        if (phrase == std::string::npos) phrase = rest.find(" may");
        if (arrow != std::string::npos && phrase != std::string::npos && arrow < phrase)
            pc.target = trim(rest.substr(arrow + 4, phrase - arrow - 4));
        else if (phrase != std::string::npos)
            pc.target = trim(rest.substr(0, phrase));
        if (!pc.kind.empty() && !pc.target.empty()) pres.push_back(std::move(pc));
    }
}

json make_verify_summary(const std::string& fn_name, const std::string& user_prompt) {
    std::string source = fenced_c_block(user_prompt);

    // own contracts pass through as simplified contracts
    json simplified = json::array();
    for (const auto& line :
         split_lines(section_after(user_prompt, "## Pre-conditions (assume these hold)"))) {
        std::string t = trim(line);
        if (starts_with(t, "- {")) {
            auto c = json::parse(t.substr(2), nullptr, false);
            if (!c.is_discarded()) simplified.push_back(c);
        }
    }

    std::vector<PreContract> pres;
    std::vector<PostFact> posts;
    parse_annotations(source, pres, posts);

    // free events per target: literal frees in code lines plus POST "frees X"
    struct FreeEvent {
        std::string target;
        size_t pos;
    };
    std::vector<FreeEvent> events;
    {
        size_t offset = 0;
        for (const auto& line : split_lines(source)) {
            std::string t = trim(line);
            if (!starts_with(t, "/*")) {
                size_t pos = 0;
                while ((pos = line.find("free(", pos)) != std::string::npos) {
                    if (pos > 0 && (std::isalnum((unsigned char)line[pos - 1]) ||
                                    line[pos - 1] == '_')) {
                        pos += 5;
                        continue;  // some_custom_free(
                    }
                    size_t close = line.find(')', pos);
                    if (close == std::string::npos) break;
                    events.push_back({trim(line.substr(pos + 5, close - pos - 5)),
                                      offset + pos});
                    pos = close;
                }
            }
            offset += line.size() + 1;
        }
        for (const auto& p : posts) {
            // POST lines of the `free` stub restate the literal free() call
            // counted above; only wrapper callees add a distinct event.
            if (p.callee == "free") continue;
            if (starts_with(p.text, "frees ")) {
                std::string target = p.text.substr(6);
                size_t when = target.find(" when ");
                if (when != std::string::npos) target = target.substr(0, when);
                events.push_back({trim(target), p.pos});
            }
        }
    }

    json issues = json::array();
    std::set<std::string> reported;

    // double free: a not_freed obligation on a target with two or more free
    // events on that target
    for (const auto& pc : pres) {
        if (pc.kind != "not_freed") continue;
        int count = 0;
        for (const auto& ev : events)
            if (ev.target == pc.target) ++count;
        if (count >= 2 && reported.insert("df:" + pc.target).second) {
            issues.push_back({{"location", pc.target},
                              {"issue_kind", "double_free"},
                              {"description", pc.target + " is freed more than once"},
                              {"severity", "high"},
                              {"callee", pc.callee},
                              {"contract_kind", "not_freed"}});
        }
    }

    // use after free: a dereference of the identifier after a free event
    {
        clex::LexResult lexed = clex::lex(source, "<verify>", false);
        const auto& toks = lexed.tokens;
        for (const auto& ev : events) {
            for (size_t i = 0; i + 1 < toks.size(); ++i) {
                if (toks[i].kind != Kind::Ident || toks[i].text != ev.target) continue;
                if (toks[i].begin <= ev.pos) continue;
                bool deref = is_punct(toks[i + 1], "->") || is_punct(toks[i + 1], "[") ||
                             (i >= 1 && is_punct(toks[i - 1], "*"));
                if (deref && reported.insert("uaf:" + ev.target).second) {
                    issues.push_back({{"location", ev.target},
                                      {"issue_kind", "use_after_free"},
                                      {"description",
                                       ev.target + " is dereferenced after being freed"},
                                      {"severity", "high"}});
                    break;
                }
            }
        }
    }

    return {{"function", fn_name},
            {"description", issues.empty() ? "No issues found under the stated pre-conditions."
                                           : "Memory-safety issues found."},
            {"simplified_contracts", simplified},
            {"issues", issues}};
}

// ---- baseline --------------------------------------------------------------

json make_baseline_summary(const std::string& user_prompt) {
    std::string property = trim(section_after(user_prompt, "## Property\n"));
    std::string program = section_after(user_prompt, "## Program Source");

    struct Fn {
        std::string name;
        std::string source;
        std::vector<std::string> params;
    };
    std::vector<Fn> fns;
    {
        size_t pos = 0;
        while ((pos = program.find("### ", pos)) != std::string::npos) {
            size_t eol = program.find('\n', pos);
            if (eol == std::string::npos) break;
            std::string head = program.substr(pos + 4, eol - pos - 4);
            size_t paren = head.find(" (");
            Fn fn;
            fn.name = paren == std::string::npos ? trim(head) : trim(head.substr(0, paren));
            std::string rest = program.substr(eol);
            fn.source = fenced_c_block(rest);
            for (const auto& [p, _] : parse_signature_params(fn.source))
                fn.params.push_back(p);
            fns.push_back(std::move(fn));
            pos = eol;
        }
    }

    // functions that free one of their parameters
    std::set<std::string> freeing;
    for (const auto& fn : fns) {
        std::set<std::string> pset(fn.params.begin(), fn.params.end());
        SourceFacts facts = scan_source(fn.source, fn.params);
        for (const auto& f : facts.frees)
            if (pset.count(f.target)) freeing.insert(fn.name);
    }

    json issues = json::array();
    for (const auto& fn : fns) {
        SourceFacts facts = scan_source(fn.source, fn.params);
        // free events: literal frees plus calls to param-freeing functions
        std::map<std::string, int> free_counts;
        for (const auto& f : facts.frees) free_counts[f.target]++;
        for (const auto& callee : freeing) {
            size_t pos = 0;
            while ((pos = fn.source.find(callee + "(", pos)) != std::string::npos) {
                size_t close = fn.source.find(')', pos);
                if (close == std::string::npos) break;
                std::string arg = trim(fn.source.substr(pos + callee.size() + 1,
                                                        close - pos - callee.size() - 1));
                if (!arg.empty()) free_counts[arg]++;
                pos = close;
            }
        }
        if (property.find("valid-memsafety") != std::string::npos) {
            for (const auto& [target, count] : free_counts) {
                if (count >= 2)
                    issues.push_back({{"location", fn.name},
                                      {"issue_kind", "double_free"},
                                      {"description", target + " is freed more than once"},
                                      {"severity", "high"}});
            }
        } else if (property.find("valid-memcleanup") != std::string::npos) {
            for (const auto& a : facts.allocs) {
                bool freed = !a.stored_to.empty() && free_counts.count(a.stored_to);
                if (!freed)
                    issues.push_back({{"location", fn.name},
                                      {"issue_kind", "memory_leak"},
                                      {"description", a.source + " result is never freed"},
                                      {"severity", "high"}});
            }
        } else if (property.find("no-overflow") != std::string::npos) {
            for (const auto& is : facts.int_issues) issues.push_back(is);
        }
    }

    return {{"function", "<program>"},
            {"description", issues.empty() ? "No violations found." : "Violations found."},
            {"simplified_contracts", json::array()},
            {"issues", issues}};
}

// ---- external --------------------------------------------------------------

json external_summary_for(const std::string& name) {
    auto memsafe = [&](json contracts, const std::string& desc) {
        return json{{"function", name}, {"description", desc}, {"contracts", contracts}};
    };
    if (name == "free") {
        return {{"allocation", nullptr},
                {"free",
                 {{"function", "free"},
                  {"description", "Releases the heap block passed as ptr."},
                  {"frees", json::array({{{"target", "ptr"},
                                          {"target_kind", "parameter"},
                                          {"deallocator", "free"},
                                          {"conditional", false},
                                          {"nulled_after", false}}})},
                  {"resource_releases", json::array()}}},
                {"init", nullptr},
                {"memsafe",
                 memsafe(json::array({{{"target", "ptr"},
                                       {"contract_kind", "not_freed"},
                                       {"description",
                                        "ptr must not have been previously freed"}}}),
                         "ptr must be NULL or a live heap pointer.")}};
    }
    if (name == "malloc" || name == "calloc" || name == "realloc" ||
        name == "aligned_alloc" || name == "strdup" || name == "strndup") {
        std::string size_expr = name == "calloc" ? "nmemb * size"
                                : name == "strdup" ? "strlen(s) + 1"
                                                   : "size";
        json params = json::object();
        if (name == "calloc") {
            params["nmemb"] = {{"role", "element count"}, {"used_in_allocation", true}};
            params["size"] = {{"role", "element size"}, {"used_in_allocation", true}};
        } else if (name == "strdup" || name == "strndup") {
            params["s"] = {{"role", "string to copy"}, {"used_in_allocation", true}};
        } else {
            params["size"] = {{"role", "byte count"}, {"used_in_allocation", true}};
        }
        json contracts = json::array();
        if (name == "realloc")
            contracts.push_back({{"target", "ptr"},
                                 {"contract_kind", "not_freed"},
                                 {"description", "ptr must not have been previously freed"}});
        if (name == "strdup" || name == "strndup")
            contracts.push_back({{"target", "s"},
                                 {"contract_kind", "disallow_null"},
                                 {"description", "s must not be NULL"}});
        return {{"allocation",
                 {{"function", name},
                  {"description", "Returns a fresh heap allocation."},
                  {"parameters", params},
                  {"allocations", json::array({{{"type", "heap"},
                                                {"source", name},
                                                {"size_expr", size_expr},
                                                {"size_params", json::array()},
                                                {"returned", true},
                                                {"stored_to", nullptr},
                                                {"may_be_null", true}}})},
                  {"buffer_size_pairs", json::array()}}},
                {"free", nullptr},
                {"init", nullptr},
                {"memsafe", memsafe(contracts, "Standard allocator preconditions.")}};
    }
    if (name == "exit" || name == "abort" || name == "_exit" || name == "_Exit") {
        return {{"allocation", nullptr},
                {"free", nullptr},
                {"init",
                 {{"function", name},
                  {"description", "Terminates the process and does not return."},
                  {"inits", json::array()},
                  {"output_ranges", json::array()},
                  {"noreturn", true}}},
                {"memsafe", memsafe(json::array(), "No memory-safety preconditions.")}};
    }
    if (name == "memcpy" || name == "memmove" || name == "memset" || name == "strcpy") {
        json contracts = json::array();
        contracts.push_back({{"target", name == "memset" ? "s" : "dest"},
                             {"contract_kind", "disallow_null"},
                             {"description", "destination must not be NULL"}});
        if (name != "memset")
            contracts.push_back({{"target", "src"},
                                 {"contract_kind", "disallow_null"},
                                 {"description", "source must not be NULL"}});
        if (name == "memcpy" || name == "memmove" || name == "memset")
            contracts.push_back({{"target", name == "memset" ? "s" : "dest"},
                                 {"contract_kind", "buffer_size"},
                                 {"description", "destination must hold n bytes"},
                                 {"size_expr", "n"},
                                 {"relationship", "byte_count"}});
        return {{"allocation", nullptr},
                {"free", nullptr},
                {"init", nullptr},
                {"memsafe", memsafe(contracts, "Buffer arguments must be valid.")}};
    }
    return {{"allocation", nullptr},
            {"free", nullptr},
            {"init", nullptr},
            {"memsafe", memsafe(json::array(), "No documented summary available.")}};
}

// ---- block and merge prompts -------------------------------------------------

std::string block_digest(const std::string& task_line, const SourceFacts& facts) {
    std::vector<std::string> bits;
    if (task_line.find("heap memory allocations") != std::string::npos) {
        for (const auto& a : facts.allocs)
            bits.push_back("allocates via " + a.source +
                           (a.size_expr.empty() ? "" : " size=" + a.size_expr) +
                           (a.stored_to.empty() ? "" : " into " + a.stored_to));
        if (bits.empty()) bits.push_back("no allocations");
    } else if (task_line.find("free/deallocation") != std::string::npos) {
        for (const auto& f : facts.frees) bits.push_back("frees " + f.target);
        if (bits.empty()) bits.push_back("no frees");
    } else if (task_line.find("initialization operations") != std::string::npos) {
        bits.push_back("no caller-visible initialization");
    } else {
        for (const auto& d : facts.dereferenced) bits.push_back("dereferences " + d);
        if (bits.empty()) bits.push_back("no pointer requirements");
    }
    std::string out;
    for (const auto& b : bits) {
        if (!out.empty()) out += "; ";
        out += b;
    }
    return out;
}

json make_block_response(const std::string& prompt) {
    std::string source = fenced_c_block(prompt);
    std::string name = line_value(prompt, "Function: ");
    std::string task = section_after(prompt, "## Task\n");
    SourceFacts facts = scan_source(source, {});

    json resp = {{"suggested_name", name + "_block"},
                 {"suggested_signature", "void " + name + "_block(void)"},
                 {"summary", block_digest(task, facts)}};
    if (task.find("heap memory allocations") != std::string::npos) {
        json allocations = json::array();
        for (const auto& a : facts.allocs) allocations.push_back(alloc_entry(a));
        resp["allocations"] = allocations;
    } else if (task.find("free/deallocation") != std::string::npos) {
        json frees = json::array();
        for (const auto& f : facts.frees)
            frees.push_back({{"target", f.target},
                             {"target_kind", "local"},
                             {"deallocator", "free"},
                             {"conditional", false},
                             {"nulled_after", false}});
        resp["frees"] = frees;
    } else if (task.find("initialization operations") != std::string::npos) {
        resp["inits"] = json::array();
    } else if (task.find("safety contracts") != std::string::npos) {
        resp["contracts"] = json::array();
    } else {
        resp["issues"] = json::array();
    }
    return resp;
}

json make_merge_response(const std::string& prompt) {
    std::string name = line_value(prompt, "Function: ");
    std::string task = section_after(prompt, "## Task\n");
    std::string summaries = section_after(prompt, "## Block Summaries");

    // reconstruct from block digests
    SourceFacts facts;
    for (const auto& line : split_lines(summaries)) {
        std::string t = trim(line);
        size_t pos = t.find("allocates via ");
        while (pos != std::string::npos) {
            SourceFacts::Alloc a;
            std::string rest = t.substr(pos + 14);
            size_t end = rest.find_first_of(";");
            if (end != std::string::npos) rest = rest.substr(0, end);
            size_t sz = rest.find(" size=");
            size_t into = rest.find(" into ");
            a.source = trim(rest.substr(0, std::min(sz, into)));
            if (sz != std::string::npos)
                a.size_expr = trim(rest.substr(sz + 6, into == std::string::npos
                                                           ? std::string::npos
                                                           : into - sz - 6));
            if (into != std::string::npos) a.stored_to = trim(rest.substr(into + 6));
            facts.allocs.push_back(a);
            pos = t.find("allocates via ", pos + 1);
        }
        pos = t.find("frees ");
        while (pos != std::string::npos) {
            std::string rest = t.substr(pos + 6);
            size_t end = rest.find_first_of(";");
            if (end != std::string::npos) rest = rest.substr(0, end);
            facts.frees.push_back({trim(rest), 0});
            pos = t.find("frees ", pos + 1);
        }
    }

    if (task.find("memory allocation") != std::string::npos)
        return make_alloc_summary(name, facts, {});
    if (task.find("deallocation (free)") != std::string::npos)
        return make_free_summary(name, facts, {}, "");
    if (task.find("initialization") != std::string::npos)
        return make_init_summary(name, facts, {}, "");
    if (task.find("safety pre-condition") != std::string::npos)
        return make_memsafe_summary(name, facts, {});
    // memory-safety verification merge
    return {{"function", name},
            {"description", "Merged block verification."},
            {"simplified_contracts", json::array()},
            {"issues", json::array()}};
}

}  // namespace

CompletionResult RuleProvider::complete(const PromptBundle& bundle) {
    const std::string combined =
        bundle.system ? *bundle.system + "\n" + bundle.user : bundle.user;

    json response;
    if (combined.find("You are analyzing a code block from a large C/C++ function.") !=
            std::string::npos ||
        combined.find("You are verifying memory safety of a code block") !=
            std::string::npos) {
        response = make_block_response(combined);
    } else if (combined.find("You are combining block-level summaries") !=
               std::string::npos) {
        response = make_merge_response(combined);
    } else if (combined.find("You are an expert in C memory safety analysis.") !=
               std::string::npos) {
        response = external_summary_for(line_value(combined, "Function name: "));
    } else if (combined.find("You are verifying a complete C program") !=
               std::string::npos) {
        response = make_baseline_summary(combined);
    } else if (combined.find(
                   "You are verifying memory safety of a C/C++ function") !=
               std::string::npos) {
        response = make_verify_summary(line_value(combined, "Function: "), combined);
    } else {
        std::string name = line_value(combined, "Function: ");
        std::string signature = line_value(combined, "Signature: ");
        std::string source = fenced_c_block(combined);
        std::vector<std::string> params;
        for (const auto& [p, _] : parse_signature_params(signature))
            params.push_back(p);
        std::set<std::string> param_set(params.begin(), params.end());
        SourceFacts facts = scan_source(source, params);

        if (combined.find("memory allocation summaries") != std::string::npos)
            response = make_alloc_summary(name, facts, params);
        else if (combined.find("deallocation (free) summaries") != std::string::npos)
            response = make_free_summary(name, facts, param_set, source);
        else if (combined.find("initialization summaries") != std::string::npos)
            response = make_init_summary(name, facts, params, source);
        else if (combined.find("safety pre-condition contracts") != std::string::npos)
            response = make_memsafe_summary(name, facts, params);
        else if (combined.find("value-range analysis") != std::string::npos)
            response = make_int_summary(name, facts);
        else if (combined.find("memory leaks") != std::string::npos)
            response = make_leak_summary(name, bundle.user, params);
        else
            response = {{"function", name.empty() ? "unknown" : name},
                        {"description", "Unrecognized prompt."}};
    }

    CompletionResult result;
    result.text = response.dump(2);
    result.prompt_chars = combined.size();
    result.completion_chars = result.text.size();
    result.attempts = 1;
    return result;
}

}  // namespace nlverify
