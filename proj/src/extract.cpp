#include "nlverify/extract.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "clex.hpp"
#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace fs = std::filesystem;

namespace nlverify {

using clex::Token;
using Kind = clex::Token::Kind;

void TypeContext::merge(const TypeContext& other) {
    for (const auto& [k, v] : other.typedefs) typedefs.emplace(k, v);
    for (const auto& [k, v] : other.structs) structs.emplace(k, v);
    for (const auto& [k, v] : other.sizeof_values) sizeof_values.emplace(k, v);
    for (const auto& [k, v] : other.macros) macros.emplace(k, v);
}

namespace {

bool is_punct(const Token& t, std::string_view p) {
    return t.kind == Kind::Punct && t.text == p;
}
bool is_ident(const Token& t, std::string_view name) {
    return t.kind == Kind::Ident && t.text == name;
}

// Never a call when the identifier before '(' is one of these.
bool is_call_blocker(std::string_view ident) {
    static const std::set<std::string_view> blockers = {
        "if", "while", "for", "switch", "return", "sizeof", "case", "do",
        "else", "goto", "defined", "_Alignof", "_Static_assert", "_Alignas",
        "__attribute__", "asm", "__asm__", "typeof", "__typeof__", "_Atomic"};
    return blockers.count(ident) > 0;
}

// Declarator-name heuristic shared by parameter and typedef parsing: prefer
// the identifier following '*' inside the first paren group (function-pointer
// declarators), otherwise the last identifier outside brackets.
std::string declarator_name(const std::vector<Token>& toks, size_t begin, size_t end) {
    int paren = 0;
    for (size_t i = begin; i < end; ++i) {
        if (is_punct(toks[i], "(")) {
            ++paren;
            size_t j = i + 1;
            while (j < end && (is_punct(toks[j], "*") || is_ident(toks[j], "const") ||
                               is_ident(toks[j], "restrict") ||
                               is_ident(toks[j], "__restrict")))
                ++j;
            if (j > i + 1 && j < end && toks[j].kind == Kind::Ident &&
                is_punct(toks[i + 1], "*"))
                return std::string(toks[j].text);
        } else if (is_punct(toks[i], ")")) {
            --paren;
        }
    }
    int bracket = 0;
    std::string last;
    for (size_t i = begin; i < end; ++i) {
        if (is_punct(toks[i], "[")) ++bracket;
        else if (is_punct(toks[i], "]")) --bracket;
        else if (bracket == 0 && toks[i].kind == Kind::Ident &&
                 !clex::is_keyword(toks[i].text))
            last = std::string(toks[i].text);
    }
    return last;
}

std::string slice(std::string_view src, size_t begin, size_t end) {
    return std::string(src.substr(begin, end - begin));
}

// Splits a token range on top-level commas; returns (begin, end) pairs.
std::vector<std::pair<size_t, size_t>> split_top_commas(
    const std::vector<Token>& toks, size_t begin, size_t end) {
    std::vector<std::pair<size_t, size_t>> parts;
    int depth = 0;
    size_t start = begin;
    for (size_t i = begin; i < end; ++i) {
        if (toks[i].kind != Kind::Punct) continue;
        std::string_view t = toks[i].text;
        if (t == "(" || t == "[" || t == "{") ++depth;
        else if (t == ")" || t == "]" || t == "}") --depth;
        else if (t == "," && depth == 0) {
            parts.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (start < end) parts.emplace_back(start, end);
    return parts;
}

std::vector<std::pair<std::string, std::string>> parse_params(
    std::string_view src, const std::vector<Token>& toks, size_t lp, size_t rp) {
    std::vector<std::pair<std::string, std::string>> params;
    if (rp <= lp + 1) return params;
    if (rp == lp + 2 && is_ident(toks[lp + 1], "void")) return params;

    for (auto [b, e] : split_top_commas(toks, lp + 1, rp)) {
        if (b >= e) continue;
        if (is_punct(toks[b], "...")) continue;
        std::string name = declarator_name(toks, b, e);
        std::string text = trim(slice(src, toks[b].begin, toks[e - 1].end));
        std::string type_text = text;
        if (!name.empty()) {
            // Remove the declarator name (first whole-token occurrence from the
            // right) to leave the declared type text.
            size_t pos = type_text.rfind(name);
            while (pos != std::string::npos) {
                bool lok = pos == 0 || !(std::isalnum((unsigned char)type_text[pos - 1]) ||
                                         type_text[pos - 1] == '_');
                size_t after = pos + name.size();
                bool rok = after >= type_text.size() ||
                           !(std::isalnum((unsigned char)type_text[after]) ||
                             type_text[after] == '_');
                if (lok && rok) {
                    type_text = trim(type_text.substr(0, pos) + type_text.substr(after));
                    break;
                }
                pos = pos == 0 ? std::string::npos : type_text.rfind(name, pos - 1);
            }
        }
        params.emplace_back(name, type_text);
    }
    return params;
}

// LP64 primitive layout. Returns (size, align) when computable.
struct Layout {
    long size = 0;
    long align = 1;
};

class LayoutResolver {
public:
    LayoutResolver(const TypeContext& ctx) : ctx_(ctx) {}

    std::optional<Layout> resolve(const std::string& type_text, int depth = 0) const {
        if (depth > 8) return std::nullopt;
        std::string t = normalize(type_text);
        if (t.empty()) return std::nullopt;
        if (t.back() == '*') return Layout{8, 8};

        static const std::map<std::string, Layout> prim = {
            {"char", {1, 1}}, {"signed char", {1, 1}}, {"unsigned char", {1, 1}},
            {"_Bool", {1, 1}}, {"short", {2, 2}}, {"short int", {2, 2}},
            {"unsigned short", {2, 2}}, {"unsigned short int", {2, 2}},
            {"int", {4, 4}}, {"signed", {4, 4}}, {"signed int", {4, 4}},
            {"unsigned", {4, 4}}, {"unsigned int", {4, 4}},
            {"long", {8, 8}}, {"long int", {8, 8}}, {"unsigned long", {8, 8}},
            {"unsigned long int", {8, 8}}, {"long long", {8, 8}},
            {"long long int", {8, 8}}, {"unsigned long long", {8, 8}},
            {"unsigned long long int", {8, 8}}, {"float", {4, 4}},
            {"double", {8, 8}}, {"long double", {16, 16}},
            {"size_t", {8, 8}}, {"ssize_t", {8, 8}}, {"ptrdiff_t", {8, 8}},
            {"intptr_t", {8, 8}}, {"uintptr_t", {8, 8}},
            {"int8_t", {1, 1}}, {"uint8_t", {1, 1}}, {"int16_t", {2, 2}},
            {"uint16_t", {2, 2}}, {"int32_t", {4, 4}}, {"uint32_t", {4, 4}},
            {"int64_t", {8, 8}}, {"uint64_t", {8, 8}}};
        auto it = prim.find(t);
        if (it != prim.end()) return it->second;

        if (starts_with(t, "enum ")) return Layout{4, 4};
        if (starts_with(t, "struct ")) {
            auto sit = ctx_.sizeof_values.find(t);
            auto ait = struct_aligns_.find(t);
            if (sit != ctx_.sizeof_values.end() && ait != struct_aligns_.end())
                return Layout{sit->second, ait->second};
            return std::nullopt;
        }
        auto td = ctx_.typedefs.find(t);
        if (td != ctx_.typedefs.end()) {
            // typedef text looks like "typedef unsigned long mysize_t;".
            std::string body = td->second;
            size_t kw = body.find("typedef");
            if (kw != std::string::npos) body = body.substr(kw + 7);
            size_t namepos = body.rfind(t);
            if (namepos != std::string::npos)
                body = body.substr(0, namepos);
            if (!body.empty() && body.back() == ';') body.pop_back();
            return resolve(trim(body), depth + 1);
        }
        return std::nullopt;
    }

    void note_struct_align(const std::string& key, long align) {
        struct_aligns_[key] = align;
    }

private:
    static std::string normalize(const std::string& text) {
        std::string out;
        std::string word;
        auto flush = [&] {
            if (word.empty()) return;
            if (word != "const" && word != "volatile" && word != "restrict" &&
                word != "__restrict" && word != "register" && word != "static") {
                if (!out.empty()) out += ' ';
                out += word;
            }
            word.clear();
        };
        for (char c : text) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                word += c;
            } else {
                flush();
                if (c == '*') out += '*';
            }
        }
        flush();
        // "char *" normalizes to "char*"; collapse to a bare pointer marker.
        if (!out.empty() && out.find('*') != std::string::npos) {
            return "*";  // any pointer
        }
        return out;
    }

    const TypeContext& ctx_;
    std::map<std::string, long> struct_aligns_;
};

long round_up(long v, long align) { return (v + align - 1) / align * align; }

// Parses struct bodies and computes LP64 field offsets when every field's
// layout is resolvable from this translation unit alone.
void parse_struct_fields(std::string_view src, const std::vector<Token>& toks,
                         size_t lb, size_t rb, const std::string& struct_key,
                         TypeContext& ctx, LayoutResolver& resolver) {
    std::vector<StructField> fields;
    bool computable = true;
    long offset = 0;
    long max_align = 1;

    size_t i = lb + 1;
    while (i < rb) {
        // one field declaration: tokens up to ';' at this level
        size_t end = i;
        int depth = 0;
        while (end < rb) {
            if (toks[end].kind == Kind::Punct) {
                std::string_view t = toks[end].text;
                if (t == "{" || t == "(" || t == "[") ++depth;
                else if (t == "}" || t == ")" || t == "]") --depth;
                else if (t == ";" && depth == 0) break;
            }
            ++end;
        }
        if (i >= end) break;

        bool has_bitfield = false;
        for (size_t k = i; k < end; ++k)
            if (is_punct(toks[k], ":")) has_bitfield = true;
        if (has_bitfield) computable = false;

        // Multiple declarators share the leading type: `int a, b;`
        auto parts = split_top_commas(toks, i, end);
        // Type text approximation: tokens of the first part before its declarator name.
        for (size_t pi = 0; pi < parts.size(); ++pi) {
            auto [b, e] = parts[pi];
            size_t type_begin = (pi == 0) ? b : parts[0].first;
            std::string name = declarator_name(toks, b, e);
            if (name.empty()) {
                computable = false;
                continue;
            }
            long array_elems = 1;
            bool is_array = false;
            for (size_t k = b; k < e; ++k) {
                if (is_punct(toks[k], "[")) {
                    is_array = true;
                    if (k + 1 < e && toks[k + 1].kind == Kind::Number) {
                        try {
                            array_elems *= std::stol(std::string(toks[k + 1].text));
                        } catch (...) {
                            computable = false;
                        }
                    } else {
                        computable = false;  // flexible array or expression extent
                    }
                }
            }
            bool is_pointer = false;
            for (size_t k = b; k < e; ++k)
                if (is_punct(toks[k], "*")) is_pointer = true;

            std::string type_text;
            if (pi == 0) {
                // strip the declarator name from the slice
                type_text = trim(slice(src, toks[type_begin].begin, toks[e - 1].end));
            } else {
                type_text = trim(slice(src, toks[parts[0].first].begin,
                                       toks[parts[0].second - 1].end));
            }

            StructField f;
            f.name = name;
            f.type_text = type_text;
            if (computable) {
                std::optional<Layout> lay;
                if (is_pointer) lay = Layout{8, 8};
                else {
                    // Resolve from the leading type words of the first part.
                    std::string head = trim(slice(src, toks[parts[0].first].begin,
                                                  toks[parts[0].second - 1].end));
                    size_t npos_ = head.rfind(name);
                    if (pi == 0 && npos_ != std::string::npos)
                        head = trim(head.substr(0, npos_));
                    lay = resolver.resolve(head);
                }
                if (lay && !has_bitfield) {
                    long sz = lay->size * (is_array ? array_elems : 1);
                    offset = round_up(offset, lay->align);
                    f.byte_offset = offset;
                    offset += sz;
                    max_align = std::max(max_align, lay->align);
                } else {
                    computable = false;
                }
            }
            fields.push_back(std::move(f));
        }
        i = end + 1;
    }

    if (!computable)
        for (auto& f : fields) f.byte_offset.reset();

    ctx.structs[struct_key] = std::move(fields);
    if (computable && offset > 0) {
        long total = round_up(offset, max_align);
        ctx.sizeof_values[struct_key] = total;
        resolver.note_struct_align(struct_key, max_align);
    }
}

struct ExtractState {
    std::string_view src;
    const clex::LexResult* lexed = nullptr;
    std::string primary_file;
    TranslationUnit out;
};

void collect_macros(const clex::LexResult& lexed, TypeContext& ctx) {
    for (const auto& t : lexed.tokens) {
        if (t.kind != Kind::Preprocessor || t.file != 0) continue;
        std::string_view text = t.text;
        size_t pos = text.find("define");
        if (pos == std::string_view::npos) continue;
        std::string_view before = text.substr(1, pos - 1);
        if (before.find_first_not_of(" \t") != std::string_view::npos) continue;
        size_t i = pos + 6;
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        size_t name_start = i;
        while (i < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
            ++i;
        if (i == name_start) continue;
        std::string name(text.substr(name_start, i - name_start));
        // Function-like macros keep their parameter list in the expansion text.
        std::string expansion = trim(text.substr(i));
        ctx.macros[name] = expansion;
    }
}

void collect_types(ExtractState& st) {
    const auto& toks = st.lexed->tokens;
    LayoutResolver resolver(st.out.types);

    int brace = 0;
    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind == Kind::Punct) {
            if (t.text == "{") ++brace;
            else if (t.text == "}") --brace;
            continue;
        }
        if (brace != 0 || t.kind != Kind::Ident) continue;

        if (t.text == "typedef") {
            // consume to ';' at this level
            size_t end = i;
            int depth = 0;
            while (end < toks.size()) {
                if (toks[end].kind == Kind::Punct) {
                    std::string_view p = toks[end].text;
                    if (p == "{" || p == "(" || p == "[") ++depth;
                    else if (p == "}" || p == ")" || p == "]") --depth;
                    else if (p == ";" && depth == 0) break;
                }
                ++end;
            }
            if (end >= toks.size()) break;
            std::string name = declarator_name(toks, i + 1, end);
            std::string text = slice(st.src, toks[i].begin, toks[end].end);
            if (!name.empty()) st.out.types.typedefs.emplace(name, text);

            // typedef'd struct with a body
            for (size_t k = i + 1; k + 2 < end; ++k) {
                if ((is_ident(toks[k], "struct") || is_ident(toks[k], "union")) &&
                    toks[k + 1].kind == Kind::Ident && is_punct(toks[k + 2], "{")) {
                    size_t rb = clex::match_forward(toks, k + 2);
                    if (rb != clex::npos && is_ident(toks[k], "struct"))
                        parse_struct_fields(st.src, toks, k + 2, rb,
                                            "struct " + std::string(toks[k + 1].text),
                                            st.out.types, resolver);
                    break;
                }
                if ((is_ident(toks[k], "struct") || is_ident(toks[k], "union")) &&
                    is_punct(toks[k + 1], "{")) {
                    size_t rb = clex::match_forward(toks, k + 1);
                    if (rb != clex::npos && is_ident(toks[k], "struct") && !name.empty())
                        parse_struct_fields(st.src, toks, k + 1, rb, "struct " + name,
                                            st.out.types, resolver);
                    break;
                }
            }
            i = end;
            continue;
        }

        if (t.text == "struct" && i + 2 < toks.size() &&
            toks[i + 1].kind == Kind::Ident && is_punct(toks[i + 2], "{")) {
            size_t rb = clex::match_forward(toks, i + 2);
            if (rb != clex::npos) {
                parse_struct_fields(st.src, toks, i + 2, rb,
                                    "struct " + std::string(toks[i + 1].text),
                                    st.out.types, resolver);
                i = rb;
            }
            continue;
        }
    }
}

// Scans a function body token range for callsites and local function-pointer
// declarations.
void collect_callsites(ExtractState& st, const FunctionRecord& fn, size_t body_begin,
                       size_t body_end) {
    const auto& toks = st.lexed->tokens;
    std::set<std::string> fp_names;
    for (const auto& [pname, ptype] : fn.params)
        if (ptype.find("(*") != std::string::npos) fp_names.insert(pname);

    // Local declarations of the form `type (*name)(...)`: the declarator paren
    // group follows a type identifier, unlike `(*expr)(...)` call syntax.
    std::set<size_t> declarator_parens;
    for (size_t i = body_begin; i + 3 < body_end; ++i) {
        if (is_punct(toks[i], "(") && is_punct(toks[i + 1], "*") &&
            toks[i + 2].kind == Kind::Ident && is_punct(toks[i + 3], ")")) {
            bool after_type = i > body_begin && toks[i - 1].kind == Kind::Ident;
            size_t after = clex::match_forward(toks, i);
            if (after_type && after != clex::npos && after + 1 < body_end &&
                is_punct(toks[after + 1], "(")) {
                fp_names.insert(std::string(toks[i + 2].text));
                declarator_parens.insert(after + 1);
            }
        }
    }

    for (size_t i = body_begin; i < body_end; ++i) {
        const Token& t = toks[i];
        bool indirect_through_expr = false;
        size_t name_index = i;

        if (t.kind == Kind::Ident && i + 1 < body_end && is_punct(toks[i + 1], "(")) {
            if (is_call_blocker(t.text)) continue;
            if (clex::is_keyword(t.text)) continue;
        } else if (is_punct(t, ")") && i + 1 < body_end && is_punct(toks[i + 1], "(")) {
            // `(*fp)(...)` style: the paren group before the call parens
            // dereferences a pointer expression.
            // Walk back to the matching '(' and peek inside for `*`.
            int depth = 0;
            size_t j = i;
            while (j > body_begin) {
                if (is_punct(toks[j], ")")) ++depth;
                else if (is_punct(toks[j], "(")) {
                    --depth;
                    if (depth == 0) break;
                }
                --j;
            }
            if (j < i && is_punct(toks[j], "(") && j + 1 < i && is_punct(toks[j + 1], "*"))
                indirect_through_expr = true;
            else
                continue;
            name_index = j;
        } else {
            continue;
        }

        size_t lp = i + 1;
        if (declarator_parens.count(lp)) continue;  // parameter list of a declarator
        size_t rp = clex::match_forward(toks, lp);
        if (rp == clex::npos || rp > body_end) continue;

        CallsiteRecord cs;
        cs.caller = fn.name;
        cs.line = toks[name_index].line;

        bool indirect = indirect_through_expr;
        if (!indirect && t.kind == Kind::Ident) {
            if (name_index > body_begin) {
                const Token& prev = toks[name_index - 1];
                if (is_punct(prev, ".") || is_punct(prev, "->")) indirect = true;
            }
            if (fp_names.count(std::string(t.text))) indirect = true;
        }
        cs.is_indirect = indirect;
        cs.callee_name = indirect ? kUnresolvedCallee : std::string(t.text);

        for (auto [b, e] : split_top_commas(toks, lp + 1, rp)) {
            if (b < e)
                cs.arg_exprs.push_back(trim(slice(st.src, toks[b].begin, toks[e - 1].end)));
        }
        st.out.callsites.push_back(std::move(cs));
        i = lp;  // arguments may contain nested calls; keep scanning inside
    }
}

void collect_functions(ExtractState& st) {
    const auto& toks = st.lexed->tokens;
    int brace = 0;
    size_t decl_start = 0;

    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind == Kind::Preprocessor) {
            if (brace == 0) decl_start = i + 1;
            continue;
        }
        if (t.kind == Kind::Punct) {
            if (t.text == "{") ++brace;
            else if (t.text == "}") {
                --brace;
                if (brace == 0) decl_start = i + 1;
            } else if (t.text == ";" && brace == 0) {
                decl_start = i + 1;
            } else if (t.text == "=" && brace == 0) {
                // global initializer; skip to ';'
                size_t j = i;
                int depth = 0;
                while (j < toks.size()) {
                    if (toks[j].kind == Kind::Punct) {
                        std::string_view p = toks[j].text;
                        if (p == "{" || p == "(" || p == "[") ++depth;
                        else if (p == "}" || p == ")" || p == "]") --depth;
                        else if (p == ";" && depth == 0) break;
                    }
                    ++j;
                }
                i = j;
                decl_start = i + 1;
            }
            continue;
        }
        if (brace != 0) continue;
        if (t.kind != Kind::Ident || clex::is_keyword(t.text)) continue;
        if (i + 1 >= toks.size() || !is_punct(toks[i + 1], "(")) continue;

        size_t rp = clex::match_forward(toks, i + 1);
        if (rp == clex::npos) continue;

        // Skip attributes/asm between ')' and '{'.
        size_t after = rp + 1;
        while (after < toks.size()) {
            if (is_ident(toks[after], "__attribute__") || is_ident(toks[after], "asm") ||
                is_ident(toks[after], "__asm__")) {
                if (after + 1 < toks.size() && is_punct(toks[after + 1], "(")) {
                    size_t close = clex::match_forward(toks, after + 1);
                    if (close == clex::npos) break;
                    after = close + 1;
                    continue;
                }
            }
            break;
        }
        if (after >= toks.size() || !is_punct(toks[after], "{")) continue;

        // Reject `(*name)`-style declarators.
        if (i > decl_start && is_punct(toks[i - 1], "*") && i >= 2 &&
            is_punct(toks[i - 2], "("))
            continue;

        size_t body_close = clex::match_forward(toks, after);
        if (body_close == clex::npos) continue;

        if (toks[i].file != 0) {  // defined in an included file; not this TU
            i = body_close;
            decl_start = body_close + 1;
            continue;
        }

        FunctionRecord fn;
        fn.name = std::string(t.text);
        size_t sig_begin = std::min(decl_start, i);
        if (sig_begin >= toks.size() || toks[sig_begin].begin > toks[i].begin)
            sig_begin = i;
        fn.signature = trim(slice(st.src, toks[sig_begin].begin, toks[rp].end));
        fn.params = parse_params(st.src, toks, i + 1, rp);
        fn.file_path = st.primary_file;
        fn.line_start = toks[sig_begin].line;
        fn.line_end = toks[body_close].line;
        fn.body = slice(st.src, toks[sig_begin].begin, toks[body_close].end);

        collect_callsites(st, fn, after + 1, body_close);
        st.out.functions.push_back(std::move(fn));

        i = body_close;
        decl_start = body_close + 1;
    }
}

std::string resolve_path(const CompileCommand& cmd) {
    fs::path p(cmd.file);
    if (p.is_relative() && !cmd.directory.empty()) p = fs::path(cmd.directory) / p;
    return p.string();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

std::optional<std::string> run_preprocessor(const CompileCommand& cmd,
                                            const std::string& path) {
    if (cmd.arguments.empty()) return std::nullopt;
    std::vector<std::string> argv;
    argv.push_back(cmd.arguments[0]);
    argv.push_back("-E");
    for (size_t i = 1; i < cmd.arguments.size(); ++i) {
        const std::string& a = cmd.arguments[i];
        if (a == "-c" || a == "-E" || a == "-S") continue;
        if (a == "-o" || a == "-MF" || a == "-MT" || a == "-MQ") {
            ++i;
            continue;
        }
        if (a == "-MD" || a == "-MMD" || a == "-M" || a == "-MM") continue;
        if (a == cmd.file) continue;
        argv.push_back(a);
    }
    argv.push_back(path);

    std::string cmdline;
    if (!cmd.directory.empty())
        cmdline = "cd " + shell_quote(cmd.directory) + " && ";
    for (const auto& a : argv) cmdline += shell_quote(a) + " ";
    cmdline += "2>/dev/null";

    FILE* pipe = popen(cmdline.c_str(), "r");
    if (!pipe) return std::nullopt;
    std::string output;
    char buf[8192];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int rc = pclose(pipe);
    if (rc != 0 || output.empty()) return std::nullopt;
    return output;
}

TranslationUnit extract_text(const std::string& text, const std::string& file_path,
                             bool honor_linemarkers) {
    clex::LexResult lexed = clex::lex(text, file_path, honor_linemarkers);
    if (!lexed.balanced)
        throw ParseError("unbalanced braces or parentheses in " + file_path);

    ExtractState st;
    st.src = text;
    st.lexed = &lexed;
    st.primary_file = file_path;
    collect_macros(lexed, st.out.types);
    collect_types(st);
    collect_functions(st);
    return std::move(st.out);
}

}  // namespace

TranslationUnit extract_source(const std::string& source, const std::string& file_path) {
    return extract_text(source, file_path, false);
}

std::vector<std::pair<std::string, std::string>> parse_signature_params(
    const std::string& signature) {
    clex::LexResult lexed = clex::lex(signature, "<signature>", false);
    const auto& toks = lexed.tokens;
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind == Kind::Ident && !clex::is_keyword(toks[i].text) &&
            is_punct(toks[i + 1], "(")) {
            size_t rp = clex::match_forward(toks, i + 1);
            if (rp != clex::npos)
                return parse_params(signature, toks, i + 1, rp);
        }
    }
    return {};
}

TranslationUnit extract_translation_unit(const CompileCommand& cmd, bool preprocess) {
    const std::string path = resolve_path(cmd);
    std::string original = read_file(path);

    if (preprocess) {
        if (auto expanded = run_preprocessor(cmd, path)) {
            // Linemarkers carry the original file name; match it so that only
            // this TU's definitions are kept.
            clex::LexResult lexed = clex::lex(*expanded, path, true);
            if (lexed.balanced) {
                ExtractState st;
                st.src = *expanded;
                st.lexed = &lexed;
                st.primary_file = path;
                // Re-map: the primary logical file is whichever marker names
                // this source file. lex() seeds files[0] with `path`; markers
                // may register the same name again under another spelling.
                fs::path want = fs::path(path).filename();
                for (size_t fi = 1; fi < lexed.files.size(); ++fi) {
                    if (fs::path(lexed.files[fi]).filename() == want) {
                        for (auto& tk : lexed.tokens)
                            if (tk.file == static_cast<int>(fi)) tk.file = 0;
                    }
                }
                collect_types(st);
                collect_functions(st);
                collect_macros(clex::lex(original, path, false), st.out.types);
                for (auto& fn : st.out.functions) fn.file_path = path;
                return std::move(st.out);
            }
            log_warn("preprocessed output for " + path +
                     " is unbalanced; falling back to original source");
        } else {
            log_warn("preprocessor invocation failed for " + path +
                     "; falling back to original source");
        }
        TranslationUnit tu = extract_text(original, path, false);
        tu.preprocess_fallback = true;
        return tu;
    }
    return extract_text(original, path, false);
}

namespace {

void merge_unit(Program& prog, TranslationUnit&& tu) {
    for (auto& f : tu.functions) prog.functions.push_back(std::move(f));
    for (auto& c : tu.callsites) prog.callsites.push_back(std::move(c));
    prog.types.merge(tu.types);
}

void finalize(Program& prog) {
    std::stable_sort(prog.functions.begin(), prog.functions.end(),
                     [](const FunctionRecord& a, const FunctionRecord& b) {
                         if (a.file_path != b.file_path) return a.file_path < b.file_path;
                         return a.line_start < b.line_start;
                     });
    std::set<std::string> seen;
    for (const auto& f : prog.functions) {
        if (!seen.insert(f.name).second)
            log_warn("function name collision across translation units: " + f.name);
    }
}

}  // namespace

Program extract_program(const std::vector<CompileCommand>& commands, bool preprocess) {
    Program prog;
    for (const auto& cmd : commands) {
        try {
            merge_unit(prog, extract_translation_unit(cmd, preprocess));
        } catch (const ParseError& e) {
            log_error(std::string("skipping unparseable file: ") + e.what());
            prog.skipped_files.push_back(cmd.file);
        } catch (const FileNotFoundError& e) {
            log_error(std::string("skipping unreadable file: ") + e.what());
            prog.skipped_files.push_back(cmd.file);
        }
    }
    finalize(prog);
    return prog;
}

Program extract_files(const std::vector<std::string>& paths) {
    Program prog;
    for (const auto& p : paths) {
        try {
            merge_unit(prog, extract_text(read_file(p), p, false));
        } catch (const ParseError& e) {
            log_error(std::string("skipping unparseable file: ") + e.what());
            prog.skipped_files.push_back(p);
        } catch (const FileNotFoundError& e) {
            log_error(std::string("skipping unreadable file: ") + e.what());
            prog.skipped_files.push_back(p);
        }
    }
    finalize(prog);
    return prog;
}

}  // namespace nlverify
