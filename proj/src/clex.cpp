#include "clex.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace nlverify::clex {

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

const std::unordered_set<std::string_view>& keyword_set() {
    static const std::unordered_set<std::string_view> kw = {
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if",
        "inline", "int", "long", "register", "restrict", "return", "short",
        "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while", "_Bool", "_Alignof",
        "_Alignas", "_Atomic", "_Noreturn", "_Static_assert", "_Thread_local",
        "__attribute__", "__asm__", "asm", "__typeof__", "typeof", "__extension__",
        "__restrict", "__inline", "__inline__", "__volatile__", "__const",
        "__signed__", "__builtin_va_list"};
    return kw;
}

// Longest-match table for multi-char punctuators the consumers care about.
const std::array<std::string_view, 19> kMultiPunct = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=",
    "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%="};

struct LineMarker {
    bool valid = false;
    int line = 0;
    std::string file;
};

LineMarker parse_linemarker(std::string_view directive) {
    // Forms: `# 12 "file" flags...` or `#line 12 "file"`.
    LineMarker m;
    size_t i = 0;
    if (i >= directive.size() || directive[i] != '#') return m;
    ++i;
    while (i < directive.size() && (directive[i] == ' ' || directive[i] == '\t')) ++i;
    if (directive.compare(i, 4, "line") == 0) i += 4;
    while (i < directive.size() && (directive[i] == ' ' || directive[i] == '\t')) ++i;
    if (i >= directive.size() || !std::isdigit(static_cast<unsigned char>(directive[i])))
        return m;
    int line = 0;
    while (i < directive.size() && std::isdigit(static_cast<unsigned char>(directive[i])))
        line = line * 10 + (directive[i++] - '0');
    while (i < directive.size() && (directive[i] == ' ' || directive[i] == '\t')) ++i;
    if (i >= directive.size() || directive[i] != '"') return m;
    size_t close = directive.find('"', i + 1);
    if (close == std::string_view::npos) return m;
    m.valid = true;
    m.line = line;
    m.file = std::string(directive.substr(i + 1, close - i - 1));
    return m;
}

}  // namespace

bool is_keyword(std::string_view ident) { return keyword_set().count(ident) > 0; }

LexResult lex(std::string_view src, std::string_view primary_file,
              bool honor_linemarkers) {
    LexResult out;
    out.files.emplace_back(primary_file);

    int cur_file = 0;
    int cur_line = 1;
    int brace = 0, paren = 0;

    auto file_index = [&](const std::string& f) {
        for (size_t i = 0; i < out.files.size(); ++i)
            if (out.files[i] == f) return static_cast<int>(i);
        out.files.push_back(f);
        return static_cast<int>(out.files.size() - 1);
    };

    size_t i = 0;
    const size_t n = src.size();
    bool at_line_start = true;

    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            ++cur_line;
            ++i;
            at_line_start = true;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] == '\n') ++cur_line;
                ++i;
            }
            i = std::min(n, i + 2);
            at_line_start = false;
            continue;
        }
        if (c == '#' && at_line_start) {
            size_t start = i;
            int start_line = cur_line;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
                    i += 2;
                    ++cur_line;
                    continue;
                }
                if (src[i] == '\n') break;
                ++i;
            }
            std::string_view text = src.substr(start, i - start);
            if (honor_linemarkers) {
                LineMarker m = parse_linemarker(text);
                if (m.valid) {
                    cur_file = file_index(m.file);
                    cur_line = m.line;
                    if (i < n) ++i;  // consume the newline; next line is m.line
                    at_line_start = true;
                    continue;
                }
            }
            out.tokens.push_back({Token::Kind::Preprocessor, text, start, i,
                                  start_line, cur_file});
            continue;
        }
        at_line_start = false;
        if (ident_start(c)) {
            size_t start = i;
            while (i < n && ident_char(src[i])) ++i;
            out.tokens.push_back({Token::Kind::Ident, src.substr(start, i - start),
                                  start, i, cur_line, cur_file});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t start = i;
            while (i < n && (ident_char(src[i]) || src[i] == '.' ||
                             ((src[i] == '+' || src[i] == '-') && i > start &&
                              (src[i - 1] == 'e' || src[i - 1] == 'E' ||
                               src[i - 1] == 'p' || src[i - 1] == 'P'))))
                ++i;
            out.tokens.push_back({Token::Kind::Number, src.substr(start, i - start),
                                  start, i, cur_line, cur_file});
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            size_t start = i;
            int start_line = cur_line;
            ++i;
            while (i < n && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < n) {
                    if (src[i + 1] == '\n') ++cur_line;
                    i += 2;
                    continue;
                }
                if (src[i] == '\n') ++cur_line;  // tolerate unterminated literals
                ++i;
            }
            i = std::min(n, i + 1);
            out.tokens.push_back({quote == '"' ? Token::Kind::Str : Token::Kind::CharLit,
                                  src.substr(start, i - start), start, i, start_line,
                                  cur_file});
            continue;
        }
        // Punctuation, longest match first.
        std::string_view rest = src.substr(i);
        size_t len = 1;
        for (auto p : kMultiPunct) {
            if (rest.size() >= p.size() && rest.substr(0, p.size()) == p) {
                len = p.size();
                break;
            }
        }
        if (c == '{') ++brace;
        if (c == '}') --brace;
        if (c == '(') ++paren;
        if (c == ')') --paren;
        out.tokens.push_back({Token::Kind::Punct, src.substr(i, len), i, i + len,
                              cur_line, cur_file});
        i += len;
    }
    out.balanced = (brace == 0 && paren == 0);
    return out;
}

size_t match_forward(const std::vector<Token>& toks, size_t open_index) {
    if (open_index >= toks.size() || toks[open_index].kind != Token::Kind::Punct)
        return npos;
    std::string_view open = toks[open_index].text;
    std::string_view close;
    if (open == "(") close = ")";
    else if (open == "{") close = "}";
    else if (open == "[") close = "]";
    else return npos;

    int depth = 0;
    for (size_t i = open_index; i < toks.size(); ++i) {
        if (toks[i].kind != Token::Kind::Punct) continue;
        if (toks[i].text == open) ++depth;
        else if (toks[i].text == close) {
            --depth;
            if (depth == 0) return i;
        }
    }
    return npos;
}

}  // namespace nlverify::clex
