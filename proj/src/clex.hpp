#pragma once

// Token-level structural lexer for C translation units. Not a conforming C
// front end: it recognizes enough structure (comments, literals, preprocessor
// lines, GCC linemarkers, multi-char operators) for definition/callsite
// extraction and syntax-bounded block splitting.

#include <string>
#include <string_view>
#include <vector>

namespace nlverify::clex {

struct Token {
    enum class Kind { Ident, Number, Str, CharLit, Punct, Preprocessor };
    Kind kind;
    std::string_view text;  // view into the lexed source
    size_t begin = 0;       // byte offsets into the source
    size_t end = 0;
    int line = 0;   // logical line (linemarker-adjusted when enabled)
    int file = 0;   // index into LexResult::files
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<std::string> files;  // [0] is the primary file
    bool balanced = true;            // braces/parens balanced at EOF
};

// honor_linemarkers: treat `# <line> "<file>"` lines as position updates
// (preprocessed input) instead of ordinary preprocessor tokens.
LexResult lex(std::string_view src, std::string_view primary_file,
              bool honor_linemarkers);

bool is_keyword(std::string_view ident);

// Index of the token matching the opener at `open_index` ('(' '{' '['),
// or npos when unbalanced.
size_t match_forward(const std::vector<Token>& toks, size_t open_index);

constexpr size_t npos = static_cast<size_t>(-1);

}  // namespace nlverify::clex
