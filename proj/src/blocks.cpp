#include "nlverify/blocks.hpp"

#include <algorithm>
#include <cassert>

#include "clex.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

using clex::Token;
using Kind = clex::Token::Kind;

const char* boundary_kind_name(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::IfElse: return "if_else";
        case BoundaryKind::SwitchCase: return "switch_case";
        case BoundaryKind::LoopBody: return "loop_body";
        case BoundaryKind::SequentialChunk: return "sequential_chunk";
    }
    return "sequential_chunk";
}

namespace {

bool is_punct(const Token& t, std::string_view p) {
    return t.kind == Kind::Punct && t.text == p;
}
bool is_ident(const Token& t, std::string_view name) {
    return t.kind == Kind::Ident && t.text == name;
}

struct Piece {
    size_t begin;  // byte offsets into the body text
    size_t end;
    BoundaryKind kind;
};

struct Splitter {
    const std::vector<Token>& toks;
    std::string_view body;
    size_t budget;
    std::vector<Piece> pieces;

    // Consumes one statement starting at token index i (within [i, limit)),
    // returning the index one past its last token.
    size_t statement_end(size_t i, size_t limit) const {
        if (i >= limit) return limit;
        const Token& t = toks[i];
        if (t.kind == Kind::Preprocessor) return i + 1;
        if (is_punct(t, "{")) {
            size_t close = clex::match_forward(toks, i);
            return close == clex::npos ? limit : std::min(close + 1, limit);
        }
        if (is_ident(t, "if")) return if_chain_end(i, limit);
        if (is_ident(t, "for") || is_ident(t, "while")) {
            size_t j = i + 1;
            if (j < limit && is_punct(toks[j], "(")) {
                size_t rp = clex::match_forward(toks, j);
                if (rp == clex::npos) return limit;
                return statement_end(rp + 1, limit);
            }
            return simple_end(i, limit);
        }
        if (is_ident(t, "do")) {
            size_t after_body = statement_end(i + 1, limit);
            // expect: while ( ... ) ;
            size_t j = after_body;
            if (j < limit && is_ident(toks[j], "while") && j + 1 < limit &&
                is_punct(toks[j + 1], "(")) {
                size_t rp = clex::match_forward(toks, j + 1);
                if (rp != clex::npos && rp + 1 < limit && is_punct(toks[rp + 1], ";"))
                    return rp + 2;
                if (rp != clex::npos) return rp + 1;
            }
            return after_body;
        }
        if (is_ident(t, "switch")) {
            size_t j = i + 1;
            if (j < limit && is_punct(toks[j], "(")) {
                size_t rp = clex::match_forward(toks, j);
                if (rp == clex::npos) return limit;
                return statement_end(rp + 1, limit);
            }
            return simple_end(i, limit);
        }
        return simple_end(i, limit);
    }

    size_t if_chain_end(size_t i, size_t limit) const {
        // i points at `if`
        size_t j = i + 1;
        if (j >= limit || !is_punct(toks[j], "(")) return simple_end(i, limit);
        size_t rp = clex::match_forward(toks, j);
        if (rp == clex::npos) return limit;
        size_t after_then = statement_end(rp + 1, limit);
        if (after_then < limit && is_ident(toks[after_then], "else")) {
            size_t k = after_then + 1;
            if (k < limit && is_ident(toks[k], "if")) return if_chain_end(k, limit);
            return statement_end(k, limit);
        }
        return after_then;
    }

    // Plain statement: runs to ';' at nesting depth 0.
    size_t simple_end(size_t i, size_t limit) const {
        int depth = 0;
        for (size_t j = i; j < limit; ++j) {
            if (toks[j].kind != Kind::Punct) continue;
            std::string_view p = toks[j].text;
            if (p == "(" || p == "[" || p == "{") ++depth;
            else if (p == ")" || p == "]" || p == "}") --depth;
            else if (p == ";" && depth == 0) return j + 1;
        }
        return limit;
    }

    size_t stmt_bytes(size_t i, size_t end_tok) const {
        if (i >= end_tok) return 0;
        return toks[end_tok - 1].end - toks[i].begin;
    }

    // Emits pieces for one statement; cursor is the byte offset where the next
    // piece must begin (whitespace between statements rides with the piece
    // that follows it).
    void emit_statement(size_t i, size_t end_tok, size_t& cursor) {
        size_t stmt_end_byte = toks[end_tok - 1].end;
        size_t size = stmt_end_byte - cursor;
        const Token& t = toks[i];

        if (size <= budget) {
            BoundaryKind k = BoundaryKind::SequentialChunk;
            if (is_ident(t, "if")) k = BoundaryKind::IfElse;
            else if (is_ident(t, "switch")) k = BoundaryKind::SwitchCase;
            else if (is_ident(t, "for") || is_ident(t, "while") || is_ident(t, "do"))
                k = BoundaryKind::LoopBody;
            pieces.push_back({cursor, stmt_end_byte, k});
            cursor = stmt_end_byte;
            return;
        }

        if (is_ident(t, "if")) {
            split_if_chain(i, end_tok, cursor);
            return;
        }
        if (is_ident(t, "switch")) {
            split_switch(i, end_tok, cursor);
            return;
        }
        if (is_ident(t, "for") || is_ident(t, "while") || is_ident(t, "do")) {
            split_loop(i, end_tok, cursor);
            return;
        }
        if (is_punct(t, "{")) {
            size_t close = clex::match_forward(toks, i);
            if (close != clex::npos && close < end_tok) {
                std::vector<size_t> cuts;
                size_t j = i + 1;
                bool first = true;
                while (j < close) {
                    if (!first) cuts.push_back(toks[j].begin);
                    first = false;
                    j = statement_end(j, close);
                }
                emit_cut_pieces(cursor, stmt_end_byte, cuts,
                                BoundaryKind::SequentialChunk);
                return;
            }
        }
        // Unsplittable oversized statement: one oversized sequential chunk.
        pieces.push_back({cursor, stmt_end_byte, BoundaryKind::SequentialChunk});
        cursor = stmt_end_byte;
    }

    // Cuts an if/else chain at each top-level `else`.
    void split_if_chain(size_t i, size_t end_tok, size_t& cursor) {
        std::vector<size_t> arm_starts;  // token indices of `else`
        size_t pos = i;
        while (true) {
            if (pos >= end_tok || !is_ident(toks[pos], "if")) break;
            size_t lp = pos + 1;
            if (lp >= end_tok || !is_punct(toks[lp], "(")) break;
            size_t rp = clex::match_forward(toks, lp);
            if (rp == clex::npos) break;
            size_t after_then = statement_end(rp + 1, end_tok);
            if (after_then < end_tok && is_ident(toks[after_then], "else")) {
                arm_starts.push_back(after_then);
                if (after_then + 1 < end_tok && is_ident(toks[after_then + 1], "if")) {
                    pos = after_then + 1;
                    continue;
                }
            }
            break;
        }
        std::vector<size_t> cuts;  // byte offsets
        for (size_t e : arm_starts) cuts.push_back(toks[e].begin);
        emit_cut_pieces(cursor, toks[end_tok - 1].end, cuts, BoundaryKind::IfElse);
    }

    // Cuts a switch at each `case`/`default` label directly inside its braces;
    // the switch header rides with the first case group.
    void split_switch(size_t i, size_t end_tok, size_t& cursor) {
        size_t lb = i;
        while (lb < end_tok && !is_punct(toks[lb], "{")) ++lb;
        if (lb >= end_tok) {
            pieces.push_back({cursor, toks[end_tok - 1].end, BoundaryKind::SequentialChunk});
            cursor = toks[end_tok - 1].end;
            return;
        }
        size_t rb = clex::match_forward(toks, lb);
        if (rb == clex::npos || rb >= end_tok) rb = end_tok - 1;

        std::vector<size_t> cuts;
        int depth = 0;
        bool first_label = true;
        for (size_t j = lb + 1; j < rb; ++j) {
            if (toks[j].kind == Kind::Punct) {
                std::string_view p = toks[j].text;
                if (p == "{" || p == "(" || p == "[") ++depth;
                else if (p == "}" || p == ")" || p == "]") --depth;
                continue;
            }
            if (depth == 0 && (is_ident(toks[j], "case") || is_ident(toks[j], "default"))) {
                // consecutive labels (fallthrough groups) stay together
                if (j > 0 && is_punct(toks[j - 1], ":")) continue;
                if (first_label) {
                    first_label = false;
                    continue;  // header + first group merge
                }
                cuts.push_back(toks[j].begin);
            }
        }
        emit_cut_pieces(cursor, toks[end_tok - 1].end, cuts, BoundaryKind::SwitchCase);
    }

    // Splits a loop at the top-level statements of its body; header and
    // closing brace ride with the first and last inner piece.
    void split_loop(size_t i, size_t end_tok, size_t& cursor) {
        size_t lb = i;
        while (lb < end_tok && !is_punct(toks[lb], "{")) ++lb;
        if (lb >= end_tok) {
            pieces.push_back({cursor, toks[end_tok - 1].end, BoundaryKind::SequentialChunk});
            cursor = toks[end_tok - 1].end;
            return;
        }
        size_t rb = clex::match_forward(toks, lb);
        if (rb == clex::npos || rb >= end_tok) rb = end_tok - 1;

        std::vector<size_t> cuts;
        size_t j = lb + 1;
        bool first = true;
        while (j < rb) {
            if (!first) cuts.push_back(toks[j].begin);
            first = false;
            j = statement_end(j, rb);
        }
        emit_cut_pieces(cursor, toks[end_tok - 1].end, cuts, BoundaryKind::LoopBody);
    }

    void emit_cut_pieces(size_t& cursor, size_t end_byte, const std::vector<size_t>& cuts,
                         BoundaryKind kind) {
        size_t start = cursor;
        for (size_t c : cuts) {
            if (c <= start || c >= end_byte) continue;
            pieces.push_back({start, c, kind});
            start = c;
        }
        pieces.push_back({start, end_byte, kind});
        cursor = end_byte;
    }
};

}  // namespace

std::vector<Block> split_function_blocks(const FunctionRecord& fn, size_t budget) {
    std::vector<Block> blocks;
    const std::string& body = fn.body;

    if (body.size() <= budget) {
        blocks.push_back({fn.name, 0, body, BoundaryKind::SequentialChunk, false});
        return blocks;
    }

    clex::LexResult lexed = clex::lex(body, fn.file_path, false);
    const auto& toks = lexed.tokens;

    // Locate the outermost body braces.
    size_t lb = clex::npos;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (is_punct(toks[i], "{")) {
            lb = i;
            break;
        }
    }
    size_t rb = lb == clex::npos ? clex::npos : clex::match_forward(toks, lb);
    if (lb == clex::npos || rb == clex::npos) {
        Block b{fn.name, 0, body, BoundaryKind::SequentialChunk, body.size() > budget};
        if (b.oversized)
            log_warn("function " + fn.name + " cannot be split at syntax boundaries");
        blocks.push_back(std::move(b));
        return blocks;
    }

    Splitter sp{toks, body, budget, {}};
    size_t cursor = 0;  // signature and '{' ride with the first piece
    size_t j = lb + 1;
    std::vector<Piece>& pieces = sp.pieces;
    while (j < rb) {
        size_t e = sp.statement_end(j, rb);
        sp.emit_statement(j, e, cursor);
        j = e;
    }
    if (pieces.empty()) {
        pieces.push_back({0, body.size(), BoundaryKind::SequentialChunk});
    } else {
        pieces.back().end = body.size();  // trailing '}' rides with the last piece
    }
    pieces.front().begin = 0;

    // Greedy packing in source order.
    size_t i = 0;
    int index = 0;
    while (i < pieces.size()) {
        size_t start = pieces[i].begin;
        size_t end = pieces[i].end;
        BoundaryKind kind = pieces[i].kind;
        bool uniform = true;
        size_t k = i + 1;
        while (k < pieces.size() && pieces[k].end - start <= budget) {
            if (pieces[k].kind != kind) uniform = false;
            end = pieces[k].end;
            ++k;
        }
        Block b;
        b.parent = fn.name;
        b.index = index++;
        b.source = body.substr(start, end - start);
        size_t count = k - i;
        b.boundary_kind = (count == 1) ? kind
                          : (uniform ? kind : BoundaryKind::SequentialChunk);
        b.oversized = b.source.size() > budget;
        if (b.oversized)
            log_warn("oversized block " + std::to_string(b.index) + " in " + fn.name +
                     " (" + std::to_string(b.source.size()) + " chars)");
        blocks.push_back(std::move(b));
        i = k;
    }
    return blocks;
}

std::string strip_block_comments(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    const std::string open = "/* BLOCK ";
    while (i < text.size()) {
        bool at_line_start = i == 0 || text[i - 1] == '\n' || out.empty() ||
                             out.back() == '\n';
        if (at_line_start && text.compare(i, open.size(), open) == 0) {
            size_t close = text.find("*/", i);
            if (close != std::string::npos) {
                size_t next = close + 2;
                if (next < text.size() && text[next] == '\n') ++next;
                i = next;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

}  // namespace nlverify
