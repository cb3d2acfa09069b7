#pragma once

#include <string>
#include <vector>

#include "nlverify/extract.hpp"

namespace nlverify {

enum class BoundaryKind { IfElse, SwitchCase, LoopBody, SequentialChunk };

const char* boundary_kind_name(BoundaryKind k);

struct Block {
    std::string parent;
    int index = 0;
    std::string source;
    BoundaryKind boundary_kind = BoundaryKind::SequentialChunk;
    bool oversized = false;  // single unsplittable piece above budget
};

// Splits fn.body into blocks of at most `budget` characters where a syntax
// boundary permits, preferring top-level if/else arms, switch cases, and loop
// bodies, falling back to statement-sequence chunks. Concatenating the block
// sources in index order reproduces fn.body byte-exactly.
std::vector<Block> split_function_blocks(const FunctionRecord& fn, size_t budget);

// Removes `/* BLOCK n: ... */` summary comment lines inserted by the block
// prompt renderer; inverse of that insertion.
std::string strip_block_comments(const std::string& text);

}  // namespace nlverify
