#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nlverify {

struct CompileCommand {
    std::string directory;
    std::string file;
    std::vector<std::string> arguments;  // normalized: command strings are tokenized
};

// Loads a compile_commands.json array. Throws FileNotFoundError or
// MalformedDatabaseError; both abort the run.
std::vector<CompileCommand> load_compilation_db(const std::string& path);

constexpr const char* kUnresolvedCallee = "UNRESOLVED";

struct FunctionRecord {
    std::string name;
    std::string signature;  // declarator text up to the closing ')'
    std::vector<std::pair<std::string, std::string>> params;  // (name, declared type)
    std::string file_path;
    int line_start = 0;  // 1-based inclusive
    int line_end = 0;
    std::string body;  // full definition text; empty for external stubs
    bool is_external = false;
    std::set<std::string> lib_attrs;

    bool has_param(const std::string& n) const {
        for (const auto& [pname, _] : params)
            if (pname == n) return true;
        return false;
    }
};

struct CallsiteRecord {
    std::string caller;
    std::string callee_name;  // kUnresolvedCallee when indirect
    std::vector<std::string> arg_exprs;
    int line = 0;
    bool is_indirect = false;
};

struct StructField {
    std::string name;
    std::string type_text;
    std::optional<long> byte_offset;  // present only when the layout is computable
};

struct TypeContext {
    std::map<std::string, std::string> typedefs;
    std::map<std::string, std::vector<StructField>> structs;
    std::map<std::string, long> sizeof_values;
    std::map<std::string, std::string> macros;

    void merge(const TypeContext& other);
};

struct TranslationUnit {
    std::vector<FunctionRecord> functions;
    std::vector<CallsiteRecord> callsites;
    TypeContext types;
    bool preprocess_fallback = false;  // preprocess requested but compiler failed
};

// Extracts one translation unit. Throws ParseError when the file cannot be
// parsed structurally; callers report and skip the file.
TranslationUnit extract_translation_unit(const CompileCommand& cmd, bool preprocess);

// Parses C source text directly (no compilation database); used by tests and
// by the bench harness, which gets bare .c/.i files.
TranslationUnit extract_source(const std::string& source, const std::string& file_path);

struct Program {
    std::vector<FunctionRecord> functions;
    std::vector<CallsiteRecord> callsites;
    TypeContext types;
    std::vector<std::string> skipped_files;  // files that failed to parse

    const FunctionRecord* find(const std::string& name) const {
        for (const auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }
};

// Extracts every translation unit in the database, skipping unparseable files,
// and merges results deterministically by (file_path, line_span).
Program extract_program(const std::vector<CompileCommand>& commands, bool preprocess);
Program extract_files(const std::vector<std::string>& paths);

// (name, declared type) pairs from a declarator like `int f(char *p, size_t n)`.
std::vector<std::pair<std::string, std::string>> parse_signature_params(
    const std::string& signature);

}  // namespace nlverify
