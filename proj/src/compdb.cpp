#include <fstream>

#include <json.hpp>

#include "nlverify/errors.hpp"
#include "nlverify/extract.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

namespace {

// Shell-style splitting for the "command" form: whitespace-separated tokens
// with single/double quotes and backslash escapes.
std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> out;
    std::string cur;
    bool in_token = false;
    char quote = 0;
    for (size_t i = 0; i < cmd.size(); ++i) {
        char c = cmd[i];
        if (quote) {
            if (c == quote) {
                quote = 0;
            } else if (c == '\\' && quote == '"' && i + 1 < cmd.size()) {
                cur += cmd[++i];
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
            continue;
        }
        if (c == '\\' && i + 1 < cmd.size()) {
            cur += cmd[++i];
            in_token = true;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) {
                out.push_back(cur);
                cur.clear();
                in_token = false;
            }
            continue;
        }
        cur += c;
        in_token = true;
    }
    if (in_token) out.push_back(cur);
    return out;
}

}  // namespace

std::vector<CompileCommand> load_compilation_db(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError(path);

    nlohmann::json db;
    try {
        in >> db;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDatabaseError("compilation database " + path +
                                     " is not valid JSON: " + e.what());
    }
    if (!db.is_array())
        throw MalformedDatabaseError("compilation database " + path +
                                     " is not a JSON array");

    std::vector<CompileCommand> out;
    out.reserve(db.size());
    size_t index = 0;
    for (const auto& entry : db) {
        if (!entry.is_object())
            throw MalformedDatabaseError("entry " + std::to_string(index) +
                                         " is not an object");
        CompileCommand cc;
        cc.directory = entry.value("directory", std::string());
        if (!entry.contains("file") || !entry["file"].is_string() ||
            entry["file"].get<std::string>().empty())
            throw MalformedDatabaseError("entry " + std::to_string(index) +
                                         " is missing a non-empty \"file\"");
        cc.file = entry["file"].get<std::string>();

        const bool has_cmd = entry.contains("command");
        const bool has_args = entry.contains("arguments");
        if (has_cmd == has_args)
            throw MalformedDatabaseError(
                "entry " + std::to_string(index) +
                " must have exactly one of \"command\" or \"arguments\"");
        if (has_cmd) {
            if (!entry["command"].is_string())
                throw MalformedDatabaseError("entry " + std::to_string(index) +
                                             ": \"command\" must be a string");
            cc.arguments = split_command(entry["command"].get<std::string>());
        } else {
            if (!entry["arguments"].is_array())
                throw MalformedDatabaseError("entry " + std::to_string(index) +
                                             ": \"arguments\" must be an array");
            for (const auto& a : entry["arguments"]) {
                if (!a.is_string())
                    throw MalformedDatabaseError("entry " + std::to_string(index) +
                                                 ": non-string argument");
                cc.arguments.push_back(a.get<std::string>());
            }
        }
        out.push_back(std::move(cc));
        ++index;
    }
    return out;
}

}  // namespace nlverify
