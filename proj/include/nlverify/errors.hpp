#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlverify {

struct FileNotFoundError : std::runtime_error {
    explicit FileNotFoundError(const std::string& path)
        : std::runtime_error("file not found: " + path) {}
};

struct MalformedDatabaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Collects every violated field path before failing.
struct SchemaError : std::runtime_error {
    std::vector<std::string> paths;
    explicit SchemaError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), paths(std::move(violations)) {}

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "schema violation:";
        for (const auto& p : v) out += "\n  " + p;
        return out;
    }
};

struct StoreIOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JsonExtractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContextOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string k, const std::string& msg)
        : std::runtime_error("config key '" + k + "': " + msg), key(std::move(k)) {}
};

struct UnknownPassError : std::runtime_error {
    explicit UnknownPassError(const std::string& pass)
        : std::runtime_error("unknown pass: " + pass) {}
};

}  // namespace nlverify
