#include "nlverify/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

namespace {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "provider", "endpoint", "model", "api_key_env", "temperature",
        "max_retries", "timeout_seconds", "max_inflight", "backoff_base_seconds",
        "block_budget", "fixpoint_bound", "baseline_context_budget", "store_path",
        "template_dir", "entry", "cache_mode", "log_level", "jobs"};
    return keys;
}

long to_long(const std::string& key, const std::string& value) {
    try {
        size_t idx = 0;
        long v = std::stol(value, &idx);
        if (idx != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        size_t idx = 0;
        double v = std::stod(value, &idx);
        if (idx != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw ConfigError(key, "expected a number, got '" + value + "'");
    }
}

}  // namespace

void RunConfig::check() const {
    if (provider != "rule" && provider != "http")
        throw ConfigError("provider", "expected rule|http, got '" + provider + "'");
    provider_cfg.check();
    if (pipeline.block_budget == 0)
        throw ConfigError("block_budget", "must be positive");
    if (pipeline.fixpoint_bound < 1)
        throw ConfigError("fixpoint_bound", "must be >= 1");
    if (pipeline.baseline_context_budget == 0)
        throw ConfigError("baseline_context_budget", "must be positive");
    if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
    if (log_level != "debug" && log_level != "info" && log_level != "warn" &&
        log_level != "error")
        throw ConfigError("log_level", "expected debug|info|warn|error");
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno),
                              "expected key = value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        out[key] = value;
    }
    return out;
}

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "provider") cfg.provider = value;
    else if (key == "endpoint") cfg.provider_cfg.endpoint = value;
    else if (key == "model") cfg.provider_cfg.model = value;
    else if (key == "api_key_env") cfg.provider_cfg.api_key_env = value;
    else if (key == "temperature") cfg.provider_cfg.temperature = to_double(key, value);
    else if (key == "max_retries")
        cfg.provider_cfg.max_retries = static_cast<int>(to_long(key, value));
    else if (key == "timeout_seconds")
        cfg.provider_cfg.timeout_seconds = to_double(key, value);
    else if (key == "max_inflight")
        cfg.provider_cfg.max_inflight = static_cast<int>(to_long(key, value));
    else if (key == "backoff_base_seconds")
        cfg.provider_cfg.backoff_base_seconds = to_double(key, value);
    else if (key == "block_budget") {
        long v = to_long(key, value);
        if (v <= 0) throw ConfigError(key, "must be positive");
        cfg.pipeline.block_budget = static_cast<size_t>(v);
    } else if (key == "fixpoint_bound") {
        long v = to_long(key, value);
        if (v < 1) throw ConfigError(key, "must be >= 1");
        cfg.pipeline.fixpoint_bound = static_cast<int>(v);
    } else if (key == "baseline_context_budget") {
        long v = to_long(key, value);
        if (v <= 0) throw ConfigError(key, "must be positive");
        cfg.pipeline.baseline_context_budget = static_cast<size_t>(v);
    } else if (key == "store_path") cfg.store_path = value;
    else if (key == "template_dir") cfg.template_dir = value;
    else if (key == "entry") cfg.pipeline.entry_function = value;
    else if (key == "cache_mode") {
        auto mode = cache_mode_from_name(value);
        if (!mode) throw ConfigError(key, "expected none|instructions|source");
        cfg.pipeline.cache_mode = *mode;
    } else if (key == "log_level") cfg.log_level = value;
    else if (key == "jobs") cfg.jobs = static_cast<int>(to_long(key, value));
    else throw ConfigError(key, "unknown configuration key");
}

RunConfig load_run_config(const std::string& file_path) {
    RunConfig cfg;

    std::string path = file_path;
    if (path.empty()) {
        if (const char* env = std::getenv("NLVERIFY_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) {
        for (const auto& [key, value] : parse_config_file(path))
            apply_config_key(cfg, key, value);
    }

    // Environment overrides: NLVERIFY_<KEY>.
    for (const auto& key : known_keys()) {
        std::string env_name = "NLVERIFY_";
        for (char c : key) env_name += static_cast<char>(std::toupper(c));
        if (const char* v = std::getenv(env_name.c_str()); v && *v)
            apply_config_key(cfg, key, v);
    }
    return cfg;
}

}  // namespace nlverify
