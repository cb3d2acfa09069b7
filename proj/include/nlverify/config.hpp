#pragma once

#include <map>
#include <string>

#include "nlverify/driver.hpp"
#include "nlverify/llm.hpp"

namespace nlverify {

// Effective run configuration. Precedence: flags > environment > config file
// > defaults. The config file is a flat key = value file; environment
// variables use the NLVERIFY_<KEY> spelling.
struct RunConfig {
    std::string provider = "rule";  // rule | http
    ProviderConfig provider_cfg;
    PipelineConfig pipeline;
    std::string store_path = "nlverify-store.jsonl";
    std::string template_dir;
    std::string log_level = "warn";
    int jobs = 1;

    void check() const;  // throws ConfigError
};

// Parses a flat `key = value` file ('#' comments, optional quotes).
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Layered load. `file_path` may be empty (then $NLVERIFY_CONFIG is consulted).
// Flag overrides are applied by the CLI after this returns.
RunConfig load_run_config(const std::string& file_path = "");

// Applies one key (config-file spelling) to the config; throws ConfigError on
// unknown keys or bad values.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace nlverify
