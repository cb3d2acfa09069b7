#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nlverify/config.hpp"
#include "nlverify/errors.hpp"

using namespace nlverify;
namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& content) {
    fs::path p = fs::temp_directory_path() / "nlv_config_test.conf";
    std::ofstream(p) << content;
    return p.string();
}

}  // namespace

TEST_CASE("defaults are documented values") {
    RunConfig cfg = load_run_config("");
    CHECK(cfg.provider == "rule");
    CHECK(cfg.pipeline.block_budget == 24000);
    CHECK(cfg.pipeline.fixpoint_bound == 3);
    CHECK(cfg.pipeline.baseline_context_budget == 120000);
    CHECK(cfg.pipeline.entry_function == "main");
    CHECK(cfg.provider_cfg.temperature == 0.0);
    CHECK_NOTHROW(cfg.check());
}

TEST_CASE("file values override defaults, flags override files") {
    std::string path = write_config(
        "# comment\n"
        "block_budget = 10000\n"
        "model = \"test-model\"\n"
        "entry = start\n");
    RunConfig cfg = load_run_config(path);
    CHECK(cfg.pipeline.block_budget == 10000);
    CHECK(cfg.provider_cfg.model == "test-model");
    CHECK(cfg.pipeline.entry_function == "start");

    // the CLI applies flags after loading; a flag-set budget wins
    apply_config_key(cfg, "block_budget", "5000");
    CHECK(cfg.pipeline.block_budget == 5000);
}

TEST_CASE("environment sits between file and flags") {
    std::string path = write_config("block_budget = 10000\n");
    setenv("NLVERIFY_BLOCK_BUDGET", "7000", 1);
    RunConfig cfg = load_run_config(path);
    unsetenv("NLVERIFY_BLOCK_BUDGET");
    CHECK(cfg.pipeline.block_budget == 7000);
}

TEST_CASE("negative fixpoint bound is a ConfigError naming the key") {
    RunConfig cfg;
    try {
        apply_config_key(cfg, "fixpoint_bound", "-2");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "fixpoint_bound");
    }
}

TEST_CASE("unknown keys are rejected") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_config_key(cfg, "blockbudget", "1"), ConfigError);
}

TEST_CASE("malformed numerics are rejected") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_config_key(cfg, "temperature", "warm"), ConfigError);
    CHECK_THROWS_AS(apply_config_key(cfg, "jobs", "2.5"), ConfigError);
}

TEST_CASE("identical inputs produce identical configs") {
    std::string path = write_config("fixpoint_bound = 5\nprovider = rule\n");
    RunConfig a = load_run_config(path);
    RunConfig b = load_run_config(path);
    CHECK(a.pipeline.fixpoint_bound == b.pipeline.fixpoint_bound);
    CHECK(a.provider == b.provider);
    CHECK(a.store_path == b.store_path);
}

TEST_CASE("missing config file is an error") {
    CHECK_THROWS_AS(load_run_config("/nonexistent.conf"), FileNotFoundError);
}

TEST_CASE("cache mode parsing") {
    RunConfig cfg;
    apply_config_key(cfg, "cache_mode", "instructions");
    CHECK(cfg.pipeline.cache_mode == CacheMode::Instructions);
    CHECK_THROWS_AS(apply_config_key(cfg, "cache_mode", "aggressive"), ConfigError);
}
