#pragma once

#include <atomic>
#include <memory>
#include <string>

#include <json.hpp>

#include "nlverify/prompts.hpp"

namespace nlverify {

struct ProviderConfig {
    std::string endpoint;  // OpenAI-compatible base URL, e.g. http://host:port/v1
    std::string model = "default";
    std::string api_key_env = "NLVERIFY_API_KEY";
    double temperature = 0.0;
    int max_retries = 2;
    double timeout_seconds = 60.0;
    int max_inflight = 4;
    double backoff_base_seconds = 1.0;  // exponential, factor 2, with jitter

    void check() const;  // throws ConfigError on out-of-range fields
};

struct CompletionResult {
    std::string text;
    size_t prompt_chars = 0;
    size_t completion_chars = 0;
    int attempts = 0;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const PromptBundle& bundle) = 0;
    virtual std::string name() const = 0;
    // Startup reachability check; throws ProviderError when the backend is
    // unreachable. Offline providers accept silently.
    virtual void preflight() {}
};

// Deterministic offline provider: shallow lexical rules over the prompt's
// embedded source. Exercises pipeline mechanics, not analysis quality.
class RuleProvider : public Provider {
public:
    CompletionResult complete(const PromptBundle& bundle) override;
    std::string name() const override { return "rule"; }
};

// Client for an OpenAI-compatible /chat/completions endpoint. Retries
// transport errors and HTTP 429/5xx with exponential backoff; concurrent
// requests are bounded by max_inflight.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig cfg);
    ~HttpProvider() override;
    CompletionResult complete(const PromptBundle& bundle) override;
    std::string name() const override { return "http"; }
    void preflight() override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Wrapper that counts completions; the driver reports provider_calls through
// it and the cache-idempotence tests assert on it.
class CountingProvider : public Provider {
public:
    explicit CountingProvider(std::shared_ptr<Provider> inner)
        : inner_(std::move(inner)) {}
    CompletionResult complete(const PromptBundle& bundle) override {
        ++calls_;
        return inner_->complete(bundle);
    }
    std::string name() const override { return inner_->name(); }
    int calls() const { return calls_.load(); }

private:
    std::shared_ptr<Provider> inner_;
    std::atomic<int> calls_{0};
};

std::shared_ptr<Provider> make_provider(const std::string& kind,
                                        const ProviderConfig& cfg);

// Convenience form matching the one-shot call signature.
CompletionResult complete(const ProviderConfig& cfg, const PromptBundle& bundle);

// Strips prose and code fences, parses the first balanced top-level JSON
// object; one repair attempt removes trailing commas and unescaped control
// characters. Throws JsonExtractError.
nlohmann::json extract_json(const std::string& text);

}  // namespace nlverify
