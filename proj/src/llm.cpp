#include "nlverify/llm.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "nlverify/errors.hpp"
#include "nlverify/util.hpp"

namespace nlverify {

void ProviderConfig::check() const {
    if (max_retries < 0) throw ConfigError("max_retries", "must be >= 0");
    if (timeout_seconds <= 0) throw ConfigError("timeout", "must be > 0");
    if (max_inflight < 1) throw ConfigError("max_inflight", "must be >= 1");
    if (temperature < 0) throw ConfigError("temperature", "must be >= 0");
}

// ---- JSON extraction -----------------------------------------------------------

namespace {

std::optional<std::string> fenced_block(const std::string& text) {
    size_t open = text.find("```");
    if (open == std::string::npos) return std::nullopt;
    size_t body = text.find('\n', open);
    if (body == std::string::npos) return std::nullopt;
    size_t close = text.find("```", body);
    if (close == std::string::npos) return std::nullopt;
    return text.substr(body + 1, close - body - 1);
}

std::optional<std::string> balanced_object(const std::string& text) {
    size_t start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false, escape = false;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escape) escape = false;
            else if (c == '\\') escape = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

std::string repair_json(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false, escape = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escape) {
                escape = false;
                out += c;
            } else if (c == '\\') {
                escape = true;
                out += c;
            } else if (c == '"') {
                in_string = false;
                out += c;
            } else if (static_cast<unsigned char>(c) < 0x20) {
                // unescaped control character inside a string
                if (c == '\n') out += "\\n";
                else if (c == '\t') out += "\\t";
                else if (c == '\r') out += "\\r";
            } else {
                out += c;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        if (c == ',') {
            size_t j = i + 1;
            while (j < text.size() &&
                   std::isspace(static_cast<unsigned char>(text[j])))
                ++j;
            if (j < text.size() && (text[j] == '}' || text[j] == ']'))
                continue;  // trailing comma
        }
        out += c;
    }
    return out;
}

}  // namespace

nlohmann::json extract_json(const std::string& text) {
    std::string candidate;
    if (auto fenced = fenced_block(text)) {
        if (auto obj = balanced_object(*fenced)) candidate = *obj;
    }
    if (candidate.empty()) {
        if (auto obj = balanced_object(text)) candidate = *obj;
    }
    if (candidate.empty())
        throw JsonExtractError("no JSON object found in completion");

    auto parsed = nlohmann::json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded()) return parsed;

    parsed = nlohmann::json::parse(repair_json(candidate), nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    throw JsonExtractError("completion contains unparseable JSON");
}

// ---- HTTP provider -------------------------------------------------------------

namespace {

class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard lock(m_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int count_;
};

struct SemaphoreGuard {
    Semaphore& sem;
    explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
};

struct ParsedEndpoint {
    std::string origin;  // scheme://host:port
    std::string base_path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    ParsedEndpoint out;
    size_t scheme = endpoint.find("://");
    size_t path_start = scheme == std::string::npos
                            ? endpoint.find('/')
                            : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        out.origin = endpoint;
    } else {
        out.origin = endpoint.substr(0, path_start);
        out.base_path = endpoint.substr(path_start);
        while (!out.base_path.empty() && out.base_path.back() == '/')
            out.base_path.pop_back();
    }
    return out;
}

}  // namespace

struct HttpProvider::Impl {
    ProviderConfig cfg;
    ParsedEndpoint ep;
    Semaphore inflight;
    std::mt19937 rng{0x5eed};
    std::mutex rng_mutex;

    explicit Impl(ProviderConfig c)
        : cfg(std::move(c)), ep(parse_endpoint(cfg.endpoint)), inflight(cfg.max_inflight) {}

    double jitter() {
        std::lock_guard lock(rng_mutex);
        return std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    }
};

HttpProvider::HttpProvider(ProviderConfig cfg) {
    cfg.check();
    if (cfg.endpoint.empty()) throw ConfigError("endpoint", "must be set for the http provider");
    impl_ = std::make_unique<Impl>(std::move(cfg));
}

HttpProvider::~HttpProvider() = default;

CompletionResult HttpProvider::complete(const PromptBundle& bundle) {
    SemaphoreGuard guard(impl_->inflight);
    const ProviderConfig& cfg = impl_->cfg;

    nlohmann::json messages = nlohmann::json::array();
    if (bundle.system) messages.push_back({{"role", "system"}, {"content", *bundle.system}});
    messages.push_back({{"role", "user"}, {"content", bundle.user}});
    nlohmann::json body = {
        {"model", cfg.model}, {"messages", messages}, {"temperature", cfg.temperature}};
    const std::string payload = body.dump();

    httplib::Client client(impl_->ep.origin);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(cfg.timeout_seconds * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<int>(cfg.timeout_seconds * 1000)));
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const std::string path = impl_->ep.base_path + "/chat/completions";
    std::string last_error;

    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = cfg.backoff_base_seconds * std::pow(2.0, attempt - 1);
            delay += delay * impl_->jitter();
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderError("HTTP " + std::to_string(res->status) + " from " +
                                cfg.endpoint + ": " + res->body.substr(0, 200));
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") ||
            parsed["choices"].empty())
            throw ProviderError("malformed completion response from " + cfg.endpoint);
        CompletionResult result;
        result.text = parsed["choices"][0]["message"].value("content", "");
        result.prompt_chars = payload.size();
        result.completion_chars = result.text.size();
        result.attempts = attempt + 1;
        return result;
    }
    throw ProviderError("exhausted " + std::to_string(cfg.max_retries + 1) +
                        " attempts against " + cfg.endpoint + " (" + last_error + ")");
}

void HttpProvider::preflight() {
    httplib::Client client(impl_->ep.origin);
    client.set_connection_timeout(std::chrono::seconds(2));
    client.set_read_timeout(std::chrono::seconds(2));
    auto res = client.Get(impl_->ep.base_path + "/models");
    if (!res)
        throw ProviderError("endpoint " + impl_->cfg.endpoint +
                            " is unreachable: " + httplib::to_string(res.error()));
}

std::shared_ptr<Provider> make_provider(const std::string& kind,
                                        const ProviderConfig& cfg) {
    if (kind == "rule") return std::make_shared<RuleProvider>();
    if (kind == "http") return std::make_shared<HttpProvider>(cfg);
    throw ConfigError("provider", "unknown provider '" + kind + "' (expected rule|http)");
}

CompletionResult complete(const ProviderConfig& cfg, const PromptBundle& bundle) {
    HttpProvider provider(cfg);
    return provider.complete(bundle);
}

}  // namespace nlverify
