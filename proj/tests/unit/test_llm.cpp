#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "nlverify/errors.hpp"
#include "nlverify/llm.hpp"

using namespace nlverify;
using nlohmann::json;

TEST_CASE("extract_json handles fenced blocks") {
    CHECK(extract_json("```json\n{\"a\":1}\n```") == json{{"a", 1}});
}

TEST_CASE("extract_json takes the first balanced object out of prose") {
    CHECK(extract_json("Here is the summary: {\"a\":1} hope this helps") ==
          json{{"a", 1}});
}

TEST_CASE("extract_json fails without JSON") {
    CHECK_THROWS_AS(extract_json("no json here"), JsonExtractError);
}

TEST_CASE("extract_json is idempotent on clean JSON") {
    std::string clean = R"({"a":{"b":[1,2,3]},"c":"x"})";
    json first = extract_json(clean);
    CHECK(extract_json(first.dump()) == first);
}

TEST_CASE("extract_json repairs trailing commas and control characters") {
    CHECK(extract_json("{\"a\": [1, 2,], }") == json::parse(R"({"a":[1,2]})"));
    CHECK(extract_json("{\"a\": \"line\nbreak\"}") == json{{"a", "line\nbreak"}});
}

TEST_CASE("extract_json respects braces inside strings") {
    CHECK(extract_json(R"(prefix {"a": "has } brace"} suffix)") ==
          json{{"a", "has } brace"}});
}

TEST_CASE("rule provider is deterministic") {
    PromptBundle bundle;
    bundle.user =
        "You are analyzing C/C++ code to generate memory allocation summaries.\n"
        "## Function to Analyze\n```c\nchar *f(int n) { char *p = malloc(n); return p; }\n```\n\n"
        "Function: f\nSignature: char *f(int n)\nFile: a.c\n";
    RuleProvider provider;
    auto r1 = provider.complete(bundle);
    auto r2 = provider.complete(bundle);
    CHECK(r1.text == r2.text);
    CHECK(r1.attempts == 1);
}

TEST_CASE("rule provider alloc rule matches the documented shape") {
    PromptBundle bundle;
    bundle.user =
        "You are analyzing C/C++ code to generate memory allocation summaries.\n"
        "## Function to Analyze\n```c\nvoid f(int n) { p = malloc(n); }\n```\n\n"
        "Function: f\nSignature: void f(int n)\nFile: a.c\n";
    json out = json::parse(RuleProvider{}.complete(bundle).text);
    REQUIRE(out["allocations"].size() == 1);
    const json& a = out["allocations"][0];
    CHECK(a["type"] == "heap");
    CHECK(a["source"] == "malloc");
    CHECK(a["size_expr"] == "n");
    CHECK(a["returned"] == false);
    CHECK(a["stored_to"] == "p");
    CHECK(a["may_be_null"] == true);
    CHECK(a["size_params"] == json::array({"n"}));
}

TEST_CASE("rule provider memsafe rule emits disallow_null for dereferenced params") {
    PromptBundle bundle;
    bundle.user =
        "You are analyzing C/C++ code to generate safety pre-condition contracts.\n"
        "## Function to Analyze\n```c\nvoid f(int *q) { *q = 0; }\n```\n\n"
        "Function: f\nSignature: void f(int *q)\nFile: a.c\n";
    json out = json::parse(RuleProvider{}.complete(bundle).text);
    REQUIRE(out["contracts"].size() == 1);
    CHECK(out["contracts"][0]["target"] == "q");
    CHECK(out["contracts"][0]["contract_kind"] == "disallow_null");
}

namespace {

struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit MockServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1";
    }
};

std::string ok_body(const std::string& content) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"},
                                                       {"content", content}}}}})}}
        .dump();
}

}  // namespace

TEST_CASE("http provider retries 429 then succeeds") {
    std::atomic<int> hits{0};
    MockServer mock([&](const httplib::Request&, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
        } else {
            res.set_content(ok_body("{\"ok\":true}"), "application/json");
        }
    });

    ProviderConfig cfg;
    cfg.endpoint = mock.endpoint();
    cfg.max_retries = 3;
    cfg.backoff_base_seconds = 0.01;
    HttpProvider provider(cfg);

    PromptBundle bundle;
    bundle.user = "hello";
    auto result = provider.complete(bundle);
    CHECK(result.attempts == 3);
    CHECK(result.text == "{\"ok\":true}");
    CHECK(hits.load() == 3);
}

TEST_CASE("unreachable endpoint with zero retries raises ProviderError") {
    ProviderConfig cfg;
    cfg.endpoint = "http://127.0.0.1:9/v1";  // discard port; nothing listens
    cfg.max_retries = 0;
    cfg.timeout_seconds = 0.5;
    HttpProvider provider(cfg);
    PromptBundle bundle;
    bundle.user = "hello";
    CHECK_THROWS_AS(provider.complete(bundle), ProviderError);
}

TEST_CASE("4xx responses other than 429 fail without retry") {
    std::atomic<int> hits{0};
    MockServer mock([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("unauthorized", "text/plain");
    });
    ProviderConfig cfg;
    cfg.endpoint = mock.endpoint();
    cfg.max_retries = 3;
    cfg.backoff_base_seconds = 0.01;
    HttpProvider provider(cfg);
    PromptBundle bundle;
    bundle.user = "hello";
    CHECK_THROWS_AS(provider.complete(bundle), ProviderError);
    CHECK(hits.load() == 1);
}

TEST_CASE("system messages ride in the request body") {
    std::string seen_body;
    MockServer mock([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        res.set_content(ok_body("{}"), "application/json");
    });
    ProviderConfig cfg;
    cfg.endpoint = mock.endpoint();
    HttpProvider provider(cfg);
    PromptBundle bundle;
    bundle.system = "be terse";
    bundle.user = "hello";
    provider.complete(bundle);
    json body = json::parse(seen_body);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "hello");
    CHECK(body["temperature"] == 0.0);
}

TEST_CASE("in-flight requests never exceed max_inflight") {
    std::atomic<int> current{0};
    std::atomic<int> peak{0};
    MockServer mock([&](const httplib::Request&, httplib::Response& res) {
        int now = ++current;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --current;
        res.set_content(ok_body("{}"), "application/json");
    });

    ProviderConfig cfg;
    cfg.endpoint = mock.endpoint();
    cfg.max_inflight = 2;
    HttpProvider provider(cfg);

    std::vector<std::thread> callers;
    for (int i = 0; i < 8; ++i)
        callers.emplace_back([&] {
            PromptBundle bundle;
            bundle.user = "hello";
            provider.complete(bundle);
        });
    for (auto& t : callers) t.join();
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
}

TEST_CASE("provider config validation") {
    ProviderConfig cfg;
    cfg.max_inflight = 0;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg = ProviderConfig{};
    cfg.timeout_seconds = 0;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg = ProviderConfig{};
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
}
