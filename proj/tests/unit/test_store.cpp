#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "nlverify/errors.hpp"
#include "nlverify/summaries.hpp"

using namespace nlverify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string temp_store(const std::string& name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove(p);
    return p.string();
}

SummaryRecord record_with(const std::string& desc) {
    return SummaryRecord{Pass::Alloc,
                         json{{"function", "f"},
                              {"description", desc},
                              {"allocations", json::array()},
                              {"parameters", json::object()},
                              {"buffer_size_pairs", json::array()}}};
}

}  // namespace

TEST_CASE("lookup of a never-written key is empty") {
    SummaryStore store(temp_store("st_empty.jsonl"));
    CHECK_FALSE(store.lookup({"f", "alloc", "h1"}).has_value());
}

TEST_CASE("upsert then lookup returns the record") {
    SummaryStore store(temp_store("st_rt.jsonl"));
    auto prev = store.upsert({"f", "alloc", "h1"}, record_with("v1"));
    CHECK_FALSE(prev.has_value());
    auto got = store.lookup({"f", "alloc", "h1"});
    REQUIRE(got.has_value());
    CHECK(got->data["description"] == "v1");
}

TEST_CASE("second upsert wins and returns the first") {
    SummaryStore store(temp_store("st_lww.jsonl"));
    store.upsert({"f", "alloc", "h1"}, record_with("v1"));
    auto prev = store.upsert({"f", "alloc", "h1"}, record_with("v2"));
    REQUIRE(prev.has_value());
    CHECK(prev->data["description"] == "v1");
    CHECK(store.lookup({"f", "alloc", "h1"})->data["description"] == "v2");
}

TEST_CASE("reopen preserves records byte-identically") {
    std::string path = temp_store("st_dur.jsonl");
    json payload;
    {
        SummaryStore store(path);
        store.upsert({"f", "alloc", "h1"}, record_with("v1"));
        store.upsert({"f", "alloc", "h2"}, record_with("v2"));
        store.upsert({"g", "free", "h3"},
                     SummaryRecord{Pass::Free,
                                   json{{"function", "g"},
                                        {"description", "frees"},
                                        {"frees", json::array()},
                                        {"resource_releases", json::array()}}});
        payload = store.lookup({"f", "alloc", "h2"})->data;
    }
    SummaryStore reopened(path);
    CHECK(reopened.lookup({"f", "alloc", "h1"})->data["description"] == "v1");
    CHECK(reopened.lookup({"f", "alloc", "h2"})->data.dump() == payload.dump());
    CHECK(reopened.latest("f", Pass::Alloc)->data["description"] == "v2");
    CHECK(reopened.latest("g", Pass::Free).has_value());
}

TEST_CASE("unwritable store path raises StoreIO") {
    SummaryStore store;
    CHECK_THROWS_AS(store.upsert({"f", "alloc", "h"}, record_with("v")), StoreIOError);
    SummaryStore bad("/nonexistent-dir/store.jsonl");
    CHECK_THROWS_AS(bad.upsert({"f", "alloc", "h"}, record_with("v")), StoreIOError);
}

TEST_CASE("corrupt lines are skipped on load") {
    std::string path = temp_store("st_corrupt.jsonl");
    {
        SummaryStore store(path);
        store.upsert({"f", "alloc", "h1"}, record_with("v1"));
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "{not json\n";
    }
    SummaryStore reopened(path);
    CHECK(reopened.lookup({"f", "alloc", "h1"}).has_value());
}

TEST_CASE("concurrent writers serialize cleanly") {
    std::string path = temp_store("st_conc.jsonl");
    SummaryStore store(path);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&store, t] {
            for (int i = 0; i < 25; ++i)
                store.upsert({"f" + std::to_string(t), "alloc", "h" + std::to_string(i)},
                             record_with("v" + std::to_string(i)));
        });
    }
    for (auto& th : threads) th.join();
    SummaryStore reopened(path);
    for (int t = 0; t < 4; ++t)
        for (int i = 0; i < 25; ++i)
            CHECK(reopened
                      .lookup({"f" + std::to_string(t), "alloc", "h" + std::to_string(i)})
                      .has_value());
}

TEST_CASE("input hash is sensitive to callee summary bytes") {
    FunctionRecord fn;
    fn.name = "caller";
    fn.body = "void caller(void){ g(); }";

    CalleeContext ctx;
    CalleeContext::Entry entry;
    entry.name = "g";
    entry.summaries["alloc"] = json{{"function", "g"}, {"description", "allocates n"}};
    ctx.callees.push_back(entry);

    std::string h1 = input_hash(fn, Pass::Alloc, "tv1", ctx);
    ctx.callees[0].summaries["alloc"]["description"] = "allocates m";
    std::string h2 = input_hash(fn, Pass::Alloc, "tv1", ctx);
    CHECK(h1 != h2);

    // template version changes also invalidate
    ctx.callees[0].summaries["alloc"]["description"] = "allocates n";
    std::string h3 = input_hash(fn, Pass::Alloc, "tv2", ctx);
    CHECK(h1 != h3);
    // and identical inputs rehash identically
    CHECK(h1 == input_hash(fn, Pass::Alloc, "tv1", ctx));
}

TEST_CASE("callee context selects pass-relevant summaries") {
    std::string path = temp_store("st_ctx.jsonl");
    SummaryStore store(path);

    FunctionRecord caller;
    caller.name = "caller";
    caller.body = "void caller(void){ g(); }";
    FunctionRecord callee;
    callee.name = "g";
    callee.body = "void g(void){}";

    CallGraph graph = build_call_graph({caller, callee}, [] {
        CallsiteRecord cs;
        cs.caller = "caller";
        cs.callee_name = "g";
        return std::vector<CallsiteRecord>{cs};
    }());

    store.upsert({"g", "alloc", "h"}, record_with("g alloc"));
    store.upsert({"g", "free", "h"},
                 SummaryRecord{Pass::Free,
                               json{{"function", "g"},
                                    {"description", "g free"},
                                    {"frees", json::array()},
                                    {"resource_releases", json::array()}}});

    auto alloc_ctx = callee_context(store, caller, graph, Pass::Alloc);
    REQUIRE(alloc_ctx.callees.size() == 1);
    CHECK(alloc_ctx.callees[0].summaries.count("alloc") == 1);
    CHECK(alloc_ctx.callees[0].summaries.count("free") == 0);

    auto leak_ctx = callee_context(store, caller, graph, Pass::Leak);
    CHECK(leak_ctx.callees[0].summaries.count("alloc") == 1);
    CHECK(leak_ctx.callees[0].summaries.count("free") == 1);

    FunctionRecord loner;
    loner.name = "loner";
    loner.body = "void loner(void){}";
    CHECK(callee_context(store, loner, graph, Pass::Alloc).empty());
}
