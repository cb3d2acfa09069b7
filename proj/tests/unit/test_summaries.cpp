#include <doctest.h>

#include "nlverify/errors.hpp"
#include "nlverify/summaries.hpp"

using namespace nlverify;
using nlohmann::json;

namespace {

json minimal_alloc() {
    return {{"function", "f"},
            {"description", "allocates nothing"},
            {"parameters", json::object()},
            {"allocations", json::array()},
            {"buffer_size_pairs", json::array()}};
}

}  // namespace

TEST_CASE("empty allocation summary is valid") {
    auto rec = validate(Pass::Alloc, minimal_alloc());
    CHECK(rec.pass == Pass::Alloc);
    CHECK(rec.data["allocations"].empty());
}

TEST_CASE("memsafe not_freed contract is valid") {
    json raw = {{"function", "g"},
                {"description", "requires live pointer"},
                {"contracts",
                 json::array({{{"target", "p"},
                               {"contract_kind", "not_freed"},
                               {"description", "p must not have been previously freed"}}})}};
    auto rec = validate(Pass::Memsafe, raw);
    CHECK(rec.data["contracts"][0]["contract_kind"] == "not_freed");
}

TEST_CASE("allocation type outside the enum is rejected with a field path") {
    json raw = minimal_alloc();
    raw["allocations"].push_back({{"type", "stack"},
                                  {"source", "alloca"},
                                  {"returned", false},
                                  {"may_be_null", false}});
    try {
        validate(Pass::Alloc, raw);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        REQUIRE(e.paths.size() == 1);
        CHECK(e.paths[0].find("$.allocations[0].type") == 0);
    }
}

TEST_CASE("every violation is reported, not only the first") {
    json raw = {{"function", "f"}};  // missing description and allocations
    try {
        validate(Pass::Alloc, raw);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.paths.size() == 2);
    }
}

TEST_CASE("oversized summaries are rejected") {
    json raw = minimal_alloc();
    raw["description"] = std::string(70 * 1024, 'x');
    CHECK_THROWS_AS(validate(Pass::Alloc, raw), SchemaError);
}

TEST_CASE("condition without conditional flag is a hard error") {
    json raw = {{"function", "f"},
                {"description", "frees"},
                {"frees", json::array({{{"target", "p"},
                                        {"target_kind", "parameter"},
                                        {"deallocator", "free"},
                                        {"conditional", false},
                                        {"condition", "p != NULL"},
                                        {"nulled_after", false}}})},
                {"resource_releases", json::array()}};
    CHECK_THROWS_AS(validate(Pass::Free, raw), SchemaError);
}

TEST_CASE("unknown extra fields are preserved") {
    json raw = minimal_alloc();
    raw["x_confidence"] = 0.75;
    auto rec = validate(Pass::Alloc, raw);
    CHECK(rec.data["x_confidence"] == json(0.75));
}

TEST_CASE("verify issue kinds are restricted per context") {
    json raw = {{"function", "f"},
                {"description", "checked"},
                {"simplified_contracts", json::array()},
                {"issues", json::array({{{"location", "line 3"},
                                         {"issue_kind", "integer_overflow"},
                                         {"description", "overflow"},
                                         {"severity", "high"}}})}};
    CHECK_THROWS_AS(validate(Pass::Verify, raw), SchemaError);
    CHECK_NOTHROW(validate(Pass::Verify, raw, nullptr, IssueKindSet::WholeProgram));
}

TEST_CASE("external summary drops unknown contract kinds") {
    json raw = {{"allocation", nullptr},
                {"free", nullptr},
                {"init", nullptr},
                {"memsafe",
                 {{"function", "fancy"},
                  {"description", "contract kinds beyond the schema"},
                  {"contracts", json::array({{{"target", "p"},
                                              {"contract_kind", "aligned_to_page"},
                                              {"description", "weird"}},
                                             {{"target", "p"},
                                              {"contract_kind", "disallow_null"},
                                              {"description", "p non-null"}}})}}}};
    auto rec = validate(Pass::External, raw);
    REQUIRE(rec.data["memsafe"]["contracts"].size() == 1);
    CHECK(rec.data["memsafe"]["contracts"][0]["contract_kind"] == "disallow_null");
}

TEST_CASE("round trip through serialization preserves records") {
    json raw = {{"function", "f"},
                {"description", "leak check"},
                {"leaks", json::array({{{"allocation", "malloc(n)"},
                                        {"stored_to", nullptr},
                                        {"reason", "not freed"},
                                        {"severity", "medium"}}})},
                {"simplified_allocations", json::array()},
                {"simplified_frees", json::array()}};
    auto rec = validate(Pass::Leak, raw);
    auto rec2 = validate(Pass::Leak, json::parse(rec.data.dump()));
    CHECK(rec == rec2);
}

TEST_CASE("description changes do not affect fixed-point equality") {
    json a = minimal_alloc();
    json b = minimal_alloc();
    b["description"] = "different prose";
    CHECK(equal_ignoring_descriptions(SummaryRecord{Pass::Alloc, a},
                                      SummaryRecord{Pass::Alloc, b}));
    b["allocations"].push_back({{"type", "heap"},
                                {"source", "malloc"},
                                {"returned", true},
                                {"may_be_null", true}});
    CHECK_FALSE(equal_ignoring_descriptions(SummaryRecord{Pass::Alloc, a},
                                            SummaryRecord{Pass::Alloc, b}));
}

TEST_CASE("pass names round-trip") {
    for (Pass p : {Pass::Alloc, Pass::Free, Pass::Init, Pass::Memsafe, Pass::Leak,
                   Pass::Int, Pass::External, Pass::Verify})
        CHECK(pass_from_name(pass_name(p)) == p);
    CHECK_FALSE(pass_from_name("bogus").has_value());
}
