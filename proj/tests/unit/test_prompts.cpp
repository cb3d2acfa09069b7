#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nlverify/prompts.hpp"
#include "nlverify/errors.hpp"

using namespace nlverify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

FunctionRecord fixture_fn() {
    FunctionRecord fn;
    fn.name = "alloc_buf";
    fn.signature = "char *alloc_buf(int n)";
    fn.params = {{"n", "int"}};
    fn.file_path = "units.c";
    fn.line_start = 3;
    fn.line_end = 6;
    fn.body = "char *alloc_buf(int n) {\n    char *p = malloc(n);\n    return p;\n}";
    return fn;
}

PromptRenderer renderer() { return PromptRenderer(TemplateSet{}); }

}  // namespace

TEST_CASE("alloc single prompt layout") {
    auto bundle = renderer().render_summarizer_prompt(
        Pass::Alloc, fixture_fn(), CalleeContext{}, TypeContext{}, CacheMode::None);
    CHECK_FALSE(bundle.system.has_value());
    CHECK(bundle.user.rfind(
              "You are analyzing C/C++ code to generate memory allocation summaries.",
              0) == 0);
    CHECK(bundle.user.find("## Callee Summaries\n(none)") != std::string::npos);
    CHECK(bundle.user.find("Function: alloc_buf") != std::string::npos);
    CHECK(bundle.user.find("Signature: char *alloc_buf(int n)") != std::string::npos);
    CHECK(bundle.user.find(fixture_fn().body) != std::string::npos);
}

TEST_CASE("cached-instructions mode moves the task into the system message") {
    auto bundle = renderer().render_summarizer_prompt(
        Pass::Alloc, fixture_fn(), CalleeContext{}, TypeContext{}, CacheMode::Instructions);
    REQUIRE(bundle.system.has_value());
    CHECK(bundle.cacheable == PromptBundle::Cacheable::System);
    CHECK(bundle.system->find("## Task") != std::string::npos);
    CHECK(bundle.system->find("provided in the\nuser message") != std::string::npos);
    CHECK(bundle.user.find("## Task") == std::string::npos);
    CHECK(bundle.user.find(fixture_fn().body) != std::string::npos);
}

TEST_CASE("cached-source mode places the source in the system message") {
    auto bundle = renderer().render_summarizer_prompt(
        Pass::Alloc, fixture_fn(), CalleeContext{}, TypeContext{}, CacheMode::Source);
    REQUIRE(bundle.system.has_value());
    CHECK(bundle.system->find(fixture_fn().body) != std::string::npos);
    CHECK(bundle.user.find(fixture_fn().body) == std::string::npos);
    CHECK(bundle.user.find("in the system\nmessage") != std::string::npos);
}

TEST_CASE("all cache modes carry the same information") {
    for (Pass pass : {Pass::Alloc, Pass::Free, Pass::Init}) {
        std::vector<std::string> texts;
        for (CacheMode mode :
             {CacheMode::None, CacheMode::Instructions, CacheMode::Source}) {
            auto bundle = renderer().render_summarizer_prompt(
                pass, fixture_fn(), CalleeContext{}, TypeContext{}, mode);
            texts.push_back((bundle.system ? *bundle.system + "\n" : "") + bundle.user);
        }
        for (const auto& text : texts) {
            CHECK(text.find(fixture_fn().body) != std::string::npos);
            CHECK(text.find("(none)") != std::string::npos);
            CHECK(text.find("\"function\": \"<function_name>\"") != std::string::npos);
            CHECK(text.find("## Task") != std::string::npos);
        }
    }
}

TEST_CASE("leak prompt includes the entry note only for the entry point") {
    OwnContext own;
    own.is_entry_point = true;
    auto entry = renderer().render_summarizer_prompt(
        Pass::Leak, fixture_fn(), CalleeContext{}, TypeContext{}, CacheMode::None, own);
    CHECK(entry.user.find("program entry point") != std::string::npos);
    REQUIRE(entry.system.has_value());
    CHECK(entry.system->find("You are analyzing C/C++ functions for memory leaks") == 0);

    auto plain = renderer().render_summarizer_prompt(
        Pass::Leak, fixture_fn(), CalleeContext{}, TypeContext{}, CacheMode::None);
    CHECK(plain.user.find("program entry point") == std::string::npos);
}

TEST_CASE("external prompt substitutes the name and rejects empty names") {
    auto bundle = renderer().render_external_prompt("free");
    CHECK(bundle.user.find("Function name: free") != std::string::npos);
    auto memcpy_bundle = renderer().render_external_prompt("memcpy");
    CHECK(memcpy_bundle.user.find("Function name: memcpy") != std::string::npos);
    CHECK_THROWS_AS(renderer().render_external_prompt(""), std::invalid_argument);
}

TEST_CASE("block prompts thread prior summaries as comments") {
    Block block;
    block.parent = "alloc_buf";
    block.index = 1;
    block.source = "    return p;\n}";
    auto first = renderer().render_block_prompt(Pass::Alloc, fixture_fn(), block, {});
    CHECK(first.user.find("/* BLOCK") == std::string::npos);

    auto second = renderer().render_block_prompt(Pass::Alloc, fixture_fn(), block,
                                                 {"allocates buf of n bytes"});
    CHECK(second.user.find("/* BLOCK 0: allocates buf of n bytes */\n") !=
          std::string::npos);

    auto verify_block = renderer().render_block_prompt(Pass::Verify, fixture_fn(), block,
                                                       {}, json::array());
    CHECK(verify_block.user.find(
              "## This Function's Pre-conditions -- assume these hold") !=
          std::string::npos);

    CHECK_THROWS_AS(renderer().render_block_prompt(Pass::Leak, fixture_fn(), block, {}),
                    UnknownPassError);
}

TEST_CASE("annotation substitutes formals and strips reversibly") {
    FunctionRecord g;
    g.name = "g";
    g.signature = "void g(char *q)";
    g.params = {{"q", "char *"}};
    g.body = "void g(char *q) {\n    *q = 0;\n}";
    g.file_path = "units.c";
    g.line_start = 1;
    g.line_end = 3;

    FunctionRecord caller;
    caller.name = "caller";
    caller.signature = "void caller(char *p)";
    caller.params = {{"p", "char *"}};
    caller.body = "void caller(char *p) {\n    g(p);\n}";
    caller.file_path = "units.c";
    caller.line_start = 5;
    caller.line_end = 7;

    CallsiteRecord cs;
    cs.caller = "caller";
    cs.callee_name = "g";
    cs.arg_exprs = {"p"};
    cs.line = 6;

    CallGraph graph = build_call_graph({caller, g}, {cs});
    SummaryStore store((fs::temp_directory_path() / "pr_ann.jsonl").string());
    fs::remove(fs::temp_directory_path() / "pr_ann.jsonl");
    store.open((fs::temp_directory_path() / "pr_ann.jsonl").string());
    store.upsert({"g", "memsafe", "h"},
                 SummaryRecord{Pass::Memsafe,
                               json{{"function", "g"},
                                    {"description", "q required"},
                                    {"contracts",
                                     json::array({{{"target", "q"},
                                                   {"contract_kind", "disallow_null"},
                                                   {"description", "q must not be NULL"}}})}}});

    auto annotated = renderer().annotate_callsites(caller, graph, store);
    CHECK(annotated.text.find("/* PRE[g]: q -> p must not be NULL */") !=
          std::string::npos);
    REQUIRE(annotated.substitutions.size() == 1);
    CHECK(annotated.substitutions[0].formal == "q");
    CHECK(annotated.substitutions[0].actual == "p");
    CHECK(strip_annotations(annotated.text) == caller.body);
}

TEST_CASE("no callsites leaves the body untouched") {
    FunctionRecord loner = fixture_fn();
    CallGraph graph = build_call_graph({loner}, {});
    SummaryStore store((fs::temp_directory_path() / "pr_none.jsonl").string());
    auto annotated = renderer().annotate_callsites(loner, graph, store);
    CHECK(annotated.text == loner.body);
    CHECK(annotated.substitutions.empty());
}

TEST_CASE("noreturn stubs annotate a POST even without an external summary") {
    FunctionRecord f;
    f.name = "f";
    f.signature = "void f(void)";
    f.body = "void f(void) {\n    exit(1);\n}";
    f.file_path = "units.c";
    f.line_start = 1;
    f.line_end = 3;

    CallsiteRecord cs;
    cs.caller = "f";
    cs.callee_name = "exit";
    cs.arg_exprs = {"1"};
    cs.line = 2;

    CallGraph graph = build_call_graph({f}, {cs});
    SummaryStore store((fs::temp_directory_path() / "pr_exit.jsonl").string());
    auto annotated = renderer().annotate_callsites(f, graph, store);
    CHECK(annotated.text.find("/* POST[exit]: does not return */") != std::string::npos);
    CHECK(strip_annotations(annotated.text) == f.body);
}

TEST_CASE("verifier prompt sections") {
    auto fn = fixture_fn();
    AnnotatedSource annotated;
    annotated.text = fn.body;

    auto empty = renderer().render_verifier_prompt(fn, json::array(), annotated,
                                                   CalleeContext{}, TypeContext{});
    CHECK(empty.user.find("## Pre-conditions (assume these hold)\n(none)") !=
          std::string::npos);
    CHECK(empty.user.find("{alias_context}") == std::string::npos);
    CHECK(empty.user.find("## Callee Information\n(none)") != std::string::npos);

    CalleeContext ctx;
    CalleeContext::Entry entry;
    entry.name = "g";
    entry.summaries["memsafe"] = json{{"function", "g"}, {"description", "d"}};
    ctx.callees.push_back(entry);
    auto with_callee = renderer().render_verifier_prompt(fn, json::array(), annotated,
                                                         ctx, TypeContext{});
    CHECK(with_callee.user.find("### g") != std::string::npos);
}

TEST_CASE("baseline prompt embeds all sources in file order and honors the budget") {
    Program program;
    FunctionRecord a = fixture_fn();
    FunctionRecord b = fixture_fn();
    b.name = "second";
    b.file_path = "zz.c";
    b.body = "void second(void) {}";
    program.functions = {a, b};

    auto bundle = renderer().render_baseline_prompt(program, "valid-memsafety", 120000);
    size_t first = bundle.user.find("### alloc_buf");
    size_t second = bundle.user.find("### second");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(first < second);
    CHECK(bundle.user.find("valid-memsafety") != std::string::npos);

    CHECK_THROWS_AS(renderer().render_baseline_prompt(program, "valid-memsafety", 100),
                    ContextOverflowError);
}

TEST_CASE("template overrides change rendering and the version hash") {
    fs::path dir = fs::temp_directory_path() / "nlv_tmpl_override";
    fs::create_directories(dir);
    std::ofstream(dir / "alloc_single.txt") << "CUSTOM {name}\n";

    TemplateSet base;
    TemplateSet overridden(dir.string());
    CHECK(base.version(Pass::Alloc) != overridden.version(Pass::Alloc));

    PromptRenderer custom{TemplateSet(dir.string())};
    auto bundle = custom.render_summarizer_prompt(Pass::Alloc, fixture_fn(),
                                                  CalleeContext{}, TypeContext{},
                                                  CacheMode::None);
    CHECK(bundle.user == "CUSTOM alloc_buf\n");
}

TEST_CASE("rendered prompts are byte-stable across calls") {
    auto b1 = renderer().render_summarizer_prompt(Pass::Memsafe, fixture_fn(),
                                                  CalleeContext{}, TypeContext{},
                                                  CacheMode::None);
    auto b2 = renderer().render_summarizer_prompt(Pass::Memsafe, fixture_fn(),
                                                  CalleeContext{}, TypeContext{},
                                                  CacheMode::None);
    CHECK(b1.user == b2.user);
}
