#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlverify/callgraph.hpp"
#include "nlverify/extract.hpp"

namespace nlverify {

using json = nlohmann::json;

enum class Pass { Alloc, Free, Init, Memsafe, Leak, Int, External, Verify };

const char* pass_name(Pass p);
std::optional<Pass> pass_from_name(const std::string& name);

// Validation context: the verify-pass issue list is restricted to the six
// memory-safety kinds; whole-program (baseline) responses may also carry the
// integer-UB kinds and memory_leak.
enum class IssueKindSet { Memsafety, WholeProgram };

// A validated summary. The payload keeps unknown extra fields so records
// round-trip byte-identically through the store.
struct SummaryRecord {
    Pass pass = Pass::Alloc;
    json data;

    bool operator==(const SummaryRecord& other) const {
        return pass == other.pass && data == other.data;
    }
};

// Structural equality after dropping description prose, used for fixed-point
// change detection.
bool equal_ignoring_descriptions(const SummaryRecord& a, const SummaryRecord& b);

// Validates provider output against the pass schema. Missing required fields
// and enum violations throw SchemaError listing every violated field path;
// semantic oddities are logged as warnings and accepted. Records over 64 KiB
// serialized are rejected.
SummaryRecord validate(Pass pass, const json& raw,
                       const FunctionRecord* fn = nullptr,
                       IssueKindSet kinds = IssueKindSet::Memsafety);

constexpr size_t kSummarySizeCap = 64 * 1024;

struct SummaryKey {
    std::string function;  // "ext::<name>" for external summaries
    std::string pass;
    std::string input_hash;

    bool operator<(const SummaryKey& o) const {
        return std::tie(function, pass, input_hash) <
               std::tie(o.function, o.pass, o.input_hash);
    }
};

// Append-only JSON-lines store with an in-memory index; the last record per
// key wins. Concurrent readers are safe; writes are serialized internally.
class SummaryStore {
public:
    SummaryStore() = default;
    explicit SummaryStore(const std::string& path);

    void open(const std::string& path);
    bool is_open() const { return !path_.empty(); }
    const std::string& path() const { return path_; }

    std::optional<SummaryRecord> upsert(const SummaryKey& key, const SummaryRecord& rec);
    std::optional<SummaryRecord> lookup(const SummaryKey& key) const;

    // Latest record for (function, pass) regardless of input hash.
    std::optional<SummaryRecord> latest(const std::string& function, Pass pass) const;

    std::vector<std::string> functions_with(Pass pass) const;

private:
    void load();

    std::string path_;
    mutable std::mutex mutex_;
    std::map<SummaryKey, json> by_key_;
    std::map<std::pair<std::string, std::string>, json> latest_;
};

// Per-callee summaries relevant to one pass, assembled from the store.
struct CalleeContext {
    struct Entry {
        std::string name;
        bool is_external = false;
        std::set<std::string> lib_attrs;
        std::map<std::string, json> summaries;  // pass name -> record payload
    };
    std::vector<Entry> callees;  // sorted by name

    bool empty() const { return callees.empty(); }
    // Canonical serialization hashed into the consumer's SummaryKey.
    std::string canonical() const;
};

CalleeContext callee_context(const SummaryStore& store, const FunctionRecord& fn,
                             const CallGraph& graph, Pass pass);

// Hash over (function body, template version, consumed callee summaries).
std::string input_hash(const FunctionRecord& fn, Pass pass,
                       const std::string& template_version, const CalleeContext& ctx);

}  // namespace nlverify
