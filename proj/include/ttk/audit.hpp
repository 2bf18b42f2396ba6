#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttk/anchor.hpp"
#include "ttk/ledger.hpp"
#include "ttk/policy.hpp"
#include "ttk/trace.hpp"

namespace ttk {

enum class Check {
    identity,
    signature,
    chain,
    policy,
    rate,
    anchor,
    lineage,
};
const char* check_name(Check check);  // "IdentityCheck", "SignatureCheck", ...
std::optional<Check> check_from_name(std::string_view name);

enum class Verdict {
    valid,
    warning,
    unverifiable,
    violation,  // order doubles as severity
};
const char* verdict_name(Verdict verdict);  // "VALID", "WARNING", ...
std::optional<Verdict> verdict_from_name(std::string_view name);

struct Finding {
    std::string agent;  // entry agent DID, or "ledger" for ledger-level problems
    int64_t seq = 0;
    Check check = Check::identity;
    Verdict verdict = Verdict::valid;
    std::string reason;  // sorted comma-joined machine codes; "OK" when VALID
    std::string note;    // human detail, empty for clean findings

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct LineageNode {
    std::string agent;
    int64_t seq = 0;
    Digest hash;
};

// upstream -> downstream, derived by inverting each entry's refs
struct LineageEdge {
    std::string from_agent;
    int64_t from_seq = 0;
    std::string to_agent;
    int64_t to_seq = 0;
};

struct LineageGraph {
    std::vector<LineageNode> nodes;  // sorted by (agent, seq)
    std::vector<LineageEdge> edges;  // hash-valid edges, sorted
};

struct AttributionEntry {
    std::string agent;
    int64_t seq = 0;
    Digest policy;  // the policy hash the entry cites
    std::optional<int64_t> anchor_index;
};

enum class Overall {
    valid,
    violations_found,
    unverifiable,
};
const char* overall_name(Overall overall);

struct AuditReport {
    std::vector<Finding> findings;  // sorted by (agent, seq, check name)
    LineageGraph lineage;
    std::vector<AttributionEntry> attribution;  // one per loaded entry
    Overall overall = Overall::valid;
};

// Anchor records from the ledger, pre-verified against the stored entry
// hashes of the loaded logs: signature check, batch reconstruction by
// coverage, root comparison. Malformed anchor records become ledger-level
// findings and are skipped.
class AnchorIndex {
public:
    AnchorIndex(const Ledger& ledger, const std::vector<std::vector<LogEntry>>& logs,
                std::vector<Finding>* malformed = nullptr);

    const std::vector<BatchAnchor>& anchors() const { return anchors_; }

    struct Assessment {
        Verdict verdict = Verdict::unverifiable;
        std::string code = "Unanchored";  // OK | Unanchored | RootMismatch |
                                          // BadAnchorSignature | IncompleteBatch
        std::optional<int64_t> anchor_index;
    };
    Assessment assess(const std::string& agent, int64_t seq) const;

private:
    enum class BatchStatus { ok, root_mismatch, bad_signature, incomplete };

    std::vector<BatchAnchor> anchors_;
    std::vector<BatchStatus> status_;
    std::map<std::pair<std::string, int64_t>, std::vector<size_t>> covering_;
};

// The four per-entry checks: identity (with revocation semantics), signature,
// policy conformance, anchoring. Assumes the entry's stored hash has already
// been revalidated; callers that load leniently must gate on that themselves.
std::vector<Finding> verify_entry(const LogEntry& entry, const Ledger& ledger,
                                  const PolicyStore& store, const AnchorIndex& anchors);

// One agent's entries in stored order: per-entry checks plus chain
// continuity and rate-limit evaluation. Entries whose stored hash does not
// recompute get a single ChainCheck violation and are excluded from the
// other checks.
std::vector<Finding> verify_trace(const std::vector<LogEntry>& entries, const Ledger& ledger,
                                  const PolicyStore& store, const AnchorIndex& anchors);

// Cross-agent reference graph. Emits one LineageCheck finding per hash-valid
// entry (DanglingRef / RefHashMismatch / CycleDetected / UpstreamLater, or
// clean).
LineageGraph build_lineage(const std::vector<std::vector<LogEntry>>& logs,
                           std::vector<Finding>& findings);

AuditReport audit_all(const std::vector<std::vector<LogEntry>>& logs, const Ledger& ledger,
                      const PolicyStore& store);

enum class ReportFormat { text, interchange };
std::string render_report(const AuditReport& report, ReportFormat format);

}  // namespace ttk
