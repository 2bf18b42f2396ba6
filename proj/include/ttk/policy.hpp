#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/identity.hpp"
#include "ttk/ledger.hpp"

namespace ttk {

struct LogEntry;

struct IntRange {
    int64_t min = 0;
    int64_t max = 0;
};
struct OneOf {
    std::set<std::string> values;
};
struct MaxLength {
    int64_t limit = 0;  // in Unicode code points
};
struct Required {};

using ParameterConstraint = std::variant<IntRange, OneOf, MaxLength, Required>;

struct RateLimit {
    int64_t window_ms = 0;
    int64_t max_actions = 0;
    std::optional<std::string> action_filter;  // absent = all actions
};

// Machine-readable behavioral constraints an agent commits to before acting.
struct PolicyDocument {
    std::string policy_id;
    std::string agent_did;
    int64_t version = 1;
    std::set<std::string> allowed_actions;
    std::map<std::string, std::map<std::string, ParameterConstraint>> parameter_constraints;
    std::vector<RateLimit> rate_limits;
    std::set<std::string> jurisdictions;
    std::set<std::string> data_boundaries;
    int64_t not_before_ms = 0;
    int64_t not_after_ms = 0;
    std::optional<std::string> delegated_by;
};

struct PolicyCommitment {
    Digest policy_hash;
    std::string agent_did;
    int64_t committed_at_ms = 0;
    Signature signature;
    int64_t ledger_index = -1;
};

Value policy_value(const PolicyDocument& doc);
// Strict inverse (shape and types); Errc::parse_error on violations.
// Accepts any interchange form, canonical or not.
PolicyDocument policy_from_value(const Value& v);
Digest policy_hash(const PolicyDocument& doc);

// Structural validation; returns one code per violated invariant
// (EmptyActions, EmptyValidity, ConstraintUnknownAction, IntRangeInverted,
// OneOfEmpty, MaxLengthNegative, BadRateWindow, BadRateMax, BadVersion,
// BadDid). Empty result means the document is well-formed.
std::vector<std::string> validate_policy(const PolicyDocument& doc);

// Content-addressed document store: key = digest of the canonical document.
class PolicyStore {
public:
    virtual ~PolicyStore() = default;

    virtual void put(const PolicyDocument& doc) = 0;
    // nullopt when unknown; Errc::digest_mismatch when the stored content no
    // longer matches the requested hash.
    virtual std::optional<PolicyDocument> get(const Digest& hash) const = 0;
};

class MemoryPolicyStore : public PolicyStore {
public:
    void put(const PolicyDocument& doc) override;
    std::optional<PolicyDocument> get(const Digest& hash) const override;

private:
    std::map<std::string, std::string> docs_;  // hash hex -> canonical text
};

// One canonical file per document: <dir>/<hash>.json. Reads verify both
// canonical form and digest, so any byte-level corruption is rejected.
class DirectoryPolicyStore : public PolicyStore {
public:
    explicit DirectoryPolicyStore(std::filesystem::path dir);

    void put(const PolicyDocument& doc) override;
    std::optional<PolicyDocument> get(const Digest& hash) const override;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

// Hashes, signs, appends a "policy" ledger record, and stores the document.
// Errors: InvalidPolicy, KeyMismatch, UnknownAgent, RevokedIdentity.
PolicyCommitment commit_policy(const PolicyDocument& doc, const KeyPair& keypair,
                               int64_t now_ms, Ledger& ledger, PolicyStore& store);

struct PolicyViolation {
    std::string code;    // ActionNotAllowed | ParamViolation | OutsideValidity |
                         // DataBoundary | JurisdictionMismatch
    std::string detail;  // human text naming the offending field/value
};

// Evaluates one entry against the policy it cites. Empty result means
// conformant. Errc::policy_hash_mismatch if entry.policy != digest of doc.
std::vector<PolicyViolation> check_action(const PolicyDocument& doc, const LogEntry& entry);

struct RateViolation {
    int64_t seq = 0;
    std::string detail;
};

// Sliding-window recount over the entry timestamps. For each limit and each
// entry e matching the filter, counts matching entries at or before e (in
// seq order) with ts_ms in (e.ts_ms - window_ms, e.ts_ms]; a count above
// max_actions reports e's seq. Errc::unordered_input if seqs are not
// strictly increasing or agents are mixed.
std::vector<RateViolation> check_rate(const PolicyDocument& doc,
                                      const std::vector<LogEntry>& entries);

}  // namespace ttk
