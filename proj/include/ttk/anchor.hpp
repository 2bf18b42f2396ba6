#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/identity.hpp"
#include "ttk/ledger.hpp"
#include "ttk/trace.hpp"

namespace ttk {

struct ProofStep {
    Digest hash;
    bool sibling_on_left = false;  // where the sibling sits relative to the running node
};

struct MerkleProof {
    Digest leaf_hash;  // the entry hash, before leaf tagging
    int64_t leaf_index = 0;
    std::vector<ProofStep> path;
    Digest root;
};

// Leaf nodes are domain_digest(0x00, leaf); interior nodes are
// domain_digest(0x01, left || right); a level with an odd node count
// duplicates its last node. The root of a single leaf is its leaf node.
Digest merkle_root(std::span<const Digest> leaves);
MerkleProof merkle_prove(std::span<const Digest> leaves, size_t index);
bool merkle_verify(const MerkleProof& proof);

// Contiguous run of one agent's entries inside a batch, in leaf order.
struct CoverageRange {
    std::string agent;
    int64_t first_seq = 0;
    int64_t last_seq = 0;
};

struct BatchAnchor {
    std::string batch_id;  // "b-" + first 16 hex chars of the root
    std::string submitter;
    Digest merkle_root;
    int64_t leaf_count = 0;
    std::vector<CoverageRange> coverage;
    int64_t ts_ms = 0;
    Signature sig{};          // by submitter, over the canonical anchor minus sig
    int64_t ledger_index = -1;
};

std::string anchor_signing_text(const BatchAnchor& anchor);
ValueMap anchor_body(const BatchAnchor& anchor);
// Strict inverse of anchor_body. Errc::parse_error on shape violations.
BatchAnchor anchor_from_body(const ValueMap& body, int64_t ledger_index);

// Selective anchoring strategies.
struct EveryN {
    int64_t n = 1;
};
struct CriticalImmediate {
    int64_t fallback_n = 1;
};
struct Manual {};
using AnchorPolicy = std::variant<EveryN, CriticalImmediate, Manual>;

// Batches pending entries and appends one "anchor" ledger record per batch.
//   EveryN{n}:            full batches of n over all pending entries ordered
//                         by (agent DID, seq); the remainder stays pending.
//   CriticalImmediate{f}: one singleton batch per critical entry first, then
//                         full batches of f over the routine remainder.
//   Manual:               a single batch of everything (no-op when empty).
// Entries already covered by a ledger anchor are the caller's concern; pass
// only unanchored entries.
std::vector<BatchAnchor> flush_batches(const std::vector<LogEntry>& pending,
                                       const AnchorPolicy& policy, const KeyPair& submitter,
                                       int64_t now_ms, Ledger& ledger);

}  // namespace ttk
