#include "ttk/anchor.hpp"

#include <algorithm>

#include "ttk/errors.hpp"
#include "ttk/hex.hpp"

namespace ttk {

namespace {

std::vector<Digest> leaf_level(std::span<const Digest> leaves) {
    std::vector<Digest> level;
    level.reserve(leaves.size());
    for (const Digest& leaf : leaves) {
        level.push_back(domain_digest(tag::kMerkleLeaf, {leaf.span()}));
    }
    return level;
}

Digest interior(const Digest& left, const Digest& right) {
    return domain_digest(tag::kMerkleInterior, {left.span(), right.span()});
}

}  // namespace

Digest merkle_root(std::span<const Digest> leaves) {
    if (leaves.empty()) {
        throw Error(Errc::empty_batch, "cannot build a Merkle tree over zero leaves");
    }
    std::vector<Digest> level = leaf_level(leaves);
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<Digest> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            next.push_back(interior(level[i], level[i + 1]));
        }
        level = std::move(next);
    }
    return level[0];
}

MerkleProof merkle_prove(std::span<const Digest> leaves, size_t index) {
    if (leaves.empty()) {
        throw Error(Errc::empty_batch, "cannot build a Merkle tree over zero leaves");
    }
    if (index >= leaves.size()) {
        throw Error(Errc::index_out_of_range,
                    "leaf index " + std::to_string(index) + " out of range for " +
                        std::to_string(leaves.size()) + " leaves");
    }
    MerkleProof proof;
    proof.leaf_hash = leaves[index];
    proof.leaf_index = static_cast<int64_t>(index);

    std::vector<Digest> level = leaf_level(leaves);
    size_t pos = index;
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        size_t sibling = (pos % 2 == 0) ? pos + 1 : pos - 1;
        proof.path.push_back({level[sibling], sibling < pos});
        std::vector<Digest> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            next.push_back(interior(level[i], level[i + 1]));
        }
        level = std::move(next);
        pos /= 2;
    }
    proof.root = level[0];
    return proof;
}

bool merkle_verify(const MerkleProof& proof) {
    Digest node = domain_digest(tag::kMerkleLeaf, {proof.leaf_hash.span()});
    for (const ProofStep& step : proof.path) {
        node = step.sibling_on_left ? interior(step.hash, node) : interior(node, step.hash);
    }
    return node == proof.root;
}

std::string anchor_signing_text(const BatchAnchor& anchor) {
    ValueMap m = anchor_body(anchor);
    m.erase("sig");
    return canonical_text(Value(std::move(m)));
}

ValueMap anchor_body(const BatchAnchor& anchor) {
    ValueMap m;
    m.emplace("batch_id", anchor.batch_id);
    ValueList coverage;
    for (const CoverageRange& range : anchor.coverage) {
        ValueMap rm;
        rm.emplace("agent", range.agent);
        rm.emplace("first_seq", range.first_seq);
        rm.emplace("last_seq", range.last_seq);
        coverage.push_back(Value(std::move(rm)));
    }
    m.emplace("coverage", std::move(coverage));
    m.emplace("leaf_count", anchor.leaf_count);
    m.emplace("merkle_root", anchor.merkle_root.hex());
    m.emplace("submitter", anchor.submitter);
    m.emplace("ts_ms", anchor.ts_ms);
    m.emplace("sig", to_hex(anchor.sig));
    return m;
}

namespace {

[[noreturn]] void bad_shape(const std::string& message) {
    throw Error(Errc::parse_error, message);
}

const Value& field(const ValueMap& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end()) bad_shape(std::string("anchor is missing field \"") + key + "\"");
    return it->second;
}

int64_t int_field(const ValueMap& m, const char* key) {
    const Value& v = field(m, key);
    if (!v.is_int()) bad_shape(std::string("field \"") + key + "\" is not an integer");
    return v.as_int();
}

std::string string_field(const ValueMap& m, const char* key) {
    const Value& v = field(m, key);
    if (!v.is_string()) bad_shape(std::string("field \"") + key + "\" is not a string");
    return v.as_string();
}

}  // namespace

BatchAnchor anchor_from_body(const ValueMap& body, int64_t ledger_index) {
    if (body.size() != 7) bad_shape("anchor body does not have exactly the 7 fields");
    BatchAnchor anchor;
    anchor.batch_id = string_field(body, "batch_id");
    anchor.submitter = string_field(body, "submitter");
    if (!is_valid_did(anchor.submitter)) bad_shape("anchor submitter is not a valid DID");
    std::string root_hex = string_field(body, "merkle_root");
    try {
        anchor.merkle_root = Digest::from_hex(root_hex);
    } catch (const Error&) {
        bad_shape("anchor merkle_root is not a 64-char lowercase hex digest");
    }
    anchor.leaf_count = int_field(body, "leaf_count");
    if (anchor.leaf_count < 1) bad_shape("anchor leaf_count must be >= 1");

    const Value& coverage = field(body, "coverage");
    if (!coverage.is_list()) bad_shape("anchor coverage is not a list");
    int64_t covered = 0;
    for (const Value& rv : coverage.as_list()) {
        if (!rv.is_map() || rv.as_map().size() != 3) bad_shape("malformed coverage range");
        const ValueMap& rm = rv.as_map();
        CoverageRange range;
        range.agent = string_field(rm, "agent");
        if (!is_valid_did(range.agent)) bad_shape("coverage agent is not a valid DID");
        range.first_seq = int_field(rm, "first_seq");
        range.last_seq = int_field(rm, "last_seq");
        if (range.first_seq < 1 || range.last_seq < range.first_seq) {
            bad_shape("coverage range seqs are inverted or below 1");
        }
        covered += range.last_seq - range.first_seq + 1;
        anchor.coverage.push_back(std::move(range));
    }
    if (covered != anchor.leaf_count) {
        bad_shape("anchor coverage does not add up to leaf_count");
    }

    anchor.ts_ms = int_field(body, "ts_ms");
    std::string sig_hex = string_field(body, "sig");
    if (sig_hex.size() != 128 || !is_lower_hex(sig_hex)) {
        bad_shape("anchor sig is not a 128-char lowercase hex signature");
    }
    auto sig_bytes = from_hex(sig_hex);
    std::copy(sig_bytes.begin(), sig_bytes.end(), anchor.sig.begin());
    anchor.ledger_index = ledger_index;
    return anchor;
}

namespace {

BatchAnchor seal_batch(const std::vector<const LogEntry*>& batch, const KeyPair& submitter,
                       int64_t now_ms, Ledger& ledger) {
    std::vector<Digest> leaves;
    leaves.reserve(batch.size());
    for (const LogEntry* entry : batch) leaves.push_back(entry->hash);

    BatchAnchor anchor;
    anchor.merkle_root = merkle_root(leaves);
    anchor.batch_id = "b-" + anchor.merkle_root.hex().substr(0, 16);
    anchor.submitter = did_for(submitter.public_key);
    anchor.leaf_count = static_cast<int64_t>(batch.size());
    anchor.ts_ms = now_ms;
    for (const LogEntry* entry : batch) {
        if (!anchor.coverage.empty() && anchor.coverage.back().agent == entry->agent &&
            anchor.coverage.back().last_seq + 1 == entry->seq) {
            anchor.coverage.back().last_seq = entry->seq;
        } else {
            anchor.coverage.push_back({entry->agent, entry->seq, entry->seq});
        }
    }
    anchor.sig = sign_message(submitter, anchor_signing_text(anchor));

    try {
        anchor.ledger_index = ledger.append("anchor", anchor_body(anchor), now_ms).idx;
    } catch (const Error& e) {
        if (e.code() == Errc::ledger_append_failure) throw;
        throw Error(Errc::ledger_append_failure, e.message());
    }
    return anchor;
}

std::vector<const LogEntry*> sorted_pending(const std::vector<LogEntry>& pending) {
    std::vector<const LogEntry*> out;
    out.reserve(pending.size());
    for (const LogEntry& entry : pending) out.push_back(&entry);
    std::sort(out.begin(), out.end(), [](const LogEntry* a, const LogEntry* b) {
        if (a->agent != b->agent) return a->agent < b->agent;
        return a->seq < b->seq;
    });
    return out;
}

}  // namespace

std::vector<BatchAnchor> flush_batches(const std::vector<LogEntry>& pending,
                                       const AnchorPolicy& policy, const KeyPair& submitter,
                                       int64_t now_ms, Ledger& ledger) {
    std::vector<const LogEntry*> ordered = sorted_pending(pending);
    std::vector<BatchAnchor> anchors;

    auto flush_chunks = [&](const std::vector<const LogEntry*>& entries, int64_t n) {
        size_t full = entries.size() / static_cast<size_t>(n);
        for (size_t b = 0; b < full; ++b) {
            std::vector<const LogEntry*> batch(
                entries.begin() + static_cast<ptrdiff_t>(b * n),
                entries.begin() + static_cast<ptrdiff_t>((b + 1) * n));
            anchors.push_back(seal_batch(batch, submitter, now_ms, ledger));
        }
    };

    if (const auto* every = std::get_if<EveryN>(&policy)) {
        if (every->n < 1) throw Error(Errc::invalid_spec, "EveryN batch size must be >= 1");
        flush_chunks(ordered, every->n);
    } else if (const auto* crit = std::get_if<CriticalImmediate>(&policy)) {
        if (crit->fallback_n < 1) {
            throw Error(Errc::invalid_spec, "CriticalImmediate fallback must be >= 1");
        }
        std::vector<const LogEntry*> routine;
        for (const LogEntry* entry : ordered) {
            if (entry->anchor_class == "critical") {
                anchors.push_back(seal_batch({entry}, submitter, now_ms, ledger));
            } else {
                routine.push_back(entry);
            }
        }
        flush_chunks(routine, crit->fallback_n);
    } else {
        if (!ordered.empty()) {
            anchors.push_back(seal_batch(ordered, submitter, now_ms, ledger));
        }
    }
    return anchors;
}

}  // namespace ttk
