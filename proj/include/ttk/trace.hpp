#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/identity.hpp"
#include "ttk/value.hpp"

namespace ttk {

struct EntryRef {
    std::string agent;
    int64_t seq = 0;
    Digest hash;

    friend bool operator==(const EntryRef&, const EntryRef&) = default;
};

// One signed behavioral record. Entries of an agent form a hash chain: prev
// links the previous entry's hash, seq increases by exactly 1.
struct LogEntry {
    int64_t v = 1;
    std::string agent;
    int64_t seq = 0;
    Digest prev;
    Digest policy;
    std::string action;
    ValueMap params;
    int64_t ts_ms = 0;
    ValueMap ctx;
    std::vector<Digest> inputs;
    std::vector<Digest> outputs;
    std::vector<EntryRef> refs;
    std::string anchor_class;  // "critical" | "routine"
    Signature sig{};
    Digest hash;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

// Interchange forms. The signing preimage drops sig and hash; the hash
// preimage drops only hash.
Value entry_value(const LogEntry& entry);
std::string entry_signing_text(const LogEntry& entry);
std::string entry_hash_text(const LogEntry& entry);
Digest entry_hash(const LogEntry& entry);
// Strict shape check; Errc::parse_error on violations.
LogEntry entry_from_value(const Value& v);

class TraceLog {
public:
    TraceLog() = default;
    explicit TraceLog(std::string agent) : agent_(std::move(agent)) {}

    const std::string& agent() const { return agent_; }
    const std::vector<LogEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const LogEntry& back() const { return entries_.back(); }

    // Next unsigned entry: seq and prev follow the chain tail; sig and hash
    // stay zero until seal_entry. Errc::non_monotonic_timestamp if ts_ms
    // precedes the tail's timestamp.
    LogEntry build_entry(const Digest& policy, const std::string& action, ValueMap params,
                         int64_t ts_ms, ValueMap ctx, std::vector<Digest> inputs,
                         std::vector<Digest> outputs, std::vector<EntryRef> refs,
                         const std::string& anchor_class) const;

    // Appends a sealed entry after checking seq continuity, prev-hash
    // continuity, timestamp monotonicity, hash integrity, and the signature.
    void append(const LogEntry& entry);

private:
    std::string agent_;
    std::vector<LogEntry> entries_;
};

// Fills sig (over the signing preimage) and hash (over content including
// sig). Errc::key_mismatch if the keypair does not match entry.agent.
LogEntry seal_entry(LogEntry entry, const KeyPair& keypair);

// One canonical line per entry, seq order. Returns bytes written.
size_t export_trace(const TraceLog& log, const std::filesystem::path& path);
std::string export_trace_text(const TraceLog& log);

// Full revalidation: parse, canonical form, hash recomputation, chain, seq,
// timestamps, signatures. Errors carry the offending line number.
TraceLog import_trace(const std::filesystem::path& path);
TraceLog import_trace_text(std::string_view text, const std::string& source_name);

// Lenient load for auditing: parse, canonical form, and shape only. Chains,
// hashes, and signatures are NOT checked here so that a tampered file still
// loads and the audit can report findings on it.
std::vector<LogEntry> read_entries(const std::filesystem::path& path);
std::vector<LogEntry> read_entries_text(std::string_view text, const std::string& source_name);

}  // namespace ttk
