#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/value.hpp"

namespace ttk {

// One record of the shared append-only ledger. Records form a hash chain:
// prev links to the previous record's rhash, rhash covers everything else.
struct LedgerRecord {
    int64_t idx = 0;
    Digest prev;
    int64_t ts_ms = 0;
    std::string kind;  // "identity" | "revocation" | "policy" | "anchor"
    ValueMap body;
    Digest rhash;
};

bool is_ledger_kind(std::string_view kind);

// Full record as an interchange map (rhash included).
Value ledger_record_value(const LedgerRecord& record);
// Strict inverse; throws Error(Errc::corrupt_ledger) on shape violations.
LedgerRecord ledger_record_from_value(const Value& v);
// digest over the canonical record minus rhash.
Digest ledger_record_hash(const LedgerRecord& record);

// Append-only backend interface. Appends must be externally serialized
// (single writer); reads are safe from any number of threads that observe a
// completed append.
class Ledger {
public:
    virtual ~Ledger() = default;

    virtual LedgerRecord append(const std::string& kind, ValueMap body, int64_t ts_ms) = 0;
    virtual LedgerRecord get(int64_t idx) const = 0;
    virtual int64_t size() const = 0;
};

class MemoryLedger : public Ledger {
public:
    LedgerRecord append(const std::string& kind, ValueMap body, int64_t ts_ms) override;
    LedgerRecord get(int64_t idx) const override;
    int64_t size() const override;

private:
    std::vector<LedgerRecord> records_;
};

// Newline-delimited canonical records in a file (.ttkl). The file is only
// ever appended to; existing bytes are never rewritten. Loading validates
// that every line parses and is in canonical form (Errc::corrupt_ledger
// otherwise); chain validity is checked separately by ledger_verify_chain.
class FileLedger : public Ledger {
public:
    explicit FileLedger(std::filesystem::path path);

    LedgerRecord append(const std::string& kind, ValueMap body, int64_t ts_ms) override;
    LedgerRecord get(int64_t idx) const override;
    int64_t size() const override;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::vector<LedgerRecord> records_;
};

// Walks the whole chain recomputing rhash and prev links (and idx
// contiguity). Returns the first failing index, or nullopt when the chain is
// intact. Truncation of a file ledger is not detectable here; compare
// against an externally published checkpoint ("idx:<n> rhash:<hex>").
std::optional<int64_t> ledger_verify_chain(const Ledger& ledger);

// Latest (idx, rhash) pair in the publishable checkpoint format. An empty
// ledger yields "idx:-1 rhash:<64 zeros>".
std::string ledger_checkpoint(const Ledger& ledger);

}  // namespace ttk
