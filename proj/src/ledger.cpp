#include "ttk/ledger.hpp"

#include <fstream>

#include "ttk/errors.hpp"

namespace ttk {

bool is_ledger_kind(std::string_view kind) {
    return kind == "identity" || kind == "revocation" || kind == "policy" ||
           kind == "anchor";
}

Value ledger_record_value(const LedgerRecord& record) {
    ValueMap m;
    m.emplace("idx", record.idx);
    m.emplace("prev", record.prev.hex());
    m.emplace("ts_ms", record.ts_ms);
    m.emplace("kind", record.kind);
    m.emplace("body", record.body);
    m.emplace("rhash", record.rhash.hex());
    return Value(std::move(m));
}

namespace {

[[noreturn]] void corrupt(const std::string& message) {
    throw Error(Errc::corrupt_ledger, message);
}

const Value& expect_field(const ValueMap& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end()) corrupt(std::string("record is missing field \"") + key + "\"");
    return it->second;
}

Digest digest_field(const ValueMap& m, const char* key) {
    const Value& v = expect_field(m, key);
    if (!v.is_string()) corrupt(std::string("field \"") + key + "\" is not a string");
    try {
        return Digest::from_hex(v.as_string());
    } catch (const Error&) {
        corrupt(std::string("field \"") + key + "\" is not a 64-char lowercase hex digest");
    }
}

int64_t int_field(const ValueMap& m, const char* key) {
    const Value& v = expect_field(m, key);
    if (!v.is_int()) corrupt(std::string("field \"") + key + "\" is not an integer");
    return v.as_int();
}

}  // namespace

LedgerRecord ledger_record_from_value(const Value& v) {
    if (!v.is_map()) corrupt("record is not a map");
    const ValueMap& m = v.as_map();
    if (m.size() != 6) corrupt("record does not have exactly the 6 ledger fields");

    LedgerRecord record;
    record.idx = int_field(m, "idx");
    if (record.idx < 0) corrupt("idx is negative");
    record.prev = digest_field(m, "prev");
    record.ts_ms = int_field(m, "ts_ms");
    const Value& kind = expect_field(m, "kind");
    if (!kind.is_string() || !is_ledger_kind(kind.as_string())) {
        corrupt("kind is not one of identity/revocation/policy/anchor");
    }
    record.kind = kind.as_string();
    const Value& body = expect_field(m, "body");
    if (!body.is_map()) corrupt("body is not a map");
    record.body = body.as_map();
    record.rhash = digest_field(m, "rhash");
    return record;
}

Digest ledger_record_hash(const LedgerRecord& record) {
    ValueMap m;
    m.emplace("idx", record.idx);
    m.emplace("prev", record.prev.hex());
    m.emplace("ts_ms", record.ts_ms);
    m.emplace("kind", record.kind);
    m.emplace("body", record.body);
    return digest(canonical_text(Value(std::move(m))));
}

namespace {

LedgerRecord make_record(const std::vector<LedgerRecord>& existing, const std::string& kind,
                         ValueMap body, int64_t ts_ms) {
    if (!is_ledger_kind(kind)) {
        throw Error(Errc::ledger_append_failure, "unknown record kind \"" + kind + "\"");
    }
    LedgerRecord record;
    record.idx = static_cast<int64_t>(existing.size());
    record.prev = existing.empty() ? Digest::zero() : existing.back().rhash;
    record.ts_ms = ts_ms;
    record.kind = kind;
    record.body = std::move(body);
    record.rhash = ledger_record_hash(record);
    return record;
}

const LedgerRecord& checked_get(const std::vector<LedgerRecord>& records, int64_t idx) {
    if (idx < 0 || idx >= static_cast<int64_t>(records.size())) {
        throw Error(Errc::index_out_of_range,
                    "ledger has " + std::to_string(records.size()) + " records, asked for " +
                        std::to_string(idx));
    }
    return records[static_cast<size_t>(idx)];
}

}  // namespace

LedgerRecord MemoryLedger::append(const std::string& kind, ValueMap body, int64_t ts_ms) {
    records_.push_back(make_record(records_, kind, std::move(body), ts_ms));
    return records_.back();
}

LedgerRecord MemoryLedger::get(int64_t idx) const { return checked_get(records_, idx); }

int64_t MemoryLedger::size() const { return static_cast<int64_t>(records_.size()); }

FileLedger::FileLedger(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // no file yet: empty ledger
    std::string line;
    int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        Value v;
        try {
            v = parse_value(line);
        } catch (const Error& e) {
            corrupt("line " + std::to_string(line_no) + ": " + e.message());
        }
        if (canonical_text(v) != line) {
            corrupt("line " + std::to_string(line_no) + ": record is not in canonical form");
        }
        try {
            records_.push_back(ledger_record_from_value(v));
        } catch (const Error& e) {
            corrupt("line " + std::to_string(line_no) + ": " + e.message());
        }
    }
    if (in.bad()) {
        throw Error(Errc::io_failure, "read failed for " + path_.string());
    }
}

LedgerRecord FileLedger::append(const std::string& kind, ValueMap body, int64_t ts_ms) {
    LedgerRecord record = make_record(records_, kind, std::move(body), ts_ms);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error(Errc::io_failure, "cannot open " + path_.string() + " for append");
    }
    std::string line = canonical_text(ledger_record_value(record));
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) {
        throw Error(Errc::ledger_append_failure, "append to " + path_.string() + " failed");
    }
    records_.push_back(std::move(record));
    return records_.back();
}

LedgerRecord FileLedger::get(int64_t idx) const { return checked_get(records_, idx); }

int64_t FileLedger::size() const { return static_cast<int64_t>(records_.size()); }

std::optional<int64_t> ledger_verify_chain(const Ledger& ledger) {
    Digest prev = Digest::zero();
    for (int64_t i = 0; i < ledger.size(); ++i) {
        LedgerRecord record = ledger.get(i);
        if (record.idx != i) return i;
        if (record.prev != prev) return i;
        if (ledger_record_hash(record) != record.rhash) return i;
        prev = record.rhash;
    }
    return std::nullopt;
}

std::string ledger_checkpoint(const Ledger& ledger) {
    int64_t n = ledger.size();
    if (n == 0) {
        return "idx:-1 rhash:" + Digest::zero().hex();
    }
    LedgerRecord last = ledger.get(n - 1);
    return "idx:" + std::to_string(last.idx) + " rhash:" + last.rhash.hex();
}

}  // namespace ttk
