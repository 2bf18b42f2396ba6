#include "ttk/trace.hpp"

#include <algorithm>

#include "ttk/errors.hpp"
#include "ttk/hex.hpp"
#include "ttk/io.hpp"

namespace ttk {

namespace {

Value refs_value(const std::vector<EntryRef>& refs) {
    ValueList out;
    out.reserve(refs.size());
    for (const EntryRef& r : refs) {
        ValueMap m;
        m.emplace("agent", r.agent);
        m.emplace("hash", r.hash.hex());
        m.emplace("seq", r.seq);
        out.push_back(Value(std::move(m)));
    }
    return Value(std::move(out));
}

Value digests_value(const std::vector<Digest>& digests) {
    ValueList out;
    out.reserve(digests.size());
    for (const Digest& d : digests) out.push_back(d.hex());
    return Value(std::move(out));
}

ValueMap entry_map(const LogEntry& entry, bool with_sig, bool with_hash) {
    ValueMap m;
    m.emplace("v", entry.v);
    m.emplace("agent", entry.agent);
    m.emplace("seq", entry.seq);
    m.emplace("prev", entry.prev.hex());
    m.emplace("policy", entry.policy.hex());
    m.emplace("action", entry.action);
    m.emplace("params", entry.params);
    m.emplace("ts_ms", entry.ts_ms);
    m.emplace("ctx", entry.ctx);
    m.emplace("inputs", digests_value(entry.inputs));
    m.emplace("outputs", digests_value(entry.outputs));
    m.emplace("refs", refs_value(entry.refs));
    m.emplace("anchor_class", entry.anchor_class);
    if (with_sig) m.emplace("sig", to_hex(entry.sig));
    if (with_hash) m.emplace("hash", entry.hash.hex());
    return m;
}

}  // namespace

Value entry_value(const LogEntry& entry) {
    return Value(entry_map(entry, true, true));
}

std::string entry_signing_text(const LogEntry& entry) {
    return canonical_text(Value(entry_map(entry, false, false)));
}

std::string entry_hash_text(const LogEntry& entry) {
    return canonical_text(Value(entry_map(entry, true, false)));
}

Digest entry_hash(const LogEntry& entry) {
    return digest(entry_hash_text(entry));
}

namespace {

[[noreturn]] void bad_shape(const std::string& message) {
    throw Error(Errc::parse_error, message);
}

const Value& field(const ValueMap& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end()) bad_shape(std::string("entry is missing field \"") + key + "\"");
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

ValueMap map_field(const ValueMap& m, const char* key) {
    const Value& v = field(m, key);
    if (!v.is_map()) bad_shape(std::string("field \"") + key + "\" is not a map");
    return v.as_map();
}

Digest digest_field(const ValueMap& m, const char* key) {
    std::string hex = string_field(m, key);
    try {
        return Digest::from_hex(hex);
    } catch (const Error&) {
        bad_shape(std::string("field \"") + key + "\" is not a 64-char lowercase hex digest");
    }
}

std::vector<Digest> digest_list_field(const ValueMap& m, const char* key) {
    const Value& v = field(m, key);
    if (!v.is_list()) bad_shape(std::string("field \"") + key + "\" is not a list");
    std::vector<Digest> out;
    out.reserve(v.as_list().size());
    for (const Value& item : v.as_list()) {
        if (!item.is_string()) {
            bad_shape(std::string("field \"") + key + "\" contains a non-string digest");
        }
        try {
            out.push_back(Digest::from_hex(item.as_string()));
        } catch (const Error&) {
            bad_shape(std::string("field \"") + key + "\" contains a malformed digest");
        }
    }
    return out;
}

}  // namespace

LogEntry entry_from_value(const Value& v) {
    if (!v.is_map()) bad_shape("entry is not a map");
    const ValueMap& m = v.as_map();
    if (m.size() != 15) bad_shape("entry does not have exactly the 15 schema fields");

    LogEntry entry;
    entry.v = int_field(m, "v");
    if (entry.v != 1) bad_shape("unsupported schema version " + std::to_string(entry.v));
    entry.agent = string_field(m, "agent");
    if (!is_valid_did(entry.agent)) bad_shape("field \"agent\" is not a valid DID");
    entry.seq = int_field(m, "seq");
    if (entry.seq < 1) bad_shape("field \"seq\" must be >= 1");
    entry.prev = digest_field(m, "prev");
    entry.policy = digest_field(m, "policy");
    entry.action = string_field(m, "action");
    entry.params = map_field(m, "params");
    entry.ts_ms = int_field(m, "ts_ms");
    entry.ctx = map_field(m, "ctx");
    entry.inputs = digest_list_field(m, "inputs");
    entry.outputs = digest_list_field(m, "outputs");

    const Value& refs = field(m, "refs");
    if (!refs.is_list()) bad_shape("field \"refs\" is not a list");
    for (const Value& item : refs.as_list()) {
        if (!item.is_map() || item.as_map().size() != 3) {
            bad_shape("field \"refs\" contains a malformed reference");
        }
        const ValueMap& rm = item.as_map();
        EntryRef ref;
        ref.agent = string_field(rm, "agent");
        if (!is_valid_did(ref.agent)) bad_shape("reference agent is not a valid DID");
        ref.seq = int_field(rm, "seq");
        if (ref.seq < 1) bad_shape("reference seq must be >= 1");
        ref.hash = digest_field(rm, "hash");
        entry.refs.push_back(std::move(ref));
    }

    entry.anchor_class = string_field(m, "anchor_class");
    if (entry.anchor_class != "critical" && entry.anchor_class != "routine") {
        bad_shape("field \"anchor_class\" must be \"critical\" or \"routine\"");
    }
    std::string sig_hex = string_field(m, "sig");
    if (sig_hex.size() != 128 || !is_lower_hex(sig_hex)) {
        bad_shape("field \"sig\" is not a 128-char lowercase hex signature");
    }
    auto sig_bytes = from_hex(sig_hex);
    std::copy(sig_bytes.begin(), sig_bytes.end(), entry.sig.begin());
    entry.hash = digest_field(m, "hash");
    return entry;
}

LogEntry TraceLog::build_entry(const Digest& policy, const std::string& action,
                               ValueMap params, int64_t ts_ms, ValueMap ctx,
                               std::vector<Digest> inputs, std::vector<Digest> outputs,
                               std::vector<EntryRef> refs,
                               const std::string& anchor_class) const {
    if (!entries_.empty() && ts_ms < entries_.back().ts_ms) {
        throw Error(Errc::non_monotonic_timestamp,
                    "ts_ms " + std::to_string(ts_ms) + " precedes the chain tail at " +
                        std::to_string(entries_.back().ts_ms));
    }
    LogEntry entry;
    entry.agent = agent_;
    entry.seq = entries_.empty() ? 1 : entries_.back().seq + 1;
    entry.prev = entries_.empty() ? Digest::zero() : entries_.back().hash;
    entry.policy = policy;
    entry.action = action;
    entry.params = std::move(params);
    entry.ts_ms = ts_ms;
    entry.ctx = std::move(ctx);
    entry.inputs = std::move(inputs);
    entry.outputs = std::move(outputs);
    entry.refs = std::move(refs);
    entry.anchor_class = anchor_class;
    return entry;
}

LogEntry seal_entry(LogEntry entry, const KeyPair& keypair) {
    if (did_for(keypair.public_key) != entry.agent) {
        throw Error(Errc::key_mismatch, "keypair does not match entry agent " + entry.agent);
    }
    entry.sig = sign_message(keypair, entry_signing_text(entry));
    entry.hash = entry_hash(entry);
    return entry;
}

void TraceLog::append(const LogEntry& entry) {
    if (agent_.empty()) {
        agent_ = entry.agent;
    } else if (entry.agent != agent_) {
        throw Error(Errc::chain_break,
                    "entry agent " + entry.agent + " does not match log agent " + agent_);
    }
    int64_t expect_seq = entries_.empty() ? 1 : entries_.back().seq + 1;
    if (entry.seq != expect_seq) {
        throw Error(Errc::seq_gap, "expected seq " + std::to_string(expect_seq) + ", got " +
                                       std::to_string(entry.seq));
    }
    Digest expect_prev = entries_.empty() ? Digest::zero() : entries_.back().hash;
    if (entry.prev != expect_prev) {
        throw Error(Errc::chain_break,
                    "prev does not match the hash of entry " + std::to_string(entry.seq - 1));
    }
    if (!entries_.empty() && entry.ts_ms < entries_.back().ts_ms) {
        throw Error(Errc::non_monotonic_timestamp,
                    "ts_ms decreases at seq " + std::to_string(entry.seq));
    }
    if (entry_hash(entry) != entry.hash) {
        throw Error(Errc::hash_mismatch,
                    "stored hash does not recompute at seq " + std::to_string(entry.seq));
    }
    if (!verify_signature(key_from_did(entry.agent), entry_signing_text(entry), entry.sig)) {
        throw Error(Errc::bad_signature,
                    "signature does not verify at seq " + std::to_string(entry.seq));
    }
    entries_.push_back(entry);
}

std::string export_trace_text(const TraceLog& log) {
    std::string out;
    for (const LogEntry& entry : log.entries()) {
        out += canonical_text(entry_value(entry));
        out += '\n';
    }
    return out;
}

size_t export_trace(const TraceLog& log, const std::filesystem::path& path) {
    std::string text = export_trace_text(log);
    write_file_atomic(path, text);
    return text.size();
}

namespace {

// Splits newline-delimited canonical documents, enforcing canonical form per
// line. callback(line_number, value).
template <typename Fn>
void for_each_line(std::string_view text, const std::string& source_name, Fn&& callback) {
    size_t pos = 0;
    int64_t line_no = 0;
    while (pos < text.size()) {
        ++line_no;
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            throw Error(Errc::parse_error, source_name + " line " + std::to_string(line_no) +
                                               ": truncated (missing final newline)");
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        Value v;
        try {
            v = parse_value(line);
        } catch (const Error& e) {
            throw Error(Errc::parse_error,
                        source_name + " line " + std::to_string(line_no) + ": " + e.message());
        }
        if (canonical_text(v) != line) {
            throw Error(Errc::parse_error, source_name + " line " + std::to_string(line_no) +
                                               ": not in canonical form");
        }
        callback(line_no, v);
    }
}

}  // namespace

std::vector<LogEntry> read_entries_text(std::string_view text, const std::string& source_name) {
    std::vector<LogEntry> out;
    for_each_line(text, source_name, [&](int64_t line_no, const Value& v) {
        try {
            out.push_back(entry_from_value(v));
        } catch (const Error& e) {
            throw Error(Errc::parse_error,
                        source_name + " line " + std::to_string(line_no) + ": " + e.message());
        }
    });
    return out;
}

std::vector<LogEntry> read_entries(const std::filesystem::path& path) {
    return read_entries_text(read_file(path), path.string());
}

TraceLog import_trace_text(std::string_view text, const std::string& source_name) {
    TraceLog log;
    for_each_line(text, source_name, [&](int64_t line_no, const Value& v) {
        std::string where = source_name + " line " + std::to_string(line_no) + ": ";
        LogEntry entry;
        try {
            entry = entry_from_value(v);
        } catch (const Error& e) {
            throw Error(Errc::parse_error, where + e.message());
        }
        try {
            log.append(entry);
        } catch (const Error& e) {
            throw Error(e.code(), where + e.message());
        }
    });
    return log;
}

TraceLog import_trace(const std::filesystem::path& path) {
    return import_trace_text(read_file(path), path.string());
}

}  // namespace ttk
