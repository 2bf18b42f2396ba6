#include "ttk/policy.hpp"

#include <algorithm>

#include "ttk/errors.hpp"
#include "ttk/hex.hpp"
#include "ttk/io.hpp"
#include "ttk/trace.hpp"

namespace ttk {

namespace {

Value constraint_value(const ParameterConstraint& c) {
    ValueMap m;
    if (const auto* r = std::get_if<IntRange>(&c)) {
        m.emplace("kind", "int_range");
        m.emplace("min", r->min);
        m.emplace("max", r->max);
    } else if (const auto* o = std::get_if<OneOf>(&c)) {
        m.emplace("kind", "one_of");
        ValueList values;
        for (const std::string& s : o->values) values.push_back(s);
        m.emplace("values", std::move(values));
    } else if (const auto* l = std::get_if<MaxLength>(&c)) {
        m.emplace("kind", "max_length");
        m.emplace("limit", l->limit);
    } else {
        m.emplace("kind", "required");
    }
    return Value(std::move(m));
}

Value string_set_value(const std::set<std::string>& items) {
    ValueList out;
    for (const std::string& s : items) out.push_back(s);
    return Value(std::move(out));
}

}  // namespace

Value policy_value(const PolicyDocument& doc) {
    ValueMap m;
    m.emplace("policy_id", doc.policy_id);
    m.emplace("agent_did", doc.agent_did);
    m.emplace("version", doc.version);
    m.emplace("allowed_actions", string_set_value(doc.allowed_actions));

    ValueMap constraints;
    for (const auto& [action, params] : doc.parameter_constraints) {
        ValueMap per_action;
        for (const auto& [param, constraint] : params) {
            per_action.emplace(param, constraint_value(constraint));
        }
        constraints.emplace(action, std::move(per_action));
    }
    m.emplace("parameter_constraints", std::move(constraints));

    ValueList limits;
    for (const RateLimit& limit : doc.rate_limits) {
        ValueMap lm;
        lm.emplace("window_ms", limit.window_ms);
        lm.emplace("max_actions", limit.max_actions);
        if (limit.action_filter) lm.emplace("action_filter", *limit.action_filter);
        limits.push_back(Value(std::move(lm)));
    }
    m.emplace("rate_limits", std::move(limits));

    m.emplace("jurisdictions", string_set_value(doc.jurisdictions));
    m.emplace("data_boundaries", string_set_value(doc.data_boundaries));
    m.emplace("not_before_ms", doc.not_before_ms);
    m.emplace("not_after_ms", doc.not_after_ms);
    if (doc.delegated_by) m.emplace("delegated_by", *doc.delegated_by);
    return Value(std::move(m));
}

namespace {

[[noreturn]] void bad_shape(const std::string& message) {
    throw Error(Errc::parse_error, message);
}

const Value& field(const ValueMap& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end()) bad_shape(std::string("policy is missing field \"") + key + "\"");
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

std::set<std::string> string_set_field(const ValueMap& m, const char* key) {
    const Value& v = field(m, key);
    if (!v.is_list()) bad_shape(std::string("field \"") + key + "\" is not a list");
    std::set<std::string> out;
    for (const Value& item : v.as_list()) {
        if (!item.is_string()) {
            bad_shape(std::string("field \"") + key + "\" contains a non-string item");
        }
        out.insert(item.as_string());
    }
    return out;
}

ParameterConstraint constraint_from_value(const Value& v) {
    if (!v.is_map()) bad_shape("constraint is not a map");
    const ValueMap& m = v.as_map();
    std::string kind = string_field(m, "kind");
    if (kind == "int_range") {
        if (m.size() != 3) bad_shape("int_range constraint must have kind/min/max");
        return IntRange{int_field(m, "min"), int_field(m, "max")};
    }
    if (kind == "one_of") {
        if (m.size() != 2) bad_shape("one_of constraint must have kind/values");
        return OneOf{string_set_field(m, "values")};
    }
    if (kind == "max_length") {
        if (m.size() != 2) bad_shape("max_length constraint must have kind/limit");
        return MaxLength{int_field(m, "limit")};
    }
    if (kind == "required") {
        if (m.size() != 1) bad_shape("required constraint has no parameters");
        return Required{};
    }
    bad_shape("unknown constraint kind \"" + kind + "\"");
}

}  // namespace

PolicyDocument policy_from_value(const Value& v) {
    if (!v.is_map()) bad_shape("policy is not a map");
    const ValueMap& m = v.as_map();

    static const std::set<std::string> kKnown = {
        "policy_id",      "agent_did",      "version",
        "allowed_actions", "parameter_constraints", "rate_limits",
        "jurisdictions",  "data_boundaries", "not_before_ms",
        "not_after_ms",   "delegated_by"};
    for (const auto& [key, _] : m) {
        if (!kKnown.contains(key)) bad_shape("unknown policy field \"" + key + "\"");
    }

    PolicyDocument doc;
    doc.policy_id = string_field(m, "policy_id");
    doc.agent_did = string_field(m, "agent_did");
    doc.version = int_field(m, "version");
    doc.allowed_actions = string_set_field(m, "allowed_actions");

    const Value& constraints = field(m, "parameter_constraints");
    if (!constraints.is_map()) bad_shape("field \"parameter_constraints\" is not a map");
    for (const auto& [action, per_action] : constraints.as_map()) {
        if (!per_action.is_map()) {
            bad_shape("constraints for action \"" + action + "\" are not a map");
        }
        std::map<std::string, ParameterConstraint> parsed;
        for (const auto& [param, cv] : per_action.as_map()) {
            parsed.emplace(param, constraint_from_value(cv));
        }
        doc.parameter_constraints.emplace(action, std::move(parsed));
    }

    const Value& limits = field(m, "rate_limits");
    if (!limits.is_list()) bad_shape("field \"rate_limits\" is not a list");
    for (const Value& lv : limits.as_list()) {
        if (!lv.is_map()) bad_shape("rate limit is not a map");
        const ValueMap& lm = lv.as_map();
        RateLimit limit;
        limit.window_ms = int_field(lm, "window_ms");
        limit.max_actions = int_field(lm, "max_actions");
        size_t expected = 2;
        if (lm.contains("action_filter")) {
            limit.action_filter = string_field(lm, "action_filter");
            ++expected;
        }
        if (lm.size() != expected) bad_shape("rate limit has unknown fields");
        doc.rate_limits.push_back(std::move(limit));
    }

    doc.jurisdictions = string_set_field(m, "jurisdictions");
    doc.data_boundaries = string_set_field(m, "data_boundaries");
    doc.not_before_ms = int_field(m, "not_before_ms");
    doc.not_after_ms = int_field(m, "not_after_ms");
    if (m.contains("delegated_by")) doc.delegated_by = string_field(m, "delegated_by");
    return doc;
}

Digest policy_hash(const PolicyDocument& doc) {
    return digest(canonical_text(policy_value(doc)));
}

std::vector<std::string> validate_policy(const PolicyDocument& doc) {
    std::vector<std::string> errors;
    if (!is_valid_did(doc.agent_did)) errors.push_back("BadDid");
    if (doc.version < 1) errors.push_back("BadVersion");
    if (doc.allowed_actions.empty()) errors.push_back("EmptyActions");
    if (doc.not_before_ms >= doc.not_after_ms) errors.push_back("EmptyValidity");
    for (const auto& [action, params] : doc.parameter_constraints) {
        if (!doc.allowed_actions.contains(action)) {
            errors.push_back("ConstraintUnknownAction");
            break;
        }
        (void)params;
    }
    for (const auto& [action, params] : doc.parameter_constraints) {
        (void)action;
        for (const auto& [param, constraint] : params) {
            (void)param;
            if (const auto* r = std::get_if<IntRange>(&constraint)) {
                if (r->min > r->max) errors.push_back("IntRangeInverted");
            } else if (const auto* o = std::get_if<OneOf>(&constraint)) {
                if (o->values.empty()) errors.push_back("OneOfEmpty");
            } else if (const auto* l = std::get_if<MaxLength>(&constraint)) {
                if (l->limit < 0) errors.push_back("MaxLengthNegative");
            }
        }
    }
    for (const RateLimit& limit : doc.rate_limits) {
        if (limit.window_ms <= 0) errors.push_back("BadRateWindow");
        if (limit.max_actions < 1) errors.push_back("BadRateMax");
    }
    if (doc.delegated_by && !is_valid_did(*doc.delegated_by)) errors.push_back("BadDid");

    std::sort(errors.begin(), errors.end());
    errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
    return errors;
}

void MemoryPolicyStore::put(const PolicyDocument& doc) {
    std::string text = canonical_text(policy_value(doc));
    docs_[digest(text).hex()] = std::move(text);
}

std::optional<PolicyDocument> MemoryPolicyStore::get(const Digest& hash) const {
    auto it = docs_.find(hash.hex());
    if (it == docs_.end()) return std::nullopt;
    if (digest(it->second) != hash) {
        throw Error(Errc::digest_mismatch, "stored policy does not match hash " + hash.hex());
    }
    return policy_from_value(parse_value(it->second));
}

DirectoryPolicyStore::DirectoryPolicyStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw Error(Errc::io_failure, "cannot create policy store directory " + dir_.string());
    }
}

void DirectoryPolicyStore::put(const PolicyDocument& doc) {
    std::string text = canonical_text(policy_value(doc));
    std::string name = digest(text).hex() + ".json";
    write_file_atomic(dir_ / name, text + "\n");
}

std::optional<PolicyDocument> DirectoryPolicyStore::get(const Digest& hash) const {
    std::filesystem::path path = dir_ / (hash.hex() + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::string text = read_file(path);
    if (text.empty() || text.back() != '\n') {
        throw Error(Errc::digest_mismatch, path.string() + ": stored policy is truncated");
    }
    std::string_view line(text.data(), text.size() - 1);
    Value v;
    try {
        v = parse_value(line);
    } catch (const Error& e) {
        throw Error(Errc::digest_mismatch, path.string() + ": " + e.message());
    }
    if (canonical_text(v) != line || digest(line) != hash) {
        throw Error(Errc::digest_mismatch,
                    path.string() + ": stored policy does not match hash " + hash.hex());
    }
    PolicyDocument doc;
    try {
        doc = policy_from_value(v);
    } catch (const Error& e) {
        throw Error(Errc::digest_mismatch, path.string() + ": " + e.message());
    }
    return doc;
}

PolicyCommitment commit_policy(const PolicyDocument& doc, const KeyPair& keypair,
                               int64_t now_ms, Ledger& ledger, PolicyStore& store) {
    std::vector<std::string> errors = validate_policy(doc);
    if (!errors.empty()) {
        std::string joined;
        for (const std::string& e : errors) {
            if (!joined.empty()) joined += ',';
            joined += e;
        }
        throw Error(Errc::invalid_policy, joined);
    }
    if (did_for(keypair.public_key) != doc.agent_did) {
        throw Error(Errc::key_mismatch, "keypair does not match policy agent " + doc.agent_did);
    }
    Resolution res = resolve(doc.agent_did, ledger);
    if (res.state == Resolution::State::not_found) {
        throw Error(Errc::unknown_agent, doc.agent_did + " is not registered");
    }
    if (res.state == Resolution::State::revoked) {
        throw Error(Errc::revoked_identity, doc.agent_did + " was revoked");
    }

    PolicyCommitment commitment;
    commitment.policy_hash = policy_hash(doc);
    commitment.agent_did = doc.agent_did;
    commitment.committed_at_ms = now_ms;

    ValueMap preimage;
    preimage.emplace("agent_did", commitment.agent_did);
    preimage.emplace("committed_at_ms", commitment.committed_at_ms);
    preimage.emplace("policy_hash", commitment.policy_hash.hex());
    commitment.signature = sign_message(keypair, canonical_text(Value(preimage)));

    ValueMap body = preimage;
    body.emplace("sig", to_hex(commitment.signature));
    commitment.ledger_index = ledger.append("policy", std::move(body), now_ms).idx;
    store.put(doc);
    return commitment;
}

namespace {

// Unicode code points = UTF-8 bytes that are not continuation bytes. Input
// strings come from the strict parser, so the encoding is already valid.
int64_t code_point_count(const std::string& s) {
    int64_t count = 0;
    for (unsigned char c : s) {
        if ((c & 0xc0) != 0x80) ++count;
    }
    return count;
}

void check_param(const std::string& param, const ParameterConstraint& constraint,
                 const ValueMap& params, std::vector<PolicyViolation>& out) {
    auto it = params.find(param);
    if (std::holds_alternative<Required>(constraint)) {
        if (it == params.end()) {
            out.push_back({"ParamViolation", "required param \"" + param + "\" is missing"});
        }
        return;
    }
    if (it == params.end()) return;  // absent optional params pass
    const Value& v = it->second;

    if (const auto* r = std::get_if<IntRange>(&constraint)) {
        if (!v.is_int()) {
            out.push_back({"ParamViolation", "param \"" + param + "\" must be an integer"});
        } else if (v.as_int() < r->min || v.as_int() > r->max) {
            out.push_back({"ParamViolation",
                           "param \"" + param + "\"=" + std::to_string(v.as_int()) +
                               " outside [" + std::to_string(r->min) + "," +
                               std::to_string(r->max) + "]"});
        }
    } else if (const auto* o = std::get_if<OneOf>(&constraint)) {
        if (!v.is_string() || !o->values.contains(v.as_string())) {
            out.push_back({"ParamViolation",
                           "param \"" + param + "\" is not one of the allowed values"});
        }
    } else if (const auto* l = std::get_if<MaxLength>(&constraint)) {
        if (!v.is_string()) {
            out.push_back({"ParamViolation", "param \"" + param + "\" must be a string"});
        } else if (code_point_count(v.as_string()) > l->limit) {
            out.push_back({"ParamViolation",
                           "param \"" + param + "\" exceeds max length " +
                               std::to_string(l->limit)});
        }
    }
}

}  // namespace

std::vector<PolicyViolation> check_action(const PolicyDocument& doc, const LogEntry& entry) {
    if (policy_hash(doc) != entry.policy) {
        throw Error(Errc::policy_hash_mismatch,
                    "entry cites policy " + entry.policy.hex() + ", document hashes to " +
                        policy_hash(doc).hex());
    }

    std::vector<PolicyViolation> out;
    if (!doc.allowed_actions.contains(entry.action)) {
        out.push_back({"ActionNotAllowed", "action \"" + entry.action + "\" is not allowed"});
    }
    auto constraints = doc.parameter_constraints.find(entry.action);
    if (constraints != doc.parameter_constraints.end()) {
        for (const auto& [param, constraint] : constraints->second) {
            check_param(param, constraint, entry.params, out);
        }
    }
    if (entry.ts_ms < doc.not_before_ms || entry.ts_ms >= doc.not_after_ms) {
        out.push_back({"OutsideValidity",
                       "ts_ms " + std::to_string(entry.ts_ms) + " outside [" +
                           std::to_string(doc.not_before_ms) + "," +
                           std::to_string(doc.not_after_ms) + ")"});
    }

    auto labels = entry.ctx.find("data_labels");
    if (labels != entry.ctx.end()) {
        std::string offending;
        bool malformed = false;
        if (!labels->second.is_list()) {
            malformed = true;
        } else {
            for (const Value& label : labels->second.as_list()) {
                if (!label.is_string()) {
                    malformed = true;
                    break;
                }
                if (!doc.data_boundaries.contains(label.as_string())) {
                    if (!offending.empty()) offending += ',';
                    offending += label.as_string();
                }
            }
        }
        if (malformed) {
            out.push_back({"DataBoundary", "ctx data_labels is not a list of strings"});
        } else if (!offending.empty()) {
            out.push_back({"DataBoundary",
                           "labels [" + offending + "] outside the permitted boundaries"});
        }
    }

    auto jurisdiction = entry.ctx.find("jurisdiction");
    if (jurisdiction != entry.ctx.end()) {
        if (!jurisdiction->second.is_string()) {
            out.push_back({"JurisdictionMismatch", "ctx jurisdiction is not a string"});
        } else if (!doc.jurisdictions.contains(jurisdiction->second.as_string())) {
            out.push_back({"JurisdictionMismatch",
                           "jurisdiction \"" + jurisdiction->second.as_string() +
                               "\" is not permitted"});
        }
    }
    return out;
}

std::vector<RateViolation> check_rate(const PolicyDocument& doc,
                                      const std::vector<LogEntry>& entries) {
    for (size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && (entries[i].seq <= entries[i - 1].seq ||
                      entries[i].agent != entries[i - 1].agent)) {
            throw Error(Errc::unordered_input,
                        "entries must share one agent and have strictly increasing seq");
        }
    }

    std::vector<RateViolation> out;
    for (const RateLimit& limit : doc.rate_limits) {
        for (size_t i = 0; i < entries.size(); ++i) {
            const LogEntry& e = entries[i];
            if (limit.action_filter && e.action != *limit.action_filter) continue;
            int64_t lo = e.ts_ms - limit.window_ms;  // window is (lo, e.ts_ms]
            int64_t count = 0;
            for (size_t j = 0; j <= i; ++j) {
                const LogEntry& other = entries[j];
                if (limit.action_filter && other.action != *limit.action_filter) continue;
                if (other.ts_ms > lo && other.ts_ms <= e.ts_ms) ++count;
            }
            if (count > limit.max_actions) {
                std::string what = std::to_string(count) + " actions in " +
                                   std::to_string(limit.window_ms) + "ms (limit " +
                                   std::to_string(limit.max_actions) + ")";
                if (limit.action_filter) what += " for \"" + *limit.action_filter + "\"";
                out.push_back({e.seq, what});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const RateViolation& a, const RateViolation& b) { return a.seq < b.seq; });
    return out;
}

}  // namespace ttk
