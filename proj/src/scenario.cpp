#include "ttk/scenario.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <set>

#include "ttk/audit.hpp"
#include "ttk/errors.hpp"
#include "ttk/identity.hpp"
#include "ttk/io.hpp"
#include "ttk/ledger.hpp"
#include "ttk/trace.hpp"

namespace ttk {

const char* fault_kind_name(FaultKind kind) {
    switch (kind) {
        case FaultKind::none: return "none";
        case FaultKind::tamper_byte: return "tamper-byte";
        case FaultKind::forge_signature: return "forge-signature";
        case FaultKind::policy_breach_action: return "policy-breach-action";
        case FaultKind::policy_breach_param: return "policy-breach-param";
        case FaultKind::policy_breach_jurisdiction: return "policy-breach-jurisdiction";
        case FaultKind::dangling_ref: return "dangling-ref";
        case FaultKind::cycle_ref: return "cycle-ref";
        case FaultKind::drop_anchor: return "drop-anchor";
        case FaultKind::rate_burst: return "rate-burst";
    }
    return "?";
}

std::optional<FaultKind> fault_kind_from_name(std::string_view name) {
    for (FaultKind k : {FaultKind::none, FaultKind::tamper_byte, FaultKind::forge_signature,
                        FaultKind::policy_breach_action, FaultKind::policy_breach_param,
                        FaultKind::policy_breach_jurisdiction, FaultKind::dangling_ref,
                        FaultKind::cycle_ref, FaultKind::drop_anchor, FaultKind::rate_burst})
        if (name == fault_kind_name(k)) return k;
    return std::nullopt;
}

std::vector<FaultKind> all_fault_kinds() {
    return {FaultKind::tamper_byte,         FaultKind::forge_signature,
            FaultKind::policy_breach_action, FaultKind::policy_breach_param,
            FaultKind::policy_breach_jurisdiction, FaultKind::dangling_ref,
            FaultKind::cycle_ref,            FaultKind::drop_anchor,
            FaultKind::rate_burst};
}

namespace {

constexpr int64_t kDayMs = 86400000;
constexpr int64_t kYearMs = 31536000000;

ValueMap scenario_metadata(const char* scenario, const char* role) {
    ValueMap m;
    m["role"] = role;
    m["scenario"] = scenario;
    return m;
}

ValueMap note_params(std::initializer_list<std::pair<const char*, Value>> extra, int step) {
    ValueMap m;
    for (const auto& [k, v] : extra) m[k] = v;
    m["note"] = "note-" + std::to_string(step);
    return m;
}

ValueMap step_ctx(const char* jurisdiction, const char* label) {
    ValueMap m;
    m["jurisdiction"] = jurisdiction;
    ValueList labels;
    labels.push_back(Value(label));
    m["data_labels"] = Value(std::move(labels));
    return m;
}

std::array<uint8_t, 32> agent_seed(const std::string& scenario, const std::string& role,
                                   int64_t seed) {
    ValueMap m;
    m["role"] = role;
    m["scenario"] = scenario;
    m["seed"] = seed;
    Digest d = digest(canonical_text(Value(std::move(m))));
    std::array<uint8_t, 32> out{};
    std::copy(d.bytes().begin(), d.bytes().end(), out.begin());
    return out;
}

Digest synth_digest(const std::string& scenario, int step, const char* kind) {
    ValueMap m;
    m["kind"] = kind;
    m["scenario"] = scenario;
    m["step"] = step;
    return digest(canonical_text(Value(std::move(m))));
}

void validate_spec(const ScenarioSpec& spec) {
    auto fail = [](const std::string& what) { throw Error(Errc::invalid_spec, what); };
    if (spec.agents.empty()) fail("scenario has no agents");
    if (spec.steps.empty()) fail("scenario has no steps");
    std::set<std::string> roles;
    std::set<std::string> with_policy;
    for (const ScenarioAgent& a : spec.agents) {
        if (a.role.empty()) fail("agent with empty role");
        if (!roles.insert(a.role).second) fail("duplicate role " + a.role);
        if (a.policy.has_value()) with_policy.insert(a.role);
    }
    if (roles.count(spec.submitter_role) == 0)
        fail("submitter role " + spec.submitter_role + " is not an agent");
    for (size_t i = 0; i < spec.steps.size(); ++i) {
        const ScenarioStep& s = spec.steps[i];
        std::string at = "step " + std::to_string(i);
        if (with_policy.count(s.role) == 0) fail(at + " role " + s.role + " has no policy");
        if (s.anchor_class != "routine" && s.anchor_class != "critical")
            fail(at + " has anchor class " + s.anchor_class);
        for (int r : s.refs)
            if (r < 0 || static_cast<size_t>(r) >= i)
                fail(at + " ref " + std::to_string(r) + " is not strictly earlier");
    }
}

bool anchor_covers(const BatchAnchor& anchor, const std::string& did, int64_t seq) {
    for (const CoverageRange& range : anchor.coverage)
        if (range.agent == did && range.first_seq <= seq && seq <= range.last_seq) return true;
    return false;
}

struct ExpectedFinding {
    std::string agent;
    int64_t seq;
    std::string check;
    std::string verdict;
    std::string reason;
};

}  // namespace

ScenarioSpec builtin_pharma() {
    ScenarioSpec spec;
    spec.name = "pharma";
    spec.base_ts_ms = 1735689600000;
    spec.step_ms = 1000;
    spec.submitter_role = "qa-reviewer";
    spec.anchor_strategy = EveryN{4};

    const int64_t nb = spec.base_ts_ms - kDayMs;
    const int64_t na = spec.base_ts_ms + kYearMs;

    {
        ScenarioAgent a;
        a.role = "data-synthesizer";
        a.metadata = scenario_metadata("pharma", "data-synthesizer");
        PolicyDocument p;
        p.policy_id = "pharma-data-synthesizer-policy";
        p.allowed_actions = {"synthesize-data", "validate-data"};
        p.parameter_constraints["synthesize-data"] = {{"samples", IntRange{1, 1000}},
                                                      {"note", MaxLength{64}}};
        p.parameter_constraints["validate-data"] = {{"samples", IntRange{1, 1000}},
                                                    {"note", MaxLength{64}}};
        p.rate_limits = {RateLimit{1000, 2, std::nullopt}};
        p.jurisdictions = {"US-FDA"};
        p.data_boundaries = {"preclinical", "synthetic-data"};
        p.not_before_ms = nb;
        p.not_after_ms = na;
        a.policy = std::move(p);
        spec.agents.push_back(std::move(a));
    }
    {
        ScenarioAgent a;
        a.role = "document-drafter";
        a.metadata = scenario_metadata("pharma", "document-drafter");
        PolicyDocument p;
        p.policy_id = "pharma-document-drafter-policy";
        p.allowed_actions = {"draft-section", "revise-section"};
        p.parameter_constraints["draft-section"] = {
            {"section", OneOf{{"intro", "methods", "results", "safety"}}},
            {"note", MaxLength{64}}};
        p.parameter_constraints["revise-section"] = {
            {"section", OneOf{{"intro", "methods", "results", "safety"}}},
            {"severity", IntRange{1, 5}},
            {"note", MaxLength{64}}};
        p.rate_limits = {RateLimit{60000, 10, std::nullopt}};
        p.jurisdictions = {"US-FDA"};
        p.data_boundaries = {"preclinical", "draft-docs"};
        p.not_before_ms = nb;
        p.not_after_ms = na;
        a.policy = std::move(p);
        spec.agents.push_back(std::move(a));
    }
    {
        ScenarioAgent a;
        a.role = "qa-reviewer";
        a.metadata = scenario_metadata("pharma", "qa-reviewer");
        PolicyDocument p;
        p.policy_id = "pharma-qa-reviewer-policy";
        p.allowed_actions = {"review-section", "approve-document"};
        p.parameter_constraints["review-section"] = {{"verdict", OneOf{{"pass", "fail"}}},
                                                     {"note", MaxLength{64}}};
        p.parameter_constraints["approve-document"] = {{"verdict", OneOf{{"pass", "fail"}}},
                                                       {"approver", Required{}},
                                                       {"note", MaxLength{64}}};
        p.rate_limits = {RateLimit{60000, 10, std::nullopt}};
        p.jurisdictions = {"US-FDA"};
        p.data_boundaries = {"review"};
        p.not_before_ms = nb;
        p.not_after_ms = na;
        a.policy = std::move(p);
        spec.agents.push_back(std::move(a));
    }

    auto ds = [](int i, const char* action, int64_t samples) {
        return ScenarioStep{"data-synthesizer", action,
                            note_params({{"samples", Value(samples)}}, i),
                            step_ctx("US-FDA", "preclinical"),
                            {},
                            "routine"};
    };
    auto dd = [](int i, const char* action, const char* section, std::vector<int> refs,
                 int severity = 0) {
        ValueMap params = severity > 0
                              ? note_params({{"section", Value(section)},
                                             {"severity", Value(int64_t(severity))}},
                                            i)
                              : note_params({{"section", Value(section)}}, i);
        return ScenarioStep{"document-drafter", action,        std::move(params),
                            step_ctx("US-FDA", "draft-docs"),  std::move(refs),
                            "routine"};
    };
    auto qa = [](int i, const char* action, std::vector<int> refs, bool critical,
                 bool approver = false) {
        ValueMap params = approver ? note_params({{"verdict", Value("pass")},
                                                  {"approver", Value("lead-reviewer-7")}},
                                                 i)
                                   : note_params({{"verdict", Value("pass")}}, i);
        return ScenarioStep{"qa-reviewer",
                            action,
                            std::move(params),
                            step_ctx("US-FDA", "review"),
                            std::move(refs),
                            critical ? "critical" : "routine"};
    };

    spec.steps.push_back(ds(0, "synthesize-data", 500));
    ScenarioStep s1 = ds(1, "validate-data", 500);
    s1.refs = {0};
    spec.steps.push_back(std::move(s1));
    spec.steps.push_back(dd(2, "draft-section", "intro", {0}));
    spec.steps.push_back(ds(3, "synthesize-data", 800));
    spec.steps.push_back(dd(4, "draft-section", "methods", {1, 3}));
    spec.steps.push_back(dd(5, "revise-section", "methods", {4}, 2));
    spec.steps.push_back(qa(6, "review-section", {2}, true));
    spec.steps.push_back(dd(7, "draft-section", "results", {3}));
    spec.steps.push_back(qa(8, "review-section", {5}, false));
    spec.steps.push_back(dd(9, "revise-section", "results", {7, 8}, 3));
    spec.steps.push_back(qa(10, "review-section", {9}, false));
    spec.steps.push_back(qa(11, "approve-document", {6, 8, 10}, true, true));

    FaultPlan& f = spec.faults;
    f.tamper_role = "data-synthesizer";
    f.forge_role = "qa-reviewer";
    f.forge_with = "document-drafter";
    f.breach_action_step = 11;
    f.breach_action = "delete-document";
    f.breach_param_step = 5;
    f.breach_param = "severity";
    f.breach_value = Value(int64_t(9));
    f.breach_jurisdiction_step = 7;
    f.breach_jurisdiction = "EU";
    f.dangling_step = 8;
    f.dangling_role = "data-synthesizer";
    f.cycle_step_a = 4;
    f.cycle_step_b = 7;
    f.burst_role = "data-synthesizer";
    f.burst_action = "synthesize-data";
    f.burst_params = ValueMap{{"samples", Value(int64_t(700))}, {"note", Value("burst")}};
    f.burst_ctx = step_ctx("US-FDA", "preclinical");
    f.burst_count = 4;
    f.burst_offset_ms = 20000;
    f.burst_spacing_ms = 100;
    f.burst_violation_seqs = {6, 7};
    return spec;
}

ScenarioSpec builtin_legal() {
    ScenarioSpec spec;
    spec.name = "legal";
    spec.base_ts_ms = 1738368000000;
    spec.step_ms = 1000;
    spec.submitter_role = "orchestrator";
    spec.anchor_strategy = CriticalImmediate{3};

    const int64_t nb = spec.base_ts_ms - kDayMs;
    const int64_t na = spec.base_ts_ms + kYearMs;

    auto firm = [&](const char* role, const char* regulation, const char* jurisdiction) {
        ScenarioAgent a;
        a.role = role;
        a.metadata = scenario_metadata("legal", role);
        PolicyDocument p;
        p.policy_id = std::string("legal-") + role + "-policy";
        p.allowed_actions = {"summarize-document", "redact-document"};
        p.parameter_constraints["summarize-document"] = {{"doc_id", IntRange{1, 100000}},
                                                         {"regulation", OneOf{{regulation}}},
                                                         {"note", MaxLength{64}}};
        p.parameter_constraints["redact-document"] = {{"doc_id", IntRange{1, 100000}},
                                                      {"regulation", OneOf{{regulation}}},
                                                      {"note", MaxLength{64}}};
        p.rate_limits = {RateLimit{5000, 2, "summarize-document"}};
        p.jurisdictions = {jurisdiction};
        p.data_boundaries = {"contracts", "client-files"};
        p.not_before_ms = nb;
        p.not_after_ms = na;
        a.policy = std::move(p);
        return a;
    };
    spec.agents.push_back(firm("firm-a", "GDPR", "EU"));
    spec.agents.push_back(firm("firm-b", "CCPA", "US-CA"));
    {
        ScenarioAgent a;
        a.role = "orchestrator";
        a.metadata = scenario_metadata("legal", "orchestrator");
        spec.agents.push_back(std::move(a));
    }

    auto act = [](const char* role, int i, const char* action, int64_t doc_id,
                  const char* regulation, const char* jurisdiction, std::vector<int> refs,
                  bool critical) {
        return ScenarioStep{role,
                            action,
                            note_params({{"doc_id", Value(doc_id)},
                                         {"regulation", Value(regulation)}},
                                        i),
                            step_ctx(jurisdiction, "contracts"),
                            std::move(refs),
                            critical ? "critical" : "routine"};
    };
    spec.steps.push_back(act("firm-a", 0, "summarize-document", 101, "GDPR", "EU", {}, false));
    spec.steps.push_back(act("firm-b", 1, "summarize-document", 201, "CCPA", "US-CA", {}, true));
    spec.steps.push_back(act("firm-a", 2, "redact-document", 101, "GDPR", "EU", {0}, false));
    spec.steps.push_back(act("firm-b", 3, "redact-document", 201, "CCPA", "US-CA", {1}, true));
    spec.steps.push_back(act("firm-a", 4, "summarize-document", 102, "GDPR", "EU", {2}, false));
    spec.steps.push_back(act("firm-b", 5, "summarize-document", 202, "CCPA", "US-CA", {3}, false));
    spec.steps.push_back(act("firm-a", 6, "redact-document", 102, "GDPR", "EU", {4}, false));
    spec.steps.push_back(
        act("firm-b", 7, "redact-document", 202, "CCPA", "US-CA", {5, 6}, false));

    FaultPlan& f = spec.faults;
    f.tamper_role = "firm-a";
    f.forge_role = "firm-b";
    f.forge_with = "firm-a";
    f.breach_action_step = 7;
    f.breach_action = "delete-document";
    f.breach_param_step = 4;
    f.breach_param = "regulation";
    f.breach_value = Value("HIPAA");
    f.breach_jurisdiction_step = 4;
    f.breach_jurisdiction = "US-CA";
    f.dangling_step = 6;
    f.dangling_role = "firm-b";
    f.cycle_step_a = 5;
    f.cycle_step_b = 7;
    f.burst_role = "firm-a";
    f.burst_action = "summarize-document";
    f.burst_params = ValueMap{{"doc_id", Value(int64_t(103))}, {"regulation", Value("GDPR")},
                              {"note", Value("burst")}};
    f.burst_ctx = step_ctx("EU", "contracts");
    f.burst_count = 3;
    f.burst_offset_ms = 30000;
    f.burst_spacing_ms = 100;
    f.burst_violation_seqs = {7};
    return spec;
}

std::optional<ScenarioSpec> builtin_scenario(std::string_view name) {
    if (name == "pharma") return builtin_pharma();
    if (name == "legal") return builtin_legal();
    return std::nullopt;
}

ScenarioArtifacts run_scenario(const ScenarioSpec& given, int64_t seed,
                               const std::filesystem::path& out_dir, FaultKind fault) {
    namespace fs = std::filesystem;
    validate_spec(given);

    ScenarioSpec spec = given;  // behavioral faults rewrite the script
    const FaultPlan& plan = spec.faults;

    auto require_step = [&](int idx, const char* what) {
        if (idx < 0 || static_cast<size_t>(idx) >= spec.steps.size())
            throw Error(Errc::invalid_spec, std::string(what) + " step is out of range");
    };
    auto require_role = [&](const std::string& role, const char* what) {
        for (const ScenarioAgent& a : spec.agents)
            if (a.role == role) return;
        throw Error(Errc::invalid_spec, std::string(what) + " names unknown role " + role);
    };

    // step -> per-agent seq, before any edits (faults never reorder steps)
    std::map<std::string, int64_t> natural_count;
    std::vector<int64_t> step_seq(spec.steps.size());
    for (size_t i = 0; i < spec.steps.size(); ++i)
        step_seq[i] = ++natural_count[spec.steps[i].role];

    switch (fault) {
        case FaultKind::policy_breach_action:
            require_step(plan.breach_action_step, "policy-breach-action");
            spec.steps[plan.breach_action_step].action = plan.breach_action;
            break;
        case FaultKind::policy_breach_param:
            require_step(plan.breach_param_step, "policy-breach-param");
            spec.steps[plan.breach_param_step].params[plan.breach_param] = plan.breach_value;
            break;
        case FaultKind::policy_breach_jurisdiction:
            require_step(plan.breach_jurisdiction_step, "policy-breach-jurisdiction");
            spec.steps[plan.breach_jurisdiction_step].ctx["jurisdiction"] =
                plan.breach_jurisdiction;
            break;
        case FaultKind::tamper_byte: require_role(plan.tamper_role, "tamper-byte"); break;
        case FaultKind::forge_signature:
            require_role(plan.forge_role, "forge-signature");
            require_role(plan.forge_with, "forge-signature");
            break;
        case FaultKind::dangling_ref:
            require_step(plan.dangling_step, "dangling-ref");
            require_role(plan.dangling_role, "dangling-ref");
            break;
        case FaultKind::cycle_ref:
            require_step(plan.cycle_step_a, "cycle-ref");
            require_step(plan.cycle_step_b, "cycle-ref");
            if (plan.cycle_step_a >= plan.cycle_step_b)
                throw Error(Errc::invalid_spec, "cycle-ref steps must be ordered");
            break;
        case FaultKind::rate_burst:
            require_role(plan.burst_role, "rate-burst");
            if (plan.burst_count < 1)
                throw Error(Errc::invalid_spec, "rate-burst needs a positive count");
            break;
        default: break;
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io_failure, "cannot create " + out_dir.string());
    for (const char* sub : {"keys", "traces", "policies"}) {
        fs::remove_all(out_dir / sub, ec);  // stale files would break regeneration
        if (ec) throw Error(Errc::io_failure, "cannot clear " + (out_dir / sub).string());
        fs::create_directories(out_dir / sub, ec);
        if (ec) throw Error(Errc::io_failure, "cannot create " + (out_dir / sub).string());
    }
    fs::remove(out_dir / "ledger.ttkl", ec);
    if (ec) throw Error(Errc::io_failure, "cannot remove the previous ledger");
    fs::remove(out_dir / "expected_findings.json", ec);
    if (ec) throw Error(Errc::io_failure, "cannot remove the previous manifest");

    ScenarioArtifacts artifacts;
    artifacts.dir = out_dir;
    artifacts.ledger_file = out_dir / "ledger.ttkl";
    artifacts.policy_dir = out_dir / "policies";
    artifacts.manifest_file = out_dir / "expected_findings.json";

    FileLedger ledger(artifacts.ledger_file);
    DirectoryPolicyStore store(artifacts.policy_dir);

    std::map<std::string, KeyPair> keys;
    std::map<std::string, std::string> dids;
    int64_t ts = spec.base_ts_ms - 10000;
    for (const ScenarioAgent& a : spec.agents) {
        KeyPair kp = generate_keypair(agent_seed(spec.name, a.role, seed));
        keys.emplace(a.role, kp);
        dids.emplace(a.role, did_for(kp.public_key));
        write_key_file(out_dir / "keys" / (a.role + ".json"), kp);
        AgentIdentity identity;
        identity.did = dids[a.role];
        identity.public_key = kp.public_key;
        identity.metadata = a.metadata;
        register_identity(identity, kp, ledger, ts);
        ts += 100;
    }
    artifacts.role_dids = dids;

    std::map<std::string, Digest> policy_hashes;
    ts = spec.base_ts_ms - 5000;
    for (const ScenarioAgent& a : spec.agents) {
        if (!a.policy.has_value()) continue;
        PolicyDocument doc = *a.policy;
        doc.agent_did = dids[a.role];
        commit_policy(doc, keys[a.role], ts, ledger, store);
        policy_hashes.emplace(a.role, policy_hash(doc));
        ts += 100;
    }

    std::map<std::string, TraceLog> logs;
    for (const ScenarioAgent& a : spec.agents) logs.emplace(a.role, TraceLog(dids[a.role]));

    std::vector<Digest> step_hash(spec.steps.size());
    for (size_t i = 0; i < spec.steps.size(); ++i) {
        const ScenarioStep& s = spec.steps[i];
        std::vector<EntryRef> refs;
        for (int r : s.refs)
            refs.push_back(EntryRef{dids[spec.steps[r].role], step_seq[r], step_hash[r]});
        if (fault == FaultKind::dangling_ref && static_cast<int>(i) == plan.dangling_step)
            refs.push_back(EntryRef{dids[plan.dangling_role], 99, Digest::zero()});
        if (fault == FaultKind::cycle_ref && static_cast<int>(i) == plan.cycle_step_a) {
            // forward ref: the target is not sealed yet, so the hash is a
            // placeholder; the audit must flag both the mismatch and the cycle
            const ScenarioStep& b = spec.steps[plan.cycle_step_b];
            refs.push_back(EntryRef{dids[b.role], step_seq[plan.cycle_step_b], Digest::zero()});
        }
        if (fault == FaultKind::cycle_ref && static_cast<int>(i) == plan.cycle_step_b) {
            const ScenarioStep& a = spec.steps[plan.cycle_step_a];
            refs.push_back(EntryRef{dids[a.role], step_seq[plan.cycle_step_a],
                                    step_hash[plan.cycle_step_a]});
        }

        TraceLog& log = logs.at(s.role);
        LogEntry entry = log.build_entry(
            policy_hashes.at(s.role), s.action, s.params,
            spec.base_ts_ms + static_cast<int64_t>(i) * spec.step_ms, s.ctx,
            {synth_digest(spec.name, static_cast<int>(i), "input")},
            {synth_digest(spec.name, static_cast<int>(i), "output")}, std::move(refs),
            s.anchor_class);
        entry = seal_entry(std::move(entry), keys[s.role]);
        log.append(entry);
        step_hash[i] = entry.hash;
    }

    if (fault == FaultKind::rate_burst) {
        TraceLog& log = logs.at(plan.burst_role);
        for (int k = 0; k < plan.burst_count; ++k) {
            LogEntry entry = log.build_entry(
                policy_hashes.at(plan.burst_role), plan.burst_action, plan.burst_params,
                spec.base_ts_ms + plan.burst_offset_ms + k * plan.burst_spacing_ms,
                plan.burst_ctx, {}, {}, {}, "routine");
            entry = seal_entry(std::move(entry), keys[plan.burst_role]);
            log.append(entry);
        }
    }

    std::vector<LogEntry> pending;
    for (const ScenarioAgent& a : spec.agents)
        for (const LogEntry& e : logs.at(a.role).entries()) pending.push_back(e);
    artifacts.anchors = flush_batches(pending, spec.anchor_strategy,
                                      keys.at(spec.submitter_role),
                                      spec.base_ts_ms + 1000000, ledger);

    for (const ScenarioAgent& a : spec.agents) {
        const TraceLog& log = logs.at(a.role);
        if (log.empty()) continue;
        fs::path p = out_dir / "traces" / (a.role + ".ttkt");
        export_trace(log, p);
        artifacts.trace_files.push_back(p);
    }

    // evidence faults: mutate the persisted files after honest generation
    if (fault == FaultKind::tamper_byte) {
        fs::path p = out_dir / "traces" / (plan.tamper_role + ".ttkt");
        std::string text = read_file(p);
        size_t at = text.find("\"note\":\"");
        if (at == std::string::npos)
            throw Error(Errc::invalid_spec, "tamper-byte target has no note param");
        at += std::strlen("\"note\":\"");
        text[at] = text[at] == 'x' ? 'y' : 'x';
        write_file_atomic(p, text);
    }
    if (fault == FaultKind::forge_signature) {
        const TraceLog& log = logs.at(plan.forge_role);
        if (log.empty()) throw Error(Errc::invalid_spec, "forge-signature target trace is empty");
        LogEntry forged = log.back();
        forged.sig = sign_message(keys.at(plan.forge_with), entry_signing_text(forged));
        forged.hash = entry_hash(forged);  // stored hash covers the sig
        std::string text;
        for (size_t i = 0; i < log.size(); ++i) {
            const LogEntry& e = (i + 1 == log.size()) ? forged : log.entries()[i];
            text += canonical_text(entry_value(e));
            text += "\n";
        }
        write_file_atomic(out_dir / "traces" / (plan.forge_role + ".ttkt"), text);
    }
    if (fault == FaultKind::drop_anchor) {
        if (artifacts.anchors.empty())
            throw Error(Errc::invalid_spec, "drop-anchor needs at least one flushed batch");
        std::string text = read_file(artifacts.ledger_file);
        if (text.empty() || text.back() != '\n')
            throw Error(Errc::corrupt_ledger, "generated ledger is missing a final newline");
        size_t cut = text.rfind('\n', text.size() - 2);
        text = cut == std::string::npos ? std::string() : text.substr(0, cut + 1);
        write_file_atomic(artifacts.ledger_file, text);
    }

    // the findings an audit of this directory must produce
    std::vector<ExpectedFinding> expected;
    std::string overall = "VALID";
    switch (fault) {
        case FaultKind::none: break;
        case FaultKind::tamper_byte:
            expected.push_back(
                {dids[plan.tamper_role], 1, "ChainCheck", "VIOLATION", "HashMismatch"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::forge_signature: {
            const std::string& did = dids[plan.forge_role];
            int64_t seq = natural_count[plan.forge_role];
            expected.push_back({did, seq, "SignatureCheck", "VIOLATION", "BadSignature"});
            // the forged hash breaks the reconstruction of its whole batch
            for (const BatchAnchor& anchor : artifacts.anchors) {
                if (!anchor_covers(anchor, did, seq)) continue;
                for (const CoverageRange& range : anchor.coverage)
                    for (int64_t s = range.first_seq; s <= range.last_seq; ++s)
                        expected.push_back(
                            {range.agent, s, "AnchorCheck", "VIOLATION", "RootMismatch"});
            }
            overall = "VIOLATIONS_FOUND";
            break;
        }
        case FaultKind::policy_breach_action:
            expected.push_back({dids[spec.steps[plan.breach_action_step].role],
                                step_seq[plan.breach_action_step], "PolicyCheck", "VIOLATION",
                                "ActionNotAllowed"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::policy_breach_param:
            expected.push_back({dids[spec.steps[plan.breach_param_step].role],
                                step_seq[plan.breach_param_step], "PolicyCheck", "VIOLATION",
                                "ParamViolation"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::policy_breach_jurisdiction:
            expected.push_back({dids[spec.steps[plan.breach_jurisdiction_step].role],
                                step_seq[plan.breach_jurisdiction_step], "PolicyCheck",
                                "VIOLATION", "JurisdictionMismatch"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::dangling_ref:
            expected.push_back({dids[spec.steps[plan.dangling_step].role],
                                step_seq[plan.dangling_step], "LineageCheck", "VIOLATION",
                                "DanglingRef"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::cycle_ref:
            expected.push_back({dids[spec.steps[plan.cycle_step_a].role],
                                step_seq[plan.cycle_step_a], "LineageCheck", "VIOLATION",
                                "CycleDetected,RefHashMismatch"});
            expected.push_back({dids[spec.steps[plan.cycle_step_b].role],
                                step_seq[plan.cycle_step_b], "LineageCheck", "VIOLATION",
                                "CycleDetected"});
            overall = "VIOLATIONS_FOUND";
            break;
        case FaultKind::drop_anchor: {
            const BatchAnchor& dropped = artifacts.anchors.back();
            for (const CoverageRange& range : dropped.coverage)
                for (int64_t s = range.first_seq; s <= range.last_seq; ++s)
                    expected.push_back(
                        {range.agent, s, "AnchorCheck", "UNVERIFIABLE", "Unanchored"});
            overall = "UNVERIFIABLE";
            break;
        }
        case FaultKind::rate_burst:
            for (int64_t s : plan.burst_violation_seqs)
                expected.push_back(
                    {dids[plan.burst_role], s, "RateCheck", "VIOLATION", "RateViolation"});
            overall = "VIOLATIONS_FOUND";
            break;
    }
    std::sort(expected.begin(), expected.end(),
              [](const ExpectedFinding& a, const ExpectedFinding& b) {
                  return std::tie(a.agent, a.seq, a.check) < std::tie(b.agent, b.seq, b.check);
              });

    ValueMap manifest;
    ValueList items;
    for (const ExpectedFinding& e : expected) {
        ValueMap m;
        m["agent"] = e.agent;
        m["seq"] = e.seq;
        m["check"] = e.check;
        m["verdict"] = e.verdict;
        m["reason"] = e.reason;
        items.push_back(Value(std::move(m)));
    }
    manifest["findings"] = Value(std::move(items));
    manifest["overall"] = overall;
    write_file_atomic(artifacts.manifest_file, canonical_text(Value(std::move(manifest))) + "\n");

    return artifacts;
}

}  // namespace ttk
