// ttk: command-line front end for the trust-track library. Exit codes:
// 0 success/VALID, 1 findings (VIOLATION/UNVERIFIABLE), 2 usage, 3 I/O or
// corrupt evidence.

#include <fcntl.h>
#include <glob.h>
#include <sys/file.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttk/audit.hpp"
#include "ttk/canonical.hpp"
#include "ttk/errors.hpp"
#include "ttk/hex.hpp"
#include "ttk/identity.hpp"
#include "ttk/io.hpp"
#include "ttk/ledger.hpp"
#include "ttk/policy.hpp"
#include "ttk/scenario.hpp"
#include "ttk/trace.hpp"

namespace {

using namespace ttk;

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::parse_error:
        case Errc::io_failure:
        case Errc::corrupt_ledger:
        case Errc::hash_mismatch:
        case Errc::chain_break:
        case Errc::seq_gap:
        case Errc::non_monotonic_timestamp:
        case Errc::bad_signature:
        case Errc::digest_mismatch:
        case Errc::ledger_append_failure: return 3;
        default: return 2;
    }
}

int64_t wall_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// Serializes ledger mutations across processes; readers do not take it.
class LedgerLock {
public:
    explicit LedgerLock(const std::filesystem::path& ledger_path)
        : path_(ledger_path.string() + ".lock") {
        fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error(Errc::io_failure, "cannot open lock file " + path_);
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw Error(Errc::io_failure, "cannot lock " + path_);
        }
    }
    ~LedgerLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    LedgerLock(const LedgerLock&) = delete;
    LedgerLock& operator=(const LedgerLock&) = delete;

private:
    std::string path_;
    int fd_ = -1;
};

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == GLOB_NOMATCH) {
        ::globfree(&g);
        return {};
    }
    if (rc != 0) {
        ::globfree(&g);
        throw Error(Errc::io_failure, "cannot expand pattern " + pattern);
    }
    std::vector<std::string> out(g.gl_pathv, g.gl_pathv + g.gl_pathc);
    ::globfree(&g);
    return out;
}

void print_value(const Value& v) { std::cout << canonical_text(v) << "\n"; }

Value read_json_file(const std::string& path) { return parse_value(read_file(path)); }

ValueMap read_map_file(const std::string& path) {
    Value v = read_json_file(path);
    return v.as_map();  // parse_error when not a map
}

int64_t parse_i64(const std::string& text, const char* what) {
    int64_t out = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || p != text.data() + text.size())
        throw Error(Errc::malformed_input, std::string(what) + " must be an integer, got '" +
                                               text + "'");
    return out;
}

EntryRef parse_ref(const std::string& text) {
    size_t h = text.rfind(':');
    size_t q = h == std::string::npos || h == 0 ? std::string::npos : text.rfind(':', h - 1);
    if (h == std::string::npos || q == std::string::npos || q == 0)
        throw Error(Errc::malformed_input, "ref must be agent:seq:hash, got '" + text + "'");
    EntryRef r;
    r.agent = text.substr(0, q);
    r.seq = parse_i64(text.substr(q + 1, h - q - 1), "ref seq");
    r.hash = Digest::from_hex(text.substr(h + 1));
    return r;
}

AnchorPolicy parse_strategy(const std::string& text) {
    if (text == "manual") return Manual{};
    if (text == "critical") return CriticalImmediate{1};
    if (text.rfind("critical:", 0) == 0)
        return CriticalImmediate{parse_i64(text.substr(9), "critical fallback")};
    if (text.rfind("every-n:", 0) == 0) return EveryN{parse_i64(text.substr(8), "every-n")};
    throw Error(Errc::malformed_input,
                "strategy must be every-n:N, critical[:N], or manual, got '" + text + "'");
}

ReportFormat parse_format(const std::string& text) {
    if (text == "interchange") return ReportFormat::interchange;
    if (text == "text") return ReportFormat::text;
    throw Error(Errc::malformed_input, "format must be interchange or text, got '" + text + "'");
}

std::vector<std::vector<LogEntry>> read_trace_set(const std::string& pattern) {
    std::vector<std::vector<LogEntry>> logs;
    for (const std::string& path : expand_glob(pattern)) logs.push_back(read_entries(path));
    return logs;
}

struct CommonPaths {
    std::string ledger;
    std::string store;
    std::string traces;
    std::string format = "interchange";
};

int cmd_keygen(const std::string& out, const std::string& seed_hex) {
    KeyPair kp;
    if (seed_hex.empty()) {
        kp = generate_keypair();
    } else {
        Bytes seed = from_hex(seed_hex);
        kp = generate_keypair(seed);
    }
    write_key_file(out, kp);
    ValueMap m;
    m["did"] = did_for(kp.public_key);
    m["path"] = out;
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_id_register(const std::string& key_path, const std::string& ledger_path,
                    const std::string& metadata_path) {
    KeyPair kp = read_key_file(key_path);
    AgentIdentity identity;
    identity.did = did_for(kp.public_key);
    identity.public_key = kp.public_key;
    if (!metadata_path.empty()) identity.metadata = read_map_file(metadata_path);
    LedgerLock lock{ledger_path};
    FileLedger ledger{ledger_path};
    int64_t idx = register_identity(identity, kp, ledger, wall_clock_ms());
    ValueMap m;
    m["did"] = identity.did;
    m["ledger_index"] = idx;
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_id_resolve(const std::string& did, const std::string& ledger_path) {
    FileLedger ledger{ledger_path};
    Resolution res = resolve(did, ledger);
    ValueMap m;
    m["did"] = std::string(did);
    switch (res.state) {
        case Resolution::State::not_found: m["state"] = "not_found"; break;
        case Resolution::State::registered: m["state"] = "registered"; break;
        case Resolution::State::revoked:
            m["state"] = "revoked";
            m["revoked_at_ms"] = res.revoked_at_ms;
            m["revoked_ledger_index"] = res.revoked_ledger_index;
            break;
    }
    if (res.identity.has_value() && res.identity->registered_at.has_value())
        m["registered_at"] = *res.identity->registered_at;
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_id_revoke(const std::string& key_path, const std::string& ledger_path,
                  const std::string& reason) {
    KeyPair kp = read_key_file(key_path);
    std::string did = did_for(kp.public_key);
    LedgerLock lock{ledger_path};
    FileLedger ledger{ledger_path};
    int64_t idx = revoke_identity(did, kp, reason, wall_clock_ms(), ledger);
    ValueMap m;
    m["did"] = did;
    m["ledger_index"] = idx;
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_policy_validate(const std::string& policy_path) {
    PolicyDocument doc = policy_from_value(read_json_file(policy_path));
    std::vector<std::string> errors = validate_policy(doc);
    ValueMap m;
    ValueList errs;
    for (const std::string& e : errors) errs.push_back(Value(e));
    m["errors"] = Value(std::move(errs));
    m["policy_hash"] = policy_hash(doc).hex();
    print_value(Value(std::move(m)));
    return errors.empty() ? 0 : 1;
}

int cmd_policy_commit(const std::string& key_path, const std::string& policy_path,
                      const std::string& ledger_path, const std::string& store_dir) {
    KeyPair kp = read_key_file(key_path);
    PolicyDocument doc = policy_from_value(read_json_file(policy_path));
    LedgerLock lock{ledger_path};
    FileLedger ledger{ledger_path};
    DirectoryPolicyStore store{store_dir};
    PolicyCommitment c = commit_policy(doc, kp, wall_clock_ms(), ledger, store);
    ValueMap m;
    m["agent_did"] = c.agent_did;
    m["ledger_index"] = c.ledger_index;
    m["policy_hash"] = c.policy_hash.hex();
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_log_append(const std::string& key_path, const std::string& trace_path,
                   const std::string& policy_hash_hex, const std::string& action,
                   const std::string& params_path, const std::string& ctx_path,
                   std::optional<int64_t> ts_ms, const std::vector<std::string>& ref_args,
                   const std::string& anchor_class) {
    KeyPair kp = read_key_file(key_path);
    std::string did = did_for(kp.public_key);
    Digest policy = Digest::from_hex(policy_hash_hex);
    ValueMap params = params_path.empty() ? ValueMap{} : read_map_file(params_path);
    ValueMap ctx = ctx_path.empty() ? ValueMap{} : read_map_file(ctx_path);
    std::vector<EntryRef> refs;
    for (const std::string& r : ref_args) refs.push_back(parse_ref(r));

    TraceLog log = std::filesystem::exists(trace_path) ? import_trace(trace_path)
                                                       : TraceLog(did);
    if (!log.empty() && log.agent() != did)
        throw Error(Errc::key_mismatch, "trace belongs to " + log.agent());
    int64_t ts = ts_ms.has_value() ? *ts_ms : wall_clock_ms();
    if (!log.empty() && ts < log.back().ts_ms)
        throw Error(Errc::malformed_input,
                    "--ts-ms " + std::to_string(ts) + " precedes the trace tail " +
                        std::to_string(log.back().ts_ms));

    LogEntry entry =
        log.build_entry(policy, action, std::move(params), ts, std::move(ctx), {}, {},
                        std::move(refs), anchor_class);
    entry = seal_entry(std::move(entry), kp);
    log.append(entry);
    export_trace(log, trace_path);

    ValueMap m;
    m["agent"] = did;
    m["seq"] = entry.seq;
    m["hash"] = entry.hash.hex();
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_anchor_flush(const std::string& traces_glob, const std::string& ledger_path,
                     const std::string& key_path, const std::string& strategy_text) {
    KeyPair kp = read_key_file(key_path);
    AnchorPolicy strategy = parse_strategy(strategy_text);

    std::vector<LogEntry> entries;
    for (const std::string& path : expand_glob(traces_glob)) {
        TraceLog log = import_trace(path);  // only verified evidence gets anchored
        for (const LogEntry& e : log.entries()) entries.push_back(e);
    }

    LedgerLock lock{ledger_path};
    FileLedger ledger{ledger_path};

    // skip entries some earlier anchor already covers
    std::set<std::pair<std::string, int64_t>> covered;
    for (int64_t i = 0; i < ledger.size(); ++i) {
        LedgerRecord rec = ledger.get(i);
        if (rec.kind != "anchor") continue;
        BatchAnchor anchor = anchor_from_body(rec.body, rec.idx);
        for (const CoverageRange& range : anchor.coverage)
            for (int64_t s = range.first_seq; s <= range.last_seq; ++s)
                covered.insert({range.agent, s});
    }
    std::vector<LogEntry> pending;
    for (const LogEntry& e : entries)
        if (!covered.count({e.agent, e.seq})) pending.push_back(e);

    std::vector<BatchAnchor> flushed =
        flush_batches(pending, strategy, kp, wall_clock_ms(), ledger);

    ValueMap m;
    ValueList batches;
    for (const BatchAnchor& b : flushed) {
        ValueMap bm;
        bm["batch_id"] = b.batch_id;
        bm["leaf_count"] = b.leaf_count;
        bm["ledger_index"] = b.ledger_index;
        bm["merkle_root"] = b.merkle_root.hex();
        batches.push_back(Value(std::move(bm)));
    }
    m["batches"] = Value(std::move(batches));
    m["pending"] = static_cast<int64_t>(pending.size());
    print_value(Value(std::move(m)));
    return 0;
}

int cmd_ledger_verify(const std::string& ledger_path) {
    FileLedger ledger{ledger_path};
    std::optional<int64_t> bad = ledger_verify_chain(ledger);
    ValueMap m;
    m["ok"] = !bad.has_value();
    m["size"] = ledger.size();
    if (bad.has_value()) m["first_bad"] = *bad;
    print_value(Value(std::move(m)));
    return bad.has_value() ? 3 : 0;
}

int cmd_ledger_checkpoint(const std::string& ledger_path) {
    FileLedger ledger{ledger_path};
    std::cout << ledger_checkpoint(ledger) << "\n";
    return 0;
}

int overall_exit(Overall overall) { return overall == Overall::valid ? 0 : 1; }

int cmd_verify(const CommonPaths& paths) {
    FileLedger ledger{paths.ledger};
    DirectoryPolicyStore store{paths.store};
    std::vector<std::vector<LogEntry>> logs = read_trace_set(paths.traces);
    AuditReport report = audit_all(logs, ledger, store);

    int64_t entries = 0;
    for (const auto& log : logs) entries += static_cast<int64_t>(log.size());
    int64_t non_valid = 0;
    for (const Finding& f : report.findings)
        if (f.verdict != Verdict::valid) ++non_valid;

    if (parse_format(paths.format) == ReportFormat::text) {
        std::cout << "entries: " << entries << "\n"
                  << "non_valid: " << non_valid << "\n"
                  << "overall: " << overall_name(report.overall) << "\n";
    } else {
        ValueMap m;
        m["entries"] = entries;
        m["non_valid"] = non_valid;
        m["overall"] = overall_name(report.overall);
        print_value(Value(std::move(m)));
    }
    return overall_exit(report.overall);
}

int cmd_audit_report(const CommonPaths& paths, const std::string& out_path) {
    FileLedger ledger{paths.ledger};
    DirectoryPolicyStore store{paths.store};
    std::vector<std::vector<LogEntry>> logs = read_trace_set(paths.traces);
    AuditReport report = audit_all(logs, ledger, store);
    std::string rendered = render_report(report, parse_format(paths.format));
    if (out_path.empty())
        std::cout << rendered;
    else
        write_file_atomic(out_path, rendered);
    return overall_exit(report.overall);
}

int cmd_scenario_run(const std::string& name, int64_t seed, const std::string& out_dir,
                     const std::string& fault_name) {
    std::optional<ScenarioSpec> spec = builtin_scenario(name);
    if (!spec.has_value())
        throw Error(Errc::malformed_input, "unknown scenario '" + name + "'");
    std::optional<FaultKind> fault = fault_kind_from_name(fault_name);
    if (!fault.has_value())
        throw Error(Errc::malformed_input, "unknown fault kind '" + fault_name + "'");
    ScenarioArtifacts artifacts = run_scenario(*spec, seed, out_dir, *fault);
    ValueMap m;
    m["dir"] = artifacts.dir.string();
    m["fault"] = fault_kind_name(*fault);
    m["name"] = std::string(name);
    m["seed"] = seed;
    m["trace_files"] = static_cast<int64_t>(artifacts.trace_files.size());
    m["batches"] = static_cast<int64_t>(artifacts.anchors.size());
    print_value(Value(std::move(m)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trust-track: verifiable agent identities, policies, traces, and audits"};
    app.require_subcommand(1);

    int rc = 0;
    auto run = [&rc](std::function<int()> fn) {
        return [&rc, fn = std::move(fn)]() { rc = fn(); };
    };

    auto add_ledger = [](CLI::App* cmd, std::string& slot) {
        cmd->add_option("--ledger", slot, "ledger file (.ttkl)")
            ->envname("TTK_LEDGER")
            ->required();
    };
    auto add_store = [](CLI::App* cmd, std::string& slot) {
        cmd->add_option("--store", slot, "policy store directory")
            ->envname("TTK_STORE")
            ->required();
    };

    // keygen
    std::string kg_out, kg_seed;
    CLI::App* keygen = app.add_subcommand("keygen", "generate an Ed25519 keypair file");
    keygen->add_option("--out", kg_out, "key file to write")->required();
    keygen->add_option("--seed-hex", kg_seed, "32-byte hex seed for a deterministic key");
    keygen->callback(run([&] { return cmd_keygen(kg_out, kg_seed); }));

    // id
    CLI::App* id = app.add_subcommand("id", "agent identity registry");
    id->require_subcommand(1);
    std::string idr_key, idr_ledger, idr_meta;
    CLI::App* id_register = id->add_subcommand("register", "append an identity record");
    id_register->add_option("--key", idr_key, "key file")->required();
    add_ledger(id_register, idr_ledger);
    id_register->add_option("--metadata", idr_meta, "JSON map file of identity metadata");
    id_register->callback(run([&] { return cmd_id_register(idr_key, idr_ledger, idr_meta); }));

    std::string ids_did, ids_ledger;
    CLI::App* id_resolve = id->add_subcommand("resolve", "look up registration state");
    id_resolve->add_option("--did", ids_did, "agent DID")->required();
    add_ledger(id_resolve, ids_ledger);
    id_resolve->callback(run([&] { return cmd_id_resolve(ids_did, ids_ledger); }));

    std::string idv_key, idv_ledger, idv_reason;
    CLI::App* id_revoke = id->add_subcommand("revoke", "append a revocation record");
    id_revoke->add_option("--key", idv_key, "key file")->required();
    add_ledger(id_revoke, idv_ledger);
    id_revoke->add_option("--reason", idv_reason, "revocation reason")->required();
    id_revoke->callback(run([&] { return cmd_id_revoke(idv_key, idv_ledger, idv_reason); }));

    // policy
    CLI::App* policy = app.add_subcommand("policy", "policy documents and commitments");
    policy->require_subcommand(1);
    std::string pv_policy;
    CLI::App* policy_validate = policy->add_subcommand("validate", "structural validation");
    policy_validate->add_option("--policy", pv_policy, "policy JSON file")->required();
    policy_validate->callback(run([&] { return cmd_policy_validate(pv_policy); }));

    std::string pc_key, pc_policy, pc_ledger, pc_store;
    CLI::App* policy_commit = policy->add_subcommand("commit", "sign, anchor, and store");
    policy_commit->add_option("--key", pc_key, "key file")->required();
    policy_commit->add_option("--policy", pc_policy, "policy JSON file")->required();
    add_ledger(policy_commit, pc_ledger);
    add_store(policy_commit, pc_store);
    policy_commit->callback(
        run([&] { return cmd_policy_commit(pc_key, pc_policy, pc_ledger, pc_store); }));

    // log
    CLI::App* log_cmd = app.add_subcommand("log", "per-agent trace logs");
    log_cmd->require_subcommand(1);
    std::string la_key, la_trace, la_policy, la_action, la_params, la_ctx, la_class = "routine";
    std::optional<int64_t> la_ts;
    std::vector<std::string> la_refs;
    CLI::App* log_append = log_cmd->add_subcommand("append", "seal and append one entry");
    log_append->add_option("--key", la_key, "key file")->required();
    log_append->add_option("--trace", la_trace, "trace file (.ttkt), created if absent")
        ->required();
    log_append->add_option("--policy-hash", la_policy, "hex hash of the governing policy")
        ->required();
    log_append->add_option("--action", la_action, "action name")->required();
    log_append->add_option("--params", la_params, "JSON map file of action params");
    log_append->add_option("--ctx", la_ctx, "JSON map file of context");
    log_append->add_option("--ts-ms", la_ts, "timestamp override (defaults to wall clock)");
    log_append->add_option("--ref", la_refs, "upstream ref agent:seq:hash (repeatable)");
    log_append->add_option("--anchor-class", la_class, "critical or routine");
    log_append->callback(run([&] {
        return cmd_log_append(la_key, la_trace, la_policy, la_action, la_params, la_ctx, la_ts,
                              la_refs, la_class);
    }));

    // anchor
    CLI::App* anchor = app.add_subcommand("anchor", "Merkle-batch anchoring");
    anchor->require_subcommand(1);
    std::string af_traces, af_ledger, af_key, af_strategy;
    CLI::App* anchor_flush = anchor->add_subcommand("flush", "anchor unanchored entries");
    anchor_flush->add_option("--traces", af_traces, "glob of trace files")->required();
    add_ledger(anchor_flush, af_ledger);
    anchor_flush->add_option("--key", af_key, "submitter key file")->required();
    anchor_flush->add_option("--strategy", af_strategy, "every-n:N | critical[:N] | manual")
        ->required();
    anchor_flush->callback(
        run([&] { return cmd_anchor_flush(af_traces, af_ledger, af_key, af_strategy); }));

    // ledger
    CLI::App* ledger_cmd = app.add_subcommand("ledger", "ledger inspection");
    ledger_cmd->require_subcommand(1);
    std::string lv_ledger;
    CLI::App* ledger_verify = ledger_cmd->add_subcommand("verify", "walk the record chain");
    add_ledger(ledger_verify, lv_ledger);
    ledger_verify->callback(run([&] { return cmd_ledger_verify(lv_ledger); }));

    std::string lc_ledger;
    CLI::App* ledger_checkpoint =
        ledger_cmd->add_subcommand("checkpoint", "print the publishable head");
    add_ledger(ledger_checkpoint, lc_ledger);
    ledger_checkpoint->callback(run([&] { return cmd_ledger_checkpoint(lc_ledger); }));

    // verify
    CommonPaths vf;
    CLI::App* verify = app.add_subcommand("verify", "audit and summarize");
    verify->add_option("--traces", vf.traces, "glob of trace files")->required();
    add_ledger(verify, vf.ledger);
    add_store(verify, vf.store);
    verify->add_option("--format", vf.format, "interchange or text");
    verify->callback(run([&] { return cmd_verify(vf); }));

    // audit
    CLI::App* audit = app.add_subcommand("audit", "full audit reports");
    audit->require_subcommand(1);
    CommonPaths ar;
    std::string ar_out;
    CLI::App* audit_report = audit->add_subcommand("report", "render the full report");
    audit_report->add_option("--traces", ar.traces, "glob of trace files")->required();
    add_ledger(audit_report, ar.ledger);
    add_store(audit_report, ar.store);
    audit_report->add_option("--out", ar_out, "write the report here instead of stdout");
    audit_report->add_option("--format", ar.format, "interchange or text");
    audit_report->callback(run([&] { return cmd_audit_report(ar, ar_out); }));

    // scenario
    CLI::App* scenario = app.add_subcommand("scenario", "deterministic fixtures");
    scenario->require_subcommand(1);
    std::string sr_name, sr_out, sr_fault = "none";
    int64_t sr_seed = 42;
    CLI::App* scenario_run = scenario->add_subcommand("run", "generate a scenario directory");
    scenario_run->add_option("name", sr_name, "pharma or legal")->required();
    scenario_run->add_option("--seed", sr_seed, "determinism seed");
    scenario_run->add_option("--out", sr_out, "output directory")->required();
    scenario_run->add_option("--fault", sr_fault, "fault kind to inject (default none)");
    scenario_run->callback(
        run([&] { return cmd_scenario_run(sr_name, sr_seed, sr_out, sr_fault); }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
