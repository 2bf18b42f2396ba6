#include "ttk/audit.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "ttk/errors.hpp"
#include "ttk/identity.hpp"

namespace ttk {

const char* check_name(Check check) {
    switch (check) {
        case Check::identity: return "IdentityCheck";
        case Check::signature: return "SignatureCheck";
        case Check::chain: return "ChainCheck";
        case Check::policy: return "PolicyCheck";
        case Check::rate: return "RateCheck";
        case Check::anchor: return "AnchorCheck";
        case Check::lineage: return "LineageCheck";
    }
    return "?";
}

std::optional<Check> check_from_name(std::string_view name) {
    for (Check c : {Check::identity, Check::signature, Check::chain, Check::policy, Check::rate,
                    Check::anchor, Check::lineage})
        if (name == check_name(c)) return c;
    return std::nullopt;
}

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::valid: return "VALID";
        case Verdict::warning: return "WARNING";
        case Verdict::unverifiable: return "UNVERIFIABLE";
        case Verdict::violation: return "VIOLATION";
    }
    return "?";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
    for (Verdict v :
         {Verdict::valid, Verdict::warning, Verdict::unverifiable, Verdict::violation})
        if (name == verdict_name(v)) return v;
    return std::nullopt;
}

const char* overall_name(Overall overall) {
    switch (overall) {
        case Overall::valid: return "VALID";
        case Overall::violations_found: return "VIOLATIONS_FOUND";
        case Overall::unverifiable: return "UNVERIFIABLE";
    }
    return "?";
}

namespace {

bool entry_hash_ok(const LogEntry& e) { return entry_hash(e) == e.hash; }

std::string join(const std::set<std::string>& parts) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += ",";
        out += p;
    }
    return out;
}

bool finding_before(const Finding& a, const Finding& b) {
    if (a.agent != b.agent) return a.agent < b.agent;
    if (a.seq != b.seq) return a.seq < b.seq;
    return std::string_view(check_name(a.check)) < std::string_view(check_name(b.check));
}

// Collects findings while enforcing the one-per-(agent, seq, check) rule.
// A VALID emit marks the check as performed; non-VALID emits for the same
// key escalate the verdict and accumulate reason codes.
class FindingSet {
public:
    void emit(const std::string& agent, int64_t seq, Check check, Verdict verdict,
              const std::string& code, const std::string& note = "") {
        Slot& slot = slots_[Key{agent, seq, check}];
        if (static_cast<int>(verdict) > static_cast<int>(slot.verdict)) slot.verdict = verdict;
        if (verdict == Verdict::valid) return;
        slot.codes.insert(code);
        if (!note.empty()) {
            if (!slot.note.empty()) slot.note += "; ";
            slot.note += note;
        }
    }

    void add(const Finding& f) { emit(f.agent, f.seq, f.check, f.verdict, f.reason, f.note); }

    std::vector<Finding> take() const {
        std::vector<Finding> out;
        out.reserve(slots_.size());
        for (const auto& [key, slot] : slots_) {
            Finding f;
            f.agent = key.agent;
            f.seq = key.seq;
            f.check = key.check;
            f.verdict = slot.verdict;
            if (slot.verdict == Verdict::valid) {
                f.reason = "OK";
            } else {
                f.reason = join(slot.codes);
                f.note = slot.note;
            }
            out.push_back(std::move(f));
        }
        std::sort(out.begin(), out.end(), finding_before);
        return out;
    }

private:
    struct Key {
        std::string agent;
        int64_t seq;
        Check check;
        auto operator<=>(const Key&) const = default;
    };
    struct Slot {
        Verdict verdict = Verdict::valid;
        std::set<std::string> codes;
        std::string note;
    };
    std::map<Key, Slot> slots_;
};

std::string anchor_note(const std::string& code) {
    if (code == "Unanchored") return "no anchor record covers this entry";
    if (code == "RootMismatch") return "recomputed batch root differs from the anchored root";
    if (code == "BadAnchorSignature") return "covering anchor signature does not verify";
    if (code == "IncompleteBatch") return "batch members are missing from the loaded traces";
    return "";
}

void verify_entry_into(FindingSet& fs, const LogEntry& e, const Ledger& ledger,
                       const PolicyStore& store, const AnchorIndex& anchors) {
    AnchorIndex::Assessment anchored = anchors.assess(e.agent, e.seq);

    Resolution res = resolve(e.agent, ledger);
    switch (res.state) {
        case Resolution::State::not_found:
            fs.emit(e.agent, e.seq, Check::identity, Verdict::violation, "UnknownAgent",
                    "agent is not registered in the ledger");
            break;
        case Resolution::State::registered:
            fs.emit(e.agent, e.seq, Check::identity, Verdict::valid, "OK");
            break;
        case Resolution::State::revoked: {
            // A verified anchor pins the entry to a ledger position, which
            // beats self-reported timestamps; unanchored entries fall back
            // to comparing against the revocation timestamp.
            bool violated;
            if (anchored.verdict == Verdict::valid && anchored.anchor_index.has_value())
                violated = *anchored.anchor_index > res.revoked_ledger_index;
            else
                violated = e.ts_ms >= res.revoked_at_ms;
            if (violated)
                fs.emit(e.agent, e.seq, Check::identity, Verdict::violation, "RevokedIdentity",
                        "agent key was revoked at ts_ms " + std::to_string(res.revoked_at_ms));
            else
                fs.emit(e.agent, e.seq, Check::identity, Verdict::valid, "OK");
            break;
        }
    }

    // The DID embeds the key, so signatures are checkable even for agents
    // the ledger has never seen.
    bool sig_ok = false;
    try {
        sig_ok = verify_signature(key_from_did(e.agent), entry_signing_text(e), e.sig);
    } catch (const Error&) {
        sig_ok = false;
    }
    if (sig_ok)
        fs.emit(e.agent, e.seq, Check::signature, Verdict::valid, "OK");
    else
        fs.emit(e.agent, e.seq, Check::signature, Verdict::violation, "BadSignature",
                "signature does not verify under the agent key");

    try {
        std::optional<PolicyDocument> doc = store.get(e.policy);
        if (!doc) {
            fs.emit(e.agent, e.seq, Check::policy, Verdict::unverifiable, "UnknownPolicy",
                    "policy " + e.policy.hex() + " is not in the store");
        } else if (doc->agent_did != e.agent) {
            fs.emit(e.agent, e.seq, Check::policy, Verdict::violation, "PolicyAgentMismatch",
                    "cited policy belongs to " + doc->agent_did);
        } else {
            std::vector<PolicyViolation> violations = check_action(*doc, e);
            if (violations.empty()) fs.emit(e.agent, e.seq, Check::policy, Verdict::valid, "OK");
            for (const PolicyViolation& v : violations)
                fs.emit(e.agent, e.seq, Check::policy, Verdict::violation, v.code, v.detail);
        }
    } catch (const Error& err) {
        if (err.code() != Errc::digest_mismatch) throw;
        fs.emit(e.agent, e.seq, Check::policy, Verdict::unverifiable, "DigestMismatch",
                err.message());
    }

    if (anchored.verdict == Verdict::valid)
        fs.emit(e.agent, e.seq, Check::anchor, Verdict::valid, "OK");
    else
        fs.emit(e.agent, e.seq, Check::anchor, anchored.verdict, anchored.code,
                anchor_note(anchored.code));
}

// Chain continuity in stored order. An entry whose stored hash does not
// recompute gets exactly one HashMismatch finding and is otherwise skipped;
// its successor is still checked against the STORED hash so one tampered
// entry does not cascade down the chain.
void chain_findings(FindingSet& fs, const std::vector<LogEntry>& entries,
                    const std::vector<char>& ok) {
    const LogEntry* prev = nullptr;
    for (size_t i = 0; i < entries.size(); ++i) {
        const LogEntry& e = entries[i];
        if (!ok[i]) {
            fs.emit(e.agent, e.seq, Check::chain, Verdict::violation, "HashMismatch",
                    "stored hash does not match the entry content");
            prev = &e;
            continue;
        }
        fs.emit(e.agent, e.seq, Check::chain, Verdict::valid, "OK");
        if (prev == nullptr) {
            if (e.seq != 1)
                fs.emit(e.agent, e.seq, Check::chain, Verdict::violation, "SeqGap",
                        "first entry has seq " + std::to_string(e.seq));
            if (!e.prev.is_zero())
                fs.emit(e.agent, e.seq, Check::chain, Verdict::violation, "ChainBreak",
                        "first entry has a nonzero prev hash");
        } else {
            if (e.seq != prev->seq + 1)
                fs.emit(e.agent, e.seq, Check::chain, Verdict::violation, "SeqGap",
                        "seq " + std::to_string(e.seq) + " follows seq " +
                            std::to_string(prev->seq));
            if (e.prev != prev->hash)
                fs.emit(e.agent, e.seq, Check::chain, Verdict::violation, "ChainBreak",
                        "prev does not match the stored hash of seq " +
                            std::to_string(prev->seq));
            if (e.ts_ms < prev->ts_ms)
                fs.emit(e.agent, e.seq, Check::chain, Verdict::violation,
                        "NonMonotonicTimestamp",
                        "ts_ms " + std::to_string(e.ts_ms) + " precedes seq " +
                            std::to_string(prev->seq));
        }
        prev = &e;
    }
}

void rate_findings(FindingSet& fs, const std::vector<LogEntry>& entries,
                   const std::vector<char>& ok, const PolicyStore& store) {
    // check_rate needs one agent and strictly increasing seqs. Hash-bad
    // entries, duplicates, and regressions already carry ChainCheck
    // violations; drop them from the recount input.
    std::map<std::pair<std::string, Digest>, std::vector<LogEntry>> groups;
    std::map<std::string, int64_t> last_seq;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (!ok[i]) continue;
        const LogEntry& e = entries[i];
        auto it = last_seq.find(e.agent);
        if (it != last_seq.end() && e.seq <= it->second) continue;
        last_seq[e.agent] = e.seq;
        groups[{e.agent, e.policy}].push_back(e);
    }

    for (const auto& [key, group] : groups) {
        const std::string& agent = key.first;
        try {
            std::optional<PolicyDocument> doc = store.get(key.second);
            if (!doc) {
                for (const LogEntry& e : group)
                    fs.emit(agent, e.seq, Check::rate, Verdict::unverifiable, "UnknownPolicy",
                            "policy " + key.second.hex() + " is not in the store");
                continue;
            }
            if (doc->agent_did != agent) {
                for (const LogEntry& e : group)
                    fs.emit(agent, e.seq, Check::rate, Verdict::unverifiable,
                            "PolicyAgentMismatch", "cited policy belongs to " + doc->agent_did);
                continue;
            }
            std::map<int64_t, std::string> bad;  // seq -> joined details
            for (const RateViolation& v : check_rate(*doc, group)) {
                std::string& d = bad[v.seq];
                if (!d.empty()) d += "; ";
                d += v.detail;
            }
            for (const LogEntry& e : group) {
                auto hit = bad.find(e.seq);
                if (hit == bad.end())
                    fs.emit(agent, e.seq, Check::rate, Verdict::valid, "OK");
                else
                    fs.emit(agent, e.seq, Check::rate, Verdict::violation, "RateViolation",
                            hit->second);
            }
        } catch (const Error& err) {
            if (err.code() != Errc::digest_mismatch) throw;
            for (const LogEntry& e : group)
                fs.emit(agent, e.seq, Check::rate, Verdict::unverifiable, "DigestMismatch",
                        err.message());
        }
    }
}

void verify_trace_into(FindingSet& fs, const std::vector<LogEntry>& entries, const Ledger& ledger,
                       const PolicyStore& store, const AnchorIndex& anchors) {
    std::vector<char> ok(entries.size());
    for (size_t i = 0; i < entries.size(); ++i) ok[i] = entry_hash_ok(entries[i]);
    chain_findings(fs, entries, ok);
    for (size_t i = 0; i < entries.size(); ++i)
        if (ok[i]) verify_entry_into(fs, entries[i], ledger, store, anchors);
    rate_findings(fs, entries, ok, store);
}

struct NodeKey {
    std::string agent;
    int64_t seq;
    auto operator<=>(const NodeKey&) const = default;
};

std::string node_label(const NodeKey& k) { return k.agent + "#" + std::to_string(k.seq); }

// Strongly connected components (iterative Tarjan); a node is cyclic when
// its component has more than one member or it carries a self-edge.
std::set<int> cyclic_nodes(const std::vector<std::vector<int>>& g) {
    const int n = static_cast<int>(g.size());
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0), self_loop(n, 0);
    std::vector<int> stack, comp_size;
    int counter = 0;

    for (int u = 0; u < n; ++u)
        for (int v : g[u])
            if (v == u) self_loop[u] = 1;

    for (int root = 0; root < n; ++root) {
        if (idx[root] != -1) continue;
        std::vector<std::pair<int, size_t>> frames{{root, 0}};
        while (!frames.empty()) {
            int u = frames.back().first;
            size_t ci = frames.back().second;
            if (ci == 0) {
                idx[u] = low[u] = counter++;
                stack.push_back(u);
                on_stack[u] = 1;
            }
            if (ci < g[u].size()) {
                frames.back().second = ci + 1;
                int v = g[u][ci];
                if (idx[v] == -1)
                    frames.emplace_back(v, 0);
                else if (on_stack[v])
                    low[u] = std::min(low[u], idx[v]);
            } else {
                if (low[u] == idx[u]) {
                    int size = 0;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = static_cast<int>(comp_size.size());
                        ++size;
                        if (w == u) break;
                    }
                    comp_size.push_back(size);
                }
                frames.pop_back();
                if (!frames.empty()) {
                    int parent = frames.back().first;
                    low[parent] = std::min(low[parent], low[u]);
                }
            }
        }
    }

    std::set<int> cyclic;
    for (int u = 0; u < n; ++u)
        if (self_loop[u] || comp_size[comp[u]] > 1) cyclic.insert(u);
    return cyclic;
}

LineageGraph lineage_into(FindingSet& fs, const std::vector<std::vector<LogEntry>>& logs) {
    struct Info {
        Digest hash;
        int64_t ts_ms;
        bool ok;
    };
    std::map<NodeKey, Info> nodes;  // first occurrence wins
    for (const auto& log : logs)
        for (const LogEntry& e : log)
            nodes.emplace(NodeKey{e.agent, e.seq}, Info{e.hash, e.ts_ms, entry_hash_ok(e)});

    // Cycle detection runs over every edge whose target exists, valid ref
    // hash or not: a tampered ref hash must not hide a cycle. The reported
    // graph keeps only hash-valid edges.
    std::vector<NodeKey> keys;
    std::map<NodeKey, int> index_of;
    for (const auto& [k, info] : nodes) {
        index_of[k] = static_cast<int>(keys.size());
        keys.push_back(k);
    }
    std::vector<std::vector<int>> g(keys.size());
    std::set<std::pair<NodeKey, NodeKey>> reported;

    for (const auto& log : logs) {
        for (const LogEntry& e : log) {
            if (!entry_hash_ok(e)) continue;  // untrusted content makes no claims
            NodeKey self{e.agent, e.seq};
            fs.emit(e.agent, e.seq, Check::lineage, Verdict::valid, "OK");
            for (const EntryRef& r : e.refs) {
                NodeKey target{r.agent, r.seq};
                auto it = nodes.find(target);
                if (it == nodes.end()) {
                    fs.emit(e.agent, e.seq, Check::lineage, Verdict::violation, "DanglingRef",
                            "ref to missing entry " + node_label(target));
                    continue;
                }
                g[index_of[target]].push_back(index_of[self]);
                if (r.hash != it->second.hash) {
                    fs.emit(e.agent, e.seq, Check::lineage, Verdict::violation,
                            "RefHashMismatch",
                            node_label(self) + " cites " + node_label(target) +
                                " with a hash that does not match the stored entry");
                    continue;
                }
                reported.insert({target, self});
                if (it->second.ts_ms > e.ts_ms)
                    fs.emit(e.agent, e.seq, Check::lineage, Verdict::warning, "UpstreamLater",
                            "upstream " + node_label(target) + " has a later ts_ms");
            }
        }
    }

    for (int u : cyclic_nodes(g)) {
        const NodeKey& k = keys[u];
        if (nodes.find(k)->second.ok)
            fs.emit(k.agent, k.seq, Check::lineage, Verdict::violation, "CycleDetected",
                    "entry participates in a reference cycle");
    }

    LineageGraph graph;
    graph.nodes.reserve(nodes.size());
    for (const auto& [k, info] : nodes) graph.nodes.push_back({k.agent, k.seq, info.hash});
    graph.edges.reserve(reported.size());
    for (const auto& [from, to] : reported)
        graph.edges.push_back({from.agent, from.seq, to.agent, to.seq});
    return graph;
}

}  // namespace

AnchorIndex::AnchorIndex(const Ledger& ledger, const std::vector<std::vector<LogEntry>>& logs,
                         std::vector<Finding>* malformed) {
    std::map<std::pair<std::string, int64_t>, Digest> hashes;  // stored, first occurrence
    for (const auto& log : logs)
        for (const LogEntry& e : log) hashes.emplace(std::pair{e.agent, e.seq}, e.hash);

    for (int64_t i = 0; i < ledger.size(); ++i) {
        LedgerRecord rec = ledger.get(i);
        if (rec.kind != "anchor") continue;
        BatchAnchor anchor;
        try {
            anchor = anchor_from_body(rec.body, rec.idx);
        } catch (const Error& err) {
            if (malformed != nullptr)
                malformed->push_back(Finding{"ledger", rec.idx, Check::anchor,
                                             Verdict::violation, "MalformedAnchorRecord",
                                             err.message()});
            continue;
        }

        BatchStatus st = BatchStatus::ok;
        bool sig_ok = false;
        try {
            sig_ok = verify_signature(key_from_did(anchor.submitter),
                                      anchor_signing_text(anchor), anchor.sig);
        } catch (const Error&) {
            sig_ok = false;
        }
        if (!sig_ok) {
            st = BatchStatus::bad_signature;
        } else {
            // rebuild the batch from the loaded traces' stored hashes
            std::vector<Digest> leaves;
            leaves.reserve(static_cast<size_t>(anchor.leaf_count));
            bool complete = true;
            for (const CoverageRange& range : anchor.coverage) {
                for (int64_t s = range.first_seq; s <= range.last_seq; ++s) {
                    auto it = hashes.find({range.agent, s});
                    if (it == hashes.end()) {
                        complete = false;
                        break;
                    }
                    leaves.push_back(it->second);
                }
                if (!complete) break;
            }
            if (!complete)
                st = BatchStatus::incomplete;
            else if (merkle_root(leaves) != anchor.merkle_root)
                st = BatchStatus::root_mismatch;
        }

        size_t pos = anchors_.size();
        anchors_.push_back(std::move(anchor));
        status_.push_back(st);
        for (const CoverageRange& range : anchors_[pos].coverage)
            for (int64_t s = range.first_seq; s <= range.last_seq; ++s)
                covering_[{range.agent, s}].push_back(pos);
    }
}

AnchorIndex::Assessment AnchorIndex::assess(const std::string& agent, int64_t seq) const {
    auto it = covering_.find({agent, seq});
    if (it == covering_.end() || it->second.empty())
        return Assessment{Verdict::unverifiable, "Unanchored", std::nullopt};

    bool root_mismatch = false, bad_signature = false;
    for (size_t pos : it->second) {
        switch (status_[pos]) {
            case BatchStatus::ok:
                return Assessment{Verdict::valid, "OK", anchors_[pos].ledger_index};
            case BatchStatus::root_mismatch: root_mismatch = true; break;
            case BatchStatus::bad_signature: bad_signature = true; break;
            case BatchStatus::incomplete: break;
        }
    }
    if (root_mismatch) return Assessment{Verdict::violation, "RootMismatch", std::nullopt};
    if (bad_signature) return Assessment{Verdict::violation, "BadAnchorSignature", std::nullopt};
    return Assessment{Verdict::unverifiable, "IncompleteBatch", std::nullopt};
}

std::vector<Finding> verify_entry(const LogEntry& entry, const Ledger& ledger,
                                  const PolicyStore& store, const AnchorIndex& anchors) {
    FindingSet fs;
    verify_entry_into(fs, entry, ledger, store, anchors);
    return fs.take();
}

std::vector<Finding> verify_trace(const std::vector<LogEntry>& entries, const Ledger& ledger,
                                  const PolicyStore& store, const AnchorIndex& anchors) {
    FindingSet fs;
    verify_trace_into(fs, entries, ledger, store, anchors);
    return fs.take();
}

LineageGraph build_lineage(const std::vector<std::vector<LogEntry>>& logs,
                           std::vector<Finding>& findings) {
    FindingSet fs;
    LineageGraph graph = lineage_into(fs, logs);
    std::vector<Finding> got = fs.take();
    findings.insert(findings.end(), got.begin(), got.end());
    return graph;
}

AuditReport audit_all(const std::vector<std::vector<LogEntry>>& logs, const Ledger& ledger,
                      const PolicyStore& store) {
    FindingSet fs;

    if (std::optional<int64_t> bad = ledger_verify_chain(ledger))
        fs.emit("ledger", *bad, Check::chain, Verdict::violation, "LedgerChainBroken",
                "ledger record " + std::to_string(*bad) + " breaks the record hash chain");

    std::vector<Finding> malformed;
    AnchorIndex anchors(ledger, logs, &malformed);
    for (const Finding& f : malformed) fs.add(f);

    std::map<std::string, std::vector<LogEntry>> per_agent;  // stored order per agent
    for (const auto& log : logs)
        for (const LogEntry& e : log) per_agent[e.agent].push_back(e);
    for (const auto& [agent, entries] : per_agent)
        verify_trace_into(fs, entries, ledger, store, anchors);

    AuditReport report;
    report.lineage = lineage_into(fs, logs);

    std::set<std::pair<std::string, int64_t>> seen;
    for (const auto& log : logs) {
        for (const LogEntry& e : log) {
            if (!seen.insert({e.agent, e.seq}).second) continue;
            AttributionEntry a;
            a.agent = e.agent;
            a.seq = e.seq;
            a.policy = e.policy;
            if (entry_hash_ok(e)) {
                AnchorIndex::Assessment assessed = anchors.assess(e.agent, e.seq);
                if (assessed.verdict == Verdict::valid) a.anchor_index = assessed.anchor_index;
            }
            report.attribution.push_back(std::move(a));
        }
    }
    std::sort(report.attribution.begin(), report.attribution.end(),
              [](const AttributionEntry& x, const AttributionEntry& y) {
                  return std::tie(x.agent, x.seq) < std::tie(y.agent, y.seq);
              });

    report.findings = fs.take();
    report.overall = Overall::valid;
    for (const Finding& f : report.findings) {
        if (f.verdict == Verdict::violation) {
            report.overall = Overall::violations_found;
            break;
        }
        if (f.verdict == Verdict::unverifiable) report.overall = Overall::unverifiable;
    }
    return report;
}

std::string render_report(const AuditReport& report, ReportFormat format) {
    if (format == ReportFormat::text) {
        std::string out = "findings: " + std::to_string(report.findings.size()) + "\n";
        for (const Finding& f : report.findings) {
            out += f.agent;
            out += " ";
            out += std::to_string(f.seq);
            out += " ";
            out += check_name(f.check);
            out += " ";
            out += verdict_name(f.verdict);
            out += " ";
            out += f.reason;
            if (!f.note.empty()) {
                out += " (";
                out += f.note;
                out += ")";
            }
            out += "\n";
        }
        out += "overall: ";
        out += overall_name(report.overall);
        out += "\n";
        return out;
    }

    ValueMap root;
    ValueList findings;
    for (const Finding& f : report.findings) {
        ValueMap m;
        m["agent"] = f.agent;
        m["seq"] = f.seq;
        m["check"] = check_name(f.check);
        m["verdict"] = verdict_name(f.verdict);
        m["reason"] = f.reason;
        m["note"] = f.note;
        findings.push_back(Value(std::move(m)));
    }
    root["findings"] = Value(std::move(findings));

    ValueMap lineage;
    ValueList node_list;
    for (const LineageNode& n : report.lineage.nodes) {
        ValueMap m;
        m["agent"] = n.agent;
        m["seq"] = n.seq;
        m["hash"] = n.hash.hex();
        node_list.push_back(Value(std::move(m)));
    }
    lineage["nodes"] = Value(std::move(node_list));
    ValueList edges;
    for (const LineageEdge& e : report.lineage.edges) {
        ValueMap m;
        m["from_agent"] = e.from_agent;
        m["from_seq"] = e.from_seq;
        m["to_agent"] = e.to_agent;
        m["to_seq"] = e.to_seq;
        edges.push_back(Value(std::move(m)));
    }
    lineage["edges"] = Value(std::move(edges));
    root["lineage"] = Value(std::move(lineage));

    ValueMap attribution;
    for (const AttributionEntry& a : report.attribution) {
        ValueMap m;
        m["agent"] = a.agent;
        m["policy"] = a.policy.hex();
        if (a.anchor_index.has_value()) m["anchor_index"] = *a.anchor_index;
        attribution[a.agent + "#" + std::to_string(a.seq)] = Value(std::move(m));
    }
    root["attribution"] = Value(std::move(attribution));
    root["overall"] = overall_name(report.overall);

    return canonical_text(Value(std::move(root))) + "\n";
}

}  // namespace ttk
