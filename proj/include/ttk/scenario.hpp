#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttk/anchor.hpp"
#include "ttk/policy.hpp"
#include "ttk/value.hpp"

namespace ttk {

// Deterministic multi-agent fixtures: seeded keys, scripted steps, selective
// anchoring, optional injected faults, and a manifest of the findings an
// audit of the output directory must produce.

struct ScenarioAgent {
    std::string role;                      // file basename and seed component
    ValueMap metadata;                     // registered with the identity
    std::optional<PolicyDocument> policy;  // absent for pure submitters
};

struct ScenarioStep {
    std::string role;
    std::string action;
    ValueMap params;
    ValueMap ctx;
    std::vector<int> refs;  // indexes of strictly earlier steps
    std::string anchor_class = "routine";
};

enum class FaultKind {
    none,
    tamper_byte,                 // flip one payload byte in a trace file
    forge_signature,             // re-sign the last entry of a trace with a foreign key
    policy_breach_action,        // a step performs a disallowed action
    policy_breach_param,         // a step passes a constraint-violating param
    policy_breach_jurisdiction,  // a step claims the wrong jurisdiction
    dangling_ref,                // a step cites a nonexistent entry
    cycle_ref,                   // two steps cite each other
    drop_anchor,                 // truncate the final anchor record off the ledger
    rate_burst,                  // extra entries violating a rate limit
};
const char* fault_kind_name(FaultKind kind);
std::optional<FaultKind> fault_kind_from_name(std::string_view name);
// every injectable kind, none excluded
std::vector<FaultKind> all_fault_kinds();

// Per-scenario fault targets. Steps are indexes into ScenarioSpec::steps.
struct FaultPlan {
    std::string tamper_role;  // first entry of this trace gets one byte flipped
    std::string forge_role;   // last entry of this trace gets a foreign signature
    std::string forge_with;

    int breach_action_step = -1;
    std::string breach_action;
    int breach_param_step = -1;
    std::string breach_param;
    Value breach_value;
    int breach_jurisdiction_step = -1;
    std::string breach_jurisdiction;

    int dangling_step = -1;
    std::string dangling_role;  // phantom target agent (seq 99)

    int cycle_step_a = -1;  // earlier step, gets a forward ref with a zero hash
    int cycle_step_b = -1;  // later step, refs back with the real hash

    std::string burst_role;
    std::string burst_action;
    ValueMap burst_params;
    ValueMap burst_ctx;
    int burst_count = 0;
    int64_t burst_offset_ms = 0;
    int64_t burst_spacing_ms = 100;
    std::vector<int64_t> burst_violation_seqs;  // derivable by hand from the limits
};

struct ScenarioSpec {
    std::string name;
    std::vector<ScenarioAgent> agents;
    std::vector<ScenarioStep> steps;
    AnchorPolicy anchor_strategy = Manual{};
    std::string submitter_role;
    int64_t base_ts_ms = 0;
    int64_t step_ms = 1000;
    FaultPlan faults;
};

// Three-stage pharma pipeline: data-synthesizer -> document-drafter ->
// qa-reviewer, 12 steps, EveryN{4} anchoring, qa-reviewer submits.
ScenarioSpec builtin_pharma();
// Two firms with disjoint jurisdictions plus a non-authoring orchestrator
// that submits anchors; criticals anchor immediately.
ScenarioSpec builtin_legal();

std::optional<ScenarioSpec> builtin_scenario(std::string_view name);

struct ScenarioArtifacts {
    std::filesystem::path dir;
    std::map<std::string, std::string> role_dids;
    std::vector<std::filesystem::path> trace_files;
    std::filesystem::path ledger_file;
    std::filesystem::path policy_dir;
    std::filesystem::path manifest_file;
    std::vector<BatchAnchor> anchors;  // as flushed, before any fault mutation
};

// Generates keys/, traces/, policies/, ledger.ttkl, expected_findings.json
// under out_dir. Same (spec, seed, fault) twice gives byte-identical files.
// Errors: Errc::invalid_spec, Errc::io_failure.
ScenarioArtifacts run_scenario(const ScenarioSpec& spec, int64_t seed,
                               const std::filesystem::path& out_dir,
                               FaultKind fault = FaultKind::none);

}  // namespace ttk
