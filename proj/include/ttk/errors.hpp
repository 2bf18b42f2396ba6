#pragma once

#include <stdexcept>
#include <string>

namespace ttk {

// Machine-readable failure categories shared across the toolkit. The CLI
// maps these onto its exit-code contract; tests match on them.
enum class Errc {
    malformed_seed,
    malformed_key,
    malformed_did,
    malformed_input,
    already_registered,
    revoked_identity,
    key_mismatch,
    not_found,
    already_revoked,
    invalid_policy,
    unknown_agent,
    digest_mismatch,
    policy_hash_mismatch,
    unordered_input,
    non_monotonic_timestamp,
    seq_gap,
    chain_break,
    bad_signature,
    hash_mismatch,
    parse_error,
    io_failure,
    corrupt_ledger,
    empty_batch,
    index_out_of_range,
    ledger_append_failure,
    invalid_spec,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          message_(message) {}

    Errc code() const noexcept { return code_; }
    // The message without the "CodeName: " prefix, for rewrapping with
    // location context.
    const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::string message_;
};

}  // namespace ttk
