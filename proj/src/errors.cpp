#include "ttk/errors.hpp"

namespace ttk {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::malformed_seed: return "MalformedSeed";
    case Errc::malformed_key: return "MalformedKey";
    case Errc::malformed_did: return "MalformedDid";
    case Errc::malformed_input: return "MalformedInput";
    case Errc::already_registered: return "AlreadyRegistered";
    case Errc::revoked_identity: return "RevokedIdentity";
    case Errc::key_mismatch: return "KeyMismatch";
    case Errc::not_found: return "NotFound";
    case Errc::already_revoked: return "AlreadyRevoked";
    case Errc::invalid_policy: return "InvalidPolicy";
    case Errc::unknown_agent: return "UnknownAgent";
    case Errc::digest_mismatch: return "DigestMismatch";
    case Errc::policy_hash_mismatch: return "PolicyHashMismatch";
    case Errc::unordered_input: return "UnorderedInput";
    case Errc::non_monotonic_timestamp: return "NonMonotonicTimestamp";
    case Errc::seq_gap: return "SeqGap";
    case Errc::chain_break: return "ChainBreak";
    case Errc::bad_signature: return "BadSignature";
    case Errc::hash_mismatch: return "HashMismatch";
    case Errc::parse_error: return "ParseError";
    case Errc::io_failure: return "IoFailure";
    case Errc::corrupt_ledger: return "CorruptLedger";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::ledger_append_failure: return "LedgerAppendFailure";
    case Errc::invalid_spec: return "InvalidSpec";
    }
    return "UnknownError";
}

}  // namespace ttk
