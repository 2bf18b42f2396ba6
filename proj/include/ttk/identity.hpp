#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ttk/ledger.hpp"
#include "ttk/value.hpp"

namespace ttk {

using PublicKey = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;

struct KeyPair {
    PublicKey public_key;
    std::array<uint8_t, 32> private_key;  // Ed25519 seed
};

// An agent identity: a self-certifying DID bound to an Ed25519 key plus free
// metadata (model version, organizational affiliation, ...).
struct AgentIdentity {
    std::string did;
    PublicKey public_key;
    ValueMap metadata;
    std::optional<int64_t> registered_at;  // ledger index once registered
};

struct RevocationRecord {
    std::string did;
    int64_t revoked_at_ms = 0;
    std::string reason;
    Signature signature;
};

// Fresh random keypair.
KeyPair generate_keypair();
// Deterministic keypair from a 32-byte seed. Errc::malformed_seed otherwise.
KeyPair generate_keypair(std::span<const uint8_t> seed);

// "did:ttk:" + 64 lowercase hex characters of the public key (72 chars).
std::string did_for(std::span<const uint8_t> public_key);
// Inverse of did_for. Errc::malformed_did on anything else.
PublicKey key_from_did(std::string_view did);
bool is_valid_did(std::string_view did);

Signature sign_message(const KeyPair& keypair, std::span<const uint8_t> message);
Signature sign_message(const KeyPair& keypair, std::string_view message);

// True iff signature is a valid Ed25519 signature of message under
// public_key. Errc::malformed_input on wrong key/signature lengths.
bool verify_signature(std::span<const uint8_t> public_key, std::span<const uint8_t> message,
                      std::span<const uint8_t> signature);
bool verify_signature(std::span<const uint8_t> public_key, std::string_view message,
                      std::span<const uint8_t> signature);

// Registry state machine: Unregistered -> Registered -> Revoked.
struct Resolution {
    enum class State { not_found, registered, revoked };
    State state = State::not_found;
    std::optional<AgentIdentity> identity;  // present unless not_found
    int64_t revoked_at_ms = 0;              // meaningful when revoked
    int64_t revoked_ledger_index = -1;      // meaningful when revoked
};

// Appends a signed "identity" record; returns its ledger index.
int64_t register_identity(const AgentIdentity& identity, const KeyPair& keypair,
                          Ledger& ledger, int64_t now_ms);

Resolution resolve(std::string_view did, const Ledger& ledger);

// Appends a signed "revocation" record; subsequent resolve returns revoked.
int64_t revoke_identity(std::string_view did, const KeyPair& keypair,
                        const std::string& reason, int64_t now_ms, Ledger& ledger);

// Key file: canonical {"did","private_key_hex","public_key_hex"}, mode 0600.
void write_key_file(const std::filesystem::path& path, const KeyPair& keypair);
KeyPair read_key_file(const std::filesystem::path& path);

}  // namespace ttk
