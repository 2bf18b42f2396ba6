#include "ttk/identity.hpp"

#include <sodium.h>

#include <mutex>

#include "ttk/canonical.hpp"
#include "ttk/errors.hpp"
#include "ttk/hex.hpp"
#include "ttk/io.hpp"

namespace ttk {

namespace {

constexpr std::string_view kDidPrefix = "did:ttk:";

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) {
            throw Error(Errc::io_failure, "libsodium initialization failed");
        }
    });
}

KeyPair keypair_from_seed(const uint8_t* seed) {
    ensure_sodium();
    KeyPair kp;
    uint8_t sk[crypto_sign_SECRETKEYBYTES];
    crypto_sign_seed_keypair(kp.public_key.data(), sk, seed);
    std::copy(seed, seed + 32, kp.private_key.begin());
    sodium_memzero(sk, sizeof sk);
    return kp;
}

}  // namespace

KeyPair generate_keypair() {
    ensure_sodium();
    uint8_t seed[crypto_sign_SEEDBYTES];
    randombytes_buf(seed, sizeof seed);
    KeyPair kp = keypair_from_seed(seed);
    sodium_memzero(seed, sizeof seed);
    return kp;
}

KeyPair generate_keypair(std::span<const uint8_t> seed) {
    if (seed.size() != crypto_sign_SEEDBYTES) {
        throw Error(Errc::malformed_seed,
                    "seed must be 32 bytes, got " + std::to_string(seed.size()));
    }
    return keypair_from_seed(seed.data());
}

std::string did_for(std::span<const uint8_t> public_key) {
    if (public_key.size() != 32) {
        throw Error(Errc::malformed_key,
                    "public key must be 32 bytes, got " + std::to_string(public_key.size()));
    }
    return std::string(kDidPrefix) + to_hex(public_key);
}

bool is_valid_did(std::string_view did) {
    return did.size() == kDidPrefix.size() + 64 && did.starts_with(kDidPrefix) &&
           is_lower_hex(did.substr(kDidPrefix.size()));
}

PublicKey key_from_did(std::string_view did) {
    if (!is_valid_did(did)) {
        throw Error(Errc::malformed_did,
                    "expected did:ttk:<64 lowercase hex>, got \"" + std::string(did) + "\"");
    }
    auto bytes = from_hex(did.substr(kDidPrefix.size()));
    PublicKey key;
    std::copy(bytes.begin(), bytes.end(), key.begin());
    return key;
}

Signature sign_message(const KeyPair& keypair, std::span<const uint8_t> message) {
    ensure_sodium();
    uint8_t sk[crypto_sign_SECRETKEYBYTES];
    uint8_t pk[crypto_sign_PUBLICKEYBYTES];
    crypto_sign_seed_keypair(pk, sk, keypair.private_key.data());
    Signature sig;
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk);
    sodium_memzero(sk, sizeof sk);
    return sig;
}

Signature sign_message(const KeyPair& keypair, std::string_view message) {
    return sign_message(keypair, std::span<const uint8_t>(
                                     reinterpret_cast<const uint8_t*>(message.data()),
                                     message.size()));
}

bool verify_signature(std::span<const uint8_t> public_key, std::span<const uint8_t> message,
                      std::span<const uint8_t> signature) {
    if (public_key.size() != 32) {
        throw Error(Errc::malformed_input, "public key must be 32 bytes");
    }
    if (signature.size() != 64) {
        throw Error(Errc::malformed_input, "signature must be 64 bytes");
    }
    ensure_sodium();
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
}

bool verify_signature(std::span<const uint8_t> public_key, std::string_view message,
                      std::span<const uint8_t> signature) {
    return verify_signature(public_key,
                            std::span<const uint8_t>(
                                reinterpret_cast<const uint8_t*>(message.data()),
                                message.size()),
                            signature);
}

namespace {

// Registration and revocation bodies are signed over their canonical
// encoding minus the sig field.
std::string registration_preimage(const AgentIdentity& identity) {
    ValueMap m;
    m.emplace("did", identity.did);
    m.emplace("metadata", identity.metadata);
    m.emplace("public_key", to_hex(identity.public_key));
    return canonical_text(Value(std::move(m)));
}

std::string revocation_preimage(const RevocationRecord& record) {
    ValueMap m;
    m.emplace("did", record.did);
    m.emplace("reason", record.reason);
    m.emplace("revoked_at_ms", record.revoked_at_ms);
    return canonical_text(Value(std::move(m)));
}

std::optional<Signature> signature_from_body(const ValueMap& body) {
    auto it = body.find("sig");
    if (it == body.end() || !it->second.is_string()) return std::nullopt;
    const std::string& hex = it->second.as_string();
    if (hex.size() != 128 || !is_lower_hex(hex)) return std::nullopt;
    auto bytes = from_hex(hex);
    Signature sig;
    std::copy(bytes.begin(), bytes.end(), sig.begin());
    return sig;
}

}  // namespace

int64_t register_identity(const AgentIdentity& identity, const KeyPair& keypair,
                          Ledger& ledger, int64_t now_ms) {
    if (!is_valid_did(identity.did) || key_from_did(identity.did) != identity.public_key) {
        throw Error(Errc::malformed_did, "identity DID does not match its public key");
    }
    if (keypair.public_key != identity.public_key) {
        throw Error(Errc::key_mismatch, "keypair does not match the identity being registered");
    }
    Resolution existing = resolve(identity.did, ledger);
    if (existing.state == Resolution::State::revoked) {
        throw Error(Errc::revoked_identity, identity.did + " was revoked");
    }
    if (existing.state == Resolution::State::registered) {
        throw Error(Errc::already_registered, identity.did + " is already registered");
    }

    Signature sig = sign_message(keypair, registration_preimage(identity));
    ValueMap body;
    body.emplace("did", identity.did);
    body.emplace("metadata", identity.metadata);
    body.emplace("public_key", to_hex(identity.public_key));
    body.emplace("sig", to_hex(sig));
    return ledger.append("identity", std::move(body), now_ms).idx;
}

Resolution resolve(std::string_view did, const Ledger& ledger) {
    if (!is_valid_did(did)) {
        throw Error(Errc::malformed_did,
                    "expected did:ttk:<64 lowercase hex>, got \"" + std::string(did) + "\"");
    }
    PublicKey key = key_from_did(did);

    Resolution out;
    for (int64_t i = 0; i < ledger.size(); ++i) {
        LedgerRecord record = ledger.get(i);
        if (record.kind != "identity" && record.kind != "revocation") continue;
        auto it = record.body.find("did");
        if (it == record.body.end() || !it->second.is_string() ||
            it->second.as_string() != did) {
            continue;
        }
        auto sig = signature_from_body(record.body);
        if (!sig) continue;

        if (record.kind == "identity" && out.state == Resolution::State::not_found) {
            AgentIdentity identity;
            identity.did = std::string(did);
            identity.public_key = key;
            auto meta = record.body.find("metadata");
            if (meta != record.body.end() && meta->second.is_map()) {
                identity.metadata = meta->second.as_map();
            }
            identity.registered_at = record.idx;
            if (!verify_signature(key, registration_preimage(identity), *sig)) continue;
            out.state = Resolution::State::registered;
            out.identity = std::move(identity);
        } else if (record.kind == "revocation" &&
                   out.state == Resolution::State::registered) {
            RevocationRecord rev;
            rev.did = std::string(did);
            auto at = record.body.find("revoked_at_ms");
            auto reason = record.body.find("reason");
            if (at == record.body.end() || !at->second.is_int()) continue;
            rev.revoked_at_ms = at->second.as_int();
            rev.reason = (reason != record.body.end() && reason->second.is_string())
                             ? reason->second.as_string()
                             : "";
            rev.signature = *sig;
            if (!verify_signature(key, revocation_preimage(rev), *sig)) continue;
            out.state = Resolution::State::revoked;
            out.revoked_at_ms = rev.revoked_at_ms;
            out.revoked_ledger_index = record.idx;
        }
    }
    return out;
}

int64_t revoke_identity(std::string_view did, const KeyPair& keypair,
                        const std::string& reason, int64_t now_ms, Ledger& ledger) {
    Resolution existing = resolve(did, ledger);
    if (existing.state == Resolution::State::not_found) {
        throw Error(Errc::not_found, std::string(did) + " is not registered");
    }
    if (existing.state == Resolution::State::revoked) {
        throw Error(Errc::already_revoked, std::string(did) + " is already revoked");
    }
    if (did_for(keypair.public_key) != did) {
        throw Error(Errc::key_mismatch, "keypair does not match the DID being revoked");
    }

    RevocationRecord rev;
    rev.did = std::string(did);
    rev.revoked_at_ms = now_ms;
    rev.reason = reason;
    rev.signature = sign_message(keypair, revocation_preimage(rev));

    ValueMap body;
    body.emplace("did", rev.did);
    body.emplace("reason", rev.reason);
    body.emplace("revoked_at_ms", rev.revoked_at_ms);
    body.emplace("sig", to_hex(rev.signature));
    return ledger.append("revocation", std::move(body), now_ms).idx;
}

void write_key_file(const std::filesystem::path& path, const KeyPair& keypair) {
    ValueMap m;
    m.emplace("did", did_for(keypair.public_key));
    m.emplace("private_key_hex", to_hex(keypair.private_key));
    m.emplace("public_key_hex", to_hex(keypair.public_key));
    std::string text = canonical_text(Value(std::move(m)));
    text += '\n';
    write_file_atomic(path, text, 0600);
}

KeyPair read_key_file(const std::filesystem::path& path) {
    std::string text = read_file(path);
    Value v;
    try {
        v = parse_value(text);
    } catch (const Error& e) {
        throw Error(Errc::parse_error, path.string() + ": " + e.message());
    }
    if (!v.is_map()) {
        throw Error(Errc::parse_error, path.string() + ": key file is not a map");
    }
    const ValueMap& m = v.as_map();
    auto priv = m.find("private_key_hex");
    auto pub = m.find("public_key_hex");
    if (priv == m.end() || !priv->second.is_string() || pub == m.end() ||
        !pub->second.is_string()) {
        throw Error(Errc::parse_error, path.string() + ": missing key fields");
    }
    KeyPair kp;
    try {
        kp = generate_keypair(from_hex(priv->second.as_string()));
    } catch (const Error& e) {
        throw Error(Errc::parse_error, path.string() + ": " + e.message());
    }
    if (to_hex(kp.public_key) != pub->second.as_string()) {
        throw Error(Errc::key_mismatch,
                    path.string() + ": public key does not match the private key");
    }
    auto did = m.find("did");
    if (did != m.end() && did->second.is_string() &&
        did->second.as_string() != did_for(kp.public_key)) {
        throw Error(Errc::key_mismatch, path.string() + ": did does not match the key");
    }
    return kp;
}

}  // namespace ttk
