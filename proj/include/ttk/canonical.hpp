#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttk/value.hpp"

namespace ttk {

using Bytes = std::vector<uint8_t>;

// 32-byte SHA-256 output. Rendered as 64 lowercase hex characters in every
// file format, CLI output, and report.
class Digest {
public:
    static constexpr size_t kSize = 32;

    Digest() { bytes_.fill(0); }

    static Digest zero() { return Digest{}; }
    static Digest from_bytes(std::span<const uint8_t> bytes);
    static Digest from_hex(std::string_view hex);

    const std::array<uint8_t, kSize>& bytes() const { return bytes_; }
    std::span<const uint8_t> span() const { return bytes_; }
    std::string hex() const;
    bool is_zero() const;

    auto operator<=>(const Digest&) const = default;

private:
    std::array<uint8_t, kSize> bytes_;
};

// Deterministic canonical byte encoding of a Value: map keys sorted by UTF-8
// byte order, no insignificant whitespace, minimal string escaping, base-10
// integers. Equal Values always produce identical bytes; distinct Values
// produce distinct bytes.
Bytes canonical_encode(const Value& v);
std::string canonical_text(const Value& v);

// Strict parser for the interchange format restricted to the Value domain.
// Accepts whitespace between tokens and any map-key order on input, but
// rejects floats, duplicate keys, integers outside the signed 64-bit range,
// malformed escapes, unescaped control characters, and invalid UTF-8.
// Throws Error(Errc::parse_error) with a byte offset on failure.
Value parse_value(std::string_view text);

// SHA-256.
Digest digest(std::span<const uint8_t> data);
Digest digest(std::string_view data);

// digest(tag || parts[0] || parts[1] || ...). The tag byte separates hash
// domains (0x00 Merkle leaf, 0x01 Merkle interior node).
Digest domain_digest(uint8_t tag, std::initializer_list<std::span<const uint8_t>> parts);
Digest domain_digest(uint8_t tag, std::span<const Digest> parts);

namespace tag {
inline constexpr uint8_t kMerkleLeaf = 0x00;
inline constexpr uint8_t kMerkleInterior = 0x01;
}  // namespace tag

}  // namespace ttk
