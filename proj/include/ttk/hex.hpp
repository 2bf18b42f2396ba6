#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttk {

// Lowercase hex, the only byte rendering used anywhere in the toolkit.
std::string to_hex(std::span<const uint8_t> bytes);

// Strict inverse: even length, lowercase [0-9a-f] only.
// Throws Error(Errc::malformed_input) otherwise.
std::vector<uint8_t> from_hex(std::string_view hex);

bool is_lower_hex(std::string_view text);

}  // namespace ttk
