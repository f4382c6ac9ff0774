#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flowmat {

/// Parses strict dotted-quad text ("a.b.c.d", each octet 0..255, decimal,
/// no sign, no whitespace, at most three digits per octet).
std::optional<std::uint32_t> parse_ipv4(std::string_view text) noexcept;

std::string format_ipv4(std::uint32_t addr);

/// Appends the dotted-quad form to `out` without allocating a temporary.
void append_ipv4(std::string& out, std::uint32_t addr);

/// Number of leading bits shared by two addresses (0..32).
constexpr int common_prefix_length(std::uint32_t a, std::uint32_t b) noexcept {
  std::uint32_t diff = a ^ b;
  int n = 0;
  for (std::uint32_t mask = 0x80000000u; mask != 0 && (diff & mask) == 0; mask >>= 1) {
    ++n;
  }
  return n;
}

}  // namespace flowmat
