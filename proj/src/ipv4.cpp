#include "flowmat/ipv4.hpp"

namespace flowmat {

std::optional<std::uint32_t> parse_ipv4(std::string_view text) noexcept {
  std::uint32_t addr = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.') return std::nullopt;
      ++pos;
    }
    std::size_t start = pos;
    unsigned value = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9' && pos - start < 3) {
      value = value * 10 + static_cast<unsigned>(text[pos] - '0');
      ++pos;
    }
    if (pos == start || value > 255) return std::nullopt;
    addr = (addr << 8) | value;
  }
  if (pos != text.size()) return std::nullopt;
  return addr;
}

void append_ipv4(std::string& out, std::uint32_t addr) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    const unsigned octet = (addr >> shift) & 0xff;
    if (octet >= 100) out.push_back(static_cast<char>('0' + octet / 100));
    if (octet >= 10) out.push_back(static_cast<char>('0' + octet / 10 % 10));
    out.push_back(static_cast<char>('0' + octet % 10));
    if (shift != 0) out.push_back('.');
  }
}

std::string format_ipv4(std::uint32_t addr) {
  std::string out;
  append_ipv4(out, addr);
  return out;
}

}  // namespace flowmat
