#include "flowmat/lz4_block.hpp"

#include <cstring>
#include <string>

#include "flowmat/error.hpp"

namespace flowmat::lz4 {

namespace {

constexpr std::size_t kMinMatch = 4;
constexpr std::size_t kLastLiterals = 5;   // the final 5 bytes are always literals
constexpr std::size_t kMatchFindLimit = 12;  // a match must start 12+ bytes from the end
constexpr std::size_t kMaxOffset = 65535;
constexpr int kHashLog = 14;

std::uint32_t read32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

std::uint32_t hash4(std::uint32_t v) { return (v * 2654435761u) >> (32 - kHashLog); }

void put_length(std::vector<std::uint8_t>& out, std::size_t extra) {
  while (extra >= 255) {
    out.push_back(255);
    extra -= 255;
  }
  out.push_back(static_cast<std::uint8_t>(extra));
}

void emit_sequence(std::vector<std::uint8_t>& out, const std::uint8_t* literals, std::size_t lit_len,
                   std::size_t offset, std::size_t match_len) {
  const std::size_t ml = match_len == 0 ? 0 : match_len - kMinMatch;
  std::uint8_t token = static_cast<std::uint8_t>((lit_len >= 15 ? 15 : lit_len) << 4);
  if (match_len != 0) token |= static_cast<std::uint8_t>(ml >= 15 ? 15 : ml);
  out.push_back(token);
  if (lit_len >= 15) put_length(out, lit_len - 15);
  out.insert(out.end(), literals, literals + lit_len);
  if (match_len == 0) return;
  out.push_back(static_cast<std::uint8_t>(offset & 0xff));
  out.push_back(static_cast<std::uint8_t>(offset >> 8));
  if (ml >= 15) put_length(out, ml - 15);
}

}  // namespace

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> input) {
  const std::uint8_t* in = input.data();
  const std::size_t n = input.size();
  std::vector<std::uint8_t> out;
  out.reserve(compress_bound(n));

  std::size_t anchor = 0;
  if (n > kMatchFindLimit) {
    // Positions are stored +1 so that 0 marks an empty slot.
    std::vector<std::uint32_t> table(std::size_t{1} << kHashLog, 0);
    const std::size_t find_limit = n - kMatchFindLimit;
    const std::size_t match_limit = n - kLastLiterals;
    std::size_t ip = 0;
    while (ip < find_limit) {
      const std::uint32_t seq = read32(in + ip);
      const std::uint32_t h = hash4(seq);
      const std::uint32_t slot = table[h];
      table[h] = static_cast<std::uint32_t>(ip + 1);
      if (slot == 0) {
        ++ip;
        continue;
      }
      std::size_t ref = slot - 1;
      if (ip - ref > kMaxOffset || read32(in + ref) != seq) {
        ++ip;
        continue;
      }
      while (ip > anchor && ref > 0 && in[ip - 1] == in[ref - 1]) {
        --ip;
        --ref;
      }
      std::size_t len = kMinMatch;
      while (ip + len < match_limit && in[ip + len] == in[ref + len]) ++len;

      emit_sequence(out, in + anchor, ip - anchor, ip - ref, len);
      ip += len;
      anchor = ip;
      if (ip - 2 < find_limit) table[hash4(read32(in + ip - 2))] = static_cast<std::uint32_t>(ip - 1);
    }
  }
  emit_sequence(out, in + anchor, n - anchor, 0, 0);
  return out;
}

std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> block, std::size_t raw_size) {
  const std::uint8_t* in = block.data();
  const std::size_t n = block.size();
  std::vector<std::uint8_t> out(raw_size);
  std::size_t ip = 0;
  std::size_t op = 0;

  auto read_length = [&](std::size_t base) {
    std::size_t len = base;
    for (;;) {
      if (ip >= n) throw IntegrityError("lz4: truncated length");
      std::uint8_t b = in[ip++];
      if (len > raw_size) throw IntegrityError("lz4: length exceeds output size");
      len += b;
      if (b != 255) return len;
    }
  };

  for (;;) {
    if (ip >= n) throw IntegrityError("lz4: missing token");
    const std::uint8_t token = in[ip++];
    std::size_t lit = token >> 4;
    if (lit == 15) lit = read_length(15);
    if (lit > n - ip || lit > raw_size - op) throw IntegrityError("lz4: literal run out of bounds");
    std::memcpy(out.data() + op, in + ip, lit);
    ip += lit;
    op += lit;
    if (ip == n) break;

    if (n - ip < 2) throw IntegrityError("lz4: truncated match offset");
    const std::size_t offset = std::size_t{in[ip]} | std::size_t{in[ip + 1]} << 8;
    ip += 2;
    if (offset == 0 || offset > op) throw IntegrityError("lz4: match offset out of range");
    std::size_t len = token & 15;
    if (len == 15) len = read_length(15);
    len += kMinMatch;
    if (len > raw_size - op) throw IntegrityError("lz4: match overruns output");
    std::uint8_t* dst = out.data() + op;
    const std::uint8_t* src = dst - offset;
    if (offset >= len) {
      std::memcpy(dst, src, len);
    } else {
      for (std::size_t i = 0; i < len; ++i) dst[i] = src[i];
    }
    op += len;
  }
  if (op != raw_size) {
    throw IntegrityError("lz4: decoded " + std::to_string(op) + " bytes, expected " +
                         std::to_string(raw_size));
  }
  return out;
}

}  // namespace flowmat::lz4
