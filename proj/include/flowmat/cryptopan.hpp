#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowmat/eve_ingest.hpp"

namespace flowmat {

inline constexpr std::size_t kAesBlockBytes = 16;
inline constexpr const char* kAnonKeyEnvVar = "FLOWMAT_ANON_KEY";

/// 32 bytes of key material: bytes 0..15 key the block cipher, bytes 16..31
/// seed the pad. The bytes are never printed by this library.
class AnonKey {
 public:
  static AnonKey from_bytes(std::span<const std::uint8_t> bytes);
  /// The file must hold exactly 32 raw bytes.
  static AnonKey from_file(const std::string& path);
  /// Exactly 64 hex digits, either case.
  static AnonKey from_hex(std::string_view hex);
  /// Reads kAnonKeyEnvVar; nullopt when unset or empty.
  static std::optional<AnonKey> from_env();

  std::span<const std::uint8_t, 16> cipher_key() const noexcept {
    return std::span<const std::uint8_t, 16>(bytes_.data(), 16);
  }
  std::span<const std::uint8_t, 16> pad_seed() const noexcept {
    return std::span<const std::uint8_t, 16>(bytes_.data() + 16, 16);
  }

  friend bool operator==(const AnonKey&, const AnonKey&) = default;

 private:
  std::array<std::uint8_t, 32> bytes_{};
};

/// AES-128 in ECB mode over whole blocks. Holds a mutable cipher context, so
/// an instance must stay on one thread.
class Aes128 {
 public:
  explicit Aes128(std::span<const std::uint8_t, 16> key);
  ~Aes128();
  Aes128(Aes128&&) noexcept;
  Aes128& operator=(Aes128&&) noexcept;
  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;

  /// `in.size()` must be a multiple of 16 and equal to `out.size()`.
  void encrypt_blocks(std::span<const std::uint8_t> in, std::span<std::uint8_t> out);

 private:
  struct Ctx;
  std::unique_ptr<Ctx> ctx_;
};

/// Derived Crypto-PAn state: the cipher key and the 16-byte pad E_k(seed).
/// Immutable, shareable across threads; each thread builds its own Anonymizer.
class AnonState {
 public:
  static AnonState derive(const AnonKey& key);

  const AnonKey& key() const noexcept { return key_; }
  const std::array<std::uint8_t, kAesBlockBytes>& pad() const noexcept { return pad_; }

  friend bool operator==(const AnonState&, const AnonState&) = default;

 private:
  AnonKey key_;
  std::array<std::uint8_t, kAesBlockBytes> pad_{};
};

/// The prefix-preserving mapping for one address, generic over the
/// pseudo-random function. `prf.encrypt_blocks(in, out)` must encrypt a run of
/// 16-byte blocks. Bit 0 is the most significant address bit; one-time-pad
/// bit `pos` is the top bit of PRF(first `pos` address bits ++ remaining pad
/// bits), so outputs share exactly as many leading bits as the inputs do.
template <class Prf>
std::uint32_t prefix_preserving_anonymize(Prf& prf, const std::array<std::uint8_t, kAesBlockBytes>& pad,
                                          std::uint32_t addr) {
  constexpr int kBits = 32;
  std::array<std::uint8_t, kBits * kAesBlockBytes> in;
  std::array<std::uint8_t, kBits * kAesBlockBytes> out;

  const std::uint32_t pad_head = (std::uint32_t{pad[0]} << 24) | (std::uint32_t{pad[1]} << 16) |
                                 (std::uint32_t{pad[2]} << 8) | std::uint32_t{pad[3]};
  for (int pos = 0; pos < kBits; ++pos) {
    const std::uint32_t addr_mask = pos == 0 ? 0u : ~std::uint32_t{0} << (kBits - pos);
    const std::uint32_t head = (addr & addr_mask) | (pad_head & ~addr_mask);
    std::uint8_t* block = in.data() + pos * kAesBlockBytes;
    block[0] = static_cast<std::uint8_t>(head >> 24);
    block[1] = static_cast<std::uint8_t>(head >> 16);
    block[2] = static_cast<std::uint8_t>(head >> 8);
    block[3] = static_cast<std::uint8_t>(head);
    for (std::size_t i = 4; i < kAesBlockBytes; ++i) block[i] = pad[i];
  }
  prf.encrypt_blocks(std::span<const std::uint8_t>(in), std::span<std::uint8_t>(out));

  std::uint32_t otp = 0;
  for (int pos = 0; pos < kBits; ++pos) {
    otp |= std::uint32_t{static_cast<std::uint8_t>(out[pos * kAesBlockBytes] >> 7)} << (kBits - 1 - pos);
  }
  return addr ^ otp;
}

/// Thread-confined address mapper with a direct-mapped memo cache. A slot
/// whose index collides with a new address is overwritten.
class Anonymizer {
 public:
  static constexpr std::size_t kDefaultCacheSlots = std::size_t{1} << 20;

  /// `cache_slots` is rounded up to a power of two; 0 disables the cache.
  explicit Anonymizer(const AnonState& state, std::size_t cache_slots = kDefaultCacheSlots);

  std::uint32_t anonymize(std::uint32_t addr);

  std::uint64_t cache_hits() const noexcept { return hits_; }
  std::uint64_t cache_misses() const noexcept { return misses_; }

 private:
  struct Slot {
    std::uint32_t addr;
    std::uint32_t anon;
  };

  std::array<std::uint8_t, kAesBlockBytes> pad_;
  Aes128 cipher_;
  std::vector<Slot> slots_;
  std::vector<bool> filled_;
  std::size_t mask_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

/// One-off mapping; builds a cipher per call. Prefer Anonymizer in loops.
std::uint32_t anonymize_ip(const AnonState& state, std::uint32_t addr);

/// Maps both addresses; a null anonymizer is passthrough (--no-anon).
FlowRecord anonymize_flow(Anonymizer* anonymizer, FlowRecord rec);

}  // namespace flowmat
