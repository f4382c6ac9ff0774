#include "flowmat/cryptopan.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "flowmat/error.hpp"

namespace flowmat {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

AnonKey AnonKey::from_bytes(std::span<const std::uint8_t> bytes) {
  AnonKey key;
  if (bytes.size() != key.bytes_.size()) {
    throw ConfigError("anonymization key must be exactly 32 bytes, got " +
                      std::to_string(bytes.size()));
  }
  std::copy(bytes.begin(), bytes.end(), key.bytes_.begin());
  return key;
}

AnonKey AnonKey::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read key file " + path);
  std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  if (bytes.size() != 32) {
    throw ConfigError("key file " + path + " must hold exactly 32 bytes, found " +
                      std::to_string(bytes.size()));
  }
  return from_bytes(bytes);
}

AnonKey AnonKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw ConfigError("hex key must be 64 hex digits, got " + std::to_string(hex.size()) +
                      " characters");
  }
  std::array<std::uint8_t, 32> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    int hi = hex_digit(hex[2 * i]);
    int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("hex key contains a non-hex character");
    bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return from_bytes(bytes);
}

std::optional<AnonKey> AnonKey::from_env() {
  const char* value = std::getenv(kAnonKeyEnvVar);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return from_hex(value);
}

struct Aes128::Ctx {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Ctx() { EVP_CIPHER_CTX_free(ctx); }
};

Aes128::Aes128(std::span<const std::uint8_t, 16> key) : ctx_(std::make_unique<Ctx>()) {
  ctx_->ctx = EVP_CIPHER_CTX_new();
  if (ctx_->ctx == nullptr ||
      EVP_EncryptInit_ex(ctx_->ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1 ||
      EVP_CIPHER_CTX_set_padding(ctx_->ctx, 0) != 1) {
    throw ConfigError("AES-128 initialization failed");
  }
}

Aes128::~Aes128() = default;
Aes128::Aes128(Aes128&&) noexcept = default;
Aes128& Aes128::operator=(Aes128&&) noexcept = default;

void Aes128::encrypt_blocks(std::span<const std::uint8_t> in, std::span<std::uint8_t> out) {
  if (in.size() != out.size() || in.size() % kAesBlockBytes != 0) {
    throw ConfigError("AES input must be whole blocks matching the output size");
  }
  int written = 0;
  if (EVP_EncryptUpdate(ctx_->ctx, out.data(), &written, in.data(), static_cast<int>(in.size())) != 1 ||
      static_cast<std::size_t>(written) != in.size()) {
    throw ConfigError("AES-128 encryption failed");
  }
}

AnonState AnonState::derive(const AnonKey& key) {
  AnonState state;
  state.key_ = key;
  Aes128 cipher(key.cipher_key());
  cipher.encrypt_blocks(key.pad_seed(), state.pad_);
  return state;
}

Anonymizer::Anonymizer(const AnonState& state, std::size_t cache_slots)
    : pad_(state.pad()), cipher_(state.key().cipher_key()) {
  if (cache_slots > 0) {
    std::size_t slots = std::bit_ceil(cache_slots);
    slots_.resize(slots);
    filled_.resize(slots, false);
    mask_ = slots - 1;
  }
}

std::uint32_t Anonymizer::anonymize(std::uint32_t addr) {
  if (slots_.empty()) {
    ++misses_;
    return prefix_preserving_anonymize(cipher_, pad_, addr);
  }
  // Fibonacci hashing spreads clustered addresses across the table.
  std::size_t index = static_cast<std::size_t>((addr * 0x9E3779B97F4A7C15ull) >> 32) & mask_;
  Slot& slot = slots_[index];
  if (filled_[index] && slot.addr == addr) {
    ++hits_;
    return slot.anon;
  }
  ++misses_;
  std::uint32_t anon = prefix_preserving_anonymize(cipher_, pad_, addr);
  slot = Slot{addr, anon};
  filled_[index] = true;
  return anon;
}

std::uint32_t anonymize_ip(const AnonState& state, std::uint32_t addr) {
  Aes128 cipher(state.key().cipher_key());
  return prefix_preserving_anonymize(cipher, state.pad(), addr);
}

FlowRecord anonymize_flow(Anonymizer* anonymizer, FlowRecord rec) {
  if (anonymizer != nullptr) {
    rec.src_ip = anonymizer->anonymize(rec.src_ip);
    rec.dest_ip = anonymizer->anonymize(rec.dest_ip);
  }
  return rec;
}

}  // namespace flowmat
