#include <gtest/gtest.h>

#include <dlfcn.h>

#include <random>

#include "flowmat/error.hpp"
#include "flowmat/lz4_block.hpp"

namespace flowmat {
namespace {

using Bytes = std::vector<std::uint8_t>;

std::vector<Bytes> sample_inputs() {
  std::mt19937_64 rng(11);
  std::vector<Bytes> out;
  out.push_back({});
  out.push_back({42});
  for (std::size_t n : {5u, 12u, 13u, 17u, 64u, 1000u, 65536u, 300000u}) {
    Bytes random(n), zeros(n, 0), text(n), words(n);
    for (auto& b : random) b = static_cast<std::uint8_t>(rng());
    for (std::size_t i = 0; i < n; ++i) text[i] = "flow records "[i % 13];
    // Little-endian counters, the shape of the real sections.
    for (std::size_t i = 0; i < n; ++i) words[i] = i % 8 == 0 ? static_cast<std::uint8_t>(1 + rng() % 3) : 0;
    out.push_back(std::move(random));
    out.push_back(std::move(zeros));
    out.push_back(std::move(text));
    out.push_back(std::move(words));
  }
  return out;
}

TEST(Lz4, RoundTrips) {
  for (const auto& in : sample_inputs()) {
    Bytes packed = lz4::compress(in);
    EXPECT_LE(packed.size(), lz4::compress_bound(in.size()));
    EXPECT_EQ(lz4::decompress(packed, in.size()), in) << in.size();
  }
}

TEST(Lz4, CompressesRedundantData) {
  Bytes zeros(100000, 0);
  EXPECT_LT(lz4::compress(zeros).size(), 1000u);
}

TEST(Lz4, Deterministic) {
  for (const auto& in : sample_inputs()) EXPECT_EQ(lz4::compress(in), lz4::compress(in));
}

TEST(Lz4, RejectsMalformedBlocks) {
  Bytes text(5000);
  for (std::size_t i = 0; i < text.size(); ++i) text[i] = static_cast<std::uint8_t>("abcabcabd"[i % 9]);
  Bytes packed = lz4::compress(text);
  EXPECT_THROW(lz4::decompress(packed, text.size() - 1), IntegrityError);
  EXPECT_THROW(lz4::decompress(packed, text.size() + 1), IntegrityError);
  for (std::size_t cut = 0; cut < packed.size(); ++cut) {
    Bytes truncated(packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(lz4::decompress(truncated, text.size()), IntegrityError) << cut;
  }
  // Match offset of zero and one reaching before the output start.
  EXPECT_THROW(lz4::decompress(Bytes{0x10, 'a', 0x00, 0x00, 0x00}, 100), IntegrityError);
  EXPECT_THROW(lz4::decompress(Bytes{0x10, 'a', 0x05, 0x00, 0x00}, 100), IntegrityError);
}

TEST(Lz4, RandomGarbageNeverCrashes) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20000; ++i) {
    Bytes junk(rng() % 64);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
    try {
      Bytes out = lz4::decompress(junk, rng() % 256);
      (void)out;
    } catch (const IntegrityError&) {
    }
  }
}

// Cross-check against the system liblz4 when the runtime library is present.
class SystemLz4 {
 public:
  SystemLz4() {
    for (const char* name : {"liblz4.so.1", "liblz4.so"}) {
      handle_ = dlopen(name, RTLD_NOW);
      if (handle_) break;
    }
    if (!handle_) return;
    compress_ = reinterpret_cast<CompressFn>(dlsym(handle_, "LZ4_compress_default"));
    decompress_ = reinterpret_cast<DecompressFn>(dlsym(handle_, "LZ4_decompress_safe"));
  }
  ~SystemLz4() {
    if (handle_) dlclose(handle_);
  }
  bool available() const { return compress_ && decompress_; }

  Bytes compress(const Bytes& in) const {
    Bytes out(lz4::compress_bound(in.size()) + 64);
    int n = compress_(reinterpret_cast<const char*>(in.data()), reinterpret_cast<char*>(out.data()),
                      static_cast<int>(in.size()), static_cast<int>(out.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
  }
  int decompress(const Bytes& in, Bytes& out) const {
    return decompress_(reinterpret_cast<const char*>(in.data()), reinterpret_cast<char*>(out.data()),
                       static_cast<int>(in.size()), static_cast<int>(out.size()));
  }

 private:
  using CompressFn = int (*)(const char*, char*, int, int);
  using DecompressFn = int (*)(const char*, char*, int, int);
  void* handle_ = nullptr;
  CompressFn compress_ = nullptr;
  DecompressFn decompress_ = nullptr;
};

TEST(Lz4, InteroperatesWithSystemLibrary) {
  SystemLz4 sys;
  if (!sys.available()) GTEST_SKIP() << "liblz4 runtime not installed";
  for (const auto& in : sample_inputs()) {
    if (in.empty()) continue;
    Bytes ours = lz4::compress(in);
    Bytes out(in.size());
    ASSERT_EQ(sys.decompress(ours, out), static_cast<int>(in.size()));
    EXPECT_EQ(out, in);
    Bytes theirs = sys.compress(in);
    ASSERT_FALSE(theirs.empty());
    EXPECT_EQ(lz4::decompress(theirs, in.size()), in);
  }
}

}  // namespace
}  // namespace flowmat
