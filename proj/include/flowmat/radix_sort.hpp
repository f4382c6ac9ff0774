#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace flowmat {

/// Stable LSD radix sort on a 64-bit key extracted by `key(const T&)`.
///
/// Uses 11-bit digits (six passes) and skips any pass whose digit is constant
/// across the input, so keys confined to a narrow range sort in fewer passes.
/// Small inputs fall back to std::stable_sort. `scratch` is resized as needed
/// and can be reused across calls to avoid reallocations.
template <class T, class KeyFn>
void radix_sort_u64(std::vector<T>& data, std::vector<T>& scratch, KeyFn key) {
  constexpr int kDigitBits = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kDigitBits;
  constexpr int kPasses = (64 + kDigitBits - 1) / kDigitBits;
  constexpr std::size_t kSmall = 256;

  const std::size_t n = data.size();
  if (n < kSmall) {
    std::stable_sort(data.begin(), data.end(),
                     [&](const T& a, const T& b) { return key(a) < key(b); });
    return;
  }

  std::vector<std::array<std::uint32_t, kBuckets>> counts(kPasses);
  for (auto& c : counts) c.fill(0);
  for (const T& item : data) {
    std::uint64_t k = key(item);
    for (int p = 0; p < kPasses; ++p) {
      ++counts[p][(k >> (p * kDigitBits)) & (kBuckets - 1)];
    }
  }

  scratch.resize(n);
  for (int p = 0; p < kPasses; ++p) {
    auto& count = counts[p];
    if (std::any_of(count.begin(), count.end(), [n](std::uint32_t c) { return c == n; })) {
      continue;
    }
    std::uint32_t offset = 0;
    for (auto& c : count) {
      std::uint32_t here = c;
      c = offset;
      offset += here;
    }
    const int shift = p * kDigitBits;
    for (const T& item : data) {
      scratch[count[(key(item) >> shift) & (kBuckets - 1)]++] = item;
    }
    data.swap(scratch);
  }
}

}  // namespace flowmat
