#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flowmat/eve_ingest.hpp"
#include "flowmat/hypermat.hpp"

namespace flowmat {

struct WindowConfig {
  static constexpr unsigned kDefaultBits = 17;

  std::uint64_t window_packets = std::uint64_t{1} << kDefaultBits;

  /// window_packets = 2^bits; bits must be in 0..63.
  static WindowConfig from_bits(unsigned bits);
};

/// Entries accumulated for one window. Duplicated (row, col) pairs are kept
/// as separate entries; HyperMatrix::build sums them.
struct TripleBuffer {
  std::vector<Triple> entries;
  std::uint64_t packets_accumulated = 0;
  std::uint64_t seq = 0;
};

/// Cuts a stream of flow records into windows of exactly `window_packets`
/// packets. Each record contributes (src, dst, to-server) and then
/// (dst, src, to-client); a direction that would overrun the window is split,
/// closing the window at the exact budget and carrying the rest forward.
/// Zero-count directions are skipped.
class Windower {
 public:
  explicit Windower(WindowConfig config = {});

  /// Returns the windows completed by this record, in seq order.
  std::vector<TripleBuffer> push_flow(const FlowRecord& rec);

  /// Same as push_flow but appends to `completed`, reusing its storage.
  void push_flow(const FlowRecord& rec, std::vector<TripleBuffer>& completed);

  /// Hands back the partial window if it holds any packets and starts over.
  std::optional<TripleBuffer> flush();

  const TripleBuffer& pending() const noexcept { return current_; }
  const WindowConfig& config() const noexcept { return config_; }

 private:
  void add(std::uint32_t row, std::uint32_t col, std::uint64_t count,
           std::vector<TripleBuffer>& completed);

  WindowConfig config_;
  TripleBuffer current_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace flowmat
