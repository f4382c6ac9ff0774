#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "flowmat/eve_ingest.hpp"

namespace flowmat {

struct GenConfig {
  enum class PacketModel { constant, geometric };
  enum class AddrModel { uniform, zipf };

  std::uint64_t n_flows = 0;
  PacketModel packet_model = PacketModel::constant;
  /// Exact count for `constant`, mean for `geometric`.
  double pkts_per_flow = 100.0;
  AddrModel addr_model = AddrModel::uniform;
  double zipf_exponent = 1.2;
  std::uint32_t zipf_population = 1u << 16;
  std::uint64_t seed = 1;
  /// Fraction of each flow's packets sent to the server.
  double split = 1.0;

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;
};

/// Deterministic synthetic EVE flow source. Output depends only on the
/// config (including seed): the random stream is a fixed 64-bit Mersenne
/// Twister and all sampling is done here rather than through the
/// implementation-defined standard distributions.
class FlowGenerator {
 public:
  explicit FlowGenerator(GenConfig config);

  bool done() const noexcept { return emitted_ == config_.n_flows; }

  /// Produces the next record and replaces `line` with its JSON text
  /// (without a newline). Must not be called once done().
  FlowRecord next(std::string& line);

  std::uint64_t emitted() const noexcept { return emitted_; }
  std::uint64_t packets_emitted() const noexcept { return packets_; }

 private:
  std::uint64_t draw_packets();
  std::uint32_t draw_source();
  double uniform01();

  GenConfig config_;
  std::mt19937_64 rng_;
  std::vector<double> zipf_cdf_;
  std::uint64_t emitted_ = 0;
  std::uint64_t packets_ = 0;
};

/// Writes config.n_flows lines to `out` and returns the packet total.
std::uint64_t generate(const GenConfig& config, std::ostream& out);

/// Same stream collected into one newline-terminated string.
std::string generate_text(const GenConfig& config, std::uint64_t* packet_total = nullptr);

}  // namespace flowmat
