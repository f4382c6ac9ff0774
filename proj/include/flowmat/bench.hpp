#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowmat/cryptopan.hpp"
#include "flowmat/window.hpp"

namespace flowmat {

struct StageRate {
  std::string stage;
  std::uint64_t records = 0;
  double seconds = 0.0;
  double records_per_second = 0.0;
};

struct BenchReport {
  std::uint64_t lines = 0;
  std::uint64_t records = 0;
  std::uint64_t windows = 0;
  /// parse, anonymize, window_build, encode_archive
  std::vector<StageRate> stages;
  StageRate end_to_end;
  double wall_seconds = 0.0;
  std::uint64_t peak_rss_bytes = 0;
  bool memory_within_limit = false;
  bool reliable = false;
  bool end_to_end_within_min_stage = false;
  std::string fastest_stage;
};

inline constexpr std::uint64_t kBenchMinRecords = 100'000;
inline constexpr std::uint64_t kMemoryLimitBytes = std::uint64_t{512} << 20;

struct BenchOptions {
  /// Key for the anonymize stage; nullopt uses a fixed built-in key since
  /// benchmark output is discarded.
  std::optional<AnonState> anon;
  WindowConfig window;
  std::size_t per_tar = 64;
  /// Archives written during the run go here and are removed afterwards.
  std::filesystem::path scratch_dir;
};

/// Times each stage in isolation over the same newline-delimited input, each
/// fed the previous stage's materialized output, then the threaded pipeline
/// end to end.
BenchReport run_bench(std::string_view text, const BenchOptions& options);

nlohmann::json to_json(const BenchReport& r);

}  // namespace flowmat
