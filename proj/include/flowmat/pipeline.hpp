#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "flowmat/archive.hpp"
#include "flowmat/cryptopan.hpp"
#include "flowmat/eve_ingest.hpp"
#include "flowmat/line_source.hpp"
#include "flowmat/window.hpp"

namespace flowmat {

/// Seconds since the Unix epoch from the system clock.
std::uint64_t unix_now();

/// Peak resident set size of this process, in bytes.
std::uint64_t peak_rss_bytes();

/// Builds, encodes, and archives completed windows.
class MatrixSink {
 public:
  using Clock = std::function<std::uint64_t()>;

  MatrixSink(ArchiveWriter& writer, Clock clock);

  /// Returns the meta written for this window.
  MatrixMeta write(const TripleBuffer& window);

 private:
  ArchiveWriter& writer_;
  Clock clock_;
};

struct IngestOptions {
  std::filesystem::path out_dir;
  WindowConfig window;
  std::size_t per_tar = ArchiveWriter::kDefaultPerTar;
  /// nullopt runs in passthrough mode; callers enforce the key policy.
  std::optional<AnonState> anon;
  /// Records in flight between consecutive stages.
  std::size_t queue_depth = 1024;
  /// Run parse, anonymize, and window/build/archive on separate threads.
  bool threaded = true;
  MatrixSink::Clock clock = unix_now;
};

struct IngestSummary {
  IngestCounters counters;
  std::uint64_t packets_in = 0;
  std::uint64_t packets_archived = 0;
  std::uint64_t windows_written = 0;
  std::uint64_t full_windows = 0;
  std::uint64_t partial_windows = 0;
  std::uint64_t partial_window_packets = 0;
  std::vector<std::filesystem::path> tars;
};

/// Drains `source` into archives under options.out_dir, flushing the partial
/// window and the partial archive at end of stream. Per-line problems are
/// counted; I/O failures throw.
IngestSummary run_ingest(LineSource& source, const IngestOptions& options);

nlohmann::json to_json(const IngestSummary& s);

}  // namespace flowmat
