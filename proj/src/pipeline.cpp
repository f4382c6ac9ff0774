#include "flowmat/pipeline.hpp"

#include <sys/resource.h>

#include <chrono>
#include <exception>
#include <thread>

#include "flowmat/bounded_queue.hpp"
#include "flowmat/error.hpp"

namespace flowmat {

namespace {

constexpr std::size_t kBatchRecords = 256;

using Batch = std::vector<FlowRecord>;

// Collects the windows completed by a stream of records and writes them out.
class WindowStage {
 public:
  WindowStage(const IngestOptions& options, IngestSummary& summary)
      : writer_(options.out_dir, options.per_tar),
        sink_(writer_, options.clock),
        windower_(options.window),
        summary_(summary) {}

  void push(const FlowRecord& rec) {
    summary_.packets_in += rec.pkts_toserver + rec.pkts_toclient;
    windower_.push_flow(rec, completed_);
    for (const TripleBuffer& w : completed_) {
      write(w);
      ++summary_.full_windows;
    }
    completed_.clear();
  }

  void finish() {
    if (auto partial = windower_.flush()) {
      write(*partial);
      ++summary_.partial_windows;
      summary_.partial_window_packets = partial->packets_accumulated;
    }
    writer_.close();
    summary_.tars = writer_.finalized();
  }

 private:
  void write(const TripleBuffer& w) {
    MatrixMeta meta = sink_.write(w);
    summary_.packets_archived += meta.packet_total;
    ++summary_.windows_written;
  }

  ArchiveWriter writer_;
  MatrixSink sink_;
  Windower windower_;
  std::vector<TripleBuffer> completed_;
  IngestSummary& summary_;
};

IngestSummary ingest_serial(LineSource& source, const IngestOptions& options) {
  IngestSummary summary;
  WindowStage stage(options, summary);
  std::optional<Anonymizer> anon;
  if (options.anon) anon.emplace(*options.anon);
  Line line;
  while (source.next(line)) {
    ParseResult r = line.overlong ? ParseResult{SkipReason::malformed} : parse_flow_record(line.text);
    summary.counters.count(r);
    if (auto* rec = std::get_if<FlowRecord>(&r)) {
      stage.push(anonymize_flow(anon ? &*anon : nullptr, *rec));
    }
  }
  stage.finish();
  return summary;
}

IngestSummary ingest_threaded(LineSource& source, const IngestOptions& options) {
  IngestSummary summary;
  // Output setup fails here, before any thread is waiting on input.
  WindowStage stage(options, summary);
  IngestCounters counters;
  const std::size_t depth = std::max<std::size_t>(1, options.queue_depth / kBatchRecords);
  BoundedQueue<Batch> parsed(depth);
  BoundedQueue<Batch> anonymized(depth);
  std::exception_ptr parse_error;
  std::exception_ptr anon_error;

  std::thread parser([&] {
    try {
      Batch batch;
      batch.reserve(kBatchRecords);
      Line line;
      while (source.next(line)) {
        ParseResult r =
            line.overlong ? ParseResult{SkipReason::malformed} : parse_flow_record(line.text);
        counters.count(r);
        if (auto* rec = std::get_if<FlowRecord>(&r)) {
          batch.push_back(*rec);
          if (batch.size() == kBatchRecords) {
            if (!parsed.push(std::move(batch))) return;
            batch = Batch{};
            batch.reserve(kBatchRecords);
          }
        }
      }
      if (!batch.empty()) parsed.push(std::move(batch));
    } catch (...) {
      parse_error = std::current_exception();
    }
    parsed.close();
  });

  std::thread anonymizer([&] {
    try {
      std::optional<Anonymizer> anon;
      if (options.anon) anon.emplace(*options.anon);
      while (auto batch = parsed.pop()) {
        if (anon) {
          for (FlowRecord& rec : *batch) rec = anonymize_flow(&*anon, rec);
        }
        if (!anonymized.push(std::move(*batch))) break;
      }
    } catch (...) {
      anon_error = std::current_exception();
    }
    // Unblocks the parser if this stage stopped early.
    parsed.close();
    anonymized.close();
  });

  std::exception_ptr window_error;
  try {
    while (auto batch = anonymized.pop()) {
      for (const FlowRecord& rec : *batch) stage.push(rec);
    }
    if (!parse_error && !anon_error) stage.finish();
  } catch (...) {
    window_error = std::current_exception();
    anonymized.close();
    parsed.close();
  }
  parser.join();
  anonymizer.join();

  for (const auto& err : {window_error, parse_error, anon_error}) {
    if (err) std::rethrow_exception(err);
  }
  summary.counters = counters;
  return summary;
}

}  // namespace

std::uint64_t unix_now() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

std::uint64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  // Linux reports kilobytes.
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
}

MatrixSink::MatrixSink(ArchiveWriter& writer, Clock clock)
    : writer_(writer), clock_(std::move(clock)) {}

MatrixMeta MatrixSink::write(const TripleBuffer& window) {
  const HyperMatrix m = HyperMatrix::build(window.entries);
  MatrixMeta meta{window.seq, total_sum(m), clock_()};
  if (meta.packet_total != window.packets_accumulated) {
    throw Error("window " + std::to_string(window.seq) + " lost packets during build");
  }
  writer_.append(encode_matrix(m, meta), meta);
  return meta;
}

IngestSummary run_ingest(LineSource& source, const IngestOptions& options) {
  return options.threaded ? ingest_threaded(source, options) : ingest_serial(source, options);
}

nlohmann::json to_json(const IngestSummary& s) {
  nlohmann::json tars = nlohmann::json::array();
  for (const auto& p : s.tars) tars.push_back(p.string());
  return {
      {"records_ok", s.counters.records_ok},
      {"records_skipped_non_flow", s.counters.records_skipped_non_flow},
      {"records_skipped_ipv6", s.counters.records_skipped_ipv6},
      {"records_skipped_malformed", s.counters.records_skipped_malformed},
      {"lines", s.counters.lines()},
      {"packets_in", s.packets_in},
      {"packets_archived", s.packets_archived},
      {"windows_written", s.windows_written},
      {"full_windows", s.full_windows},
      {"partial_windows", s.partial_windows},
      {"partial_window_packets", s.partial_window_packets},
      {"tars_written", s.tars.size()},
      {"tars", tars},
  };
}

}  // namespace flowmat
