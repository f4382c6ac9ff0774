#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>

namespace flowmat {

/// One Suricata "flow" event reduced to what the traffic matrix needs.
struct FlowRecord {
  std::uint32_t src_ip = 0;
  std::uint32_t dest_ip = 0;
  std::uint64_t pkts_toserver = 0;
  std::uint64_t pkts_toclient = 0;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

enum class SkipReason { non_flow, ipv6, malformed };

const char* to_string(SkipReason reason) noexcept;

using ParseResult = std::variant<FlowRecord, SkipReason>;

/// Lines longer than this are rejected as malformed without being parsed.
inline constexpr std::size_t kMaxLineBytes = std::size_t{1} << 20;

/// Classifies one newline-delimited EVE document.
///
/// A FlowRecord comes back only for `event_type == "flow"` with IPv4
/// `src_ip`/`dest_ip` strings and integer `flow.pkts_toserver` and
/// `flow.pkts_toclient` in the unsigned 64-bit range. Keys may appear in any
/// order and unknown keys are ignored. Everything else maps to a SkipReason;
/// the function never throws, whatever bytes it is given.
ParseResult parse_flow_record(std::string_view line) noexcept;

struct IngestCounters {
  std::uint64_t records_ok = 0;
  std::uint64_t records_skipped_non_flow = 0;
  std::uint64_t records_skipped_ipv6 = 0;
  std::uint64_t records_skipped_malformed = 0;

  void count(const ParseResult& result) noexcept;
  void count(SkipReason reason) noexcept;

  std::uint64_t lines() const noexcept {
    return records_ok + records_skipped_non_flow + records_skipped_ipv6 +
           records_skipped_malformed;
  }

  IngestCounters& operator+=(const IngestCounters& other) noexcept;
  friend bool operator==(const IngestCounters&, const IngestCounters&) = default;
};

}  // namespace flowmat
