#include "flowmat/window.hpp"

#include <algorithm>
#include <string>

#include "flowmat/error.hpp"

namespace flowmat {

WindowConfig WindowConfig::from_bits(unsigned bits) {
  if (bits > 63) throw ConfigError("window bits must be in 0..63, got " + std::to_string(bits));
  return WindowConfig{std::uint64_t{1} << bits};
}

Windower::Windower(WindowConfig config) : config_(config) {
  if (config_.window_packets == 0) throw ConfigError("window_packets must be at least 1");
}

std::vector<TripleBuffer> Windower::push_flow(const FlowRecord& rec) {
  std::vector<TripleBuffer> completed;
  push_flow(rec, completed);
  return completed;
}

void Windower::push_flow(const FlowRecord& rec, std::vector<TripleBuffer>& completed) {
  add(rec.src_ip, rec.dest_ip, rec.pkts_toserver, completed);
  add(rec.dest_ip, rec.src_ip, rec.pkts_toclient, completed);
}

void Windower::add(std::uint32_t row, std::uint32_t col, std::uint64_t count,
                   std::vector<TripleBuffer>& completed) {
  while (count > 0) {
    const std::uint64_t room = config_.window_packets - current_.packets_accumulated;
    const std::uint64_t take = std::min(count, room);
    current_.entries.push_back({row, col, take});
    current_.packets_accumulated += take;
    count -= take;
    if (current_.packets_accumulated == config_.window_packets) {
      const std::size_t last_size = current_.entries.size();
      current_.seq = next_seq_++;
      completed.push_back(std::move(current_));
      current_ = TripleBuffer{};
      current_.entries.reserve(last_size);
    }
  }
}

std::optional<TripleBuffer> Windower::flush() {
  if (current_.packets_accumulated == 0) return std::nullopt;
  current_.seq = next_seq_++;
  std::optional<TripleBuffer> out(std::move(current_));
  current_ = TripleBuffer{};
  return out;
}

}  // namespace flowmat
