#include "flowmat/flowgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>

#include "flowmat/error.hpp"
#include "flowmat/ipv4.hpp"

namespace flowmat {

namespace {

// 2024-01-01T00:00:00Z; generated flows advance one second per 1000 records.
constexpr std::int64_t kBaseEpoch = 1704067200;
constexpr std::uint64_t kFlowsPerSecond = 1000;
constexpr std::uint64_t kBytesPerPacket = 60;

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_timestamp(std::string& out, std::int64_t epoch) {
  std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S.000000+0000", &tm);
  out.append(buf, n);
}

// Bijective 32-bit mixer (xorshift-multiply), so Zipf ranks land on scattered
// but distinct source addresses.
std::uint32_t scatter(std::uint32_t x) {
  x ^= x >> 16;
  x *= 0x7feb352du;
  x ^= x >> 15;
  x *= 0x846ca68bu;
  x ^= x >> 16;
  return x;
}

}  // namespace

void GenConfig::validate() const {
  if (!std::isfinite(pkts_per_flow) || pkts_per_flow < 1.0 || pkts_per_flow > 9.0e15) {
    throw ConfigError("pkts-per-flow must be a finite value >= 1");
  }
  if (packet_model == PacketModel::constant && pkts_per_flow != std::floor(pkts_per_flow)) {
    throw ConfigError("constant pkts-per-flow must be an integer");
  }
  if (addr_model == AddrModel::zipf) {
    if (!std::isfinite(zipf_exponent) || zipf_exponent <= 0.0) {
      throw ConfigError("zipf exponent must be a finite value > 0");
    }
    if (zipf_population == 0) throw ConfigError("zipf population must be at least 1");
  }
  if (!std::isfinite(split) || split < 0.0 || split > 1.0) {
    throw ConfigError("split must lie in [0, 1]");
  }
}

FlowGenerator::FlowGenerator(GenConfig config) : config_(config), rng_(config.seed) {
  config_.validate();
  if (config_.addr_model == GenConfig::AddrModel::zipf) {
    zipf_cdf_.resize(config_.zipf_population);
    double acc = 0.0;
    for (std::uint32_t k = 0; k < config_.zipf_population; ++k) {
      acc += std::pow(static_cast<double>(k + 1), -config_.zipf_exponent);
      zipf_cdf_[k] = acc;
    }
    for (double& c : zipf_cdf_) c /= acc;
  }
}

double FlowGenerator::uniform01() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::uint64_t FlowGenerator::draw_packets() {
  const double mean = config_.pkts_per_flow;
  if (config_.packet_model == GenConfig::PacketModel::constant || mean == 1.0) {
    return static_cast<std::uint64_t>(mean);
  }
  // Geometric on {1, 2, ...} with success probability 1/mean.
  const double p = 1.0 / mean;
  const double u = uniform01();
  return 1 + static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

std::uint32_t FlowGenerator::draw_source() {
  if (config_.addr_model == GenConfig::AddrModel::uniform) {
    return static_cast<std::uint32_t>(rng_() >> 32);
  }
  const double u = uniform01();
  auto it = std::lower_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
  auto rank = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(
      it - zipf_cdf_.begin(), static_cast<std::ptrdiff_t>(zipf_cdf_.size()) - 1));
  return scatter(rank ^ static_cast<std::uint32_t>(config_.seed));
}

FlowRecord FlowGenerator::next(std::string& line) {
  FlowRecord rec;
  rec.src_ip = draw_source();
  rec.dest_ip = static_cast<std::uint32_t>(rng_() >> 32);
  const std::uint64_t total = draw_packets();
  rec.pkts_toserver = std::min<std::uint64_t>(
      total, static_cast<std::uint64_t>(std::llround(static_cast<double>(total) * config_.split)));
  rec.pkts_toclient = total - rec.pkts_toserver;
  const std::uint64_t ports = rng_();
  const auto src_port = 1024 + (ports & 0xffff) % 64512;
  const auto dest_port = (ports >> 16) & 0xffff;

  const std::int64_t when = kBaseEpoch + static_cast<std::int64_t>(emitted_ / kFlowsPerSecond);
  line.clear();
  line += "{\"timestamp\":\"";
  append_timestamp(line, when);
  line += "\",\"flow_id\":";
  append_uint(line, emitted_ + 1);
  line += ",\"event_type\":\"flow\",\"src_ip\":\"";
  append_ipv4(line, rec.src_ip);
  line += "\",\"src_port\":";
  append_uint(line, src_port);
  line += ",\"dest_ip\":\"";
  append_ipv4(line, rec.dest_ip);
  line += "\",\"dest_port\":";
  append_uint(line, dest_port);
  line += ",\"proto\":\"TCP\",\"flow\":{\"pkts_toserver\":";
  append_uint(line, rec.pkts_toserver);
  line += ",\"pkts_toclient\":";
  append_uint(line, rec.pkts_toclient);
  line += ",\"bytes_toserver\":";
  append_uint(line, rec.pkts_toserver * kBytesPerPacket);
  line += ",\"bytes_toclient\":";
  append_uint(line, rec.pkts_toclient * kBytesPerPacket);
  line += ",\"start\":\"";
  append_timestamp(line, when);
  line += "\",\"end\":\"";
  append_timestamp(line, when);
  line += "\",\"age\":0,\"state\":\"closed\",\"reason\":\"timeout\",\"alerted\":false}}";

  ++emitted_;
  packets_ += total;
  return rec;
}

std::uint64_t generate(const GenConfig& config, std::ostream& out) {
  FlowGenerator gen(config);
  std::string line;
  while (!gen.done()) {
    gen.next(line);
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  return gen.packets_emitted();
}

std::string generate_text(const GenConfig& config, std::uint64_t* packet_total) {
  FlowGenerator gen(config);
  std::string text;
  std::string line;
  while (!gen.done()) {
    gen.next(line);
    text += line;
    text += '\n';
  }
  if (packet_total != nullptr) *packet_total = gen.packets_emitted();
  return text;
}

}  // namespace flowmat
