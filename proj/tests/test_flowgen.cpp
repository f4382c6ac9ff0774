#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "flowmat/error.hpp"
#include "flowmat/eve_ingest.hpp"
#include "flowmat/flowgen.hpp"

namespace flowmat {
namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

TEST(FlowGen, ZeroFlowsIsEmpty) {
  GenConfig cfg;
  std::uint64_t total = 7;
  EXPECT_EQ(generate_text(cfg, &total), "");
  EXPECT_EQ(total, 0u);
}

TEST(FlowGen, TwoDefaultFlows) {
  GenConfig cfg;
  cfg.n_flows = 2;
  std::uint64_t total = 0;
  auto lines = split_lines(generate_text(cfg, &total));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(total, 200u);
  for (const auto& l : lines) {
    auto r = parse_flow_record(l);
    ASSERT_TRUE(std::holds_alternative<FlowRecord>(r)) << l;
    EXPECT_EQ(std::get<FlowRecord>(r).pkts_toserver, 100u);
    EXPECT_EQ(std::get<FlowRecord>(r).pkts_toclient, 0u);
  }
}

TEST(FlowGen, DeterministicForSeed) {
  GenConfig cfg;
  cfg.n_flows = 500;
  cfg.packet_model = GenConfig::PacketModel::geometric;
  cfg.addr_model = GenConfig::AddrModel::zipf;
  cfg.split = 0.6;
  const std::string a = generate_text(cfg);
  EXPECT_EQ(a, generate_text(cfg));
  cfg.seed = 2;
  EXPECT_NE(a, generate_text(cfg));
}

TEST(FlowGen, StreamAndTextAgree) {
  GenConfig cfg;
  cfg.n_flows = 300;
  std::ostringstream out;
  std::uint64_t total = 0;
  EXPECT_EQ(generate(cfg, out), 30000u);
  EXPECT_EQ(out.str(), generate_text(cfg, &total));
  EXPECT_EQ(total, 30000u);
}

TEST(FlowGen, EveryLineParsesAndPacketsAddUp) {
  for (int model = 0; model < 4; ++model) {
    GenConfig cfg;
    cfg.n_flows = 5000;
    cfg.seed = 40 + model;
    if (model & 1) cfg.packet_model = GenConfig::PacketModel::geometric;
    if (model & 2) cfg.addr_model = GenConfig::AddrModel::zipf;
    cfg.split = model == 3 ? 0.3 : 1.0;
    FlowGenerator gen(cfg);
    std::string line;
    std::uint64_t parsed_total = 0;
    while (!gen.done()) {
      FlowRecord expected = gen.next(line);
      auto r = parse_flow_record(line);
      ASSERT_TRUE(std::holds_alternative<FlowRecord>(r)) << line;
      ASSERT_EQ(std::get<FlowRecord>(r), expected);
      ASSERT_GE(expected.pkts_toserver + expected.pkts_toclient, 1u);
      parsed_total += expected.pkts_toserver + expected.pkts_toclient;
    }
    EXPECT_EQ(gen.emitted(), cfg.n_flows);
    EXPECT_EQ(gen.packets_emitted(), parsed_total);
  }
}

TEST(FlowGen, GeometricMeanMatches) {
  GenConfig cfg;
  cfg.n_flows = 100000;
  cfg.packet_model = GenConfig::PacketModel::geometric;
  cfg.pkts_per_flow = 40;
  FlowGenerator gen(cfg);
  std::string line;
  while (!gen.done()) gen.next(line);
  const double mean = static_cast<double>(gen.packets_emitted()) / 100000.0;
  EXPECT_NEAR(mean, 40.0, 1.0);
}

TEST(FlowGen, SplitDividesPackets) {
  GenConfig cfg;
  cfg.n_flows = 10;
  cfg.split = 0.25;
  FlowGenerator gen(cfg);
  std::string line;
  FlowRecord r = gen.next(line);
  EXPECT_EQ(r.pkts_toserver, 25u);
  EXPECT_EQ(r.pkts_toclient, 75u);
}

TEST(FlowGen, ZipfTopSourceShare) {
  GenConfig cfg;
  cfg.n_flows = 200000;
  cfg.addr_model = GenConfig::AddrModel::zipf;
  cfg.zipf_population = 1000;
  cfg.zipf_exponent = 1.2;
  double h = 0;
  for (int k = 1; k <= 1000; ++k) h += std::pow(k, -1.2);
  FlowGenerator gen(cfg);
  std::string line;
  std::unordered_map<std::uint32_t, std::uint64_t> counts;
  while (!gen.done()) ++counts[gen.next(line).src_ip];
  EXPECT_LE(counts.size(), 1000u);
  std::uint64_t top = 0;
  for (auto [ip, c] : counts) top = std::max(top, c);
  EXPECT_NEAR(static_cast<double>(top) / 200000.0, 1.0 / h, 0.01);
}

TEST(FlowGen, UniformSourcesAreMostlyDistinct) {
  GenConfig cfg;
  cfg.n_flows = 50000;
  FlowGenerator gen(cfg);
  std::string line;
  std::unordered_map<std::uint32_t, int> seen;
  while (!gen.done()) ++seen[gen.next(line).src_ip];
  EXPECT_GT(seen.size(), 49900u);
}

TEST(FlowGen, InvalidConfigs) {
  auto bad = [](auto mutate) {
    GenConfig cfg;
    cfg.n_flows = 1;
    mutate(cfg);
    EXPECT_THROW(FlowGenerator{cfg}, ConfigError);
  };
  bad([](GenConfig& c) { c.pkts_per_flow = 0; });
  bad([](GenConfig& c) { c.pkts_per_flow = 2.5; });
  bad([](GenConfig& c) { c.pkts_per_flow = NAN; });
  bad([](GenConfig& c) { c.split = 1.5; });
  bad([](GenConfig& c) { c.split = -0.1; });
  bad([](GenConfig& c) {
    c.addr_model = GenConfig::AddrModel::zipf;
    c.zipf_exponent = 0;
  });
  bad([](GenConfig& c) {
    c.addr_model = GenConfig::AddrModel::zipf;
    c.zipf_population = 0;
  });
  GenConfig ok;
  ok.packet_model = GenConfig::PacketModel::geometric;
  ok.pkts_per_flow = 2.5;
  EXPECT_NO_THROW(ok.validate());
}

}  // namespace
}  // namespace flowmat
