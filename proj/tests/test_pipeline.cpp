#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "flowmat/archive.hpp"
#include "flowmat/cryptopan.hpp"
#include "flowmat/error.hpp"
#include "flowmat/flowgen.hpp"
#include "flowmat/pipeline.hpp"
#include "flowmat/stats.hpp"
#include "flowmat/tar.hpp"
#include "flowmat/verify.hpp"
#include "test_util.hpp"

namespace flowmat {
namespace {

using testing::TempDir;

AnonState test_state() { return AnonState::derive(AnonKey::from_hex(std::string(64, '7'))); }

IngestSummary ingest_text(const std::string& text, const std::filesystem::path& out, bool threaded,
                          std::optional<AnonState> anon = std::nullopt, WindowConfig window = {}) {
  MemoryLineSource source(text);
  IngestOptions opts;
  opts.out_dir = out;
  opts.threaded = threaded;
  opts.anon = std::move(anon);
  opts.window = window;
  opts.clock = [] { return std::uint64_t{1700000000}; };
  return run_ingest(source, opts);
}

std::vector<std::pair<HyperMatrix, MatrixMeta>> decode_all(const std::vector<std::filesystem::path>& tars) {
  std::vector<std::pair<HyperMatrix, MatrixMeta>> out;
  for (const auto& t : tars) {
    for (const auto& m : tar::read_all(t.string())) out.push_back(decode_matrix(m.data));
  }
  return out;
}

std::string example_stream(std::uint64_t* total) {
  GenConfig cfg;
  cfg.n_flows = 13108;
  return generate_text(cfg, total);
}

TEST(Ingest, WindowsAreExact) {
  std::uint64_t oracle = 0;
  const std::string text = example_stream(&oracle);
  ASSERT_EQ(oracle, 1310800u);
  for (bool threaded : {false, true}) {
    TempDir dir;
    IngestSummary s = ingest_text(text, dir.path(), threaded);
    EXPECT_EQ(s.counters.records_ok, 13108u);
    EXPECT_EQ(s.full_windows, 10u);
    EXPECT_EQ(s.partial_windows, 1u);
    EXPECT_EQ(s.partial_window_packets, 80u);
    EXPECT_EQ(s.packets_in, oracle);
    EXPECT_EQ(s.packets_archived, oracle);
    ASSERT_EQ(s.tars.size(), 1u);
    auto matrices = decode_all(s.tars);
    ASSERT_EQ(matrices.size(), 11u);
    for (std::size_t i = 0; i < 11; ++i) {
      const std::uint64_t expected = i < 10 ? 131072 : 80;
      EXPECT_EQ(total_sum(matrices[i].first), expected);
      EXPECT_EQ(matrices[i].second.packet_total, expected);
      EXPECT_EQ(matrices[i].second.seq, i);
    }
  }
}

TEST(Ingest, EmptyInput) {
  TempDir dir;
  IngestSummary s = ingest_text("", dir.path(), true);
  EXPECT_EQ(s.counters.lines(), 0u);
  EXPECT_EQ(s.windows_written, 0u);
  EXPECT_TRUE(s.tars.empty());
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}

TEST(Ingest, SerialAndThreadedWriteIdenticalArchives) {
  GenConfig cfg;
  cfg.n_flows = 20000;
  cfg.packet_model = GenConfig::PacketModel::geometric;
  cfg.pkts_per_flow = 20;
  cfg.split = 0.5;
  const std::string text = generate_text(cfg);
  TempDir a, b;
  auto sa = ingest_text(text, a.path(), false, test_state(), WindowConfig::from_bits(12));
  auto sb = ingest_text(text, b.path(), true, test_state(), WindowConfig::from_bits(12));
  ASSERT_EQ(sa.tars.size(), sb.tars.size());
  ASSERT_GT(sa.tars.size(), 1u);
  for (std::size_t i = 0; i < sa.tars.size(); ++i) {
    EXPECT_EQ(sa.tars[i].filename(), sb.tars[i].filename());
    EXPECT_EQ(testing::read_bytes(sa.tars[i]), testing::read_bytes(sb.tars[i]));
  }
}

TEST(Ingest, AnonymizationPreservesStatistics) {
  GenConfig cfg;
  cfg.n_flows = 30000;
  cfg.addr_model = GenConfig::AddrModel::zipf;
  cfg.zipf_population = 2000;
  cfg.split = 0.8;
  const std::string text = generate_text(cfg);
  TempDir plain, anon;
  auto sp = ingest_text(text, plain.path(), true);
  auto sa = ingest_text(text, anon.path(), true, test_state());
  auto mp = decode_all(sp.tars);
  auto ma = decode_all(sa.tars);
  ASSERT_EQ(mp.size(), ma.size());
  for (std::size_t i = 0; i < mp.size(); ++i) {
    EXPECT_EQ(matrix_stats(mp[i].first), matrix_stats(ma[i].first));
    EXPECT_NE(mp[i].first, ma[i].first);
  }
}

TEST(Ingest, CountsMixedInput) {
  std::string text =
      R"({"event_type":"flow","src_ip":"10.0.0.1","dest_ip":"10.0.0.2","flow":{"pkts_toserver":3,"pkts_toclient":2}})"
      "\n"
      R"({"event_type":"alert","src_ip":"10.0.0.1","dest_ip":"10.0.0.2"})"
      "\n"
      R"({"event_type":"flow","src_ip":"::1","dest_ip":"::2","flow":{"pkts_toserver":3,"pkts_toclient":2}})"
      "\n"
      "not json\n"
      "\n";
  TempDir dir;
  IngestSummary s = ingest_text(text, dir.path(), true);
  EXPECT_EQ(s.counters.records_ok, 1u);
  EXPECT_EQ(s.counters.records_skipped_non_flow, 1u);
  EXPECT_EQ(s.counters.records_skipped_ipv6, 1u);
  EXPECT_EQ(s.counters.records_skipped_malformed, 2u);
  EXPECT_EQ(s.packets_archived, 5u);
  auto matrices = decode_all(s.tars);
  ASSERT_EQ(matrices.size(), 1u);
  EXPECT_EQ(to_triples(matrices[0].first),
            (std::vector<Triple>{{0x0A000001, 0x0A000002, 3}, {0x0A000002, 0x0A000001, 2}}));
  auto j = to_json(s);
  EXPECT_EQ(j["lines"], 5);
  EXPECT_EQ(j["tars_written"], 1);
}

TEST(Ingest, UnwritableOutputFailsCleanly) {
  TempDir dir;
  testing::write_text(dir / "f", "x");
  EXPECT_THROW(ingest_text("{}\n", dir / "f" / "out", true), IoError);
  EXPECT_THROW(ingest_text("{}\n", dir / "f" / "out", false), IoError);
}

TEST(Verify, FreshArchivePasses) {
  std::uint64_t oracle = 0;
  TempDir dir;
  auto s = ingest_text(example_stream(&oracle), dir.path(), true);
  VerifyReport r = verify_archive(s.tars.at(0).string());
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.members.size(), 11u);
  std::uint64_t total = 0;
  for (const auto& m : r.members) total += m.packet_total;
  EXPECT_EQ(total, oracle);
  EXPECT_EQ(archive_stats(s.tars[0].string()).aggregate.packet_total, total);
}

TEST(Verify, FlippedByteNamesTheMember) {
  std::uint64_t oracle = 0;
  TempDir dir;
  auto s = ingest_text(example_stream(&oracle), dir.path(), true);
  const auto path = s.tars.at(0);
  auto members = tar::read_all(path.string());
  // Locate member 3's data: each member is a header block plus padded payload.
  std::size_t off = 0;
  for (std::size_t i = 0; i < 3; ++i) off += 512 + (members[i].data.size() + 511) / 512 * 512;
  const std::size_t data = off + 512;
  for (std::size_t field : {std::size_t{0}, std::size_t{44}, std::size_t{50}, members[3].data.size() - 1}) {
    auto bytes = testing::read_bytes(path);
    bytes[data + field] ^= 0x01;
    testing::write_bytes(dir / "bad.tar", bytes);
    VerifyReport r = verify_archive((dir / "bad.tar").string());
    EXPECT_FALSE(r.ok()) << field;
    ASSERT_EQ(r.failures(), 1u) << field;
    for (const auto& m : r.members) EXPECT_EQ(m.ok, m.member != member_name(3)) << m.member;
  }
}

TEST(Verify, EmptyOrMissingArchiveFails) {
  TempDir dir;
  tar::Writer w((dir / "empty.tar").string());
  w.finish();
  EXPECT_FALSE(verify_archive((dir / "empty.tar").string()).ok());
  EXPECT_FALSE(verify_archive((dir / "missing.tar").string()).ok());
}

// The CLI binary, driven through a shell.
std::string cli() { return std::string("'") + FLOWMAT_CLI + "'"; }

TEST(Cli, GenPipedIntoIngest) {
  TempDir dir;
  int status = -1;
  std::string out = testing::run_capture(cli() + " gen --flows 13108 | " + cli() + " ingest --input - --no-anon --out '" +
                                             dir.path().string() + "'",
                                         &status);
  ASSERT_EQ(status, 0) << out;
  auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j["full_windows"], 10);
  EXPECT_EQ(j["partial_window_packets"], 80);
  EXPECT_EQ(j["packets_archived"], 1310800);
  auto tars = testing::files_with_extension(dir.path(), ".tar");
  ASSERT_EQ(tars.size(), 1u);

  std::string verify = testing::run_capture(cli() + " verify '" + tars[0].string() + "'", &status);
  EXPECT_EQ(status, 0) << verify;
  std::string stats = testing::run_capture(cli() + " stats '" + tars[0].string() + "'", &status);
  EXPECT_EQ(status, 0);
  std::istringstream lines(stats);
  std::size_t n = 0;
  nlohmann::json last;
  for (std::string l; std::getline(lines, l); ++n) last = nlohmann::json::parse(l);
  EXPECT_EQ(n, 12u);
  EXPECT_EQ(last["aggregate"], true);
  EXPECT_EQ(last["packet_total"], 1310800);
}

TEST(Cli, MissingKeyIsRefused) {
  TempDir dir;
  int status = -1;
  testing::run_capture("env -u FLOWMAT_ANON_KEY " + cli() + " ingest --input /dev/null --out '" +
                           dir.path().string() + "' 2>/dev/null",
                       &status);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_TRUE(testing::files_with_extension(dir.path(), ".tar").empty());
}

TEST(Cli, KeyFromEnvironmentAndFile) {
  TempDir dir;
  const std::string line =
      R"({"event_type":"flow","src_ip":"10.1.2.3","dest_ip":"10.1.2.4","flow":{"pkts_toserver":1,"pkts_toclient":0}})";
  testing::write_text(dir / "in.json", line + "\n");
  std::vector<std::uint8_t> raw(32, 0x77);
  testing::write_bytes(dir / "key", raw);
  int status = -1;
  testing::run_capture("FLOWMAT_ANON_KEY=" + std::string(64, '7') + " " + cli() + " ingest --input '" +
                           (dir / "in.json").string() + "' --out '" + (dir / "env").string() + "'",
                       &status);
  ASSERT_EQ(status, 0);
  testing::run_capture("env -u FLOWMAT_ANON_KEY " + cli() + " ingest --key '" + (dir / "key").string() +
                           "' --input '" + (dir / "in.json").string() + "' --out '" + (dir / "file").string() + "'",
                       &status);
  ASSERT_EQ(status, 0);
  auto a = decode_all(testing::files_with_extension(dir / "env", ".tar"));
  auto b = decode_all(testing::files_with_extension(dir / "file", ".tar"));
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(a[0].first, b[0].first);
  const AnonState st = test_state();
  EXPECT_EQ(to_triples(a[0].first),
            (std::vector<Triple>{{anonymize_ip(st, 0x0A010203), anonymize_ip(st, 0x0A010204), 1}}));
}

TEST(Cli, VerifyFailsOnCorruption) {
  TempDir dir;
  int status = -1;
  testing::run_capture(cli() + " gen --flows 2000 | " + cli() + " ingest --input - --no-anon --window-bits 14 --out '" +
                           dir.path().string() + "'",
                       &status);
  ASSERT_EQ(status, 0);
  auto tar_path = testing::files_with_extension(dir.path(), ".tar").at(0);
  auto bytes = testing::read_bytes(tar_path);
  bytes[512] = 'X';  // first member's magic
  testing::write_bytes(tar_path, bytes);
  std::string out = testing::run_capture(cli() + " verify '" + tar_path.string() + "'", &status);
  EXPECT_NE(status, 0);
  EXPECT_NE(out.find(member_name(0)), std::string::npos);
  testing::run_capture(cli() + " stats '" + tar_path.string() + "'", &status);
  EXPECT_NE(status, 0);
}

}  // namespace
}  // namespace flowmat
