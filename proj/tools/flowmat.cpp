// flowmat: Suricata EVE flow records -> anonymized hypersparse traffic
// matrices in rotating TAR archives.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowmat/bench.hpp"
#include "flowmat/cryptopan.hpp"
#include "flowmat/error.hpp"
#include "flowmat/flowgen.hpp"
#include "flowmat/line_source.hpp"
#include "flowmat/pipeline.hpp"
#include "flowmat/stats.hpp"
#include "flowmat/verify.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

void emit(const nlohmann::json& j, bool pretty) {
  std::cout << (pretty ? j.dump(2) : j.dump()) << '\n';
}

struct GenArgs {
  std::uint64_t flows = 0;
  double pkts_per_flow = 100.0;
  std::string pkts_model = "constant";
  std::string addr_model = "uniform";
  double zipf_exponent = 1.2;
  std::uint32_t zipf_population = 1u << 16;
  std::uint64_t seed = 1;
  double split = 1.0;
  std::string output = "-";

  flowmat::GenConfig config() const {
    flowmat::GenConfig cfg;
    cfg.n_flows = flows;
    cfg.pkts_per_flow = pkts_per_flow;
    cfg.packet_model = pkts_model == "geometric" ? flowmat::GenConfig::PacketModel::geometric
                                                 : flowmat::GenConfig::PacketModel::constant;
    cfg.addr_model = addr_model == "zipf" ? flowmat::GenConfig::AddrModel::zipf
                                          : flowmat::GenConfig::AddrModel::uniform;
    cfg.zipf_exponent = zipf_exponent;
    cfg.zipf_population = zipf_population;
    cfg.seed = seed;
    cfg.split = split;
    return cfg;
  }
};

void add_gen_options(CLI::App* cmd, GenArgs& g) {
  cmd->add_option("--pkts-per-flow", g.pkts_per_flow, "Packets per flow (mean if geometric)");
  cmd->add_option("--pkts-model", g.pkts_model, "constant | geometric")
      ->check(CLI::IsMember({"constant", "geometric"}));
  cmd->add_option("--addr-model", g.addr_model, "uniform | zipf")
      ->check(CLI::IsMember({"uniform", "zipf"}));
  cmd->add_option("--zipf-exponent", g.zipf_exponent, "Source popularity exponent");
  cmd->add_option("--zipf-population", g.zipf_population, "Number of distinct zipf sources");
  cmd->add_option("--seed", g.seed, "Generator seed");
  cmd->add_option("--split", g.split, "Fraction of packets sent to the server");
}

struct KeyArgs {
  std::string key_file;
  bool no_anon = false;
};

// --no-anon wins; then --key, then the environment. No key at all is an
// error so real addresses are never archived by accident.
std::optional<flowmat::AnonState> resolve_key(const KeyArgs& k, bool required) {
  if (k.no_anon) return std::nullopt;
  if (!k.key_file.empty()) return flowmat::AnonState::derive(flowmat::AnonKey::from_file(k.key_file));
  if (auto key = flowmat::AnonKey::from_env()) return flowmat::AnonState::derive(*key);
  if (required) {
    throw flowmat::ConfigError(std::string("no anonymization key: pass --key <file>, set ") +
                               flowmat::kAnonKeyEnvVar + ", or disable with --no-anon");
  }
  return std::nullopt;
}

int run_gen(const GenArgs& g) {
  flowmat::GenConfig cfg = g.config();
  cfg.validate();
  if (g.output == "-") {
    std::ios::sync_with_stdio(false);
    flowmat::generate(cfg, std::cout);
    std::cout.flush();
    if (!std::cout) throw flowmat::IoError("write to standard output failed");
  } else {
    std::ofstream out(g.output, std::ios::binary | std::ios::trunc);
    if (!out) throw flowmat::IoError("cannot create " + g.output);
    flowmat::generate(cfg, out);
    out.flush();
    if (!out) throw flowmat::IoError("write failed on " + g.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Suricata EVE flow records to anonymized hypersparse traffic matrices"};
  app.require_subcommand(1);

  bool pretty = false;

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write synthetic EVE flow records");
  gen_cmd->add_option("--flows", gen.flows, "Number of flow records")->required();
  add_gen_options(gen_cmd, gen);
  gen_cmd->add_option("--output,-o", gen.output, "Output file, - for standard output");

  std::string input;
  std::string socket_path;
  std::size_t socket_connections = 0;
  KeyArgs keys;
  std::string out_dir;
  unsigned window_bits = flowmat::WindowConfig::kDefaultBits;
  std::size_t per_tar = flowmat::ArchiveWriter::kDefaultPerTar;
  std::size_t queue_depth = 1024;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert EVE flow records into matrix archives");
  auto* input_opt = ingest_cmd->add_option("--input", input, "EVE file, - for standard input");
  auto* socket_opt =
      ingest_cmd->add_option("--socket", socket_path, "Listen on a local stream socket for EVE output");
  input_opt->excludes(socket_opt);
  ingest_cmd->add_option("--socket-connections", socket_connections,
                         "Exit after this many socket writers disconnect (0 = run until signalled)");
  auto* key_opt = ingest_cmd->add_option("--key", keys.key_file, "File holding 32 raw key bytes");
  ingest_cmd->add_flag("--no-anon", keys.no_anon, "Store real addresses")->excludes(key_opt);
  ingest_cmd->add_option("--out", out_dir, "Output directory")->required();
  ingest_cmd->add_option("--window-bits", window_bits, "Packets per matrix = 2^N")
      ->check(CLI::Range(0u, 63u));
  ingest_cmd->add_option("--per-tar", per_tar, "Matrices per TAR file")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--queue-depth", queue_depth, "Records buffered between stages");
  ingest_cmd->add_flag("--pretty", pretty, "Indented output");

  std::vector<std::string> stats_paths;
  auto* stats_cmd = app.add_subcommand("stats", "Per-matrix statistics for archives, as JSON lines");
  stats_cmd->add_option("archives", stats_paths, "TAR files")->required()->check(CLI::ExistingFile);
  stats_cmd->add_flag("--pretty", pretty, "Indented output");

  std::vector<std::string> verify_paths;
  auto* verify_cmd = app.add_subcommand("verify", "Decode, re-encode, and cross-check archives");
  verify_cmd->add_option("archives", verify_paths, "TAR files")->required()->check(CLI::ExistingFile);
  verify_cmd->add_flag("--pretty", pretty, "Indented output");

  GenArgs bench_gen;
  bench_gen.flows = 1'000'000;
  std::string bench_input;
  KeyArgs bench_keys;
  std::string scratch;
  auto* bench_cmd = app.add_subcommand("bench", "Per-stage and end-to-end throughput");
  auto* bench_input_opt =
      bench_cmd->add_option("--input", bench_input, "EVE file (default: generate --flows records)");
  bench_cmd->add_option("--flows", bench_gen.flows, "Records to generate when no input is given")
      ->excludes(bench_input_opt);
  add_gen_options(bench_cmd, bench_gen);
  bench_cmd->add_option("--key", bench_keys.key_file, "Key file for the anonymize stage");
  bench_cmd->add_option("--window-bits", window_bits, "Packets per matrix = 2^N")
      ->check(CLI::Range(0u, 63u));
  bench_cmd->add_option("--per-tar", per_tar, "Matrices per TAR file")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--scratch", scratch, "Directory for temporary archives");
  bench_cmd->add_flag("--pretty", pretty, "Indented output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) return run_gen(gen);

    if (ingest_cmd->parsed()) {
      if (input.empty() && socket_path.empty()) {
        throw flowmat::ConfigError("ingest needs --input <path|-> or --socket <path>");
      }
      flowmat::IngestOptions options;
      options.anon = resolve_key(keys, true);
      options.out_dir = out_dir;
      options.window = flowmat::WindowConfig::from_bits(window_bits);
      options.per_tar = per_tar;
      options.queue_depth = queue_depth;

      flowmat::InputSpec spec = socket_path.empty() ? flowmat::InputSpec::from_input_arg(input)
                                                    : flowmat::InputSpec::from_socket_path(socket_path);
      spec.max_connections = socket_connections;
      if (spec.kind != flowmat::InputSpec::Kind::file) {
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        spec.stop = &g_stop;
      }
      std::signal(SIGPIPE, SIG_IGN);
      auto source = flowmat::open_source(spec);
      flowmat::IngestSummary summary = flowmat::run_ingest(*source, options);
      emit(flowmat::to_json(summary), pretty);
      return 0;
    }

    if (stats_cmd->parsed()) {
      int status = 0;
      for (const auto& path : stats_paths) {
        flowmat::ArchiveStats stats = flowmat::archive_stats(path);
        for (const auto& m : stats.members) {
          nlohmann::json j = flowmat::to_json(m);
          j["archive"] = path;
          emit(j, pretty);
        }
        nlohmann::json agg = flowmat::to_json(stats.aggregate);
        agg["archive"] = path;
        emit(agg, pretty);
        if (stats.aggregate.errors != 0) status = 1;
      }
      return status;
    }

    if (verify_cmd->parsed()) {
      int status = 0;
      for (const auto& path : verify_paths) {
        flowmat::VerifyReport report = flowmat::verify_archive(path);
        for (const auto& m : report.members) {
          nlohmann::json j = flowmat::to_json(m);
          j["archive"] = path;
          emit(j, pretty);
        }
        emit(flowmat::to_json(report), pretty);
        if (!report.ok()) status = 1;
      }
      return status;
    }

    if (bench_cmd->parsed()) {
      std::string text;
      if (!bench_input.empty()) {
        std::ifstream in(bench_input, std::ios::binary);
        if (!in) throw flowmat::IoError("cannot open input " + bench_input);
        text.assign(std::istreambuf_iterator<char>(in), {});
      } else {
        text = flowmat::generate_text(bench_gen.config());
      }
      flowmat::BenchOptions options;
      options.anon = resolve_key(bench_keys, false);
      options.window = flowmat::WindowConfig::from_bits(window_bits);
      options.per_tar = per_tar;
      options.scratch_dir = scratch;
      flowmat::BenchReport report = flowmat::run_bench(text, options);
      if (!report.reliable) {
        std::cerr << "warning: fewer than " << flowmat::kBenchMinRecords
                  << " records; rates are unreliable\n";
      }
      emit(flowmat::to_json(report), pretty);
      return 0;
    }
  } catch (const flowmat::ConfigError& e) {
    std::cerr << "flowmat: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "flowmat: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
