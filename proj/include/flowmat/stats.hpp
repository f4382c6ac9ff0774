#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowmat/archive.hpp"
#include "flowmat/hypermat.hpp"

namespace flowmat {

/// Summary statistics that depend only on matrix structure and counts, never
/// on address values, so a bijective relabeling of addresses (such as
/// prefix-preserving anonymization) leaves every field unchanged.
struct MatrixStats {
  std::uint64_t packet_total = 0;
  std::uint64_t nvals = 0;
  std::uint64_t unique_sources = 0;
  std::uint64_t unique_destinations = 0;
  std::uint64_t max_fanout = 0;
  std::uint64_t max_fanin = 0;
  /// out-degree -> number of sources with that degree
  std::map<std::uint64_t, std::uint64_t> degree_histogram;
  /// in-degree -> number of destinations with that degree
  std::map<std::uint64_t, std::uint64_t> in_degree_histogram;

  friend bool operator==(const MatrixStats&, const MatrixStats&) = default;
};

MatrixStats matrix_stats(const HyperMatrix& m);

struct MemberStats {
  std::string member;
  std::optional<MatrixMeta> meta;
  std::optional<MatrixStats> stats;
  std::string error;  // empty on success
};

struct AggregateStats {
  std::uint64_t members = 0;
  std::uint64_t errors = 0;
  std::uint64_t packet_total = 0;
  std::uint64_t nvals = 0;
  std::uint64_t max_fanout = 0;
  std::uint64_t max_fanin = 0;
};

struct ArchiveStats {
  std::vector<MemberStats> members;
  AggregateStats aggregate;
};

/// Decodes every member of an archive. A member that fails to decode gets an
/// error entry and the rest are still processed; a damaged tar header ends
/// the walk with one error entry naming the archive.
ArchiveStats archive_stats(const std::string& path);

nlohmann::json to_json(const MatrixStats& s);
nlohmann::json to_json(const MemberStats& s);
nlohmann::json to_json(const AggregateStats& s);

}  // namespace flowmat
