#include "flowmat/stats.hpp"

#include <algorithm>

#include "flowmat/error.hpp"
#include "flowmat/tar.hpp"

namespace flowmat {

MatrixStats matrix_stats(const HyperMatrix& m) {
  MatrixStats s;
  s.packet_total = total_sum(m);
  s.nvals = m.nvals();
  for (const Degree& d : row_degrees(m)) {
    ++s.unique_sources;
    s.max_fanout = std::max(s.max_fanout, d.degree);
    ++s.degree_histogram[d.degree];
  }
  for (const Degree& d : col_degrees(m)) {
    ++s.unique_destinations;
    s.max_fanin = std::max(s.max_fanin, d.degree);
    ++s.in_degree_histogram[d.degree];
  }
  return s;
}

ArchiveStats archive_stats(const std::string& path) {
  ArchiveStats result;
  auto add_error = [&](std::string member, std::string error) {
    result.members.push_back({std::move(member), std::nullopt, std::nullopt, std::move(error)});
    ++result.aggregate.errors;
  };

  std::optional<tar::Reader> reader;
  try {
    reader.emplace(path);
  } catch (const Error& e) {
    add_error(path, e.what());
    return result;
  }

  tar::Member member;
  for (;;) {
    try {
      if (!reader->next(member)) break;
    } catch (const Error& e) {
      add_error(path, e.what());
      break;
    }
    ++result.aggregate.members;
    try {
      auto [matrix, meta] = decode_matrix(member.data);
      MatrixStats s = matrix_stats(matrix);
      result.aggregate.packet_total += s.packet_total;
      result.aggregate.nvals += s.nvals;
      result.aggregate.max_fanout = std::max(result.aggregate.max_fanout, s.max_fanout);
      result.aggregate.max_fanin = std::max(result.aggregate.max_fanin, s.max_fanin);
      result.members.push_back({member.name, meta, std::move(s), {}});
    } catch (const Error& e) {
      add_error(member.name, e.what());
    }
  }
  return result;
}

namespace {

nlohmann::json histogram_json(const std::map<std::uint64_t, std::uint64_t>& h) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [degree, count] : h) out[std::to_string(degree)] = count;
  return out;
}

}  // namespace

nlohmann::json to_json(const MatrixStats& s) {
  return {
      {"packet_total", s.packet_total},
      {"nvals", s.nvals},
      {"unique_sources", s.unique_sources},
      {"unique_destinations", s.unique_destinations},
      {"max_fanout", s.max_fanout},
      {"max_fanin", s.max_fanin},
      {"degree_histogram", histogram_json(s.degree_histogram)},
      {"in_degree_histogram", histogram_json(s.in_degree_histogram)},
  };
}

nlohmann::json to_json(const MemberStats& s) {
  nlohmann::json out = {{"member", s.member}};
  if (!s.error.empty()) {
    out["error"] = s.error;
    return out;
  }
  if (s.meta) {
    out["seq"] = s.meta->seq;
    out["created_unix_s"] = s.meta->created_unix_s;
    out["meta_packet_total"] = s.meta->packet_total;
  }
  if (s.stats) out.update(to_json(*s.stats));
  return out;
}

nlohmann::json to_json(const AggregateStats& s) {
  return {
      {"aggregate", true},
      {"members", s.members},
      {"errors", s.errors},
      {"packet_total", s.packet_total},
      {"nvals", s.nvals},
      {"max_fanout", s.max_fanout},
      {"max_fanin", s.max_fanin},
  };
}

}  // namespace flowmat
