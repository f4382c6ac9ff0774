#include "flowmat/verify.hpp"

#include <optional>

#include "flowmat/archive.hpp"
#include "flowmat/error.hpp"
#include "flowmat/stats.hpp"
#include "flowmat/tar.hpp"

namespace flowmat {

bool VerifyReport::ok() const noexcept { return archive_error.empty() && failures() == 0; }

std::size_t VerifyReport::failures() const noexcept {
  std::size_t n = 0;
  for (const auto& m : members) n += m.ok ? 0 : 1;
  return n;
}

namespace {

std::string check_member(const tar::Member& member, std::optional<std::uint64_t>& last_seq,
                         MemberCheck& check) {
  auto [matrix, meta] = decode_matrix(member.data);
  check.seq = meta.seq;
  check.packet_total = meta.packet_total;
  if (encode_matrix(matrix, meta) != member.data) return "re-encoded blob differs from stored bytes";
  if (matrix_stats(matrix).packet_total != meta.packet_total) {
    return "meta packet_total does not match matrix sum";
  }
  if (member.name != member_name(meta.seq)) return "member name does not match seq " + std::to_string(meta.seq);
  if (member.mtime != meta.created_unix_s) return "tar mtime differs from created_unix_s";
  if (last_seq && meta.seq <= *last_seq) return "seq out of order";
  last_seq = meta.seq;
  return {};
}

}  // namespace

VerifyReport verify_archive(const std::string& path) {
  VerifyReport report;
  report.archive = path;
  std::optional<tar::Reader> reader;
  try {
    reader.emplace(path);
  } catch (const Error& e) {
    report.archive_error = e.what();
    return report;
  }

  std::optional<std::uint64_t> last_seq;
  tar::Member member;
  for (;;) {
    try {
      if (!reader->next(member)) break;
    } catch (const Error& e) {
      report.archive_error = e.what();
      break;
    }
    MemberCheck check;
    check.member = member.name;
    try {
      check.error = check_member(member, last_seq, check);
    } catch (const Error& e) {
      check.error = e.what();
    }
    check.ok = check.error.empty();
    report.members.push_back(std::move(check));
  }
  if (report.members.empty() && report.archive_error.empty()) {
    report.archive_error = "archive holds no members";
  }
  return report;
}

nlohmann::json to_json(const MemberCheck& c) {
  nlohmann::json out = {{"member", c.member}, {"ok", c.ok}};
  if (c.ok) {
    out["seq"] = c.seq;
    out["packet_total"] = c.packet_total;
  } else {
    out["error"] = c.error;
  }
  return out;
}

nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json out = {{"archive", r.archive},
                        {"members", r.members.size()},
                        {"failures", r.failures()},
                        {"ok", r.ok()}};
  if (!r.archive_error.empty()) out["archive_error"] = r.archive_error;
  return out;
}

}  // namespace flowmat
