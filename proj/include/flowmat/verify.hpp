#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowmat {

struct MemberCheck {
  std::string member;
  std::uint64_t seq = 0;
  std::uint64_t packet_total = 0;
  bool ok = false;
  std::string error;
};

struct VerifyReport {
  std::string archive;
  std::vector<MemberCheck> members;
  /// Set when the archive itself could not be walked.
  std::string archive_error;

  bool ok() const noexcept;
  std::size_t failures() const noexcept;
};

/// Decodes each member, re-encodes it, and requires the bytes to match. Also
/// checks that the recorded packet_total equals the matrix sum, that the
/// member name matches its seq, and that seqs ascend through the archive.
///
/// The blob format has no checksum, so corruption that still decodes to a
/// canonical matrix with consistent metadata (for instance inside
/// created_unix_s) cannot be detected here.
VerifyReport verify_archive(const std::string& path);

nlohmann::json to_json(const MemberCheck& c);
nlohmann::json to_json(const VerifyReport& r);

}  // namespace flowmat
