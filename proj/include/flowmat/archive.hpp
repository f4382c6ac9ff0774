#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowmat/hypermat.hpp"

namespace flowmat {

namespace tar {
class Writer;
}

struct MatrixMeta {
  std::uint64_t seq = 0;
  std::uint64_t packet_total = 0;
  std::uint64_t created_unix_s = 0;

  friend bool operator==(const MatrixMeta&, const MatrixMeta&) = default;
};

// Blob layout, all integers little-endian:
//
//   offset  size  field
//        0     4  magic "HSTM"
//        4     4  version (u32) = 1
//        8     8  nrows (u64) = 2^32
//       16     8  ncols (u64) = 2^32
//       24     8  nvals
//       32     8  nrows_present
//       40     8  seq
//       48     8  packet_total
//       56     8  created_unix_s
//       64        rows_present u32[], row_ptr u64[], col_ids u32[], vals u64[]
//
// Each section is raw_len_bytes (u64), compressed_len_bytes (u64), then an
// LZ4 block of compressed_len_bytes. An empty section has both lengths 0 and
// no payload.
inline constexpr std::uint32_t kBlobVersion = 1;
inline constexpr std::size_t kBlobHeaderBytes = 64;

std::vector<std::uint8_t> encode_matrix(const HyperMatrix& m, const MatrixMeta& meta);

/// Inverse of encode_matrix. Throws IntegrityError naming the header field
/// or section that failed (bad magic, version, dimensions, lengths,
/// decompression, non-canonical arrays, or trailing bytes).
std::pair<HyperMatrix, MatrixMeta> decode_matrix(std::span<const std::uint8_t> blob);

/// "<seq as 20 zero-padded digits>.grb"; sorts lexicographically by seq.
std::string member_name(std::uint64_t seq);

/// "<created_unix_s of first member>_<first seq>.tar"
std::string tar_name(const MatrixMeta& first);

/// Writes blobs into ustar archives of `per_tar` members each. The archive
/// in progress carries a ".part" suffix until it is finalized, so collectors
/// only ever see complete files.
class ArchiveWriter {
 public:
  static constexpr std::size_t kDefaultPerTar = 64;

  explicit ArchiveWriter(std::filesystem::path out_dir, std::size_t per_tar = kDefaultPerTar);
  ~ArchiveWriter();
  ArchiveWriter(const ArchiveWriter&) = delete;
  ArchiveWriter& operator=(const ArchiveWriter&) = delete;

  /// Seq must increase across calls. Returns the archive path once the
  /// member count reaches per_tar. I/O failures throw IoError.
  std::optional<std::filesystem::path> append(std::span<const std::uint8_t> blob,
                                              const MatrixMeta& meta);

  /// Finalizes a partly filled archive, if any.
  std::optional<std::filesystem::path> close();

  const std::vector<std::filesystem::path>& finalized() const noexcept { return finalized_; }

 private:
  std::filesystem::path finalize();

  std::filesystem::path out_dir_;
  std::size_t per_tar_;
  std::unique_ptr<tar::Writer> current_;
  std::filesystem::path current_path_;
  std::size_t members_ = 0;
  std::optional<std::uint64_t> last_seq_;
  std::vector<std::filesystem::path> finalized_;
};

}  // namespace flowmat
