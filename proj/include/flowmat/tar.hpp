#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace flowmat::tar {

inline constexpr std::size_t kBlockSize = 512;
/// Archives are padded to whole records of 20 blocks, like GNU and BSD tar.
inline constexpr std::size_t kRecordSize = 20 * kBlockSize;

/// Builds a POSIX ustar header for a regular file (mode 0644, uid/gid 0).
/// `name` must fit the 100-byte name field; `size` must fit 11 octal digits.
std::array<char, kBlockSize> make_header(const std::string& name, std::uint64_t size,
                                         std::uint64_t mtime);

/// Appends regular-file members to a stream and writes the end-of-archive
/// marker on finish(). Every write is checked; failures throw IoError.
class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void add(const std::string& name, std::span<const std::uint8_t> data, std::uint64_t mtime);
  void finish();

  std::uint64_t bytes_written() const noexcept { return offset_; }

 private:
  void write(const char* data, std::size_t n);

  std::string path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
  bool finished_ = false;
};

struct Member {
  std::string name;
  std::uint64_t mtime = 0;
  std::vector<std::uint8_t> data;
};

/// Sequential reader over a ustar archive held in memory. Non-regular
/// members (directories, links, pax headers) are skipped.
class Reader {
 public:
  /// Throws IoError if the file cannot be read.
  explicit Reader(const std::string& path);

  /// Returns false at the end-of-archive marker or end of file. Throws
  /// IntegrityError on a bad header checksum, a non-ustar header, or a
  /// member whose data runs past the end of the file.
  bool next(Member& member);

 private:
  std::string path_;
  std::vector<std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

/// Every regular-file member, in archive order.
std::vector<Member> read_all(const std::string& path);

}  // namespace flowmat::tar
