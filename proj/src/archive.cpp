#include "flowmat/archive.hpp"

#include <cstdio>
#include <cstring>
#include <system_error>

#include "flowmat/error.hpp"
#include "flowmat/lz4_block.hpp"
#include "flowmat/tar.hpp"

namespace flowmat {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'T', 'M'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

template <class T>
T get_le(const std::uint8_t* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(T{p[i]} << (8 * i));
  return value;
}

template <class T>
std::vector<std::uint8_t> to_le_bytes(std::span<const T> values) {
  std::vector<std::uint8_t> raw;
  raw.reserve(values.size_bytes());
  for (T v : values) put_le(raw, v);
  return raw;
}

template <class T>
void put_section(std::vector<std::uint8_t>& out, std::span<const T> values) {
  if (values.empty()) {
    put_le<std::uint64_t>(out, 0);
    put_le<std::uint64_t>(out, 0);
    return;
  }
  const std::vector<std::uint8_t> raw = to_le_bytes(values);
  const std::vector<std::uint8_t> packed = lz4::compress(raw);
  put_le<std::uint64_t>(out, raw.size());
  put_le<std::uint64_t>(out, packed.size());
  out.insert(out.end(), packed.begin(), packed.end());
}

// Walks a blob with bounds checks; every failure names what was being read.
class BlobCursor {
 public:
  explicit BlobCursor(std::span<const std::uint8_t> blob) : blob_(blob) {}

  template <class T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v = get_le<T>(blob_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  template <class T>
  std::vector<T> section(const char* name, std::uint64_t count) {
    const std::uint64_t raw_len = read<std::uint64_t>(name);
    const std::uint64_t packed_len = read<std::uint64_t>(name);
    if (count > UINT64_MAX / sizeof(T) || raw_len != count * sizeof(T)) {
      throw IntegrityError(std::string("section ") + name + ": raw length " +
                           std::to_string(raw_len) + " does not match header count " +
                           std::to_string(count));
    }
    std::vector<T> values(count);
    if (raw_len == 0) {
      if (packed_len != 0) {
        throw IntegrityError(std::string("section ") + name + ": empty section has payload");
      }
      return values;
    }
    need(packed_len, name);
    std::vector<std::uint8_t> raw;
    try {
      raw = lz4::decompress(blob_.subspan(pos_, packed_len), raw_len);
    } catch (const IntegrityError& e) {
      throw IntegrityError(std::string("section ") + name + ": " + e.what());
    }
    pos_ += packed_len;
    for (std::size_t i = 0; i < count; ++i) values[i] = get_le<T>(raw.data() + i * sizeof(T));
    return values;
  }

  bool at_end() const noexcept { return pos_ == blob_.size(); }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (n > blob_.size() - pos_) {
      throw IntegrityError(std::string("blob truncated while reading ") + what);
    }
  }

  std::span<const std::uint8_t> blob_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_matrix(const HyperMatrix& m, const MatrixMeta& meta) {
  std::vector<std::uint8_t> out;
  out.reserve(kBlobHeaderBytes + 4 * 16 + m.storage_bytes() / 2);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kBlobVersion);
  put_le<std::uint64_t>(out, m.nrows());
  put_le<std::uint64_t>(out, m.ncols());
  put_le<std::uint64_t>(out, m.nvals());
  put_le<std::uint64_t>(out, m.nrows_present());
  put_le<std::uint64_t>(out, meta.seq);
  put_le<std::uint64_t>(out, meta.packet_total);
  put_le<std::uint64_t>(out, meta.created_unix_s);
  put_section(out, m.rows_present());
  // An empty matrix stores no row_ptr at all; the implied array is [0].
  put_section(out, m.nrows_present() == 0 ? std::span<const std::uint64_t>{} : m.row_ptr());
  put_section(out, m.col_ids());
  put_section(out, m.vals());
  return out;
}

std::pair<HyperMatrix, MatrixMeta> decode_matrix(std::span<const std::uint8_t> blob) {
  BlobCursor cur(blob);
  if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw IntegrityError("bad magic: not an HSTM blob");
  }
  cur.read<std::uint32_t>("magic");
  const auto version = cur.read<std::uint32_t>("version");
  if (version != kBlobVersion) {
    throw IntegrityError("unsupported blob version " + std::to_string(version));
  }
  const auto nrows = cur.read<std::uint64_t>("nrows");
  const auto ncols = cur.read<std::uint64_t>("ncols");
  if (nrows != HyperMatrix::kDimension || ncols != HyperMatrix::kDimension) {
    throw IntegrityError("dimensions must be 2^32 x 2^32");
  }
  const auto nvals = cur.read<std::uint64_t>("nvals");
  const auto nrows_present = cur.read<std::uint64_t>("nrows_present");
  MatrixMeta meta;
  meta.seq = cur.read<std::uint64_t>("seq");
  meta.packet_total = cur.read<std::uint64_t>("packet_total");
  meta.created_unix_s = cur.read<std::uint64_t>("created_unix_s");
  if (nrows_present > nvals) throw IntegrityError("header: nrows_present exceeds nvals");
  // Both counts bound the payload, so reject values no blob of this size could hold
  // before allocating anything.
  if (nvals > blob.size() * 255 || nrows_present > blob.size() * 255) {
    throw IntegrityError("header: counts implausible for blob size");
  }

  auto rows = cur.section<std::uint32_t>("rows_present", nrows_present);
  auto row_ptr = cur.section<std::uint64_t>("row_ptr", nrows_present == 0 ? 0 : nrows_present + 1);
  auto cols = cur.section<std::uint32_t>("col_ids", nvals);
  auto vals = cur.section<std::uint64_t>("vals", nvals);
  if (!cur.at_end()) throw IntegrityError("trailing bytes after vals section");
  if (nrows_present == 0) row_ptr = {0};

  try {
    return {HyperMatrix::from_arrays(std::move(rows), std::move(row_ptr), std::move(cols),
                                     std::move(vals)),
            meta};
  } catch (const IntegrityError& e) {
    throw IntegrityError(std::string("structure: ") + e.what());
  }
}

std::string member_name(std::uint64_t seq) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%020llu.grb", static_cast<unsigned long long>(seq));
  return buf;
}

std::string tar_name(const MatrixMeta& first) {
  return std::to_string(first.created_unix_s) + "_" + std::to_string(first.seq) + ".tar";
}

ArchiveWriter::ArchiveWriter(std::filesystem::path out_dir, std::size_t per_tar)
    : out_dir_(std::move(out_dir)), per_tar_(per_tar) {
  if (per_tar_ == 0) throw ConfigError("per-tar count must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec || !std::filesystem::is_directory(out_dir_)) {
    throw IoError("cannot create output directory " + out_dir_.string());
  }
}

ArchiveWriter::~ArchiveWriter() = default;

std::optional<std::filesystem::path> ArchiveWriter::append(std::span<const std::uint8_t> blob,
                                                           const MatrixMeta& meta) {
  if (last_seq_ && meta.seq <= *last_seq_) {
    throw IoError("archive entries must arrive in ascending seq order");
  }
  if (!current_) {
    current_path_ = out_dir_ / tar_name(meta);
    current_ = std::make_unique<tar::Writer>(current_path_.string() + ".part");
    members_ = 0;
  }
  current_->add(member_name(meta.seq), blob, meta.created_unix_s);
  last_seq_ = meta.seq;
  if (++members_ == per_tar_) return finalize();
  return std::nullopt;
}

std::optional<std::filesystem::path> ArchiveWriter::close() {
  if (!current_) return std::nullopt;
  return finalize();
}

std::filesystem::path ArchiveWriter::finalize() {
  current_->finish();
  current_.reset();
  std::error_code ec;
  std::filesystem::rename(current_path_.string() + ".part", current_path_, ec);
  if (ec) throw IoError("cannot finalize " + current_path_.string() + ": " + ec.message());
  finalized_.push_back(current_path_);
  return current_path_;
}

}  // namespace flowmat
