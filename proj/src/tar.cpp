#include "flowmat/tar.hpp"

#include <algorithm>
#include <cstring>
#include <iterator>

#include "flowmat/error.hpp"

namespace flowmat::tar {

namespace {

// ustar header field offsets and widths.
constexpr std::size_t kName = 0, kNameLen = 100;
constexpr std::size_t kMode = 100;
constexpr std::size_t kUid = 108;
constexpr std::size_t kGid = 116;
constexpr std::size_t kSize = 124, kSizeLen = 12;
constexpr std::size_t kMtime = 136;
constexpr std::size_t kChksum = 148, kChksumLen = 8;
constexpr std::size_t kTypeflag = 156;
constexpr std::size_t kMagic = 257;
constexpr std::size_t kVersion = 263;
constexpr std::size_t kPrefix = 345, kPrefixLen = 155;

constexpr std::uint64_t kMaxOctal11 = 077777777777ull;

void put_octal(char* field, std::size_t width, std::uint64_t value) {
  // width - 1 digits followed by NUL.
  for (std::size_t i = width - 1; i-- > 0;) {
    field[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  field[width - 1] = '\0';
}

std::uint64_t header_checksum(const std::uint8_t* header) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < kBlockSize; ++i) {
    bool in_chksum = i >= kChksum && i < kChksum + kChksumLen;
    sum += in_chksum ? ' ' : header[i];
  }
  return sum;
}

std::uint64_t parse_octal(const std::uint8_t* field, std::size_t width, const char* what) {
  std::size_t i = 0;
  while (i < width && field[i] == ' ') ++i;
  std::uint64_t value = 0;
  bool any = false;
  for (; i < width && field[i] >= '0' && field[i] <= '7'; ++i) {
    value = value << 3 | static_cast<std::uint64_t>(field[i] - '0');
    any = true;
  }
  for (; i < width; ++i) {
    if (field[i] != ' ' && field[i] != '\0') {
      throw IntegrityError(std::string("tar: invalid octal in ") + what + " field");
    }
  }
  if (!any) throw IntegrityError(std::string("tar: empty ") + what + " field");
  return value;
}

std::string c_field(const std::uint8_t* field, std::size_t width) {
  const auto* end = std::find(field, field + width, std::uint8_t{0});
  return std::string(field, end);
}

}  // namespace

std::array<char, kBlockSize> make_header(const std::string& name, std::uint64_t size,
                                         std::uint64_t mtime) {
  if (name.empty() || name.size() > kNameLen) {
    throw IoError("tar member name must be 1..100 bytes: " + name);
  }
  if (size > kMaxOctal11) throw IoError("tar member too large: " + name);
  std::array<char, kBlockSize> h{};
  std::memcpy(h.data() + kName, name.data(), name.size());
  put_octal(h.data() + kMode, 8, 0644);
  put_octal(h.data() + kUid, 8, 0);
  put_octal(h.data() + kGid, 8, 0);
  put_octal(h.data() + kSize, kSizeLen, size);
  put_octal(h.data() + kMtime, 12, std::min(mtime, kMaxOctal11));
  h[kTypeflag] = '0';
  std::memcpy(h.data() + kMagic, "ustar", 6);
  std::memcpy(h.data() + kVersion, "00", 2);

  std::uint64_t sum = header_checksum(reinterpret_cast<const std::uint8_t*>(h.data()));
  // Six octal digits, NUL, space.
  put_octal(h.data() + kChksum, 7, sum);
  h[kChksum + 7] = ' ';
  return h;
}

Writer::Writer(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot create archive " + path);
}

Writer::~Writer() = default;

void Writer::write(const char* data, std::size_t n) {
  out_.write(data, static_cast<std::streamsize>(n));
  if (!out_) throw IoError("write failed on " + path_);
  offset_ += n;
}

void Writer::add(const std::string& name, std::span<const std::uint8_t> data, std::uint64_t mtime) {
  if (finished_) throw IoError("archive already finished: " + path_);
  auto header = make_header(name, data.size(), mtime);
  write(header.data(), header.size());
  write(reinterpret_cast<const char*>(data.data()), data.size());
  static const std::array<char, kBlockSize> zeros{};
  std::size_t tail = data.size() % kBlockSize;
  if (tail != 0) write(zeros.data(), kBlockSize - tail);
}

void Writer::finish() {
  if (finished_) return;
  static const std::array<char, kBlockSize> zeros{};
  write(zeros.data(), kBlockSize);
  write(zeros.data(), kBlockSize);
  while (offset_ % kRecordSize != 0) write(zeros.data(), kBlockSize);
  out_.flush();
  if (!out_) throw IoError("flush failed on " + path_);
  out_.close();
  if (out_.fail()) throw IoError("close failed on " + path_);
  finished_ = true;
}

Reader::Reader(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive " + path);
  bytes_.assign(std::istreambuf_iterator<char>(in), {});
  if (in.bad()) throw IoError("read failed on " + path);
}

bool Reader::next(Member& member) {
  for (;;) {
    if (bytes_.size() - offset_ < kBlockSize) return false;
    const std::uint8_t* h = bytes_.data() + offset_;
    if (std::all_of(h, h + kBlockSize, [](std::uint8_t b) { return b == 0; })) return false;

    const std::uint64_t stored = parse_octal(h + kChksum, kChksumLen, "checksum");
    if (stored != header_checksum(h)) {
      throw IntegrityError("tar: header checksum mismatch at offset " + std::to_string(offset_) +
                           " in " + path_);
    }
    if (std::memcmp(h + kMagic, "ustar", 5) != 0) {
      throw IntegrityError("tar: not a ustar header at offset " + std::to_string(offset_));
    }
    const std::uint64_t size = parse_octal(h + kSize, kSizeLen, "size");
    const std::uint64_t padded = (size + kBlockSize - 1) / kBlockSize * kBlockSize;
    const std::size_t data_at = offset_ + kBlockSize;
    if (size > bytes_.size() - data_at) {
      throw IntegrityError("tar: member data truncated at offset " + std::to_string(offset_));
    }
    const char type = static_cast<char>(h[kTypeflag]);
    std::string name = c_field(h + kName, kNameLen);
    std::string prefix = c_field(h + kPrefix, kPrefixLen);
    std::uint64_t mtime = parse_octal(h + kMtime, 12, "mtime");
    offset_ = data_at + static_cast<std::size_t>(std::min<std::uint64_t>(padded, bytes_.size() - data_at));
    if (type != '0' && type != '\0') continue;

    member.name = prefix.empty() ? name : prefix + "/" + name;
    member.mtime = mtime;
    member.data.assign(bytes_.begin() + static_cast<std::ptrdiff_t>(data_at),
                       bytes_.begin() + static_cast<std::ptrdiff_t>(data_at + size));
    return true;
  }
}

std::vector<Member> read_all(const std::string& path) {
  Reader reader(path);
  std::vector<Member> members;
  Member m;
  while (reader.next(m)) members.push_back(std::move(m));
  return members;
}

}  // namespace flowmat::tar
