#include "flowmat/line_source.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>

#include "flowmat/error.hpp"
#include "flowmat/eve_ingest.hpp"

namespace flowmat {

namespace {

constexpr std::size_t kReadChunk = std::size_t{64} << 10;
constexpr int kPollMillis = 200;

std::string errno_text() { return std::strerror(errno); }

// Owns a file descriptor; -1 means empty.
class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  ~UniqueFd() { reset(); }
  UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

class FdSource final : public LineSource {
 public:
  FdSource(UniqueFd owned, int fd, const std::atomic<bool>* stop)
      : owned_(std::move(owned)), reader_(fd, stop) {}
  bool next(Line& line) override { return reader_.next(line); }

 private:
  UniqueFd owned_;
  FdLineReader reader_;
};

class SocketSource final : public LineSource {
 public:
  explicit SocketSource(const InputSpec& spec)
      : path_(spec.path), max_connections_(spec.max_connections), stop_(spec.stop) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path_.empty() || path_.size() >= sizeof addr.sun_path) {
      throw IoError("socket path is empty or too long: " + path_);
    }
    std::memcpy(addr.sun_path, path_.c_str(), path_.size() + 1);

    struct stat st {};
    if (::lstat(path_.c_str(), &st) == 0) {
      if (!S_ISSOCK(st.st_mode)) throw IoError("refusing to replace non-socket file: " + path_);
      ::unlink(path_.c_str());
    }

    listener_ = UniqueFd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (listener_.get() < 0) throw IoError("socket() failed for " + path_ + ": " + errno_text());
    if (::bind(listener_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      throw IoError("cannot bind " + path_ + ": " + errno_text());
    }
    if (::listen(listener_.get(), 1) != 0) {
      throw IoError("cannot listen on " + path_ + ": " + errno_text());
    }
    bound_ = true;
  }

  ~SocketSource() override {
    reader_.reset();
    conn_.reset();
    listener_.reset();
    if (bound_) ::unlink(path_.c_str());
  }

  bool next(Line& line) override {
    for (;;) {
      if (reader_) {
        if (reader_->next(line)) return true;
        if (reader_->stopped()) return false;
        reader_.reset();
        conn_.reset();
        ++served_;
      }
      if (max_connections_ != 0 && served_ >= max_connections_) return false;
      if (!accept_one()) return false;
    }
  }

 private:
  bool accept_one() {
    for (;;) {
      if (stop_ != nullptr && stop_->load()) return false;
      pollfd pfd{listener_.get(), POLLIN, 0};
      int rc = ::poll(&pfd, 1, kPollMillis);
      if (rc < 0 && errno != EINTR) throw IoError("poll failed on " + path_ + ": " + errno_text());
      if (rc <= 0) continue;
      int fd = ::accept4(listener_.get(), nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) {
        if (errno == EINTR || errno == ECONNABORTED) continue;
        throw IoError("accept failed on " + path_ + ": " + errno_text());
      }
      conn_ = UniqueFd(fd);
      reader_.emplace(fd, stop_);
      return true;
    }
  }

  std::string path_;
  std::size_t max_connections_;
  const std::atomic<bool>* stop_;
  UniqueFd listener_;
  UniqueFd conn_;
  std::optional<FdLineReader> reader_;
  std::size_t served_ = 0;
  bool bound_ = false;
};

}  // namespace

FdLineReader::FdLineReader(int fd, const std::atomic<bool>* stop)
    : fd_(fd), stop_(stop), buf_(kMaxLineBytes + kReadChunk + 1) {}

bool FdLineReader::fill() {
  if (begin_ > 0) {
    std::memmove(buf_.data(), buf_.data() + begin_, end_ - begin_);
    scan_ -= begin_;
    end_ -= begin_;
    begin_ = 0;
  }
  for (;;) {
    if (stop_ != nullptr) {
      if (stop_->load()) {
        stopped_ = true;
        return false;
      }
      pollfd pfd{fd_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, kPollMillis);
      if (rc < 0 && errno != EINTR) throw IoError("poll failed: " + errno_text());
      if (rc <= 0) continue;
    }
    std::size_t room = std::min(kReadChunk, buf_.size() - end_);
    ssize_t n = ::read(fd_, buf_.data() + end_, room);
    if (n < 0) {
      if (errno == EINTR) continue;
      // A peer resetting the connection ends its stream like a close.
      if (errno == ECONNRESET) return false;
      throw IoError("read failed: " + errno_text());
    }
    if (n == 0) return false;
    end_ += static_cast<std::size_t>(n);
    return true;
  }
}

bool FdLineReader::next(Line& line) {
  bool discarding = false;
  for (;;) {
    const char* base = buf_.data();
    const void* nl = std::memchr(base + scan_, '\n', end_ - scan_);
    if (nl != nullptr) {
      std::size_t nl_pos = static_cast<const char*>(nl) - base;
      std::size_t start = begin_;
      begin_ = scan_ = nl_pos + 1;
      if (discarding || nl_pos - start > kMaxLineBytes) {
        line = Line{{}, true};
        return true;
      }
      std::size_t len = nl_pos - start;
      if (len > 0 && base[start + len - 1] == '\r') --len;
      line = Line{std::string_view(base + start, len), false};
      return true;
    }
    scan_ = end_;
    if (end_ - begin_ > kMaxLineBytes) {
      // Drop what we have; the rest of the line is dropped as it arrives.
      discarding = true;
      begin_ = scan_ = end_;
    }
    if (eof_ || !fill()) {
      eof_ = true;
      if (stopped_) return false;
      if (discarding) {
        begin_ = scan_ = end_;
        line = Line{{}, true};
        return true;
      }
      if (end_ > begin_) {
        std::size_t start = begin_;
        std::size_t len = end_ - begin_;
        begin_ = scan_ = end_;
        if (base[start + len - 1] == '\r') --len;
        line = Line{std::string_view(buf_.data() + start, len), false};
        return true;
      }
      return false;
    }
  }
}

InputSpec InputSpec::from_input_arg(std::string_view arg) {
  InputSpec spec;
  if (arg == "-") {
    spec.kind = Kind::stdin_stream;
  } else {
    spec.kind = Kind::file;
    spec.path = std::string(arg);
  }
  return spec;
}

InputSpec InputSpec::from_socket_path(std::string_view path) {
  InputSpec spec;
  spec.kind = Kind::socket;
  spec.path = std::string(path);
  return spec;
}

std::unique_ptr<LineSource> open_source(const InputSpec& spec) {
  switch (spec.kind) {
    case InputSpec::Kind::stdin_stream:
      return std::make_unique<FdSource>(UniqueFd{}, STDIN_FILENO, spec.stop);
    case InputSpec::Kind::file: {
      UniqueFd fd(::open(spec.path.c_str(), O_RDONLY | O_CLOEXEC));
      if (fd.get() < 0) throw IoError("cannot open input " + spec.path + ": " + errno_text());
      struct stat st {};
      if (::fstat(fd.get(), &st) == 0 && S_ISDIR(st.st_mode)) {
        throw IoError("input is a directory: " + spec.path);
      }
      int raw = fd.get();
      return std::make_unique<FdSource>(std::move(fd), raw, nullptr);
    }
    case InputSpec::Kind::socket:
      return std::make_unique<SocketSource>(spec);
  }
  throw IoError("unknown input kind");
}

bool MemoryLineSource::next(Line& line) {
  if (pos_ >= text_.size()) return false;
  std::size_t nl = text_.find('\n', pos_);
  std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
  std::string_view body = text_.substr(pos_, end - pos_);
  pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
  if (body.size() > kMaxLineBytes) {
    line = Line{{}, true};
    return true;
  }
  if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
  line = Line{body, false};
  return true;
}

}  // namespace flowmat
