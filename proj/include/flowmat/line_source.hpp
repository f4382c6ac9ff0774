#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace flowmat {

/// One input line without its terminator. `text` stays valid until the next
/// call to LineSource::next. An overlong line carries an empty `text`.
struct Line {
  std::string_view text;
  bool overlong = false;
};

/// Pull-style iterator over newline-delimited input.
class LineSource {
 public:
  virtual ~LineSource() = default;
  /// Returns false once the stream is exhausted.
  virtual bool next(Line& line) = 0;
};

/// Buffered line splitter over a readable file descriptor. Lines longer than
/// kMaxLineBytes are consumed up to their newline and reported as overlong
/// without ever being held in memory whole. A trailing "\r" is stripped.
class FdLineReader {
 public:
  explicit FdLineReader(int fd, const std::atomic<bool>* stop = nullptr);

  bool next(Line& line);
  /// True if the last next() returned false because the stop flag was set.
  bool stopped() const noexcept { return stopped_; }

 private:
  bool fill();

  int fd_;
  const std::atomic<bool>* stop_;
  std::vector<char> buf_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  std::size_t scan_ = 0;
  bool eof_ = false;
  bool stopped_ = false;
};

struct InputSpec {
  enum class Kind { file, stdin_stream, socket };

  Kind kind = Kind::file;
  std::string path;
  /// Socket mode: stop after this many peers have disconnected (0 = never).
  std::size_t max_connections = 0;
  /// Socket and stdin modes poll this flag and end the stream once it is set.
  const std::atomic<bool>* stop = nullptr;

  /// "-" selects standard input, anything else is a file path.
  static InputSpec from_input_arg(std::string_view arg);
  static InputSpec from_socket_path(std::string_view path);
};

/// Opens a file, standard input, or a listening local stream socket that
/// accepts one writer at a time and keeps accepting after each disconnect.
/// Throws IoError naming the path when the source cannot be set up.
std::unique_ptr<LineSource> open_source(const InputSpec& spec);

/// Lines held in memory, split on "\n". Used by the benchmark and tests.
class MemoryLineSource final : public LineSource {
 public:
  explicit MemoryLineSource(std::string_view text) : text_(text) {}
  bool next(Line& line) override;

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace flowmat
