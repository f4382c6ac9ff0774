#include "flowmat/eve_ingest.hpp"

#include <arpa/inet.h>

#include <array>
#include <cstring>

#include <rapidjson/memorystream.h>
#include <rapidjson/reader.h>

#include "flowmat/ipv4.hpp"

namespace flowmat {

namespace {

enum class Field { none, event_type, src_ip, dest_ip, flow, pkts_toserver, pkts_toclient };

enum class AddrState { missing, v4, v6, invalid };

enum class CountState { missing, ok, invalid };

struct AddrSlot {
  AddrState state = AddrState::missing;
  std::uint32_t value = 0;
};

struct CountSlot {
  CountState state = CountState::missing;
  std::uint64_t value = 0;
};

bool looks_like_ipv6(std::string_view text) {
  std::array<char, 64> buf{};
  if (text.size() >= buf.size() || text.find(':') == std::string_view::npos) return false;
  std::memcpy(buf.data(), text.data(), text.size());
  std::array<unsigned char, 16> addr{};
  return inet_pton(AF_INET6, buf.data(), addr.data()) == 1;
}

// SAX handler that keeps only the handful of fields a traffic matrix needs.
// `depth_` counts open containers; the top-level object is depth 1 and the
// object under the top-level "flow" key is depth 2.
class FlowHandler : public rapidjson::BaseReaderHandler<rapidjson::UTF8<>, FlowHandler> {
 public:
  bool root_is_object = false;
  bool event_type_seen = false;
  bool event_type_is_string = false;
  bool is_flow = false;
  AddrSlot src;
  AddrSlot dest;
  CountSlot toserver;
  CountSlot toclient;

  bool Key(const char* str, rapidjson::SizeType len, bool) {
    std::string_view key(str, len);
    field_ = Field::none;
    if (depth_ == 1) {
      if (key == "event_type") field_ = Field::event_type;
      else if (key == "src_ip") field_ = Field::src_ip;
      else if (key == "dest_ip") field_ = Field::dest_ip;
      else if (key == "flow") field_ = Field::flow;
    } else if (depth_ == 2 && in_flow_) {
      if (key == "pkts_toserver") field_ = Field::pkts_toserver;
      else if (key == "pkts_toclient") field_ = Field::pkts_toclient;
    }
    return true;
  }

  bool StartObject() {
    if (depth_ == 0) root_is_object = true;
    if (depth_ == 1 && field_ == Field::flow) {
      in_flow_ = true;
      // A repeated "flow" key replaces earlier counts.
      toserver = {};
      toclient = {};
    } else {
      non_count_value();
    }
    field_ = Field::none;
    ++depth_;
    return true;
  }

  bool EndObject(rapidjson::SizeType) {
    --depth_;
    if (depth_ == 1) in_flow_ = false;
    return true;
  }

  bool StartArray() {
    non_count_value();
    field_ = Field::none;
    ++depth_;
    return true;
  }

  bool EndArray(rapidjson::SizeType) {
    --depth_;
    return true;
  }

  bool String(const char* str, rapidjson::SizeType len, bool) {
    std::string_view value(str, len);
    switch (field_) {
      case Field::event_type:
        event_type_seen = true;
        event_type_is_string = true;
        is_flow = value == "flow";
        break;
      case Field::src_ip:
        src = classify_addr(value);
        break;
      case Field::dest_ip:
        dest = classify_addr(value);
        break;
      default:
        non_count_value();
        break;
    }
    field_ = Field::none;
    return true;
  }

  bool Uint(unsigned u) { return Uint64(u); }

  bool Uint64(std::uint64_t u) {
    if (field_ == Field::pkts_toserver) toserver = {CountState::ok, u};
    else if (field_ == Field::pkts_toclient) toclient = {CountState::ok, u};
    else non_count_value();
    field_ = Field::none;
    return true;
  }

  // Negative integers, fractions, exponents, and integers past 2^64 all
  // arrive here or in the signed callbacks; none is a valid packet count.
  bool Default() {
    non_count_value();
    field_ = Field::none;
    return true;
  }

 private:
  static AddrSlot classify_addr(std::string_view text) {
    if (auto v4 = parse_ipv4(text)) return {AddrState::v4, *v4};
    if (looks_like_ipv6(text)) return {AddrState::v6, 0};
    return {AddrState::invalid, 0};
  }

  void non_count_value() {
    switch (field_) {
      case Field::pkts_toserver: toserver = {CountState::invalid, 0}; break;
      case Field::pkts_toclient: toclient = {CountState::invalid, 0}; break;
      case Field::event_type:
        event_type_seen = true;
        event_type_is_string = false;
        is_flow = false;
        break;
      case Field::src_ip: src = {AddrState::invalid, 0}; break;
      case Field::dest_ip: dest = {AddrState::invalid, 0}; break;
      default: break;
    }
  }

  int depth_ = 0;
  bool in_flow_ = false;
  Field field_ = Field::none;
};

constexpr unsigned kParseFlags = rapidjson::kParseIterativeFlag | rapidjson::kParseValidateEncodingFlag;

}  // namespace

const char* to_string(SkipReason reason) noexcept {
  switch (reason) {
    case SkipReason::non_flow: return "non_flow";
    case SkipReason::ipv6: return "ipv6";
    case SkipReason::malformed: return "malformed";
  }
  return "unknown";
}

ParseResult parse_flow_record(std::string_view line) noexcept {
  if (line.empty() || line.size() > kMaxLineBytes) return SkipReason::malformed;
  // The reader treats NUL as end of input, which would hide trailing bytes.
  if (std::memchr(line.data(), '\0', line.size()) != nullptr) return SkipReason::malformed;

  try {
    thread_local rapidjson::Reader reader;
    rapidjson::MemoryStream stream(line.data(), line.size());
    FlowHandler handler;
    if (reader.Parse<kParseFlags>(stream, handler).IsError() || !handler.root_is_object) {
      return SkipReason::malformed;
    }
    if (!handler.event_type_seen || !handler.event_type_is_string) return SkipReason::malformed;
    if (!handler.is_flow) return SkipReason::non_flow;
    if (handler.src.state == AddrState::v6 || handler.dest.state == AddrState::v6) {
      return SkipReason::ipv6;
    }
    if (handler.src.state != AddrState::v4 || handler.dest.state != AddrState::v4) {
      return SkipReason::malformed;
    }
    if (handler.toserver.state != CountState::ok || handler.toclient.state != CountState::ok) {
      return SkipReason::malformed;
    }
    return FlowRecord{handler.src.value, handler.dest.value, handler.toserver.value,
                      handler.toclient.value};
  } catch (...) {
    // Only allocation failure can reach here.
    return SkipReason::malformed;
  }
}

void IngestCounters::count(const ParseResult& result) noexcept {
  if (std::holds_alternative<FlowRecord>(result)) {
    ++records_ok;
  } else {
    count(std::get<SkipReason>(result));
  }
}

void IngestCounters::count(SkipReason reason) noexcept {
  switch (reason) {
    case SkipReason::non_flow: ++records_skipped_non_flow; break;
    case SkipReason::ipv6: ++records_skipped_ipv6; break;
    case SkipReason::malformed: ++records_skipped_malformed; break;
  }
}

IngestCounters& IngestCounters::operator+=(const IngestCounters& other) noexcept {
  records_ok += other.records_ok;
  records_skipped_non_flow += other.records_skipped_non_flow;
  records_skipped_ipv6 += other.records_skipped_ipv6;
  records_skipped_malformed += other.records_skipped_malformed;
  return *this;
}

}  // namespace flowmat
