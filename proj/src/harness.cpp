#include "asnfuzz/harness.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/resource.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/uper.hpp"

namespace asnfuzz {

namespace {

const Value* find_member(const Value& v, const std::string& name) {
  if (const auto* seq = v.get_if<val::Sequence>()) {
    for (const auto& m : seq->members) {
      if (m.name == name) return m.value.get();
    }
    for (const auto& m : seq->members) {
      if (const Value* hit = find_member(*m.value, name)) return hit;
    }
  } else if (const auto* list = v.get_if<val::SequenceOf>()) {
    for (const auto& item : list->items) {
      if (const Value* hit = find_member(item, name)) return hit;
    }
  } else if (const auto* ch = v.get_if<val::Choice>()) {
    return find_member(*ch->value, name);
  }
  return nullptr;
}

bool parse_overflow(const Value& msg, const HarnessConfig& cfg) {
  const Value* blob = find_member(msg, cfg.blob_field);
  if (!blob || !blob->is<val::OctetString>()) return false;
  const auto& b = blob->as<val::OctetString>().bytes;
  return !b.empty() && b[0] > b.size() - 1;
}

bool integrity_with_magic(const Value& msg, const HarnessConfig& cfg) {
  const Value* integrity = find_member(msg, cfg.integrity_field);
  const Value* header = find_member(msg, cfg.header_field);
  if (!integrity || !header) return false;
  if (!integrity->is<val::Boolean>() || !integrity->as<val::Boolean>().value) return false;
  if (!header->is<val::OctetString>()) return false;
  const auto& h = header->as<val::OctetString>().bytes;
  return !h.empty() && h[0] == cfg.magic;
}

void log_line(const std::string& line) {
  std::fprintf(stderr, "HARNESS %s\n", line.c_str());
  std::fflush(stderr);
}

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> frame(const std::vector<std::uint8_t>& payload) {
  if (payload.size() > kMaxFrame) {
    throw Error("payload of " + std::to_string(payload.size()) + " octets exceeds frame limit");
  }
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 2);
  out.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(payload.size() & 0xFF));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

void FrameReader::feed(const std::uint8_t* data, std::size_t n) {
  buf_.insert(buf_.end(), data, data + n);
}

std::optional<std::vector<std::uint8_t>> FrameReader::next() {
  if (oversize_ || buf_.size() < 2) return std::nullopt;
  const std::size_t len = (std::size_t{buf_[0]} << 8) | buf_[1];
  if (len > kMaxFrame) {
    oversize_ = true;
    return std::nullopt;
  }
  if (buf_.size() < 2 + len) return std::nullopt;
  std::vector<std::uint8_t> payload(buf_.begin() + 2, buf_.begin() + 2 + static_cast<std::ptrdiff_t>(len));
  buf_.erase(buf_.begin(), buf_.begin() + 2 + static_cast<std::ptrdiff_t>(len));
  return payload;
}

std::string crash_line(FrameResult r) {
  switch (r) {
    case FrameResult::CrashParse: return "HARNESS crashed: parse overflow";
    case FrameResult::CrashSecurity: return "HARNESS crashed: security processing";
    case FrameResult::CrashFlaky: return "HARNESS crashed: flaky";
    default: return "";
  }
}

FrameResult process_frame(const Schema& schema, const HarnessConfig& cfg,
                          TargetState& state,
                          const std::vector<std::uint8_t>& payload, Rng& flaky_rng) {
  ++state.messages_seen;
  if (cfg.flaky_rate > 0 && flaky_rng.chance(cfg.flaky_rate)) return FrameResult::CrashFlaky;
  Value msg;
  try {
    msg = decode_exact(schema, cfg.root, BitBuffer::from_bytes(payload));
  } catch (const DecodeError&) {
    return FrameResult::Rejected;
  }
  if (cfg.bug_parse && parse_overflow(msg, cfg)) return FrameResult::CrashParse;
  if (cfg.bug_security && !state.security_established && integrity_with_magic(msg, cfg)) {
    return FrameResult::CrashSecurity;
  }
  if (const auto* ch = msg.get_if<val::Choice>(); ch && ch->name == cfg.security_message) {
    state.security_established = true;
  }
  return FrameResult::Decoded;
}

void serve(std::uint16_t port, const Schema& schema, const HarnessConfig& cfg) {
  // Simulated crashes abort; nobody wants the core files.
  rlimit no_core{0, 0};
  setrlimit(RLIMIT_CORE, &no_core);

  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(std::string("bind: ") + std::strerror(errno));
  }
  if (::listen(lfd, 16) != 0) throw Error(std::string("listen: ") + std::strerror(errno));
  socklen_t alen = sizeof addr;
  getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &alen);
  log_line("listening on 127.0.0.1:" + std::to_string(ntohs(addr.sin_port)));

  std::random_device entropy;
  Rng flaky_rng((std::uint64_t{entropy()} << 32) | entropy());

  while (true) {
    int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) continue;
    TargetState state;
    FrameReader reader;
    std::uint8_t buf[4096];
    bool open = true;
    while (open) {
      ssize_t r = ::read(fd, buf, sizeof buf);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) break;
      reader.feed(buf, static_cast<std::size_t>(r));
      while (auto payload = reader.next()) {
        FrameResult res = process_frame(schema, cfg, state, *payload, flaky_rng);
        if (res != FrameResult::Decoded && res != FrameResult::Rejected) {
          std::fprintf(stderr, "%s\n", crash_line(res).c_str());
          std::fflush(stderr);
          std::abort();
        }
        const std::uint8_t ack = res == FrameResult::Decoded ? kAckDecoded : kAckRejected;
        if (!write_all(fd, &ack, 1)) {
          open = false;
          break;
        }
      }
      if (reader.oversize()) {
        log_line("closing connection: oversize frame");
        open = false;
      }
    }
    ::close(fd);
  }
}

}  // namespace asnfuzz
