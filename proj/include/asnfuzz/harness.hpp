#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asnfuzz/rng.hpp"
#include "asnfuzz/schema.hpp"

namespace asnfuzz {

// Wire framing: 2-octet big-endian payload length, then the payload.
inline constexpr std::size_t kMaxFrame = 4096;
inline constexpr std::uint8_t kAckDecoded = 0x01;
inline constexpr std::uint8_t kAckRejected = 0x02;

std::vector<std::uint8_t> frame(const std::vector<std::uint8_t>& payload);  // throws Error if oversize

// Incremental unframer. feed() appends wire bytes; next() yields complete
// payloads. After an oversize length prefix the reader is poisoned and the
// connection must be closed.
class FrameReader {
 public:
  void feed(const std::uint8_t* data, std::size_t n);
  std::optional<std::vector<std::uint8_t>> next();
  bool oversize() const { return oversize_; }

 private:
  std::vector<std::uint8_t> buf_;
  bool oversize_ = false;
};

struct HarnessConfig {
  std::string root = "UL-Message";
  bool bug_parse = false;     // blob inner length overflow
  bool bug_security = false;  // integrity marker before security setup
  std::uint8_t magic = 0x5A;
  double flaky_rate = 0.0;
  std::string blob_field = "dedicatedInfoNAS";
  std::string integrity_field = "integrityRequired";
  std::string header_field = "securityHeader";
  std::string security_message = "securityModeComplete";
};

struct TargetState {
  bool security_established = false;
  std::uint64_t messages_seen = 0;
};

enum class FrameResult { Decoded, Rejected, CrashParse, CrashSecurity, CrashFlaky };

// Log line the harness writes before aborting ("HARNESS crashed: ...").
std::string crash_line(FrameResult r);

// The harness pipeline for one payload, without any I/O. flaky_rng is drawn
// only when flaky_rate > 0.
FrameResult process_frame(const Schema& schema, const HarnessConfig& cfg,
                          TargetState& state,
                          const std::vector<std::uint8_t>& payload, Rng& flaky_rng);

// Listens on 127.0.0.1:port (0 picks a free port), logs
// "HARNESS listening on 127.0.0.1:<port>" to stderr and serves one
// connection at a time until killed. Crash results abort the process.
[[noreturn]] void serve(std::uint16_t port, const Schema& schema,
                        const HarnessConfig& cfg);

}  // namespace asnfuzz
