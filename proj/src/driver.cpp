#include "asnfuzz/driver.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/harness.hpp"
#include "asnfuzz/io.hpp"
#include "asnfuzz/schema_mutator.hpp"
#include "asnfuzz/schema_text.hpp"

namespace asnfuzz {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

constexpr milliseconds kStartupTimeout{10000};
constexpr int kCorpusColumns = 10;

std::uint64_t us_since(Clock::time_point t) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t).count());
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(left);
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t at = s.find(sep, start);
    if (at == std::string_view::npos) at = s.size();
    out.push_back(std::string(s.substr(start, at - start)));
    start = at + 1;
  }
  return out;
}

std::vector<std::string> split_list(std::string_view csv) {
  std::vector<std::string> out;
  for (auto& item : split(csv, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T v{};
  auto t = trim(text);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    throw ConfigError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

bool parse_flag(std::string_view text, std::string_view what) {
  auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("bad " + std::string(what) + " '" + t + "'");
}

std::string clean_field(std::string s) {
  for (auto& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s.empty() ? "-" : s;
}

std::string unclean_field(const std::string& s) { return s == "-" ? "" : s; }

// ---- sockets ----

int connect_to(const std::string& host, std::uint16_t port, milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    return -1;
  }
  int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, 0);
  if (fd < 0) {
    freeaddrinfo(res);
    return -1;
  }
  fcntl(fd, F_SETFL, O_NONBLOCK);
  int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  freeaddrinfo(res);
  if (rc != 0) {
    if (errno != EINPROGRESS) {
      ::close(fd);
      return -1;
    }
    pollfd p{fd, POLLOUT, 0};
    int err = 0;
    socklen_t len = sizeof err;
    if (poll(&p, 1, static_cast<int>(timeout.count())) != 1 ||
        getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) {
      ::close(fd);
      return -1;
    }
  }
  return fd;
}

enum class Reply { Byte, Closed, Timeout };

// Writes the frame and waits for the 1-octet reply.
Reply exchange_frame(int fd, const std::vector<std::uint8_t>& wire, milliseconds timeout,
                     std::uint8_t& reply) {
  const auto deadline = Clock::now() + timeout;
  std::size_t sent = 0;
  while (sent < wire.size()) {
    pollfd p{fd, POLLOUT, 0};
    if (poll(&p, 1, remaining_ms(deadline)) != 1) return Reply::Timeout;
    ssize_t w = ::send(fd, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
    if (w < 0 && (errno == EAGAIN || errno == EINTR)) continue;
    if (w <= 0) return Reply::Closed;
    sent += static_cast<std::size_t>(w);
  }
  while (true) {
    pollfd p{fd, POLLIN, 0};
    int ready = poll(&p, 1, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready != 1) return Reply::Timeout;
    ssize_t r = ::recv(fd, &reply, 1, 0);
    if (r == 1) return Reply::Byte;
    if (r < 0 && (errno == EAGAIN || errno == EINTR)) continue;
    return Reply::Closed;
  }
}

std::string ack_signature(std::uint8_t b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  return std::string("ack ") + kDigits[b >> 4] + kDigits[b & 0xF];
}

}  // namespace

// ---- verdicts and corpus ----

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "ok";
    case Verdict::TargetUnresponsive: return "target_unresponsive";
    case Verdict::CrashObserved: return "crash_observed";
    case Verdict::ReplayConfirmed: return "replay_confirmed";
    case Verdict::ReplayUnreproduced: return "replay_unreproduced";
    case Verdict::Skipped: return "skipped";
  }
  return "";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  for (Verdict v : {Verdict::Ok, Verdict::TargetUnresponsive, Verdict::CrashObserved,
                    Verdict::ReplayConfirmed, Verdict::ReplayUnreproduced, Verdict::Skipped}) {
    if (verdict_name(v) == name) return v;
  }
  return std::nullopt;
}

std::string corpus_header() {
  return "# seed\tstrategy\tapplied\tmessage_type\toriginal_hex\toriginal_bits\t"
         "fuzzed_hex\tfuzzed_bits\tverdict\tsignature";
}

std::string format_corpus_line(const PduRecord& r) {
  std::ostringstream o;
  o << r.seed << '\t' << clean_field(r.strategy) << '\t' << clean_field(r.applied) << '\t'
    << clean_field(r.message_type) << '\t' << clean_field(r.original_hex) << '\t'
    << r.original_bits << '\t' << clean_field(r.fuzzed_hex) << '\t' << r.fuzzed_bits << '\t'
    << verdict_name(r.verdict) << '\t' << clean_field(r.signature);
  return o.str();
}

PduRecord parse_corpus_line(std::string_view line) {
  auto cols = split(line, '\t');
  if (cols.size() != kCorpusColumns) {
    throw Error("corpus line has " + std::to_string(cols.size()) + " columns, expected " +
                std::to_string(kCorpusColumns));
  }
  PduRecord r;
  try {
    r.seed = parse_number<std::uint64_t>(cols[0], "seed");
    r.original_bits = parse_number<std::size_t>(cols[5], "bit length");
    r.fuzzed_bits = parse_number<std::size_t>(cols[7], "bit length");
  } catch (const ConfigError& e) {
    throw Error(std::string("corpus: ") + e.what());
  }
  r.strategy = unclean_field(cols[1]);
  r.applied = unclean_field(cols[2]);
  r.message_type = unclean_field(cols[3]);
  r.original_hex = unclean_field(cols[4]);
  r.fuzzed_hex = unclean_field(cols[6]);
  auto v = verdict_from_name(cols[8]);
  if (!v) throw Error("corpus: unknown verdict '" + cols[8] + "'");
  r.verdict = *v;
  r.signature = unclean_field(cols[9]);
  // Payloads must hold their bit lengths; from_hex rejects malformed hex.
  for (auto [hex, bits] : {std::pair{&r.original_hex, r.original_bits},
                           std::pair{&r.fuzzed_hex, r.fuzzed_bits}}) {
    const auto bytes = from_hex(*hex);
    if (bytes.size() * 8 < bits || (bits > 0 && bytes.size() > std::max<std::size_t>(1, (bits + 7) / 8))) {
      throw Error("corpus: hex payload does not match bit length " + std::to_string(bits));
    }
  }
  return r;
}

void write_corpus(const std::string& dir, const std::vector<PduRecord>& records) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ostringstream corpus, timing;
  corpus << corpus_header() << '\n';
  timing << "# seed\tfuzzer_time_cost_us\twall_us\n";
  for (const auto& r : records) {
    corpus << format_corpus_line(r) << '\n';
    timing << r.seed << '\t' << r.fuzzer_time_cost_us << '\t' << r.wall_us << '\n';
  }
  try {
    const fs::path base(dir);
    write_text_file((base / "corpus.tsv.tmp").string(), corpus.str());
    fs::rename(base / "corpus.tsv.tmp", base / "corpus.tsv");
    write_text_file((base / "timing.tsv").string(), timing.str());
  } catch (const std::exception& e) {
    throw CorpusWriteError(std::string("cannot write corpus: ") + e.what());
  }
}

std::vector<PduRecord> read_corpus(const std::string& corpus_file) {
  std::vector<PduRecord> out;
  std::istringstream in(read_text_file(corpus_file));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_corpus_line(line));
  }
  const fs::path timing = fs::path(corpus_file).parent_path() / "timing.tsv";
  if (fs::exists(timing)) {
    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> t;
    std::istringstream tin(read_text_file(timing.string()));
    while (std::getline(tin, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto cols = split(line, '\t');
      if (cols.size() != 3) continue;
      t[parse_number<std::uint64_t>(cols[0], "seed")] = {
          parse_number<std::uint64_t>(cols[1], "time"), parse_number<std::uint64_t>(cols[2], "time")};
    }
    for (auto& r : out) {
      if (auto it = t.find(r.seed); it != t.end()) {
        r.fuzzer_time_cost_us = it->second.first;
        r.wall_us = it->second.second;
      }
    }
  }
  return out;
}

// ---- configuration ----

void set_config_value(CampaignConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "target") {
    c.target = value;
  } else if (key == "harness") {
    c.harness_command = value;
  } else if (key == "schema") {
    c.schema_path = value;
  } else if (key == "mutation_plan") {
    c.mutation_plan_path = value;
  } else if (key == "mode") {
    auto m = mode_from_name(value);
    if (!m) throw ConfigError("unknown mode '" + value + "' (mutate, generate, perturb)");
    c.fuzz.mode = *m;
  } else if (key == "strategies") {
    c.fuzz.strategies = parse_pdu_strategy_list(value);
  } else if (key == "target_field") {
    c.fuzz.target_field = value.empty() ? std::nullopt : std::optional(value);
  } else if (key == "christmas_tree") {
    c.fuzz.christmas_tree = parse_flag(value, key);
  } else if (key == "external_mangler") {
    c.fuzz.external_mangler = value.empty() ? std::nullopt : std::optional(value);
  } else if (key == "blob_fields") {
    c.fuzz.blob_fields = split_list(value);
  } else if (key == "envelope") {
    c.fuzz.envelope = value.empty() ? std::nullopt : std::optional(value);
  } else if (key == "root") {
    c.root = value;
  } else if (key == "seed_pdu") {
    c.seed_pdu_hex = value;
  } else if (key == "expected") {
    c.expected = value;
  } else if (key == "seed_range") {
    auto dots = value.find("..");
    if (dots == std::string::npos) throw ConfigError("seed_range must look like 0..9999");
    c.seed_start = parse_number<std::uint64_t>(value.substr(0, dots), key);
    c.seed_stop = parse_number<std::uint64_t>(value.substr(dots + 2), key);
  } else if (key == "seed") {
    c.seed_start = c.seed_stop = parse_number<std::uint64_t>(value, key);
  } else if (key == "message_pool") {
    c.message_pool = split_list(value);
  } else if (key == "crash_pattern") {
    c.crash_patterns.push_back(value);
  } else if (key == "liveness_timeout_ms") {
    c.liveness_timeout = milliseconds(parse_number<std::uint32_t>(value, key));
  } else if (key == "backoff_ok_ms") {
    c.backoff_ok = milliseconds(parse_number<std::uint32_t>(value, key));
  } else if (key == "backoff_fail_ms") {
    c.backoff_fail = milliseconds(parse_number<std::uint32_t>(value, key));
  } else if (key == "replay_repeats") {
    c.replay_repeats = parse_number<unsigned>(value, key);
  } else if (key == "corpus_dir") {
    c.corpus_dir = value;
  } else if (key == "workers") {
    c.workers = parse_number<unsigned>(value, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

CampaignConfig parse_config(std::string_view text) {
  CampaignConfig c;
  bool custom_patterns = false;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    if (trim(line.substr(0, eq)) == "crash_pattern" && !custom_patterns) {
      c.crash_patterns.clear();
      custom_patterns = true;
    }
    try {
      set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

CampaignConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  CampaignConfig c = parse_config(text);
  // File paths in a config are relative to the config file.
  const fs::path dir = fs::path(path).parent_path();
  for (std::string* p : {&c.schema_path, &c.mutation_plan_path, &c.corpus_dir}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (dir / *p).lexically_normal().string();
  }
  return c;
}

void validate_config(const CampaignConfig& c) {
  if (c.target.empty() == c.harness_command.empty()) {
    throw ConfigError("set exactly one of target (host:port) and harness (command)");
  }
  if (c.schema_path.empty()) throw ConfigError("schema is required");
  if (c.corpus_dir.empty()) throw ConfigError("corpus_dir is required");
  if (c.seed_stop < c.seed_start) throw ConfigError("seed_range is empty");
  if (c.replay_repeats < 2) throw ConfigError("replay_repeats must be at least 2");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  for (const auto& p : c.crash_patterns) {
    try {
      std::regex re(p);
    } catch (const std::regex_error&) {
      throw ConfigError("bad crash_pattern '" + p + "'");
    }
  }
  switch (c.fuzz.mode) {
    case FuzzMode::Mutation:
      if (c.seed_pdu_hex.empty()) throw ConfigError("mutate mode needs seed_pdu");
      break;
    case FuzzMode::Generation:
      if (c.message_pool.empty()) throw ConfigError("generate mode needs message_pool");
      break;
    case FuzzMode::Perturbation:
      if (c.expected.empty()) throw ConfigError("perturb mode needs expected");
      if (c.message_pool.size() < 2) throw ConfigError("perturb mode needs two or more pool types");
      break;
  }
}

std::string strategy_label(const CampaignConfig& c) {
  const FuzzConfig& f = c.fuzz;
  std::string label;
  switch (f.mode) {
    case FuzzMode::Mutation: {
      label = "mutate:";
      if (f.strategies.empty()) label += "none";
      for (std::size_t i = 0; i < f.strategies.size(); ++i) {
        if (i) label += "+";
        label += pdu_strategy_name(f.strategies[i]);
      }
      if (f.external_mangler) label += "+external";
      if (f.target_field) label += "@" + *f.target_field;
      break;
    }
    case FuzzMode::Generation:
      label = c.mutation_plan_path.empty()
                  ? "generate"
                  : "generate:" + fs::path(c.mutation_plan_path).stem().string();
      break;
    case FuzzMode::Perturbation:
      label = "perturb:" + c.expected;
      break;
  }
  if (f.christmas_tree && f.mode != FuzzMode::Perturbation) label += "+christmas";
  return label;
}

// ---- targets ----

ManagedTarget::ManagedTarget(std::string command, std::vector<std::string> crash_patterns,
                             milliseconds liveness)
    : command_(std::move(command)), liveness_(liveness) {
  for (const auto& p : crash_patterns) patterns_.emplace_back(p);
  start();
}

void ManagedTarget::start() {
  try {
    proc_ = ChildProcess::spawn({"/bin/sh", "-c", "exec " + command_ + " --port 0"});
  } catch (const Error& e) {
    throw TargetUnreachable(e.what());
  }
  const auto deadline = Clock::now() + kStartupTimeout;
  std::string seen;
  while (Clock::now() < deadline) {
    for (const auto& line : proc_.read_lines(milliseconds(remaining_ms(deadline)))) {
      const auto at = line.find("listening on ");
      if (at != std::string::npos) {
        const auto colon = line.rfind(':');
        port_ = static_cast<std::uint16_t>(std::stoul(line.substr(colon + 1)));
        return;
      }
      seen += line + "\n";
    }
    if (!proc_.stderr_open()) break;
  }
  proc_.kill();
  throw TargetUnreachable("target did not start: " + command_ + (seen.empty() ? "" : "\n" + seen));
}

void ManagedTarget::restart() {
  proc_.kill();
  start();
}

std::optional<std::string> ManagedTarget::match(const std::vector<std::string>& lines) const {
  for (const auto& line : lines) {
    for (const auto& p : patterns_) {
      if (std::regex_search(line, p)) return line;
    }
  }
  return std::nullopt;
}

Exchange ManagedTarget::classify_failure() {
  const bool exited = proc_.wait_exit(liveness_);
  std::vector<std::string> lines;
  const auto deadline = Clock::now() + (exited ? liveness_ : milliseconds(50));
  while (proc_.stderr_open() && Clock::now() < deadline) {
    auto more = proc_.read_lines(milliseconds(remaining_ms(deadline)));
    if (more.empty() && !exited) break;
    lines.insert(lines.end(), more.begin(), more.end());
  }
  if (auto sig = match(lines)) return {Verdict::CrashObserved, *sig};
  if (exited) return {Verdict::CrashObserved, proc_.exit_description()};
  return {Verdict::TargetUnresponsive,
          "no response within " + std::to_string(liveness_.count()) + " ms"};
}

Exchange ManagedTarget::send(const std::vector<std::uint8_t>& payload) {
  proc_.read_lines(milliseconds(0));  // drop stale log lines
  int fd = connect_to("127.0.0.1", port_, liveness_);
  if (fd < 0) return classify_failure();
  std::uint8_t reply = 0;
  const Reply r = exchange_frame(fd, frame(payload), liveness_, reply);
  ::close(fd);
  if (r == Reply::Byte) return {Verdict::Ok, ack_signature(reply)};
  return classify_failure();
}

RemoteTarget::RemoteTarget(std::string address, milliseconds liveness) : liveness_(liveness) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("target must be host:port");
  host_ = address.substr(0, colon);
  port_ = static_cast<std::uint16_t>(parse_number<unsigned>(address.substr(colon + 1), "port"));
  int fd = connect_to(host_, port_, liveness_);
  if (fd < 0) throw TargetUnreachable("cannot connect to " + address);
  ::close(fd);
}

Exchange RemoteTarget::send(const std::vector<std::uint8_t>& payload) {
  int fd = connect_to(host_, port_, liveness_);
  if (fd < 0) return {Verdict::TargetUnresponsive, "connection refused"};
  std::uint8_t reply = 0;
  const Reply r = exchange_frame(fd, frame(payload), liveness_, reply);
  ::close(fd);
  if (r == Reply::Byte) return {Verdict::Ok, ack_signature(reply)};
  return {Verdict::TargetUnresponsive,
          r == Reply::Closed ? "connection closed without reply" : "no response within " +
                                                                        std::to_string(liveness_.count()) + " ms"};
}

std::unique_ptr<Target> make_target(const CampaignConfig& c) {
  if (!c.harness_command.empty()) {
    return std::make_unique<ManagedTarget>(c.harness_command, c.crash_patterns, c.liveness_timeout);
  }
  return std::make_unique<RemoteTarget>(c.target, c.liveness_timeout);
}

// ---- producing PDUs ----

CampaignInputs load_inputs(const CampaignConfig& c) {
  CampaignInputs in;
  in.original = parse(read_text_file(c.schema_path));
  if (!c.mutation_plan_path.empty()) {
    in.mutated = apply(in.original, parse_plan(read_text_file(c.mutation_plan_path)));
  }
  if (!c.seed_pdu_hex.empty()) {
    in.seed_pdu = BitBuffer::from_bytes(from_hex(c.seed_pdu_hex));
    try {
      in.seed_pdu.bit_length = decode(in.original, c.root, in.seed_pdu).bits_consumed;
    } catch (const DecodeError& e) {
      throw ConfigError(std::string("seed_pdu does not decode: ") + e.what());
    }
  }
  return in;
}

PduRecord produce(const CampaignInputs& in, const CampaignConfig& c, std::uint64_t seed) {
  PduRecord r;
  r.seed = seed;
  r.strategy = strategy_label(c);
  FuzzConfig f = c.fuzz;
  f.seed = seed;
  FuzzOutcome out;
  try {
    switch (f.mode) {
      case FuzzMode::Mutation:
        r.original_hex = to_hex(in.seed_pdu.bytes);
        r.original_bits = in.seed_pdu.bit_length;
        out = mutate_pdu(in.original, c.root, in.seed_pdu, f);
        break;
      case FuzzMode::Generation:
        out = generate_pdu(in.original, in.mutated ? *in.mutated : in.original, c.message_pool, f);
        break;
      case FuzzMode::Perturbation:
        out = perturb(in.original, c.expected, c.message_pool, seed, f.envelope);
        break;
    }
  } catch (const ManglerFailed& e) {
    r.verdict = Verdict::Skipped;
    r.applied = "mangler failed";
    r.signature = e.what();
    return r;
  }
  r.applied = out.strategy_applied;
  r.message_type = out.message_type;
  r.fuzzed_hex = to_hex(out.pdu_star.bytes);
  r.fuzzed_bits = out.pdu_star.bit_length;
  r.fuzzer_time_cost_us = out.fuzzer_time_cost_us;
  if (out.pdu_star.bytes.size() > kMaxFrame) {
    r.verdict = Verdict::Skipped;
    r.signature = "payload exceeds " + std::to_string(kMaxFrame) + " octets";
  }
  return r;
}

// ---- report ----

std::size_t CampaignReport::total() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.pdus;
  return n;
}

std::size_t CampaignReport::confirmed() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.confirmed_seeds.size();
  return n;
}

CampaignReport emit_report(const std::vector<PduRecord>& records) {
  std::map<std::string, std::vector<const PduRecord*>> groups;
  for (const auto& r : records) groups[r.strategy].push_back(&r);
  CampaignReport rep;
  for (auto& [name, recs] : groups) {
    StrategyRow row;
    row.strategy = name;
    row.pdus = recs.size();
    std::vector<std::uint64_t> costs;
    row.seed_first = recs.front()->seed;
    row.seed_last = recs.front()->seed;
    std::sort(recs.begin(), recs.end(),
              [](const PduRecord* a, const PduRecord* b) { return a->seed < b->seed; });
    for (const PduRecord* r : recs) {
      row.wall_us += r->wall_us;
      costs.push_back(r->fuzzer_time_cost_us);
      row.seed_first = std::min(row.seed_first, r->seed);
      row.seed_last = std::max(row.seed_last, r->seed);
      if (r->crashed()) ++row.crashes_observed;
      if (r->verdict == Verdict::ReplayConfirmed) {
        row.confirmed_seeds.push_back(r->seed);
        row.confirmed_signatures.push_back(r->signature);
      }
    }
    std::sort(costs.begin(), costs.end());
    row.cost_min_us = costs.front();
    row.cost_max_us = costs.back();
    const std::size_t n = costs.size();
    row.cost_median_us = n % 2 ? costs[n / 2] : (costs[n / 2 - 1] + costs[n / 2]) / 2;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace {

std::string ms_text(std::uint64_t us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(us) / 1000.0);
  return buf;
}

std::string seconds_text(std::uint64_t us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", static_cast<double>(us) / 1e6);
  return buf;
}

}  // namespace

std::string report_table(const CampaignReport& rep) {
  std::vector<std::vector<std::string>> cells = {
      {"strategy", "PDUs", "time taken", "added time ms (min/median/max)", "seeds", "crashes",
       "confirmed seeds"}};
  for (const auto& r : rep.rows) {
    std::string confirmed;
    for (std::size_t i = 0; i < r.confirmed_seeds.size(); ++i) {
      if (i == 8) {
        confirmed += " +" + std::to_string(r.confirmed_seeds.size() - 8) + " more";
        break;
      }
      if (i) confirmed += ",";
      confirmed += std::to_string(r.confirmed_seeds[i]);
    }
    cells.push_back({r.strategy, std::to_string(r.pdus), seconds_text(r.wall_us),
                     ms_text(r.cost_min_us) + "/" + ms_text(r.cost_median_us) + "/" +
                         ms_text(r.cost_max_us),
                     std::to_string(r.seed_first) + ".." + std::to_string(r.seed_last),
                     std::to_string(r.crashes_observed), confirmed.empty() ? "-" : confirmed});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (std::size_t i = 0; i < cells[k].size(); ++i) {
      out += cells[k][i];
      if (i + 1 < cells[k].size()) out += std::string(width[i] - cells[k][i].size() + 2, ' ');
    }
    out += '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  out += "total PDUs " + std::to_string(rep.total()) + ", confirmed crashes " +
         std::to_string(rep.confirmed()) + "\n";
  return out;
}

std::string report_json(const CampaignReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json confirmed = nlohmann::json::array();
    for (std::size_t i = 0; i < r.confirmed_seeds.size(); ++i) {
      confirmed.push_back({{"seed", r.confirmed_seeds[i]}, {"signature", r.confirmed_signatures[i]}});
    }
    rows.push_back({{"strategy", r.strategy},
                    {"pdus", r.pdus},
                    {"wall_time_us", r.wall_us},
                    {"fuzzer_time_cost_us",
                     {{"min", r.cost_min_us}, {"median", r.cost_median_us}, {"max", r.cost_max_us}}},
                    {"seeds", {r.seed_first, r.seed_last}},
                    {"crashes_observed", r.crashes_observed},
                    {"confirmed", confirmed}});
  }
  nlohmann::json doc = {{"rows", rows}, {"total", rep.total()}, {"confirmed", rep.confirmed()}};
  return doc.dump(2) + "\n";
}

// ---- campaigns ----

namespace {

void send_record(Target& target, PduRecord& r, const CampaignConfig& c) {
  if (r.verdict == Verdict::Skipped) return;
  const Exchange ex = target.send(from_hex(r.fuzzed_hex));
  r.verdict = ex.verdict;
  r.signature = ex.signature;
  if (ex.verdict != Verdict::Ok) {
    target.restart();
    if (c.backoff_fail.count() > 0) std::this_thread::sleep_for(c.backoff_fail);
  } else if (c.backoff_ok.count() > 0) {
    std::this_thread::sleep_for(c.backoff_ok);
  }
}

}  // namespace

std::vector<PduRecord> run_campaign(const CampaignConfig& c) {
  validate_config(c);
  const CampaignInputs inputs = load_inputs(c);
  std::error_code ec;
  fs::create_directories(c.corpus_dir, ec);
  if (ec) throw CorpusWriteError("cannot create " + c.corpus_dir + ": " + ec.message());

  const std::uint64_t count = c.seed_stop - c.seed_start + 1;
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(c.workers, count));
  std::vector<std::unique_ptr<Target>> targets;
  for (unsigned w = 0; w < workers; ++w) targets.push_back(make_target(c));

  std::vector<std::vector<PduRecord>> shards(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      const std::uint64_t begin = c.seed_start + count * w / workers;
      const std::uint64_t end = c.seed_start + count * (w + 1) / workers;
      const fs::path part = fs::path(c.corpus_dir) / ("corpus.part" + std::to_string(w) + ".tsv");
      std::ofstream stream(part, std::ios::trunc);
      if (!stream) throw CorpusWriteError("cannot write " + part.string());
      for (std::uint64_t seed = begin; seed < end; ++seed) {
        const auto t0 = Clock::now();
        PduRecord r = produce(inputs, c, seed);
        send_record(*targets[w], r, c);
        r.wall_us = us_since(t0);
        stream << format_corpus_line(r) << '\n' << std::flush;
        if (!stream) throw CorpusWriteError("cannot write " + part.string());
        shards[w].push_back(std::move(r));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<PduRecord> records;
  for (auto& s : shards) {
    for (auto& r : s) records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(),
            [](const PduRecord& a, const PduRecord& b) { return a.seed < b.seed; });
  write_corpus(c.corpus_dir, records);
  for (unsigned w = 0; w < workers; ++w) {
    fs::remove(fs::path(c.corpus_dir) / ("corpus.part" + std::to_string(w) + ".tsv"), ec);
  }
  return records;
}

std::vector<PduRecord> confirm_crashes(const CampaignConfig& c, std::vector<PduRecord> candidates,
                                       std::vector<std::uint64_t>* unclassified) {
  for (auto& cand : candidates) {
    if (cand.verdict != Verdict::CrashObserved) continue;
    const auto payload = from_hex(cand.fuzzed_hex);
    bool reproduced = true;
    bool reachable = true;
    for (unsigned i = 0; i < c.replay_repeats && reproduced; ++i) {
      try {
        auto target = make_target(c);
        const Exchange ex = target->send(payload);
        reproduced = ex.verdict == Verdict::CrashObserved && ex.signature == cand.signature;
      } catch (const TargetUnreachable&) {
        reachable = false;
        break;
      }
    }
    if (!reachable) {
      if (unclassified) unclassified->push_back(cand.seed);
      continue;
    }
    cand.verdict = reproduced ? Verdict::ReplayConfirmed : Verdict::ReplayUnreproduced;
  }
  return candidates;
}

std::vector<PduRecord> run_and_confirm(const CampaignConfig& c,
                                       std::vector<std::uint64_t>* unclassified) {
  auto records = run_campaign(c);
  std::vector<PduRecord> candidates;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].verdict == Verdict::CrashObserved) {
      candidates.push_back(records[i]);
      where.push_back(i);
    }
  }
  auto done = confirm_crashes(c, std::move(candidates), unclassified);
  for (std::size_t k = 0; k < done.size(); ++k) records[where[k]] = std::move(done[k]);
  write_corpus(c.corpus_dir, records);
  return records;
}

std::vector<PduRecord> replay_records(const CampaignConfig& c, std::vector<PduRecord> records) {
  auto target = make_target(c);
  for (auto& r : records) {
    if (r.verdict == Verdict::Skipped) continue;
    const auto t0 = Clock::now();
    send_record(*target, r, c);
    r.wall_us = us_since(t0);
  }
  return confirm_crashes(c, std::move(records));
}

}  // namespace asnfuzz
