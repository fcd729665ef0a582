#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "asnfuzz/pdu_fuzzer.hpp"
#include "asnfuzz/process.hpp"
#include "asnfuzz/schema.hpp"

namespace asnfuzz {

enum class Verdict {
  Ok,
  TargetUnresponsive,
  CrashObserved,
  ReplayConfirmed,
  ReplayUnreproduced,
  Skipped,  // PDU* could not be produced or framed; nothing was sent
};

std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct PduRecord {
  std::uint64_t seed = 0;
  std::string strategy;  // campaign-level label, the report's row key
  std::string applied;   // what the fuzzer actually did to this PDU
  std::string message_type;
  std::string original_hex;
  std::size_t original_bits = 0;
  std::string fuzzed_hex;
  std::size_t fuzzed_bits = 0;
  std::uint64_t fuzzer_time_cost_us = 0;
  std::uint64_t wall_us = 0;
  Verdict verdict = Verdict::Ok;
  std::string signature;  // matched log line or exit status for crashes

  bool crashed() const {
    return verdict == Verdict::CrashObserved || verdict == Verdict::ReplayConfirmed ||
           verdict == Verdict::ReplayUnreproduced;
  }
};

// Corpus lines carry everything except the timings, which differ between
// runs and live in a sidecar file so corpora compare byte for byte.
std::string corpus_header();
std::string format_corpus_line(const PduRecord& r);
PduRecord parse_corpus_line(std::string_view line);  // throws Error

// Writes <dir>/corpus.tsv and <dir>/timing.tsv. Throws CorpusWriteError.
void write_corpus(const std::string& dir, const std::vector<PduRecord>& records);
// Reads a corpus file; timings come from timing.tsv next to it if present.
std::vector<PduRecord> read_corpus(const std::string& corpus_file);

struct CampaignConfig {
  // Either a running target at host:port, or a command that starts one
  // (the driver appends "--port 0" and reads the port from its log).
  std::string target;
  std::string harness_command;
  std::string schema_path;
  std::string mutation_plan_path;
  FuzzConfig fuzz;
  std::string root = "UL-Message";
  std::string seed_pdu_hex;  // Mutation mode input
  std::string expected;      // Perturbation mode: the message being replaced
  std::uint64_t seed_start = 0;
  std::uint64_t seed_stop = 0;  // inclusive
  std::vector<std::string> message_pool;
  std::vector<std::string> crash_patterns = {"crashed"};
  std::chrono::milliseconds liveness_timeout{2000};
  std::chrono::milliseconds backoff_ok{0};
  std::chrono::milliseconds backoff_fail{0};
  unsigned replay_repeats = 3;
  std::string corpus_dir;
  unsigned workers = 1;
};

// key=value lines, '#' comments. Throws ConfigError.
CampaignConfig parse_config(std::string_view text);
CampaignConfig load_config(const std::string& path);
void set_config_value(CampaignConfig& cfg, std::string_view key, std::string_view value);
void validate_config(const CampaignConfig& cfg);  // throws ConfigError

// Row label for every record of a campaign.
std::string strategy_label(const CampaignConfig& cfg);

struct Exchange {
  Verdict verdict = Verdict::Ok;
  std::string signature;
};

class Target {
 public:
  virtual ~Target() = default;
  // Sends one framed payload on a fresh connection and classifies the
  // outcome as Ok, CrashObserved or TargetUnresponsive.
  virtual Exchange send(const std::vector<std::uint8_t>& payload) = 0;
  virtual void restart() = 0;
  virtual bool managed() const = 0;
};

class ManagedTarget : public Target {
 public:
  // Throws TargetUnreachable if the process does not come up.
  ManagedTarget(std::string command, std::vector<std::string> crash_patterns,
                std::chrono::milliseconds liveness);
  Exchange send(const std::vector<std::uint8_t>& payload) override;
  void restart() override;
  bool managed() const override { return true; }
  std::uint16_t port() const { return port_; }

 private:
  void start();
  Exchange classify_failure();
  std::optional<std::string> match(const std::vector<std::string>& lines) const;

  std::string command_;
  std::vector<std::regex> patterns_;
  std::chrono::milliseconds liveness_;
  ChildProcess proc_;
  std::uint16_t port_ = 0;
};

class RemoteTarget : public Target {
 public:
  // Throws TargetUnreachable unless host:port accepts a connection.
  RemoteTarget(std::string address, std::chrono::milliseconds liveness);
  Exchange send(const std::vector<std::uint8_t>& payload) override;
  void restart() override {}
  bool managed() const override { return false; }

 private:
  std::string host_;
  std::uint16_t port_ = 0;
  std::chrono::milliseconds liveness_;
};

std::unique_ptr<Target> make_target(const CampaignConfig& cfg);

// Schemas and inputs shared by every seed of a campaign.
struct CampaignInputs {
  Schema original;
  std::optional<Schema> mutated;
  BitBuffer seed_pdu;
};
CampaignInputs load_inputs(const CampaignConfig& cfg);

// Builds the record for one seed without sending it. ManglerFailed and
// oversize PDUs yield verdict Skipped.
PduRecord produce(const CampaignInputs& in, const CampaignConfig& cfg, std::uint64_t seed);

struct StrategyRow {
  std::string strategy;
  std::size_t pdus = 0;
  std::uint64_t wall_us = 0;
  std::uint64_t cost_min_us = 0;
  std::uint64_t cost_median_us = 0;
  std::uint64_t cost_max_us = 0;
  std::uint64_t seed_first = 0;
  std::uint64_t seed_last = 0;
  std::size_t crashes_observed = 0;
  std::vector<std::uint64_t> confirmed_seeds;
  std::vector<std::string> confirmed_signatures;
};

struct CampaignReport {
  std::vector<StrategyRow> rows;  // sorted by strategy
  std::size_t total() const;
  std::size_t confirmed() const;
};

CampaignReport emit_report(const std::vector<PduRecord>& records);
std::string report_table(const CampaignReport& report);
std::string report_json(const CampaignReport& report);

// Sends every seed in the range and persists the corpus. Does not replay.
// Throws TargetUnreachable (at start), CorpusWriteError.
std::vector<PduRecord> run_campaign(const CampaignConfig& cfg);

// Replays each crash_observed candidate replay_repeats times on fresh
// target instances; all must show the same signature for replay_confirmed.
// Candidates whose replay cannot reach the target keep their verdict and are
// listed in unclassified.
std::vector<PduRecord> confirm_crashes(const CampaignConfig& cfg,
                                       std::vector<PduRecord> candidates,
                                       std::vector<std::uint64_t>* unclassified = nullptr);

// run_campaign, then confirm_crashes on the crashes, then rewrites the corpus
// with the final verdicts.
std::vector<PduRecord> run_and_confirm(const CampaignConfig& cfg,
                                       std::vector<std::uint64_t>* unclassified = nullptr);

// Re-sends the recorded PDUs* and classifies them again, confirming crashes
// the same way a campaign does.
std::vector<PduRecord> replay_records(const CampaignConfig& cfg, std::vector<PduRecord> records);

}  // namespace asnfuzz
