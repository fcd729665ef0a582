#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asnfuzz/driver.hpp"
#include "asnfuzz/errors.hpp"
#include "asnfuzz/io.hpp"
#include "asnfuzz/pdu_fuzzer.hpp"
#include "asnfuzz/schema_mutator.hpp"
#include "asnfuzz/schema_text.hpp"
#include "asnfuzz/value_json.hpp"

namespace {

using namespace asnfuzz;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitCrashes = 3;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::string s((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return s;
  }
  return read_text_file(path);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto at = s.find(',', start);
    if (at == std::string::npos) at = s.size();
    std::string item = s.substr(start, at - start);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
    start = at + 1;
  }
  return out;
}

struct ExtractArgs {
  std::string in, out;
};

int run_extract(const ExtractArgs& a) {
  const auto ex = extract(read_input(a.in));
  write_output(a.out, ex.text);
  std::fprintf(stderr, "blocks_found=%zu ignored_tags=%zu bytes=%zu\n", ex.report.blocks_found,
               ex.report.ignored_tags, ex.report.bytes_extracted);
  return kExitOk;
}

struct ParseArgs {
  std::string schema;
  bool check = false, dump = false;
};

int run_parse(const ParseArgs& a) {
  const Schema s = parse(read_input(a.schema));
  if (a.dump) {
    std::cout << dump(s);
  } else if (a.check) {
    std::cout << "ok: " << s.assignments.size() << " assignments\n";
  } else {
    std::cout << render(s);
  }
  return kExitOk;
}

struct MutateArgs {
  std::string schema, strategies = "all", plan_in, plan_out, out;
  std::uint64_t seed = 0;
};

int run_mutate_schema(const MutateArgs& a) {
  const Schema s = parse(read_input(a.schema));
  const SchemaMutationPlan plan = a.plan_in.empty()
                                      ? plan_from_seed(s, parse_strategy_list(a.strategies), a.seed)
                                      : parse_plan(read_text_file(a.plan_in));
  const Schema m = apply(s, plan);
  if (!a.plan_out.empty()) write_text_file(a.plan_out, format_plan(plan));
  write_output(a.out, render(m));
  if (!a.out.empty() && a.out != "-") std::cout << format_plan(plan);
  return kExitOk;
}

struct FuzzOneArgs {
  std::string schema, mode = "mutate", strategies, target_field, blob_fields, pdu, root = "UL-Message",
                      plan, pool, expected, envelope, mangler;
  std::uint64_t seed = 0;
  bool christmas = false, timing = false;
};

int run_fuzz_one(const FuzzOneArgs& a) {
  const Schema s = parse(read_input(a.schema));
  FuzzConfig cfg;
  auto mode = mode_from_name(a.mode);
  if (!mode) throw ConfigError("unknown mode '" + a.mode + "'");
  cfg.mode = *mode;
  cfg.strategies = parse_pdu_strategy_list(a.strategies);
  if (!a.target_field.empty()) cfg.target_field = a.target_field;
  if (!a.mangler.empty()) cfg.external_mangler = a.mangler;
  if (!a.envelope.empty()) cfg.envelope = a.envelope;
  cfg.blob_fields = split_csv(a.blob_fields);
  cfg.christmas_tree = a.christmas;
  cfg.seed = a.seed;

  FuzzOutcome out;
  switch (cfg.mode) {
    case FuzzMode::Mutation: {
      if (a.pdu.empty()) throw ConfigError("mutate mode needs --pdu");
      out = mutate_pdu(s, a.root, BitBuffer::from_bytes(from_hex(a.pdu)), cfg);
      break;
    }
    case FuzzMode::Generation: {
      const Schema m = a.plan.empty() ? s : apply(s, parse_plan(read_text_file(a.plan)));
      out = generate_pdu(s, m, split_csv(a.pool), cfg);
      break;
    }
    case FuzzMode::Perturbation:
      out = perturb(s, a.expected, split_csv(a.pool), a.seed, cfg.envelope);
      break;
  }
  nlohmann::ordered_json j;
  j["message_type"] = out.message_type;
  j["strategy_applied"] = out.strategy_applied;
  j["pdu_star"] = to_hex(out.pdu_star.bytes);
  j["bits"] = out.pdu_star.bit_length;
  if (a.timing) j["fuzzer_time_cost_us"] = out.fuzzer_time_cost_us;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct CampaignArgs {
  std::string config, seed_range, mode, strategies, schema, plan, target, harness, corpus;
  unsigned workers = 0;
  bool json = false;
};

CampaignConfig campaign_config(const CampaignArgs& a) {
  CampaignConfig c = a.config.empty() ? CampaignConfig{} : load_config(a.config);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) set_config_value(c, key, v);
  };
  set("seed_range", a.seed_range);
  set("mode", a.mode);
  set("strategies", a.strategies);
  set("schema", a.schema);
  set("mutation_plan", a.plan);
  set("corpus_dir", a.corpus);
  if (!a.target.empty()) {
    c.target = a.target;
    c.harness_command.clear();
  }
  if (!a.harness.empty()) {
    c.harness_command = a.harness;
    c.target.clear();
  }
  if (a.workers > 0) c.workers = a.workers;
  return c;
}

int run_campaign_cmd(const CampaignArgs& a) {
  const CampaignConfig c = campaign_config(a);
  validate_config(c);
  std::vector<std::uint64_t> unclassified;
  const auto records = run_and_confirm(c, &unclassified);
  const CampaignReport rep = emit_report(records);
  write_text_file(c.corpus_dir + "/report.txt", report_table(rep));
  write_text_file(c.corpus_dir + "/report.json", report_json(rep));
  std::cout << (a.json ? report_json(rep) : report_table(rep));
  for (auto seed : unclassified) {
    std::cerr << "seed " << seed << ": replay could not reach the target, left unclassified\n";
  }
  return rep.confirmed() > 0 ? kExitCrashes : kExitOk;
}

struct ReplayArgs {
  std::string corpus, target, harness, config, out;
  unsigned repeats = 0;
};

int run_replay(const ReplayArgs& a) {
  CampaignConfig c = a.config.empty() ? CampaignConfig{} : load_config(a.config);
  if (!a.target.empty()) {
    c.target = a.target;
    c.harness_command.clear();
  }
  if (!a.harness.empty()) {
    c.harness_command = a.harness;
    c.target.clear();
  }
  if (a.repeats > 0) c.replay_repeats = a.repeats;
  if (c.target.empty() == c.harness_command.empty()) {
    throw ConfigError("give exactly one of --target and --harness");
  }
  const auto before = read_corpus(a.corpus);
  const auto after = replay_records(c, before);
  std::string text = corpus_header() + "\n";
  std::size_t changed = 0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    text += format_corpus_line(after[i]) + "\n";
    changed += format_corpus_line(after[i]) != format_corpus_line(before[i]);
  }
  write_output(a.out, text);
  std::cerr << "replayed " << after.size() << " records, " << changed << " differ\n";
  const bool confirmed = std::any_of(after.begin(), after.end(), [](const PduRecord& r) {
    return r.verdict == Verdict::ReplayConfirmed;
  });
  return confirmed ? kExitCrashes : kExitOk;
}

struct ReportArgs {
  std::string corpus;
  bool json = false;
};

int run_report(const ReportArgs& a) {
  const auto rep = emit_report(read_corpus(a.corpus));
  std::cout << (a.json ? report_json(rep) : report_table(rep));
  return kExitOk;
}

struct CodecArgs {
  std::string schema, type, in;
};

int run_encode(const CodecArgs& a) {
  const Schema s = parse(read_input(a.schema));
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(read_input(a.in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad JSON: ") + e.what());
  }
  const BitBuffer b = encode(s, a.type, value_from_json(s, s.at(a.type), j));
  std::cout << to_hex(b.bytes) << " " << b.bit_length << "\n";
  return kExitOk;
}

int run_decode(const CodecArgs& a) {
  const Schema s = parse(read_input(a.schema));
  const Value v = decode_exact(s, a.type, BitBuffer::from_bytes(from_hex(a.in)));
  std::cout << value_to_json(s, s.at(a.type), v).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema-driven ASN.1 UPER fuzzer"};
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* c_extract = app.add_subcommand("extract", "Pull ASN.1 blocks out of a specification text");
  c_extract->add_option("--in", ex.in, "Input document ('-' for stdin)")->required();
  c_extract->add_option("--out", ex.out, "Output schema file (default stdout)");

  ParseArgs pa;
  auto* c_parse = app.add_subcommand("parse", "Parse a schema and print it in canonical form");
  c_parse->add_option("--schema", pa.schema, "Schema file")->required();
  c_parse->add_flag("--check", pa.check, "Only report whether it parses");
  c_parse->add_flag("--dump", pa.dump, "Print the structural dump");

  MutateArgs mu;
  auto* c_mutate = app.add_subcommand("mutate-schema", "Mutate a schema from a seed or a plan");
  c_mutate->add_option("--schema", mu.schema, "Schema file")->required();
  c_mutate->add_option("--strategies", mu.strategies, "Comma-separated schema strategies or 'all'");
  c_mutate->add_option("--seed", mu.seed, "Plan seed");
  c_mutate->add_option("--mutation-plan", mu.plan_in, "Apply this plan instead of drawing one");
  c_mutate->add_option("--plan-out", mu.plan_out, "Write the plan here");
  c_mutate->add_option("--out", mu.out, "Mutated schema file (default stdout)");

  FuzzOneArgs fo;
  auto* c_fuzz = app.add_subcommand("fuzz-one", "Produce one PDU* and print it as JSON");
  c_fuzz->add_option("--schema", fo.schema, "Original schema file")->required();
  c_fuzz->add_option("--mode", fo.mode, "mutate, generate or perturb");
  c_fuzz->add_option("--seed", fo.seed, "Seed");
  c_fuzz->add_option("--strategies", fo.strategies, "PDU strategies, comma-separated or 'all'");
  c_fuzz->add_option("--target-field", fo.target_field, "Only mutate fields of this name");
  c_fuzz->add_flag("--christmas-tree", fo.christmas, "Include every optional field");
  c_fuzz->add_option("--blob-fields", fo.blob_fields, "Fields mutated as raw octet blobs");
  c_fuzz->add_option("--external-mangler", fo.mangler, "Command that rewrites field bytes");
  c_fuzz->add_option("--pdu", fo.pdu, "Input PDU as hex (mutate mode)");
  c_fuzz->add_option("--root", fo.root, "Type the input PDU decodes as");
  c_fuzz->add_option("--mutation-plan", fo.plan, "Schema mutation plan (generate mode)");
  c_fuzz->add_option("--pool", fo.pool, "Message types to draw from");
  c_fuzz->add_option("--expected", fo.expected, "Message replaced in perturb mode");
  c_fuzz->add_option("--envelope", fo.envelope, "CHOICE type wrapping generated messages");
  c_fuzz->add_flag("--timing", fo.timing, "Also print the fuzzer time cost");

  CampaignArgs ca;
  auto* c_campaign = app.add_subcommand("campaign", "Run a fuzzing campaign against a target");
  c_campaign->add_option("--config", ca.config, "key=value campaign file");
  c_campaign->add_option("--seed-range", ca.seed_range, "Seeds as first..last");
  c_campaign->add_option("--mode", ca.mode, "mutate, generate or perturb");
  c_campaign->add_option("--strategies", ca.strategies, "PDU strategies");
  c_campaign->add_option("--schema", ca.schema, "Original schema file");
  c_campaign->add_option("--mutation-plan", ca.plan, "Schema mutation plan");
  c_campaign->add_option("--target", ca.target, "Running target host:port");
  c_campaign->add_option("--harness", ca.harness, "Command starting a managed target");
  c_campaign->add_option("--workers", ca.workers, "Parallel workers");
  c_campaign->add_option("--corpus", ca.corpus, "Corpus directory");
  c_campaign->add_flag("--json", ca.json, "Print the report as JSON");

  ReplayArgs re;
  auto* c_replay = app.add_subcommand("replay", "Re-send a corpus and classify it again");
  c_replay->add_option("--corpus", re.corpus, "corpus.tsv")->required();
  c_replay->add_option("--target", re.target, "Running target host:port");
  c_replay->add_option("--harness", re.harness, "Command starting a managed target");
  c_replay->add_option("--config", re.config, "Campaign file supplying target and patterns");
  c_replay->add_option("--replay-repeats", re.repeats, "Replays per crash");
  c_replay->add_option("--out", re.out, "Replayed corpus (default stdout)");

  ReportArgs rp;
  auto* c_report = app.add_subcommand("report", "Summarize a corpus per strategy");
  c_report->add_option("--corpus", rp.corpus, "corpus.tsv")->required();
  c_report->add_flag("--json", rp.json, "Machine-readable output");

  CodecArgs en, de;
  auto* c_encode = app.add_subcommand("encode", "Encode a JSON value with UPER");
  c_encode->add_option("--schema", en.schema, "Schema file")->required();
  c_encode->add_option("--type", en.type, "Type name")->required();
  c_encode->add_option("--json", en.in, "JSON file ('-' for stdin)")->required();
  auto* c_decode = app.add_subcommand("decode", "Decode UPER hex to JSON");
  c_decode->add_option("--schema", de.schema, "Schema file")->required();
  c_decode->add_option("--type", de.type, "Type name")->required();
  c_decode->add_option("--hex", de.in, "Encoded bytes as hex")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_extract) return run_extract(ex);
    if (*c_parse) return run_parse(pa);
    if (*c_mutate) return run_mutate_schema(mu);
    if (*c_fuzz) return run_fuzz_one(fo);
    if (*c_campaign) return run_campaign_cmd(ca);
    if (*c_replay) return run_replay(re);
    if (*c_report) return run_report(rp);
    if (*c_encode) return run_encode(en);
    if (*c_decode) return run_decode(de);
  } catch (const asnfuzz::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
