#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/harness.hpp"
#include "asnfuzz/io.hpp"
#include "asnfuzz/schema_text.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Demo target: length-framed UPER messages over TCP, with planted bugs"};
  std::string schema_path;
  int port = 0;
  int magic = 0x5A;
  asnfuzz::HarnessConfig cfg;
  app.add_option("--schema", schema_path, "ASN.1 schema file")->required();
  app.add_option("--port", port, "TCP port on 127.0.0.1 (0 picks one)")->check(CLI::Range(0, 65535));
  app.add_option("--root", cfg.root, "Type every frame decodes as");
  app.add_flag("--bug-parse", cfg.bug_parse, "Abort when the blob's inner length overruns it");
  app.add_flag("--bug-security", cfg.bug_security,
               "Abort on an integrity-marked message with the magic header before security setup");
  app.add_option("--magic", magic, "Header octet that triggers the security bug")->check(CLI::Range(0, 255));
  app.add_option("--flaky-rate", cfg.flaky_rate, "Probability of aborting on any frame")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--blob-field", cfg.blob_field, "Field holding the tunneled blob");
  CLI11_PARSE(app, argc, argv);
  cfg.magic = static_cast<std::uint8_t>(magic);

  try {
    const auto schema = asnfuzz::parse(asnfuzz::read_text_file(schema_path));
    asnfuzz::serve(static_cast<std::uint16_t>(port), schema, cfg);
  } catch (const asnfuzz::Error& e) {
    std::fprintf(stderr, "HARNESS error: %s\n", e.what());
    return 2;
  }
}
