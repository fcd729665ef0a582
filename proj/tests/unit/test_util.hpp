#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "asnfuzz/schema_text.hpp"
#include "asnfuzz/uper.hpp"

namespace asnfuzz::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(ASNFUZZ_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Schema demo_schema() {
  return parse(read_file(source_path("demo/demo_rrc.asn")));
}

inline Schema coverage_schema() {
  return parse(read_file(source_path("tests/fixtures/coverage.asn")));
}

// Content bits as a '0'/'1' string.
inline std::string bit_text(const BitBuffer& b) {
  std::string out;
  for (std::size_t i = 0; i < b.bit_length; ++i) {
    out += ((b.bytes[i / 8] >> (7 - i % 8)) & 1) ? '1' : '0';
  }
  return out;
}

inline BitBuffer from_bit_text(const std::string& bits) {
  BitBuffer b;
  b.bit_length = bits.size();
  b.bytes.assign(std::max<std::size_t>(1, (bits.size() + 7) / 8), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') b.bytes[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  }
  return b;
}

}  // namespace asnfuzz::testing
