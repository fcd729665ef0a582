#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "asnfuzz/bigint.hpp"
#include "asnfuzz/mutation.hpp"
#include "asnfuzz/schema.hpp"

namespace asnfuzz {

struct ExtractionReport {
  std::size_t blocks_found = 0;
  std::size_t bytes_extracted = 0;
  std::size_t ignored_tags = 0;
};

struct Extraction {
  std::string text;
  ExtractionReport report;
};

// Concatenates, in document order, every region strictly between an
// "-- ASN1START" (or "-- ASN1TSTART") line and the following "-- ASN1STOP"
// line. "-- TAG-<NAME>-START/STOP" lines inside a region are dropped.
// Throws ExtractError.
Extraction extract(std::string_view document);

struct ParseOptions {
  // Values for named bounds such as maxPLMN-r11 in constraints.
  std::map<std::string, BigInt, std::less<>> constants;
};

// Parses the supported ASN.1 subset. Throws ParseError or
// UnsupportedConstruct; the result passes validate_schema (otherwise a
// ParseError naming the first schema error is thrown).
Schema parse(std::string_view text, const ParseOptions& options = {});

// Parses a single type expression, e.g. "BIT STRING (SIZE (8))".
TypeExpr parse_type(std::string_view text, const ParseOptions& options = {});

// Canonical text: LF endings, two-space indentation, provenance as leading
// "-- mutation" comment lines. parse(render(s)) == s.
std::string render(const Schema& schema);
std::string render_type(const TypeExpr& type, int indent = 0);

// Indented structural listing used for golden comparisons.
std::string dump(const Schema& schema);

// One-line record form: "<strategy>\t<path>\t<detail>".
std::string format_record(const MutationRecord& record);
MutationRecord parse_record(std::string_view line);

}  // namespace asnfuzz
