#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/schema_text.hpp"
#include "test_util.hpp"

namespace asnfuzz {
namespace {

using testing::read_file;
using testing::source_path;

TEST(Extract, ThreeBlocksMatchGolden) {
  auto ex = extract(read_file(source_path("tests/fixtures/three_blocks.txt")));
  EXPECT_EQ(ex.report.blocks_found, 3u);
  EXPECT_EQ(ex.report.ignored_tags, 6u);
  EXPECT_EQ(ex.text, read_file(source_path("tests/fixtures/three_blocks.golden.asn")));
  EXPECT_EQ(ex.report.bytes_extracted, ex.text.size());
  EXPECT_EQ(parse(ex.text).assignments.size(), 4u);
}

TEST(Extract, TagLinesAreDropped) {
  auto ex = extract("-- ASN1START\n-- TAG-RRCSETUPREQUEST-START\nA ::= BOOLEAN\n"
                    "-- TAG-RRCSETUPREQUEST-STOP\n-- ASN1STOP\n");
  EXPECT_EQ(ex.text, "A ::= BOOLEAN\n");
  EXPECT_EQ(ex.report.ignored_tags, 2u);
}

TEST(Extract, OutputIsSubsequenceOfInput) {
  const std::string doc = read_file(source_path("tests/fixtures/three_blocks.txt"));
  auto ex = extract(doc);
  std::size_t j = 0;
  for (char c : ex.text) {
    j = doc.find(c, j);
    ASSERT_NE(j, std::string::npos);
    ++j;
  }
}

TEST(Extract, Errors) {
  try {
    extract(read_file(source_path("tests/fixtures/unbalanced.txt")));
    FAIL();
  } catch (const ExtractError& e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::UnbalancedTags);
  }
  try {
    extract("just prose\n");
    FAIL();
  } catch (const ExtractError& e) {
    EXPECT_EQ(e.kind(), ExtractError::Kind::NoBlocksFound);
  }
  EXPECT_THROW(extract("-- ASN1STOP\n"), ExtractError);
  EXPECT_THROW(extract("-- ASN1START\n-- ASN1START\n-- ASN1STOP\n"), ExtractError);
}

TEST(Parse, IntegerRange) {
  auto s = parse("T ::= INTEGER (0..3)");
  ASSERT_EQ(s.assignments.size(), 1u);
  const auto& t = s.assignments[0].type;
  EXPECT_EQ(t.kind, Kind::Integer);
  EXPECT_EQ(*t.range.lower, 0);
  EXPECT_EQ(*t.range.upper, 3);
}

TEST(Parse, SetIsUnsupported) {
  try {
    parse(read_file(source_path("tests/fixtures/unsupported_set.asn")));
    FAIL();
  } catch (const UnsupportedConstruct& e) {
    EXPECT_EQ(e.construct(), "SET");
  }
}

TEST(Parse, OtherUnsupportedConstructsAreNamed) {
  auto construct = [](const std::string& text) {
    try {
      parse(text);
    } catch (const UnsupportedConstruct& e) {
      return e.construct();
    }
    return std::string("accepted");
  };
  EXPECT_EQ(construct("T ::= REAL"), "REAL");
  EXPECT_EQ(construct("T ::= NULL"), "NULL");
  EXPECT_EQ(construct("T ::= SEQUENCE { a BOOLEAN DEFAULT TRUE }"), "DEFAULT");
  EXPECT_EQ(construct("T ::= ENUMERATED { a(0), b(1) }"), "numbered enumeration item");
  EXPECT_EQ(construct("t INTEGER ::= 5"), "value assignment");
  EXPECT_EQ(construct("T {X} ::= SEQUENCE { a X }"), "parameterized type");
  EXPECT_EQ(construct("T ::= INTEGER (0..3, ...)"), "extensible constraint");
  EXPECT_EQ(construct("M DEFINITIONS ::= BEGIN IMPORTS A FROM B; END"), "IMPORTS");
}

TEST(Parse, ErrorsCarryPosition) {
  try {
    parse("A ::= BOOLEAN\nB ::= SEQUENCE {\n  x INTEGER (0..\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.token(), "}");
  }
  try {
    parse("A ::= CHOICE { x BOOLEAN OPTIONAL }");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.token(), "OPTIONAL");
  }
  EXPECT_THROW(parse("A ::= INTEGER (1..maxThings)"), ParseError);
  EXPECT_THROW(parse("A ::= B"), ParseError);  // unresolved reference
  EXPECT_THROW(parse("A ::= BOOLEAN\nA ::= BOOLEAN"), ParseError);
  EXPECT_THROW(parse("A ::= BOOLEAN $"), ParseError);
}

TEST(Parse, NamedConstantsFromTable) {
  ParseOptions opts;
  opts.constants["maxPLMN-r11"] = 6;
  auto s = parse("A ::= INTEGER (1..maxPLMN-r11)\n"
                 "B ::= SEQUENCE (SIZE (1..maxPLMN-r11)) OF A",
                 opts);
  EXPECT_EQ(*s.assignments[0].type.range.upper, 6);
  EXPECT_EQ(*s.assignments[1].type.size->upper, 6u);
}

TEST(Parse, CommentsAndExtensionAdditions) {
  auto s = parse(
      "A ::= SEQUENCE { -- leading comment\n"
      "  x BOOLEAN, -- trailing -- y INTEGER (0..1),\n"
      "  ...,\n"
      "  [[ z BOOLEAN OPTIONAL ]],\n"
      "  w BOOLEAN OPTIONAL\n"
      "}\n"
      "E ::= ENUMERATED { a, b, ..., c }\n");
  const auto& a = s.assignments[0].type;
  ASSERT_EQ(a.fields.size(), 2u);
  EXPECT_EQ(a.fields[0].name, "x");
  EXPECT_EQ(a.fields[1].name, "y");
  EXPECT_TRUE(a.extensible);
  const auto& e = s.assignments[1].type;
  EXPECT_EQ(e.items, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(e.extensible);
}

TEST(Parse, SequenceOfSizeSpellings) {
  auto s = parse("A ::= SEQUENCE SIZE (1..4) OF BOOLEAN\n"
                 "B ::= SEQUENCE (SIZE (1..4)) OF BOOLEAN");
  EXPECT_EQ(s.assignments[0].type, s.assignments[1].type);
}

TEST(Parse, FigureSnippetHasFourAssignments) {
  auto s = parse(read_file(source_path("tests/fixtures/three_blocks.golden.asn")));
  ASSERT_EQ(s.assignments.size(), 4u);
  EXPECT_EQ(s.assignments[0].name, "RRCSetupRequest");
  EXPECT_EQ(s.assignments[3].type.items.size(), 8u);
}

TEST(Parse, DemoSchemaMatchesGoldenDump) {
  auto s = testing::demo_schema();
  EXPECT_GE(s.assignments.size(), 12u);
  bool seen[9] = {};
  std::function<void(const TypeExpr&)> walk = [&](const TypeExpr& t) {
    seen[static_cast<int>(t.kind)] = true;
    for (const auto& f : t.fields) walk(f.type);
    if (t.element) walk(*t.element);
  };
  for (const auto& a : s.assignments) walk(a.type);
  for (bool b : seen) EXPECT_TRUE(b);
  EXPECT_EQ(dump(s), read_file(source_path("tests/fixtures/demo_rrc.dump")));
}

TEST(Render, RoundTripsFixtures) {
  for (const auto& s : {testing::demo_schema(), testing::coverage_schema()}) {
    const std::string text = render(s);
    EXPECT_EQ(parse(text), s);
    EXPECT_EQ(render(parse(text)), text);
  }
}

TEST(Render, ExtensibleEnumeratedEndsWithMarker) {
  auto s = parse("E ::= ENUMERATED { a, b, ... }");
  EXPECT_EQ(render(s), "E ::= ENUMERATED {a, b, ...}\n\n");
}

TEST(Render, CanonicalLayout) {
  auto s = parse("M DEFINITIONS AUTOMATIC TAGS ::= BEGIN\n"
                 "S ::= SEQUENCE { a INTEGER (5), b BIT STRING (SIZE (1..MAX)) OPTIONAL,"
                 " c SEQUENCE { d OCTET STRING (SIZE (3)) }, ... }\n"
                 "L ::= SEQUENCE (SIZE (0..2)) OF INTEGER (-3..MAX)\n"
                 "X ::= SEQUENCE {}\nEND\n");
  EXPECT_EQ(render(s),
            "M DEFINITIONS AUTOMATIC TAGS ::=\nBEGIN\n\n"
            "S ::= SEQUENCE {\n"
            "  a INTEGER (5),\n"
            "  b BIT STRING (SIZE (1..MAX)) OPTIONAL,\n"
            "  c SEQUENCE {\n"
            "    d OCTET STRING (SIZE (3))\n"
            "  },\n"
            "  ...\n"
            "}\n\n"
            "L ::= SEQUENCE (SIZE (0..2)) OF INTEGER (-3..MAX)\n\n"
            "X ::= SEQUENCE {}\n\n"
            "END\n");
}

TEST(Render, ProvenanceAsLeadingComments) {
  auto s = testing::demo_schema();
  s.provenance.push_back(MutationRecord{
      SchemaStrategy::ExtendOptions, TypePath{"EstablishmentCause"},
      detail::AddedNames{{"fuzz-code1"}}});
  s.provenance.push_back(MutationRecord{
      SchemaStrategy::ExtendOptions, TypePath{"RRCSetupRequest-IEs"},
      detail::AddedFields{{Field{"new-field1", TypeExpr::reference("EstablishmentCause"), false},
                           Field{"new-field2", TypeExpr::sequence({Field{"q", TypeExpr::boolean(), true}}), false}}}});
  const std::string text = render(s);
  EXPECT_EQ(text.rfind("-- mutation ExtendOptions\tEstablishmentCause\tfuzz-code1\n", 0), 0u);
  EXPECT_NE(text.find("-- mutation ExtendOptions\tRRCSetupRequest-IEs\t"
                      "{new-field1 EstablishmentCause, new-field2 SEQUENCE {q BOOLEAN OPTIONAL}}\n"),
            std::string::npos);
  EXPECT_EQ(parse(text), s);
}

TEST(Records, FormatParseRoundTrip) {
  std::vector<MutationRecord> records = {
      {SchemaStrategy::ChangePrimitive, TypePath::parse("A.b.spare"), detail::NewKind{Kind::Boolean}},
      {SchemaStrategy::ChangePrimitive, TypePath::parse("A.x"), detail::NewKind{Kind::BitString}},
      {SchemaStrategy::ChangeStructured, TypePath::parse("A.b"), detail::NewReference{"C"}},
      {SchemaStrategy::ReduceOptions, TypePath::parse("C"), detail::RemovedNames{{"a", "b"}}},
      {SchemaStrategy::ScrambleOptions, TypePath::parse("C"), detail::Permutation{{2, 0, 1}}},
      {SchemaStrategy::ChangeSize, TypePath::parse("L.0.x"), detail::NewBounds{99, BigInt(99)}},
      {SchemaStrategy::ChangeSize, TypePath::parse("I"), detail::NewBounds{-5, std::nullopt}},
  };
  for (const auto& r : records) {
    EXPECT_EQ(parse_record(format_record(r)), r) << format_record(r);
  }
  EXPECT_EQ(format_record(records[5]), "ChangeSize\tL.0.x\t99..99");
  EXPECT_THROW(parse_record("Bogus\tA\tx"), Error);
}

}  // namespace
}  // namespace asnfuzz
