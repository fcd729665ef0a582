#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/generator.hpp"
#include "asnfuzz/schema.hpp"
#include "test_util.hpp"

namespace asnfuzz {
namespace {

TEST(Resolve, FollowsReferencesOnlyWhenAStepNeedsIt) {
  auto s = testing::demo_schema();
  const auto& cause = resolve(
      s, TypePath{"RRCSetupRequest", "rrcSetupRequest", "establishmentCause"});
  EXPECT_EQ(cause.kind, Kind::Enumerated);
  EXPECT_EQ(cause.items.size(), 8u);
  EXPECT_EQ(resolve(s, TypePath{"RRCSetupRequest"}).kind, Kind::Sequence);
  EXPECT_EQ(locate(s, TypePath{"RRCSetupRequest", "rrcSetupRequest"}).kind,
            Kind::Reference);
  const auto& elem = resolve(
      s, TypePath::parse("UECapabilityInformation.ue-CapabilityRAT-ContainerList.0.rat-Type"));
  EXPECT_EQ(elem.kind, Kind::Enumerated);
}

TEST(Resolve, ReportsFirstFailingStep) {
  auto s = testing::demo_schema();
  try {
    resolve(s, TypePath{"RRCSetupRequest", "nosuchfield"});
    FAIL();
  } catch (const PathNotFound& e) {
    EXPECT_EQ(e.step(), 2u);
  }
  try {
    resolve(s, TypePath{"Nope"});
    FAIL();
  } catch (const PathNotFound& e) {
    EXPECT_EQ(e.step(), 1u);
  }
  EXPECT_THROW(resolve(s, TypePath{"RRC-TransactionIdentifier", "x"}), PathNotFound);
}

TEST(ConformsTo, SizesAndMandatoryFields) {
  auto s = testing::demo_schema();
  const auto fixed39 = TypeExpr::bit_string(SizeConstraint::fixed(39));
  EXPECT_TRUE(conforms_to(Value::bits(val::BitString::zeros(39)), fixed39, s));
  EXPECT_FALSE(conforms_to(Value::bits(val::BitString::zeros(99)), fixed39, s));
  auto ies = Value::sequence(
      {{"ue-Identity", Value::choice("randomValue", Value::bits(val::BitString::zeros(39)))},
       {"establishmentCause", Value::enumerated(3)}});
  EXPECT_FALSE(conforms_to(ies, s.at("RRCSetupRequest-IEs"), s));
  ies.as<val::Sequence>().members.push_back(
      val::Member{"spare", Box<Value>(Value::bits(val::BitString::zeros(1)))});
  EXPECT_TRUE(conforms_to(ies, s.at("RRCSetupRequest-IEs"), s));
  EXPECT_FALSE(conforms_to(Value::enumerated(8), s.at("EstablishmentCause"), s));
  EXPECT_FALSE(conforms_to(Value::integer(4), s.at("RRC-TransactionIdentifier"), s));
  EXPECT_FALSE(conforms_to(Value::boolean(true), s.at("RRC-TransactionIdentifier"), s));
}

TEST(ConformsTo, MembersMustFollowTypeOrder) {
  auto s = parse("T ::= SEQUENCE { a BOOLEAN OPTIONAL, b BOOLEAN OPTIONAL }");
  auto ordered = Value::sequence({{"a", Value::boolean(true)}, {"b", Value::boolean(true)}});
  auto swapped = Value::sequence({{"b", Value::boolean(true)}, {"a", Value::boolean(true)}});
  EXPECT_TRUE(conforms_to(ordered, s.at("T"), s));
  EXPECT_FALSE(conforms_to(swapped, s.at("T"), s));
  EXPECT_FALSE(conforms_to(Value::sequence({{"c", Value::boolean(true)}}), s.at("T"), s));
}

TEST(Validate, DemoSchemaIsValid) {
  EXPECT_TRUE(validate_schema(testing::demo_schema()).empty());
  EXPECT_TRUE(validate_schema(testing::coverage_schema()).empty());
}

TEST(Validate, UnresolvedReference) {
  Schema s{"M", {{"A", TypeExpr::sequence({Field{"x", TypeExpr::reference("Missing"), false}})}}, {}};
  auto errors = validate_schema(s);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].kind, SchemaError::Kind::UnresolvedReference);
  EXPECT_EQ(errors[0].path.str(), "A.x");
}

TEST(Validate, DuplicateFieldName) {
  Schema s{"M",
           {{"A", TypeExpr::sequence({Field{"x", TypeExpr::boolean(), false},
                                      Field{"x", TypeExpr::boolean(), false}})}},
           {}};
  auto errors = validate_schema(s);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].kind, SchemaError::Kind::DuplicateName);
}

TEST(Validate, OtherViolations) {
  auto kinds = [](const Schema& s) {
    std::vector<SchemaError::Kind> out;
    for (const auto& e : validate_schema(s)) out.push_back(e.kind);
    return out;
  };
  using K = SchemaError::Kind;
  Schema cyclic{"M", {{"A", TypeExpr::reference("B")}, {"B", TypeExpr::reference("A")}}, {}};
  EXPECT_EQ(kinds(cyclic), (std::vector<K>{K::CyclicReference}));
  Schema bad_range{"M", {{"A", TypeExpr::integer(IntRange{BigInt(5), BigInt(1)})}}, {}};
  EXPECT_EQ(kinds(bad_range), (std::vector<K>{K::InvalidConstraint}));
  Schema bad_size{"M", {{"A", TypeExpr::octet_string(SizeConstraint{4, 2})}}, {}};
  EXPECT_EQ(kinds(bad_size), (std::vector<K>{K::InvalidConstraint}));
  Schema empty_enum{"M", {{"A", TypeExpr::enumerated({})}}, {}};
  EXPECT_EQ(kinds(empty_enum), (std::vector<K>{K::EmptyOptions}));
  Schema opt_choice{"M", {{"A", TypeExpr::choice({Field{"x", TypeExpr::boolean(), true}})}}, {}};
  EXPECT_EQ(kinds(opt_choice), (std::vector<K>{K::OptionalInChoice}));
  Schema dup_assign{"M", {{"A", TypeExpr::boolean()}, {"A", TypeExpr::boolean()}}, {}};
  EXPECT_EQ(kinds(dup_assign), (std::vector<K>{K::DuplicateName}));
  Schema endless{"M", {{"A", TypeExpr::sequence({Field{"x", TypeExpr::reference("A"), false}})}}, {}};
  EXPECT_EQ(kinds(endless), (std::vector<K>{K::UninhabitedType}));
}

TEST(Generator, ValuesConformAcrossSeeds) {
  for (const auto& s : {testing::demo_schema(), testing::coverage_schema()}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      ValueGenerator gen(s, rng);
      for (const auto& a : s.assignments) {
        ASSERT_TRUE(conforms_to(gen.generate(a.type), a.type, s)) << a.name;
      }
    }
  }
}

TEST(Generator, ChristmasTreeIncludesEveryOptional) {
  auto s = testing::demo_schema();
  Rng rng(7);
  ValueGenerator gen(s, rng, GeneratorOptions{.christmas_tree = true});
  auto v = gen.generate("RRCReconfigurationComplete");
  EXPECT_EQ(v.as<val::Sequence>().members.size(), 4u);
}

TEST(Generator, SequenceOfCountsCoverTheRange) {
  auto s = parse("L ::= SEQUENCE (SIZE (0..4)) OF BOOLEAN");
  std::set<std::size_t> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    ValueGenerator gen(s, rng);
    auto n = gen.generate("L").as<val::SequenceOf>().items.size();
    ASSERT_LE(n, 4u);
    counts.insert(n);
  }
  EXPECT_EQ(counts.size(), 5u);
}

TEST(Generator, Deterministic) {
  auto s = testing::coverage_schema();
  Rng a(42), b(42);
  ValueGenerator ga(s, a), gb(s, b);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(ga.generate("Top"), gb.generate("Top"));
}

}  // namespace
}  // namespace asnfuzz
