#include <gtest/gtest.h>

#include <map>
#include <set>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/generator.hpp"
#include "asnfuzz/schema_mutator.hpp"
#include "asnfuzz/uper.hpp"
#include "test_util.hpp"

namespace asnfuzz {
namespace {

SchemaMutationPlan one(SchemaStrategy s, const std::string& path, MutationDetail d) {
  return SchemaMutationPlan{0, {MutationRecord{s, TypePath::parse(path), std::move(d)}}};
}

TEST(Apply, ChangeSpareToBoolean) {
  auto s = testing::demo_schema();
  auto m = apply(s, one(SchemaStrategy::ChangePrimitive,
                        "RRCSetupRequest.rrcSetupRequest.spare",
                        detail::NewKind{Kind::Boolean}));
  EXPECT_EQ(resolve(m, TypePath::parse("RRCSetupRequest-IEs.spare")).kind, Kind::Boolean);
  EXPECT_TRUE(m.is_mutated());
  EXPECT_EQ(m.provenance.size(), 1u);
}

TEST(Apply, AddFuzzCodeToEstablishmentCause) {
  auto s = testing::demo_schema();
  auto m = apply(s, one(SchemaStrategy::ExtendOptions, "EstablishmentCause",
                        detail::AddedNames{{"fuzz-code1"}}));
  const auto& e = m.at("EstablishmentCause");
  ASSERT_EQ(e.items.size(), 9u);
  EXPECT_EQ(e.items.back(), "fuzz-code1");
  // Through a reference the assignment itself is extended.
  auto m2 = apply(s, one(SchemaStrategy::ExtendOptions,
                         "RRCSetupRequest-IEs.establishmentCause",
                         detail::AddedNames{{"fuzz-code1"}}));
  EXPECT_EQ(m2.at("EstablishmentCause").items.size(), 9u);
}

TEST(Apply, RemoveRandomValue) {
  auto m = apply(testing::demo_schema(),
                 one(SchemaStrategy::ReduceOptions, "InitialUE-Identity",
                     detail::RemovedNames{{"randomValue"}}));
  const auto& c = m.at("InitialUE-Identity");
  ASSERT_EQ(c.fields.size(), 1u);
  EXPECT_EQ(c.fields[0].name, "ng-5G-S-TMSI-Part1");
}

TEST(Apply, SizeFrom39To99Bits) {
  auto m = apply(testing::demo_schema(),
                 one(SchemaStrategy::ChangeSize,
                     "RRCSetupRequest.rrcSetupRequest.ue-Identity.ng-5G-S-TMSI-Part1",
                     detail::NewBounds{99, BigInt(99)}));
  const auto& t = resolve(m, TypePath::parse("InitialUE-Identity.ng-5G-S-TMSI-Part1"));
  EXPECT_EQ(t.size, SizeConstraint::fixed(99));
}

TEST(Apply, ScrambleRrcSetupRequestIEs) {
  auto m = apply(testing::demo_schema(),
                 one(SchemaStrategy::ScrambleOptions, "RRCSetupRequest-IEs",
                     detail::Permutation{{2, 0, 1}}));
  const auto& f = m.at("RRCSetupRequest-IEs").fields;
  EXPECT_EQ(f[0].name, "spare");
  EXPECT_EQ(f[1].name, "ue-Identity");
  EXPECT_EQ(f[2].name, "establishmentCause");
}

TEST(Apply, ChangeStructuredSwapsReference) {
  auto m = apply(testing::demo_schema(),
                 one(SchemaStrategy::ChangeStructured, "RRCSetupRequest.rrcSetupRequest",
                     detail::NewReference{"InitialUE-Identity"}));
  EXPECT_EQ(locate(m, TypePath::parse("RRCSetupRequest.rrcSetupRequest")).ref,
            "InitialUE-Identity");
}

TEST(Apply, RejectsInvalidRecords) {
  auto s = testing::demo_schema();
  auto reason_index = [&](const SchemaMutationPlan& p) -> long {
    try {
      apply(s, p);
    } catch (const InvalidMutation& e) {
      return static_cast<long>(e.record_index());
    }
    return -1;
  };
  EXPECT_EQ(reason_index(one(SchemaStrategy::ChangeSize, "SecurityModeComplete.integrityRequired",
                             detail::NewBounds{1, BigInt(2)})),
            0);
  EXPECT_EQ(reason_index(one(SchemaStrategy::ReduceOptions, "InitialUE-Identity",
                             detail::RemovedNames{{"randomValue", "ng-5G-S-TMSI-Part1"}})),
            0);
  EXPECT_EQ(reason_index(one(SchemaStrategy::ScrambleOptions, "RRCSetupRequest-IEs",
                             detail::Permutation{{0, 0, 1}})),
            0);
  EXPECT_EQ(reason_index(one(SchemaStrategy::ExtendOptions, "RRCSetupRequest-IEs",
                             detail::AddedFields{{Field{"spare", TypeExpr::boolean(), false}}})),
            0);
  EXPECT_EQ(reason_index(one(SchemaStrategy::ChangePrimitive, "Nope",
                             detail::NewKind{Kind::Boolean})),
            0);
  // The second record sees the schema the first produced.
  SchemaMutationPlan two{0,
                         {MutationRecord{SchemaStrategy::ReduceOptions,
                                         TypePath{"InitialUE-Identity"},
                                         detail::RemovedNames{{"randomValue"}}},
                          MutationRecord{SchemaStrategy::ReduceOptions,
                                         TypePath{"InitialUE-Identity"},
                                         detail::RemovedNames{{"randomValue"}}}}};
  EXPECT_EQ(reason_index(two), 1);
}

TEST(Plan, DeterministicPerSeed) {
  auto s = testing::demo_schema();
  std::vector<SchemaStrategy> all(std::begin(kAllSchemaStrategies), std::end(kAllSchemaStrategies));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(plan_from_seed(s, all, seed), plan_from_seed(s, all, seed));
  }
}

TEST(Plan, NoEligibleTarget) {
  auto s = parse("A ::= SEQUENCE { x BOOLEAN, y ENUMERATED {a, b} }");
  EXPECT_THROW(plan_from_seed(s, {SchemaStrategy::ChangeSize}, 0), NoEligibleTarget);
  EXPECT_NO_THROW(plan_from_seed(s, {SchemaStrategy::ChangeSize, SchemaStrategy::ChangePrimitive}, 0));
}

TEST(Plan, ExtendOptionsUsesNamingConvention) {
  auto s = testing::demo_schema();
  auto p = plan_from_seed(s, {SchemaStrategy::ExtendOptions}, 0);
  ASSERT_EQ(p.records.size(), 1u);
  const auto& d = p.records[0].detail;
  if (const auto* names = std::get_if<detail::AddedNames>(&d)) {
    for (const auto& n : names->names) EXPECT_EQ(n.rfind("fuzz-code", 0), 0u);
  } else {
    for (const auto& f : std::get<detail::AddedFields>(d).fields) {
      EXPECT_EQ(f.name.rfind("new-field", 0), 0u);
    }
  }
  const auto kind = resolve(s, p.records[0].target).kind;
  EXPECT_TRUE(kind == Kind::Enumerated || kind == Kind::Sequence || kind == Kind::Choice);
}

TEST(Plan, SerializesAsLines) {
  auto s = testing::demo_schema();
  std::vector<SchemaStrategy> all(std::begin(kAllSchemaStrategies), std::end(kAllSchemaStrategies));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = plan_from_seed(s, all, seed);
    EXPECT_EQ(parse_plan(format_plan(p)), p);
  }
  EXPECT_EQ(parse_strategy_list("ChangeSize,ScrambleOptions"),
            (std::vector<SchemaStrategy>{SchemaStrategy::ChangeSize,
                                         SchemaStrategy::ScrambleOptions}));
  EXPECT_EQ(parse_strategy_list("all").size(), 6u);
  EXPECT_THROW(parse_strategy_list("Bogus"), ConfigError);
}

bool is_under(const TypePath& p, const TypePath& root) { return p.starts_with(root); }

TEST(PlanProperty, ValidTargetedAndShapePreserving) {
  auto s = testing::demo_schema();
  std::vector<SchemaStrategy> all(std::begin(kAllSchemaStrategies), std::end(kAllSchemaStrategies));
  std::map<SchemaStrategy, int> used;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto plan = plan_from_seed(s, all, seed);
    ASSERT_FALSE(plan.records.empty());
    Schema m = apply(s, plan);
    ASSERT_TRUE(validate_schema(m).empty()) << seed;
    ASSERT_EQ(render(m), render(parse(render(m)))) << seed;

    // Nodes that are neither ancestors nor descendants of a target are
    // untouched.
    for (const auto& p : enumerate_nodes(s)) {
      bool related = false;
      for (const auto& r : plan.records) {
        if (is_under(p, r.target) || is_under(r.target, p)) related = true;
      }
      if (related) continue;
      ASSERT_EQ(locate(m, p), locate(s, p)) << seed << " " << p.str();
    }

    if (plan.records.size() == 1) {
      const auto& r = plan.records[0];
      const auto& before = resolve(s, r.target);
      const auto& after = resolve(m, r.target);
      auto names = [](const TypeExpr& t) {
        std::multiset<std::string> out(t.items.begin(), t.items.end());
        for (const auto& f : t.fields) out.insert(f.name);
        return out;
      };
      auto b = names(before), a = names(after);
      if (r.strategy == SchemaStrategy::ScrambleOptions) {
        EXPECT_EQ(a, b);
      } else if (r.strategy == SchemaStrategy::ExtendOptions) {
        EXPECT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
        EXPECT_GT(a.size(), b.size());
      } else if (r.strategy == SchemaStrategy::ReduceOptions) {
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        EXPECT_GE(a.size(), 1u);
        EXPECT_LT(a.size(), b.size());
      }
    }
    for (const auto& r : plan.records) ++used[r.strategy];
  }
  for (auto st : kAllSchemaStrategies) EXPECT_GE(used[st], 50) << strategy_name(st);
}

TEST(PlanProperty, SizeAndOrderChangesAlterEncodings) {
  auto s = testing::demo_schema();
  auto wider = apply(s, one(SchemaStrategy::ChangeSize, "RRC-TransactionIdentifier",
                            detail::NewBounds{0, BigInt(7)}));
  auto v = Value::integer(1);
  EXPECT_NE(encode(s, "RRC-TransactionIdentifier", v),
            encode(wider, "RRC-TransactionIdentifier", v));

  auto scrambled = apply(s, one(SchemaStrategy::ScrambleOptions, "SecurityModeComplete",
                                detail::Permutation{{1, 0, 2}}));
  auto original = Value::sequence({{"rrc-TransactionIdentifier", Value::integer(2)},
                                   {"integrityRequired", Value::boolean(false)},
                                   {"securityHeader", Value::octets({0x5A})}});
  auto reordered = Value::sequence({{"integrityRequired", Value::boolean(false)},
                                    {"rrc-TransactionIdentifier", Value::integer(2)},
                                    {"securityHeader", Value::octets({0x5A})}});
  EXPECT_NE(encode(s, "SecurityModeComplete", original),
            encode(scrambled, "SecurityModeComplete", reordered));
}

TEST(PlanProperty, MutatedSchemasStillGenerateAndRoundTrip) {
  auto s = testing::demo_schema();
  std::vector<SchemaStrategy> all(std::begin(kAllSchemaStrategies), std::end(kAllSchemaStrategies));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Schema m = apply(s, plan_from_seed(s, all, seed));
    Rng rng(seed);
    ValueGenerator gen(m, rng);
    for (const auto& a : m.assignments) {
      Value v = gen.generate(a.type);
      ASSERT_TRUE(conforms_to(v, a.type, m));
      auto b = encode(m, a.name, v);
      ASSERT_EQ(decode(m, a.name, b).value, v) << seed << " " << a.name;
    }
  }
}

}  // namespace
}  // namespace asnfuzz
