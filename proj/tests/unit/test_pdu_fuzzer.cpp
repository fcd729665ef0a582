#include <gtest/gtest.h>

#include <map>
#include <set>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/generator.hpp"
#include "asnfuzz/mangler.hpp"
#include "asnfuzz/pdu_fuzzer.hpp"
#include "asnfuzz/process.hpp"
#include "asnfuzz/schema_mutator.hpp"
#include "test_util.hpp"

namespace asnfuzz {
namespace {

const std::vector<std::string> kPool = {
    "RRCSetupRequest",       "RRCSetupComplete",        "ULInformationTransfer",
    "SecurityModeComplete",  "UECapabilityInformation", "RRCReconfigurationComplete",
};

Value ul_info(std::vector<std::uint8_t> nas, bool integrity = false, std::uint8_t header = 0) {
  return Value::choice("ulInformationTransfer",
                       Value::sequence({{"dedicatedInfoNAS", Value::octets(std::move(nas))},
                                        {"integrityRequired", Value::boolean(integrity)},
                                        {"securityHeader", Value::octets({header})}}));
}

Value reconfig_complete_bare() {
  return Value::choice("rrcReconfigurationComplete",
                       Value::sequence({{"rrc-TransactionIdentifier", Value::integer(2)}}));
}

Value capability_info() {
  return Value::choice(
      "ueCapabilityInformation",
      Value::sequence({{"rrc-TransactionIdentifier", Value::integer(1)},
                       {"ue-CapabilityRAT-ContainerList", Value::sequence_of({})},
                       {"featureGroupIndicators", Value::bits(val::BitString::zeros(12))}}));
}

const val::Sequence& message_body(const Value& v) {
  return v.as<val::Choice>().value->as<val::Sequence>();
}

FuzzConfig config(std::vector<PduStrategy> strategies, std::uint64_t seed) {
  FuzzConfig c;
  c.strategies = std::move(strategies);
  c.seed = seed;
  return c;
}

Schema widened_identity_schema(const Schema& s) {
  SchemaMutationPlan plan;
  for (const char* alt : {"InitialUE-Identity.ng-5G-S-TMSI-Part1", "InitialUE-Identity.randomValue"}) {
    plan.records.push_back({SchemaStrategy::ChangeSize, TypePath::parse(alt),
                            detail::NewBounds{99, BigInt(99)}});
  }
  return apply(s, plan);
}

class PduFuzzer : public ::testing::Test {
 protected:
  Schema schema = testing::demo_schema();
  BitBuffer enc(const Value& v) { return encode(schema, "UL-Message", v); }
  Value dec(const BitBuffer& b) { return decode_exact(schema, "UL-Message", b); }
};

TEST_F(PduFuzzer, IdentityConfigReencodesUnchanged) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    ValueGenerator gen(schema, rng);
    const BitBuffer pdu = enc(gen.generate("UL-Message"));
    auto out = mutate_pdu(schema, "UL-Message", pdu, config({}, seed));
    EXPECT_EQ(out.pdu_star, enc(decode(schema, "UL-Message", pdu).value));
    EXPECT_EQ(out.strategy_applied, "none");
  }
}

TEST_F(PduFuzzer, UnboundedOctetStringBecomesThousandOctets) {
  const BitBuffer pdu = enc(ul_info({0x01, 0x02, 0x03}));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = config({PduStrategy::OctetString}, seed);
    cfg.target_field = "dedicatedInfoNAS";
    auto out = mutate_pdu(schema, "UL-Message", pdu, cfg);
    const auto nas = message_body(dec(out.pdu_star)).find("dedicatedInfoNAS")->as<val::OctetString>();
    EXPECT_EQ(nas.bytes.size(), 1000u);
    EXPECT_EQ(out.message_type, "ULInformationTransfer");
  }
}

TEST_F(PduFuzzer, UnboundedBitStringBecomesEightThousandBits) {
  const BitBuffer pdu = enc(capability_info());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = config({PduStrategy::BitString}, seed);
    cfg.target_field = "featureGroupIndicators";
    auto out = mutate_pdu(schema, "UL-Message", pdu, cfg);
    const auto fgi =
        message_body(dec(out.pdu_star)).find("featureGroupIndicators")->as<val::BitString>();
    EXPECT_EQ(fgi.bit_length, 8000u);
  }
}

TEST_F(PduFuzzer, BoundedStringsGetInRangeLengths) {
  // securityHeader is SIZE (1); the spare bit is SIZE (1).
  const BitBuffer pdu = enc(ul_info({0x00}));
  std::set<std::uint8_t> headers;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto cfg = config({PduStrategy::OctetString}, seed);
    cfg.target_field = "securityHeader";
    auto v = dec(mutate_pdu(schema, "UL-Message", pdu, cfg).pdu_star);
    const auto& h = message_body(v).find("securityHeader")->as<val::OctetString>();
    ASSERT_EQ(h.bytes.size(), 1u);
    headers.insert(h.bytes[0]);
  }
  EXPECT_GT(headers.size(), 100u);
}

TEST_F(PduFuzzer, ChristmasTreeIncludesAllThreeOptionals) {
  const BitBuffer pdu = enc(reconfig_complete_bare());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto cfg = config({}, seed);
    cfg.christmas_tree = true;
    auto v = dec(mutate_pdu(schema, "UL-Message", pdu, cfg).pdu_star);
    const auto& body = message_body(v);
    EXPECT_EQ(body.members.size(), 4u);
    for (const char* f : {"delayBudget", "lateNonCriticalExtension", "measAvailable"}) {
      EXPECT_NE(body.find(f), nullptr) << f;
    }
  }
}

TEST_F(PduFuzzer, ChristmasTreeReachesNestedOptionals) {
  Value v = Value::choice(
      "rrcSetupComplete",
      Value::sequence({{"rrc-TransactionIdentifier", Value::integer(0)},
                       {"selectedPLMN-Identity", Value::integer(1)},
                       {"dedicatedInfoNAS", Value::octets({})}}));
  auto cfg = config({}, 7);
  cfg.christmas_tree = true;
  auto out = dec(mutate_pdu(schema, "UL-Message", enc(v), cfg).pdu_star);
  const auto& body = message_body(out);
  ASSERT_NE(body.find("registeredMME"), nullptr);
  EXPECT_NE(body.find("registeredMME")->as<val::Sequence>().find("plmn-Identity"), nullptr);
  EXPECT_NE(body.find("guami-Type"), nullptr);
  EXPECT_NE(body.find("s-NSSAI-List"), nullptr);
}

TEST_F(PduFuzzer, BooleanTakesBothValues) {
  const BitBuffer pdu = enc(ul_info({0x00}));
  std::set<bool> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    auto out = mutate_pdu(schema, "UL-Message", pdu, config({PduStrategy::Boolean}, seed));
    seen.insert(message_body(dec(out.pdu_star)).find("integrityRequired")->as<val::Boolean>().value);
  }
  EXPECT_EQ(seen, (std::set<bool>{false, true}));
}

TEST_F(PduFuzzer, IntegerStaysInsideConstraint) {
  Value v = Value::choice("rrcReconfigurationComplete",
                          Value::sequence({{"rrc-TransactionIdentifier", Value::integer(0)},
                                           {"delayBudget", Value::integer(0)}}));
  std::set<long> seen;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto cfg = config({PduStrategy::Integer}, seed);
    cfg.target_field = "delayBudget";
    auto body = message_body(dec(mutate_pdu(schema, "UL-Message", enc(v), cfg).pdu_star));
    seen.insert(body.find("delayBudget")->as<val::Integer>().value.convert_to<long>());
  }
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(*seen.begin(), -8);
  EXPECT_EQ(*seen.rbegin(), 7);
}

TEST_F(PduFuzzer, EnumeratedCoversAllIndices) {
  Rng rng(3);
  ValueGenerator gen(schema, rng);
  const Value v = Value::choice("rrcSetupRequest", gen.generate("RRCSetupRequest"));
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto out = mutate_pdu(schema, "UL-Message", enc(v), config({PduStrategy::Enumerated}, seed));
    const auto ies = message_body(dec(out.pdu_star)).find("rrcSetupRequest")->as<val::Sequence>();
    seen.insert(ies.find("establishmentCause")->as<val::Enumerated>().index);
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST_F(PduFuzzer, OptionalTogglesPresence) {
  Value v = Value::choice("rrcReconfigurationComplete",
                          Value::sequence({{"rrc-TransactionIdentifier", Value::integer(0)},
                                           {"measAvailable", Value::boolean(true)}}));
  auto cfg = config({PduStrategy::Optional}, 0);
  cfg.target_field = "measAvailable";
  auto body = message_body(dec(mutate_pdu(schema, "UL-Message", enc(v), cfg).pdu_star));
  EXPECT_EQ(body.find("measAvailable"), nullptr);

  // An absent target is materialized, then toggled away again; with only the
  // scope step and no strategy it stays present.
  auto bare = enc(reconfig_complete_bare());
  auto cfg2 = config({}, 0);
  cfg2.target_field = "lateNonCriticalExtension";
  auto out = mutate_pdu(schema, "UL-Message", bare, cfg2);
  EXPECT_NE(message_body(dec(out.pdu_star)).find("lateNonCriticalExtension"), nullptr);
}

TEST_F(PduFuzzer, AppendGrowsBlobByOneTo256) {
  const std::vector<std::uint8_t> nas = {0x05, 1, 2, 3, 4, 5};
  const BitBuffer pdu = enc(ul_info(nas));
  std::size_t min_k = 1000, max_k = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    auto cfg = config({PduStrategy::Append}, seed);
    cfg.blob_fields = {"dedicatedInfoNAS"};
    auto body = message_body(dec(mutate_pdu(schema, "UL-Message", pdu, cfg).pdu_star));
    const auto& out = body.find("dedicatedInfoNAS")->as<val::OctetString>().bytes;
    ASSERT_GT(out.size(), nas.size());
    EXPECT_TRUE(std::equal(nas.begin(), nas.end(), out.begin()));
    const std::size_t k = out.size() - nas.size();
    min_k = std::min(min_k, k);
    max_k = std::max(max_k, k);
  }
  EXPECT_EQ(min_k, 1u);
  EXPECT_EQ(max_k, 256u);
}

TEST_F(PduFuzzer, BlobFieldsAreMangledNotReplaced) {
  const std::vector<std::uint8_t> nas = {0x05, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const BitBuffer pdu = enc(ul_info(nas));
  int changed = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto cfg = config({PduStrategy::OctetString}, seed);
    cfg.blob_fields = {"dedicatedInfoNAS"};
    cfg.target_field = "dedicatedInfoNAS";
    auto out = mutate_pdu(schema, "UL-Message", pdu, cfg);
    const auto b = message_body(dec(out.pdu_star)).find("dedicatedInfoNAS")->as<val::OctetString>().bytes;
    EXPECT_LT(b.size(), nas.size() + 4 * 16 + 1);
    if (b != nas) ++changed;
    EXPECT_NE(out.strategy_applied.find("(blob)"), std::string::npos);
  }
  EXPECT_GT(changed, 150);
}

TEST_F(PduFuzzer, ExternalManglerPipesFieldBytes) {
  const BitBuffer pdu = enc(ul_info({0x61, 0x62, 0x63}));
  auto cfg = config({PduStrategy::OctetString}, 1);
  cfg.target_field = "dedicatedInfoNAS";
  cfg.external_mangler = "tr a-z A-Z";
  auto body = message_body(dec(mutate_pdu(schema, "UL-Message", pdu, cfg).pdu_star));
  EXPECT_EQ(body.find("dedicatedInfoNAS")->as<val::OctetString>().bytes,
            (std::vector<std::uint8_t>{0x41, 0x42, 0x43}));

  // Output longer than a fixed size is cut back to it.
  cfg.target_field = "securityHeader";
  cfg.external_mangler = "printf 'xyz'";
  body = message_body(dec(mutate_pdu(schema, "UL-Message", pdu, cfg).pdu_star));
  EXPECT_EQ(body.find("securityHeader")->as<val::OctetString>().bytes,
            (std::vector<std::uint8_t>{'x'}));

  cfg.external_mangler = "exit 3";
  EXPECT_THROW(mutate_pdu(schema, "UL-Message", pdu, cfg), ManglerFailed);
}

TEST_F(PduFuzzer, UnknownTargetLeavesPduUnchanged) {
  const BitBuffer pdu = enc(ul_info({1}));
  auto cfg = config({PduStrategy::OctetString}, 0);
  cfg.target_field = "noSuchField";
  auto out = mutate_pdu(schema, "UL-Message", pdu, cfg);
  EXPECT_EQ(out.pdu_star, pdu);
  EXPECT_NE(out.strategy_applied.find("none"), std::string::npos);
}

TEST_F(PduFuzzer, UndecodablePduThrows) {
  EXPECT_THROW(mutate_pdu(schema, "UL-Message", BitBuffer::from_bytes({0xFF}), config({}, 0)),
               DecodeFailed);
}

TEST_F(PduFuzzer, MutationIsDeterministic) {
  const BitBuffer pdu = enc(ul_info({0x05, 1, 2}));
  std::vector<PduStrategy> all(std::begin(kAllPduStrategies), std::end(kAllPduStrategies));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto cfg = config(all, seed);
    cfg.blob_fields = {"dedicatedInfoNAS"};
    auto a = mutate_pdu(schema, "UL-Message", pdu, cfg);
    auto b = mutate_pdu(schema, "UL-Message", pdu, cfg);
    EXPECT_EQ(a.pdu_star, b.pdu_star);
    EXPECT_EQ(a.strategy_applied, b.strategy_applied);
    EXPECT_EQ(a.message_type, b.message_type);
  }
}

// Any strategy combination on any demo message still decodes under the
// original schema with nothing left over.
TEST_F(PduFuzzer, MutatedPdusAlwaysConform) {
  std::vector<PduStrategy> all(std::begin(kAllPduStrategies), std::end(kAllPduStrategies));
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    Rng rng(seed, 1);
    ValueGenerator gen(schema, rng);
    const BitBuffer pdu = enc(gen.generate("UL-Message"));
    std::vector<PduStrategy> picked;
    for (auto s : all) {
      if (rng.coin()) picked.push_back(s);
    }
    auto cfg = config(picked, seed);
    cfg.christmas_tree = seed % 7 == 0;
    if (seed % 3 == 0) cfg.blob_fields = {"dedicatedInfoNAS", "ueCapabilityRAT-Container"};
    auto out = mutate_pdu(schema, "UL-Message", pdu, cfg);
    Value v;
    ASSERT_NO_THROW(v = dec(out.pdu_star)) << "seed " << seed << " " << out.strategy_applied;
    EXPECT_TRUE(conforms_to(v, schema.at("UL-Message"), schema));
  }
}

TEST_F(PduFuzzer, MessageTypeFollowsEnvelope) {
  EXPECT_EQ(message_type_of(schema, "UL-Message", ul_info({})), "ULInformationTransfer");
  EXPECT_EQ(message_type_of(schema, "UL-Message", reconfig_complete_bare()),
            "RRCReconfigurationComplete");
  Rng rng(0);
  ValueGenerator gen(schema, rng);
  EXPECT_EQ(message_type_of(schema, "RRCSetupRequest", gen.generate("RRCSetupRequest")),
            "RRCSetupRequest");
}

TEST_F(PduFuzzer, GenerationWithUnmutatedSchemaDecodes) {
  std::set<std::string> types;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    FuzzConfig cfg;
    cfg.mode = FuzzMode::Generation;
    cfg.seed = seed;
    cfg.envelope = "UL-Message";
    auto out = generate_pdu(schema, schema, kPool, cfg);
    auto v = dec(out.pdu_star);
    EXPECT_EQ(message_type_of(schema, "UL-Message", v), out.message_type);
    types.insert(out.message_type);
  }
  EXPECT_EQ(types.size(), kPool.size());
}

TEST_F(PduFuzzer, GenerationWithoutEnvelopeEncodesBareMessage) {
  FuzzConfig cfg;
  cfg.seed = 4;
  auto out = generate_pdu(schema, schema, {"SecurityModeComplete"}, cfg);
  EXPECT_NO_THROW(decode_exact(schema, "SecurityModeComplete", out.pdu_star));
}

TEST_F(PduFuzzer, ChristmasTreeGenerationIncludesEveryOptional) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    FuzzConfig cfg;
    cfg.seed = seed;
    cfg.christmas_tree = true;
    cfg.envelope = "UL-Message";
    auto out = generate_pdu(schema, schema, {"RRCReconfigurationComplete"}, cfg);
    EXPECT_EQ(message_body(dec(out.pdu_star)).members.size(), 4u);
  }
}

TEST_F(PduFuzzer, WidenedIdentityIsRejectedByOriginalDecoder) {
  const Schema mutated = widened_identity_schema(schema);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    FuzzConfig cfg;
    cfg.seed = seed;
    cfg.envelope = "UL-Message";
    auto out = generate_pdu(schema, mutated, {"RRCSetupRequest"}, cfg);
    // 3 choice bits + 1 identity bit + 99 + 3 + 1 under the mutated schema.
    EXPECT_EQ(out.pdu_star.bit_length, 107u);
    EXPECT_NO_THROW(decode_exact(mutated, "UL-Message", out.pdu_star));
    EXPECT_THROW(decode_exact(schema, "UL-Message", out.pdu_star), DecodeError);
  }
}

TEST_F(PduFuzzer, PerturbNeverSendsExpected) {
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto out = perturb(schema, "RRCSetupRequest", kPool, seed, std::string("UL-Message"));
    ASSERT_NE(out.message_type, "RRCSetupRequest");
    auto v = dec(out.pdu_star);
    EXPECT_EQ(message_type_of(schema, "UL-Message", v), out.message_type);
    ++counts[out.message_type];
  }
  EXPECT_EQ(counts.size(), 5u);
}

TEST_F(PduFuzzer, PerturbWithTwoTypesPicksTheOther) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto out = perturb(schema, "SecurityModeComplete",
                       {"SecurityModeComplete", "RRCSetupComplete"}, seed);
    EXPECT_EQ(out.message_type, "RRCSetupComplete");
  }
  EXPECT_THROW(perturb(schema, "SecurityModeComplete", {"SecurityModeComplete"}, 0), ConfigError);
}

TEST(PduStrategyNames, ParseList) {
  EXPECT_EQ(parse_pdu_strategy_list("OctetString, append"),
            (std::vector<PduStrategy>{PduStrategy::OctetString, PduStrategy::Append}));
  EXPECT_EQ(parse_pdu_strategy_list("all").size(), 7u);
  EXPECT_TRUE(parse_pdu_strategy_list("").empty());
  EXPECT_THROW(parse_pdu_strategy_list("Bogus"), ConfigError);
  EXPECT_EQ(mode_from_name("perturb"), FuzzMode::Perturbation);
  EXPECT_FALSE(mode_from_name("x"));
}

TEST(Mangler, ChangesInputDeterministically) {
  const std::vector<std::uint8_t> in = {1, 2, 3, 4, 5, 6, 7, 8};
  int changed = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng a(seed), b(seed);
    auto x = mangle_bytes(in, a);
    EXPECT_EQ(x, mangle_bytes(in, b));
    EXPECT_LE(x.size(), in.size() + 4 * 16);
    if (x != in) ++changed;
  }
  EXPECT_GT(changed, 450);
  Rng r(0);
  EXPECT_FALSE(mangle_bytes({}, r).empty());
}

TEST(RunFilter, CollectsStdoutAndReportsFailures) {
  using namespace std::chrono_literals;
  EXPECT_EQ(run_filter("cat", {1, 2, 3}, 2000ms), (std::vector<std::uint8_t>{1, 2, 3}));
  EXPECT_EQ(run_filter("cat", {}, 2000ms), std::vector<std::uint8_t>{});
  std::vector<std::uint8_t> big(200000, 7);
  EXPECT_EQ(run_filter("cat", big, 5000ms), big);
  EXPECT_THROW(run_filter("exit 1", {1}, 2000ms), ManglerFailed);
  EXPECT_THROW(run_filter("sleep 5", {1}, 200ms), ManglerFailed);
}

}  // namespace
}  // namespace asnfuzz
