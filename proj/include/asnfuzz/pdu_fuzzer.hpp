#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asnfuzz/schema.hpp"
#include "asnfuzz/uper.hpp"

namespace asnfuzz {

enum class FuzzMode { Mutation, Generation, Perturbation };

std::string_view mode_name(FuzzMode m);  // "mutate", "generate", "perturb"
std::optional<FuzzMode> mode_from_name(std::string_view name);

// Value-level strategies for mutation mode. The primitive selectors each
// rewrite one node of that kind; Optional toggles one OPTIONAL field;
// Append grows one blob field.
enum class PduStrategy {
  Boolean,
  Integer,
  Enumerated,
  BitString,
  OctetString,
  Optional,
  Append,
};

inline constexpr PduStrategy kAllPduStrategies[] = {
    PduStrategy::Boolean,     PduStrategy::Integer,  PduStrategy::Enumerated,
    PduStrategy::BitString,   PduStrategy::OctetString, PduStrategy::Optional,
    PduStrategy::Append,
};

std::string_view pdu_strategy_name(PduStrategy s);
std::optional<PduStrategy> pdu_strategy_from_name(std::string_view name);
std::vector<PduStrategy> parse_pdu_strategy_list(std::string_view csv);

struct FuzzConfig {
  FuzzMode mode = FuzzMode::Mutation;
  std::vector<PduStrategy> strategies;
  std::optional<std::string> target_field;
  bool christmas_tree = false;
  std::optional<std::string> external_mangler;
  std::uint64_t seed = 0;
  std::vector<std::string> blob_fields;
  // CHOICE type every PDU is wrapped in on the wire (e.g. "UL-Message").
  // Generated messages are encoded as the alternative carrying them.
  std::optional<std::string> envelope;
};

struct FuzzOutcome {
  BitBuffer pdu_star;
  std::string strategy_applied;
  std::uint64_t fuzzer_time_cost_us = 0;
  std::string message_type;
};

// Decodes pdu under the original schema, applies the configured strategies
// and re-encodes under the original schema. Throws DecodeFailed,
// ManglerFailed.
FuzzOutcome mutate_pdu(const Schema& original, std::string_view root,
                       const BitBuffer& pdu, const FuzzConfig& cfg);

// Builds a fresh value of a seed-chosen pool type under the mutated schema
// and encodes it with that schema.
FuzzOutcome generate_pdu(const Schema& original, const Schema& mutated,
                         const std::vector<std::string>& message_pool,
                         const FuzzConfig& cfg);

// Replaces the expected message by a different pool type generated under
// the original schema.
FuzzOutcome perturb(const Schema& original, std::string_view expected,
                    const std::vector<std::string>& message_pool,
                    std::uint64_t seed,
                    const std::optional<std::string>& envelope = std::nullopt);

// Name of the innermost referenced message type reached by descending
// CHOICE alternatives from root (root itself when it is not a CHOICE).
std::string message_type_of(const Schema& schema, std::string_view root,
                            const Value& value);

}  // namespace asnfuzz
