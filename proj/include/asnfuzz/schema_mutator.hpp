#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asnfuzz/mutation.hpp"
#include "asnfuzz/schema.hpp"

namespace asnfuzz {

struct SchemaMutationPlan {
  std::uint64_t seed = 0;
  std::vector<MutationRecord> records;

  friend bool operator==(const SchemaMutationPlan&,
                         const SchemaMutationPlan&) = default;
};

// Applies the records in order; each is checked against the schema state it
// sees and the result must validate. A Reference target is followed to the
// assignment it names, except for ChangeStructured which rewrites the
// reference itself. Throws InvalidMutation.
Schema apply(const Schema& schema, const SchemaMutationPlan& plan);

// Every inline node in pre-order: each assignment, then its fields,
// alternatives and SEQUENCE OF elements (index 0). References are not
// followed.
std::vector<TypePath> enumerate_nodes(const Schema& schema);

// Whether the node at path admits the strategy as plan_from_seed uses it.
bool admits(const Schema& schema, const TypePath& path, SchemaStrategy s);

// Deterministic in (schema, strategies, seed). With one strategy the plan has
// one record; with several a seed-chosen non-empty subset contributes one
// record each. Throws NoEligibleTarget.
SchemaMutationPlan plan_from_seed(const Schema& schema,
                                  const std::vector<SchemaStrategy>& strategies,
                                  std::uint64_t seed);

// Line form: "# seed N" followed by one format_record line per record.
std::string format_plan(const SchemaMutationPlan& plan);
SchemaMutationPlan parse_plan(std::string_view text);

std::vector<SchemaStrategy> parse_strategy_list(std::string_view csv);

}  // namespace asnfuzz
