#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asnfuzz/bigint.hpp"
#include "asnfuzz/path.hpp"
#include "asnfuzz/types.hpp"

namespace asnfuzz {

// The six schema mutation strategies.
enum class SchemaStrategy {
  ChangePrimitive,
  ChangeStructured,
  ExtendOptions,
  ReduceOptions,
  ScrambleOptions,
  ChangeSize,
};

inline constexpr SchemaStrategy kAllSchemaStrategies[] = {
    SchemaStrategy::ChangePrimitive, SchemaStrategy::ChangeStructured,
    SchemaStrategy::ExtendOptions,   SchemaStrategy::ReduceOptions,
    SchemaStrategy::ScrambleOptions, SchemaStrategy::ChangeSize,
};

std::string_view strategy_name(SchemaStrategy s);
std::optional<SchemaStrategy> schema_strategy_from_name(std::string_view name);

namespace detail {
struct NewKind {
  Kind kind;
  friend bool operator==(const NewKind&, const NewKind&) = default;
};
struct NewReference {
  std::string name;
  friend bool operator==(const NewReference&, const NewReference&) = default;
};
// Enumerated extension.
struct AddedNames {
  std::vector<std::string> names;
  friend bool operator==(const AddedNames&, const AddedNames&) = default;
};
// SEQUENCE / CHOICE extension.
struct AddedFields {
  std::vector<Field> fields;
  friend bool operator==(const AddedFields&, const AddedFields&) = default;
};
struct RemovedNames {
  std::vector<std::string> names;
  friend bool operator==(const RemovedNames&, const RemovedNames&) = default;
};
// order[i] is the original index of the option placed at position i.
struct Permutation {
  std::vector<std::size_t> order;
  friend bool operator==(const Permutation&, const Permutation&) = default;
};
// For INTEGER: the value range. For strings and SEQUENCE OF: the SIZE range
// (lower must be non-negative). Unset upper means MAX.
struct NewBounds {
  BigInt lower;
  std::optional<BigInt> upper;
  friend bool operator==(const NewBounds&, const NewBounds&) = default;
};
}  // namespace detail

using MutationDetail =
    std::variant<detail::NewKind, detail::NewReference, detail::AddedNames,
                 detail::AddedFields, detail::RemovedNames, detail::Permutation,
                 detail::NewBounds>;

struct MutationRecord {
  SchemaStrategy strategy;
  TypePath target;
  MutationDetail detail;

  friend bool operator==(const MutationRecord&,
                         const MutationRecord&) = default;
};

}  // namespace asnfuzz
