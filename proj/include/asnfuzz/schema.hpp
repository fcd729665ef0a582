#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "asnfuzz/mutation.hpp"
#include "asnfuzz/path.hpp"
#include "asnfuzz/types.hpp"
#include "asnfuzz/value.hpp"

namespace asnfuzz {

// Reference chains longer than this are treated as cycles.
inline constexpr std::size_t kMaxReferenceDepth = 64;

struct Assignment {
  std::string name;
  TypeExpr type;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// An ASN.1 module: ordered type assignments plus, for mutated schemas, the
// records that produced it. Provenance is metadata; codecs never read it.
struct Schema {
  std::string name;
  std::vector<Assignment> assignments;
  std::vector<MutationRecord> provenance;  // empty: original schema

  bool is_mutated() const { return !provenance.empty(); }
  const TypeExpr* find(std::string_view type_name) const;
  TypeExpr* find(std::string_view type_name);
  const TypeExpr& at(std::string_view type_name) const;  // throws PathNotFound

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Follows Reference nodes until a non-reference is reached.
// Throws PathNotFound on a dangling name or a chain deeper than
// kMaxReferenceDepth.
const TypeExpr& deref(const Schema& schema, const TypeExpr& type);

// Node addressed by path, without dereferencing the final node. Intermediate
// references are followed when the next step needs to look inside them.
const TypeExpr& locate(const Schema& schema, const TypePath& path);
TypeExpr& locate(Schema& schema, const TypePath& path);

// Node addressed by path, dereferenced.
const TypeExpr& resolve(const Schema& schema, const TypePath& path);

bool conforms_to(const Value& value, const TypeExpr& type,
                 const Schema& schema);

struct SchemaError {
  enum class Kind {
    DuplicateName,
    UnresolvedReference,
    InvalidConstraint,
    OptionalInChoice,
    EmptyOptions,
    CyclicReference,
    UninhabitedType,
  };
  Kind kind;
  TypePath path;
  std::string message;
};

std::string_view error_kind_name(SchemaError::Kind kind);

std::vector<SchemaError> validate_schema(const Schema& schema);

// Minimum nesting depth of a finite value for each assignment; absent
// entries have no finite value (infinite mandatory recursion).
class HeightTable {
 public:
  explicit HeightTable(const Schema& schema);
  std::optional<std::size_t> of(const TypeExpr& type) const;
  std::optional<std::size_t> of(std::string_view assignment) const;

 private:
  std::optional<std::size_t> compute(const TypeExpr& type) const;

  const Schema* schema_;
  std::unordered_map<std::string, std::size_t> heights_;
};

}  // namespace asnfuzz
