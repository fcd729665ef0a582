#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asnfuzz/bigint.hpp"
#include "asnfuzz/box.hpp"

namespace asnfuzz {

enum class Kind {
  Boolean,
  Integer,
  Enumerated,
  BitString,
  OctetString,
  Sequence,
  SequenceOf,
  Choice,
  Reference,
};

// ASN.1 keyword spelling ("BIT STRING", "SEQUENCE OF", ...).
std::string_view kind_name(Kind kind);
std::optional<Kind> kind_from_name(std::string_view name);

inline bool is_primitive(Kind k) {
  return k == Kind::Boolean || k == Kind::Integer || k == Kind::Enumerated ||
         k == Kind::BitString || k == Kind::OctetString;
}
inline bool is_structured(Kind k) {
  return k == Kind::Sequence || k == Kind::SequenceOf || k == Kind::Choice;
}

// SIZE (lower..upper); upper unset means unbounded (lower..MAX).
struct SizeConstraint {
  std::uint64_t lower = 0;
  std::optional<std::uint64_t> upper;

  static SizeConstraint fixed(std::uint64_t n) { return {n, n}; }
  bool is_fixed() const { return upper && *upper == lower; }
  bool contains(std::uint64_t n) const {
    return n >= lower && (!upper || n <= *upper);
  }
  friend bool operator==(const SizeConstraint&,
                         const SizeConstraint&) = default;
};

// Value range of an INTEGER. Both bounds set: constrained. Lower only:
// semi-constrained. Otherwise the integer is encoded as unconstrained.
struct IntRange {
  std::optional<BigInt> lower;
  std::optional<BigInt> upper;

  bool is_constrained() const { return lower && upper; }
  bool contains(const BigInt& v) const {
    return (!lower || v >= *lower) && (!upper || v <= *upper);
  }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct Field;

// One node of a type expression. Which members are meaningful depends on
// `kind`; the rest stay at their defaults so structural equality holds.
struct TypeExpr {
  Kind kind = Kind::Boolean;
  IntRange range;                      // Integer
  std::optional<SizeConstraint> size;  // BitString, OctetString, SequenceOf
  std::vector<std::string> items;      // Enumerated
  std::vector<Field> fields;           // Sequence, Choice
  Box<TypeExpr> element;               // SequenceOf
  std::string ref;                     // Reference
  bool extensible = false;             // Enumerated, Sequence, Choice

  static TypeExpr boolean();
  static TypeExpr integer(IntRange range = {});
  static TypeExpr enumerated(std::vector<std::string> items,
                             bool extensible = false);
  static TypeExpr bit_string(std::optional<SizeConstraint> size = {});
  static TypeExpr octet_string(std::optional<SizeConstraint> size = {});
  static TypeExpr sequence(std::vector<Field> fields, bool extensible = false);
  static TypeExpr sequence_of(TypeExpr element,
                              std::optional<SizeConstraint> size = {});
  static TypeExpr choice(std::vector<Field> fields, bool extensible = false);
  static TypeExpr reference(std::string name);

  const Field* find_field(std::string_view name) const;
  Field* find_field(std::string_view name);
  std::optional<std::size_t> field_index(std::string_view name) const;
  std::optional<std::size_t> item_index(std::string_view name) const;
};

struct Field {
  std::string name;
  TypeExpr type;
  bool optional = false;
};

bool operator==(const TypeExpr& a, const TypeExpr& b);
bool operator==(const Field& a, const Field& b);

}  // namespace asnfuzz
