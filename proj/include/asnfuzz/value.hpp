#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "asnfuzz/bigint.hpp"
#include "asnfuzz/box.hpp"

namespace asnfuzz {

class Value;

namespace val {

struct Boolean {
  bool value = false;
  friend bool operator==(const Boolean&, const Boolean&) = default;
};

struct Integer {
  BigInt value;
  friend bool operator==(const Integer&, const Integer&) = default;
};

// Index into the type's option list.
struct Enumerated {
  std::size_t index = 0;
  friend bool operator==(const Enumerated&, const Enumerated&) = default;
};

// Bits are MSB-first within each byte; bits past bit_length are zero.
struct BitString {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_length = 0;

  static BitString zeros(std::size_t n);
  bool bit(std::size_t i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1; }
  void set_bit(std::size_t i, bool on);
  void resize(std::size_t n);  // truncates or zero-extends
  friend bool operator==(const BitString&, const BitString&) = default;
};

struct OctetString {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const OctetString&, const OctetString&) = default;
};

struct Member {
  std::string name;
  Box<Value> value;
  friend bool operator==(const Member&, const Member&) = default;
};

// Present members only, in the type's field order.
struct Sequence {
  std::vector<Member> members;

  const Value* find(std::string_view name) const;
  Value* find(std::string_view name);
  friend bool operator==(const Sequence&, const Sequence&) = default;
};

struct SequenceOf {
  std::vector<Value> items;
  friend bool operator==(const SequenceOf&, const SequenceOf&);
};

struct Choice {
  std::string name;
  Box<Value> value;
  friend bool operator==(const Choice&, const Choice&) = default;
};

}  // namespace val

// A decoded message tree, shaped like the TypeExpr it was decoded against.
class Value {
 public:
  using Variant =
      std::variant<val::Boolean, val::Integer, val::Enumerated, val::BitString,
                   val::OctetString, val::Sequence, val::SequenceOf,
                   val::Choice>;

  Value() = default;
  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, Value> &&
             std::is_constructible_v<Variant, T>)
  Value(T v) : v_(std::move(v)) {}  // NOLINT

  static Value boolean(bool b) { return val::Boolean{b}; }
  static Value integer(BigInt i) { return val::Integer{std::move(i)}; }
  static Value enumerated(std::size_t i) { return val::Enumerated{i}; }
  static Value bits(val::BitString b) { return b; }
  static Value octets(std::vector<std::uint8_t> b) {
    return val::OctetString{std::move(b)};
  }
  static Value sequence(std::vector<std::pair<std::string, Value>> members);
  static Value sequence_of(std::vector<Value> items) {
    return val::SequenceOf{std::move(items)};
  }
  static Value choice(std::string name, Value v) {
    return val::Choice{std::move(name), Box<Value>(std::move(v))};
  }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }
  template <class T>
  T& as() {
    return std::get<T>(v_);
  }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }
  template <class T>
  T* get_if() {
    return std::get_if<T>(&v_);
  }

  const Variant& variant() const { return v_; }
  Variant& variant() { return v_; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.v_ == b.v_;
  }

 private:
  Variant v_;
};

namespace val {
inline bool operator==(const SequenceOf& a, const SequenceOf& b) {
  return a.items == b.items;
}
}  // namespace val

}  // namespace asnfuzz
