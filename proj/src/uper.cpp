#include "asnfuzz/uper.hpp"

#include <algorithm>

#include "asnfuzz/errors.hpp"

namespace asnfuzz {

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0xF];
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("invalid hex digit '" + std::string(1, c) + "'");
  };
  if (hex.size() % 2 != 0) throw Error("odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

namespace {

constexpr std::size_t kMaxDecodeDepth = 1000;

class BitWriter {
 public:
  void bit(bool b) {
    if (len_ % 8 == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (len_ % 8));
    ++len_;
  }
  void bits(std::uint64_t v, unsigned n) {
    for (unsigned i = n; i > 0; --i) bit((v >> (i - 1)) & 1);
  }
  void big(const BigInt& v, unsigned n) {
    for (unsigned i = n; i > 0; --i) {
      bit(boost::multiprecision::bit_test(v, i - 1));
    }
  }
  void octets(const std::vector<std::uint8_t>& b) {
    for (auto byte : b) bits(byte, 8);
  }
  BitBuffer finish() {
    BitBuffer out{std::move(bytes_), len_};
    if (out.bytes.empty()) out.bytes.push_back(0);
    return out;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t len_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const BitBuffer& b)
      : bytes_(b.bytes), limit_(std::min(b.bit_length, b.bytes.size() * 8)) {}

  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (limit_ - pos_ < n) {
      throw DecodeError(pos_, "input exhausted");
    }
  }
  bool bit() {
    need(1);
    bool b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
    ++pos_;
    return b;
  }
  std::uint64_t bits(unsigned n) {
    need(n);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i) v = v << 1 | (bit() ? 1 : 0);
    return v;
  }
  BigInt big(unsigned n) {
    need(n);
    BigInt v = 0;
    for (unsigned i = 0; i < n; ++i) {
      v <<= 1;
      if (bit()) v |= 1;
    }
    return v;
  }
  std::vector<std::uint8_t> octets(std::size_t n) {
    need(n * 8);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(bits(8));
    return out;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

// Minimal octet count for a non-negative integer (at least 1).
std::size_t unsigned_octets(const BigInt& v) {
  if (v == 0) return 1;
  return static_cast<std::size_t>(boost::multiprecision::msb(v)) / 8 + 1;
}

// Minimal octet count for a two's complement integer (at least 1).
std::size_t signed_octets(const BigInt& v) {
  std::size_t n = 1;
  while (true) {
    BigInt half = BigInt(1) << (8 * n - 1);
    if (v >= -half && v < half) return n;
    ++n;
  }
}

// Helper for error paths: the steps walked from the root so far.
class PathStack {
 public:
  explicit PathStack(std::string root) { steps_.emplace_back(std::move(root)); }
  void push(PathStep s) { steps_.push_back(std::move(s)); }
  void pop() { steps_.pop_back(); }
  std::string str() const { return TypePath(steps_).str(); }

 private:
  std::vector<PathStep> steps_;
};

class Encoder {
 public:
  Encoder(const Schema& schema, std::string root)
      : schema_(schema), path_(std::move(root)) {}

  void encode(const TypeExpr& type, const Value& value) {
    const TypeExpr& t = resolve_ref(type);
    switch (t.kind) {
      case Kind::Boolean:
        out_.bit(expect<val::Boolean>(value, t).value);
        return;
      case Kind::Integer:
        encode_integer(t, expect<val::Integer>(value, t).value);
        return;
      case Kind::Enumerated: {
        auto idx = expect<val::Enumerated>(value, t).index;
        if (idx >= t.items.size()) fail("enumerated index out of range");
        if (t.extensible) out_.bit(false);
        out_.bits(idx, bits_for_range(t.items.size()));
        return;
      }
      case Kind::BitString: {
        const auto& b = expect<val::BitString>(value, t);
        if (b.bytes.size() != (b.bit_length + 7) / 8) {
          fail("bit string storage does not match its length");
        }
        if (b.bit_length % 8 != 0 &&
            (b.bytes.back() & (0xFFu >> (b.bit_length % 8))) != 0) {
          fail("bit string padding is not zero");
        }
        encode_length(t.size, b.bit_length);
        for (std::size_t i = 0; i < b.bit_length; ++i) out_.bit(b.bit(i));
        return;
      }
      case Kind::OctetString: {
        const auto& o = expect<val::OctetString>(value, t);
        encode_length(t.size, o.bytes.size());
        out_.octets(o.bytes);
        return;
      }
      case Kind::Sequence:
        encode_sequence(t, expect<val::Sequence>(value, t));
        return;
      case Kind::SequenceOf: {
        const auto& s = expect<val::SequenceOf>(value, t);
        encode_length(t.size, s.items.size());
        for (std::size_t i = 0; i < s.items.size(); ++i) {
          path_.push(i);
          encode(*t.element, s.items[i]);
          path_.pop();
        }
        return;
      }
      case Kind::Choice: {
        const auto& c = expect<val::Choice>(value, t);
        auto idx = t.field_index(c.name);
        if (!idx) fail("unknown alternative '" + c.name + "'");
        if (!c.value) fail("alternative without a value");
        if (t.extensible) out_.bit(false);
        out_.bits(*idx, bits_for_range(t.fields.size()));
        path_.push(c.name);
        encode(t.fields[*idx].type, *c.value);
        path_.pop();
        return;
      }
      case Kind::Reference:
        break;
    }
    fail("unexpected reference");
  }

  BitBuffer finish() { return out_.finish(); }

 private:
  [[noreturn]] void fail(const std::string& msg,
                         EncodeError::Kind kind =
                             EncodeError::Kind::NonConformingValue) const {
    throw EncodeError(kind, path_.str(), msg);
  }

  const TypeExpr& resolve_ref(const TypeExpr& type) const {
    const TypeExpr* t = &type;
    for (std::size_t depth = 0; t->kind == Kind::Reference; ++depth) {
      const TypeExpr* next = schema_.find(t->ref);
      if (!next) {
        fail("unknown type '" + t->ref + "'", EncodeError::Kind::UnknownType);
      }
      if (depth >= kMaxReferenceDepth) {
        fail("reference chain too deep", EncodeError::Kind::UnknownType);
      }
      t = next;
    }
    return *t;
  }

  template <class T>
  const T& expect(const Value& v, const TypeExpr& t) const {
    const T* p = v.get_if<T>();
    if (!p) fail("value does not match type " + std::string(kind_name(t.kind)));
    return *p;
  }

  void encode_integer(const TypeExpr& t, const BigInt& v) {
    if (!t.range.contains(v)) fail("integer " + v.str() + " out of range");
    if (t.range.is_constrained()) {
      const BigInt span = *t.range.upper - *t.range.lower + 1;
      out_.big(v - *t.range.lower, bits_for_range(span));
    } else if (t.range.lower) {
      const BigInt off = v - *t.range.lower;
      const std::size_t n = unsigned_octets(off);
      general_length(n);
      out_.big(off, static_cast<unsigned>(8 * n));
    } else {
      const std::size_t n = signed_octets(v);
      general_length(n);
      BigInt raw = v < 0 ? v + (BigInt(1) << (8 * n)) : v;
      out_.big(raw, static_cast<unsigned>(8 * n));
    }
  }

  void general_length(std::size_t n) {
    if (n < 128) {
      out_.bits(n, 8);
    } else if (n <= kMaxGeneralLength) {
      out_.bits(0b10, 2);
      out_.bits(n, 14);
    } else {
      fail("length " + std::to_string(n) + " needs fragmentation",
           EncodeError::Kind::UnsupportedLength);
    }
  }

  void encode_length(const std::optional<SizeConstraint>& size,
                     std::size_t n) {
    if (size && !size->contains(n)) {
      fail("size " + std::to_string(n) + " outside constraint");
    }
    if (size && size->upper && *size->upper < 65536) {
      if (size->is_fixed()) return;
      out_.bits(n - size->lower, bits_for_range(*size->upper - size->lower + 1));
      return;
    }
    general_length(n);
  }

  void encode_sequence(const TypeExpr& t, const val::Sequence& s) {
    // Match members to fields in type order.
    std::vector<const Value*> present(t.fields.size(), nullptr);
    std::size_t cursor = 0;
    for (const auto& m : s.members) {
      while (cursor < t.fields.size() && t.fields[cursor].name != m.name) {
        ++cursor;
      }
      if (cursor == t.fields.size()) {
        fail(t.find_field(m.name) ? "member '" + m.name + "' out of order"
                                  : "unknown member '" + m.name + "'");
      }
      if (!m.value) fail("member '" + m.name + "' without a value");
      present[cursor++] = m.value.get();
    }
    if (t.extensible) out_.bit(false);
    for (std::size_t i = 0; i < t.fields.size(); ++i) {
      if (t.fields[i].optional) {
        out_.bit(present[i] != nullptr);
      } else if (!present[i]) {
        fail("missing mandatory member '" + t.fields[i].name + "'");
      }
    }
    for (std::size_t i = 0; i < t.fields.size(); ++i) {
      if (!present[i]) continue;
      path_.push(t.fields[i].name);
      encode(t.fields[i].type, *present[i]);
      path_.pop();
    }
  }

  const Schema& schema_;
  PathStack path_;
  BitWriter out_;
};

class Decoder {
 public:
  Decoder(const Schema& schema, const BitBuffer& bits)
      : schema_(schema), in_(bits) {}

  Value decode(const TypeExpr& type, std::size_t depth = 0) {
    if (depth > kMaxDecodeDepth) throw DecodeError(in_.pos(), "nesting too deep");
    const TypeExpr& t = resolve_ref(type);
    switch (t.kind) {
      case Kind::Boolean:
        return Value::boolean(in_.bit());
      case Kind::Integer:
        return Value::integer(decode_integer(t));
      case Kind::Enumerated: {
        extension_bit(t);
        const std::size_t at = in_.pos();
        auto idx = in_.bits(bits_for_range(t.items.size()));
        if (idx >= t.items.size()) {
          throw DecodeError(at, "enumerated index out of range");
        }
        return Value::enumerated(idx);
      }
      case Kind::BitString: {
        const std::size_t n = decode_length(t.size);
        in_.need(n);
        auto b = val::BitString::zeros(n);
        for (std::size_t i = 0; i < n; ++i) b.set_bit(i, in_.bit());
        return Value::bits(std::move(b));
      }
      case Kind::OctetString: {
        const std::size_t n = decode_length(t.size);
        return Value::octets(in_.octets(n));
      }
      case Kind::Sequence: {
        extension_bit(t);
        std::vector<bool> present(t.fields.size(), true);
        for (std::size_t i = 0; i < t.fields.size(); ++i) {
          if (t.fields[i].optional) present[i] = in_.bit();
        }
        val::Sequence s;
        for (std::size_t i = 0; i < t.fields.size(); ++i) {
          if (!present[i]) continue;
          s.members.push_back(val::Member{
              t.fields[i].name, Box<Value>(decode(t.fields[i].type, depth + 1))});
        }
        return s;
      }
      case Kind::SequenceOf: {
        const std::size_t n = decode_length(t.size);
        val::SequenceOf s;
        for (std::size_t i = 0; i < n; ++i) {
          s.items.push_back(decode(*t.element, depth + 1));
        }
        return s;
      }
      case Kind::Choice: {
        extension_bit(t);
        const std::size_t at = in_.pos();
        auto idx = in_.bits(bits_for_range(t.fields.size()));
        if (idx >= t.fields.size()) {
          throw DecodeError(at, "choice index out of range");
        }
        return Value::choice(t.fields[idx].name,
                             decode(t.fields[idx].type, depth + 1));
      }
      case Kind::Reference:
        break;
    }
    throw DecodeError(in_.pos(), "unexpected reference");
  }

  std::size_t pos() const { return in_.pos(); }

 private:
  const TypeExpr& resolve_ref(const TypeExpr& type) const {
    const TypeExpr* t = &type;
    for (std::size_t depth = 0; t->kind == Kind::Reference; ++depth) {
      const TypeExpr* next = schema_.find(t->ref);
      if (!next || depth >= kMaxReferenceDepth) {
        throw DecodeError(in_.pos(), "unresolvable type '" + t->ref + "'");
      }
      t = next;
    }
    return *t;
  }

  void extension_bit(const TypeExpr& t) {
    if (!t.extensible) return;
    const std::size_t at = in_.pos();
    if (in_.bit()) throw DecodeError(at, "extension bit set");
  }

  std::size_t general_length() {
    const std::size_t at = in_.pos();
    if (!in_.bit()) return in_.bits(7);
    if (!in_.bit()) return in_.bits(14);
    throw DecodeError(at, "length >= 16384");
  }

  std::size_t decode_length(const std::optional<SizeConstraint>& size) {
    const std::size_t at = in_.pos();
    std::size_t n;
    if (size && size->upper && *size->upper < 65536) {
      if (size->is_fixed()) return size->lower;
      n = size->lower +
          in_.bits(bits_for_range(*size->upper - size->lower + 1));
    } else {
      n = general_length();
    }
    if (size && !size->contains(n)) {
      throw DecodeError(at, "length out of range");
    }
    return n;
  }

  BigInt decode_integer(const TypeExpr& t) {
    const std::size_t at = in_.pos();
    BigInt v;
    if (t.range.is_constrained()) {
      const BigInt span = *t.range.upper - *t.range.lower + 1;
      v = *t.range.lower + in_.big(bits_for_range(span));
    } else {
      const std::size_t n = general_length();
      if (n == 0) throw DecodeError(at, "empty integer encoding");
      BigInt raw = in_.big(static_cast<unsigned>(8 * n));
      if (t.range.lower) {
        v = *t.range.lower + raw;
      } else {
        v = boost::multiprecision::bit_test(raw, 8 * n - 1)
                ? raw - (BigInt(1) << (8 * n))
                : raw;
      }
    }
    if (!t.range.contains(v)) throw DecodeError(at, "integer out of range");
    return v;
  }

  const Schema& schema_;
  BitReader in_;
};

const TypeExpr& root_type(const Schema& schema, std::string_view root) {
  const TypeExpr* t = schema.find(root);
  if (!t) {
    throw EncodeError(EncodeError::Kind::UnknownType, std::string(root),
                      "unknown root type");
  }
  return *t;
}

}  // namespace

BitBuffer encode(const Schema& schema, std::string_view root,
                 const Value& value) {
  Encoder enc(schema, std::string(root));
  enc.encode(root_type(schema, root), value);
  return enc.finish();
}

BitBuffer encode_type(const Schema& schema, const TypeExpr& type,
                      const Value& value) {
  Encoder enc(schema, "");
  enc.encode(type, value);
  return enc.finish();
}

Decoded decode_type(const Schema& schema, const TypeExpr& type,
                    const BitBuffer& bits) {
  Decoder dec(schema, bits);
  Value v = dec.decode(type);
  return Decoded{std::move(v), dec.pos()};
}

Decoded decode(const Schema& schema, std::string_view root,
               const BitBuffer& bits) {
  const TypeExpr* t = schema.find(root);
  if (!t) throw DecodeError(0, "unknown root type '" + std::string(root) + "'");
  return decode_type(schema, *t, bits);
}

Value decode_exact(const Schema& schema, std::string_view root,
                   const BitBuffer& bits) {
  Decoded d = decode(schema, root, bits);
  const std::size_t limit = std::min(bits.bit_length, bits.bytes.size() * 8);
  const std::size_t allowed = std::max<std::size_t>(8, (d.bits_consumed + 7) / 8 * 8);
  if (limit > allowed) throw DecodeError(d.bits_consumed, "trailing data");
  for (std::size_t i = d.bits_consumed; i < limit; ++i) {
    if ((bits.bytes[i / 8] >> (7 - i % 8)) & 1) {
      throw DecodeError(i, "trailing data");
    }
  }
  return std::move(d.value);
}

}  // namespace asnfuzz
