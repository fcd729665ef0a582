#include "asnfuzz/mutation.hpp"
#include "asnfuzz/path.hpp"
#include "asnfuzz/types.hpp"
#include "asnfuzz/value.hpp"

#include <algorithm>
#include <cctype>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/rng.hpp"

namespace asnfuzz {

namespace {
constexpr std::string_view kKindNames[] = {
    "BOOLEAN",  "INTEGER",     "ENUMERATED", "BIT STRING", "OCTET STRING",
    "SEQUENCE", "SEQUENCE OF", "CHOICE",     "REFERENCE",
};
constexpr std::string_view kStrategyNames[] = {
    "ChangePrimitive", "ChangeStructured", "ExtendOptions",
    "ReduceOptions",   "ScrambleOptions",  "ChangeSize",
};
}  // namespace

std::string_view kind_name(Kind kind) {
  return kKindNames[static_cast<int>(kind)];
}

std::optional<Kind> kind_from_name(std::string_view name) {
  for (int i = 0; i < 9; ++i) {
    if (kKindNames[i] == name) return static_cast<Kind>(i);
  }
  return std::nullopt;
}

std::string_view strategy_name(SchemaStrategy s) {
  return kStrategyNames[static_cast<int>(s)];
}

std::optional<SchemaStrategy> schema_strategy_from_name(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kStrategyNames[i] == name) return static_cast<SchemaStrategy>(i);
  }
  return std::nullopt;
}

TypeExpr TypeExpr::boolean() { return TypeExpr{}; }

TypeExpr TypeExpr::integer(IntRange range) {
  TypeExpr t;
  t.kind = Kind::Integer;
  t.range = std::move(range);
  return t;
}

TypeExpr TypeExpr::enumerated(std::vector<std::string> items, bool extensible) {
  TypeExpr t;
  t.kind = Kind::Enumerated;
  t.items = std::move(items);
  t.extensible = extensible;
  return t;
}

TypeExpr TypeExpr::bit_string(std::optional<SizeConstraint> size) {
  TypeExpr t;
  t.kind = Kind::BitString;
  t.size = size;
  return t;
}

TypeExpr TypeExpr::octet_string(std::optional<SizeConstraint> size) {
  TypeExpr t;
  t.kind = Kind::OctetString;
  t.size = size;
  return t;
}

TypeExpr TypeExpr::sequence(std::vector<Field> fields, bool extensible) {
  TypeExpr t;
  t.kind = Kind::Sequence;
  t.fields = std::move(fields);
  t.extensible = extensible;
  return t;
}

TypeExpr TypeExpr::sequence_of(TypeExpr element,
                               std::optional<SizeConstraint> size) {
  TypeExpr t;
  t.kind = Kind::SequenceOf;
  t.element = Box<TypeExpr>(std::move(element));
  t.size = size;
  return t;
}

TypeExpr TypeExpr::choice(std::vector<Field> fields, bool extensible) {
  TypeExpr t;
  t.kind = Kind::Choice;
  t.fields = std::move(fields);
  t.extensible = extensible;
  return t;
}

TypeExpr TypeExpr::reference(std::string name) {
  TypeExpr t;
  t.kind = Kind::Reference;
  t.ref = std::move(name);
  return t;
}

const Field* TypeExpr::find_field(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Field* TypeExpr::find_field(std::string_view name) {
  for (auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::optional<std::size_t> TypeExpr::field_index(std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TypeExpr::item_index(std::string_view name) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] == name) return i;
  }
  return std::nullopt;
}

bool operator==(const TypeExpr& a, const TypeExpr& b) {
  return a.kind == b.kind && a.range == b.range && a.size == b.size &&
         a.items == b.items && a.fields == b.fields &&
         a.element == b.element && a.ref == b.ref &&
         a.extensible == b.extensible;
}

bool operator==(const Field& a, const Field& b) {
  return a.name == b.name && a.optional == b.optional && a.type == b.type;
}

TypePath TypePath::parse(std::string_view text) {
  TypePath p;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t dot = text.find('.', start);
    if (dot == std::string_view::npos) dot = text.size();
    std::string_view part = text.substr(start, dot - start);
    if (part.empty()) {
      throw Error("empty step in path '" + std::string(text) + "'");
    }
    if (std::all_of(part.begin(), part.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      p.steps.emplace_back(static_cast<std::size_t>(std::stoull(std::string(part))));
    } else {
      p.steps.emplace_back(std::string(part));
    }
    start = dot + 1;
  }
  return p;
}

std::string TypePath::str() const {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += '.';
    if (const auto* name = std::get_if<std::string>(&s)) {
      out += *name;
    } else {
      out += std::to_string(std::get<std::size_t>(s));
    }
  }
  return out;
}

std::string TypePath::last_name() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (const auto* name = std::get_if<std::string>(&*it)) return *name;
  }
  return {};
}

bool TypePath::starts_with(const TypePath& prefix) const {
  return prefix.steps.size() <= steps.size() &&
         std::equal(prefix.steps.begin(), prefix.steps.end(), steps.begin());
}

namespace val {

BitString BitString::zeros(std::size_t n) {
  return BitString{std::vector<std::uint8_t>((n + 7) / 8, 0), n};
}

void BitString::set_bit(std::size_t i, bool on) {
  const auto mask = static_cast<std::uint8_t>(0x80u >> (i % 8));
  if (on) {
    bytes[i / 8] |= mask;
  } else {
    bytes[i / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

void BitString::resize(std::size_t n) {
  bytes.resize((n + 7) / 8, 0);
  bit_length = n;
  if (n % 8 != 0) {
    bytes.back() &= static_cast<std::uint8_t>(0xFF00u >> (n % 8));
  }
}

const Value* Sequence::find(std::string_view name) const {
  for (const auto& m : members) {
    if (m.name == name) return m.value.get();
  }
  return nullptr;
}

Value* Sequence::find(std::string_view name) {
  for (auto& m : members) {
    if (m.name == name) return m.value.get();
  }
  return nullptr;
}

}  // namespace val

Value Value::sequence(std::vector<std::pair<std::string, Value>> members) {
  val::Sequence s;
  for (auto& [name, v] : members) {
    s.members.push_back(val::Member{std::move(name), Box<Value>(std::move(v))});
  }
  return s;
}

BigInt Rng::range(const BigInt& lo, const BigInt& hi) {
  const BigInt span = hi - lo;
  if (span <= 0) return lo;
  if (span < UINT64_MAX) {
    return lo + BigInt(range(std::uint64_t{0},
                             static_cast<std::uint64_t>(span)));
  }
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(span)) + 1;
  while (true) {
    BigInt candidate = 0;
    for (unsigned done = 0; done < bits; done += 64) {
      candidate <<= 64;
      candidate |= next();
    }
    const unsigned extra = ((bits + 63) / 64) * 64 - bits;
    candidate >>= extra;
    if (candidate <= span) return lo + candidate;
  }
}

}  // namespace asnfuzz
