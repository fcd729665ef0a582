#include "asnfuzz/generator.hpp"

#include <algorithm>

#include "asnfuzz/errors.hpp"

namespace asnfuzz {

namespace {
constexpr std::size_t kBoundedCap = 1024;
constexpr std::size_t kListCap = 8;
}  // namespace

val::BitString random_bits(Rng& rng, std::size_t n) {
  val::BitString b;
  b.bytes = random_octets(rng, (n + 7) / 8);
  b.bit_length = n;
  if (n % 8 != 0) b.bytes.back() &= static_cast<std::uint8_t>(0xFF00u >> (n % 8));
  return b;
}

std::vector<std::uint8_t> random_octets(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = rng.byte();
  return out;
}

ValueGenerator::ValueGenerator(const Schema& schema, Rng& rng,
                               GeneratorOptions opts)
    : schema_(schema), rng_(rng), opts_(opts), heights_(schema) {}

Value ValueGenerator::generate(const TypeExpr& type) {
  nodes_ = 0;
  const std::size_t h = height(type);
  return gen(type, std::max(opts_.max_depth, h));
}

Value ValueGenerator::generate(std::string_view assignment) {
  return generate(schema_.at(assignment));
}

std::size_t ValueGenerator::height(const TypeExpr& t) const {
  auto h = heights_.of(t);
  if (!h) throw Error("type has no finite value");
  return *h;
}

std::size_t ValueGenerator::pick_length(
    const std::optional<SizeConstraint>& size) {
  if (!size) return rng_.range(0, opts_.string_slack);
  if (size->is_fixed()) return size->lower;
  std::uint64_t hi = size->upper
                         ? std::min<std::uint64_t>(*size->upper,
                                                   size->lower + kBoundedCap)
                         : size->lower + opts_.string_slack;
  return rng_.range(size->lower, hi);
}

Value ValueGenerator::gen(const TypeExpr& type, std::size_t budget) {
  ++nodes_;
  const TypeExpr& t = deref(schema_, type);
  const bool frugal = nodes_ > opts_.soft_node_limit;
  switch (t.kind) {
    case Kind::Boolean:
      return Value::boolean(rng_.coin());
    case Kind::Integer: {
      const auto& r = t.range;
      if (r.is_constrained()) return Value::integer(rng_.range(*r.lower, *r.upper));
      const BigInt spread =
          rng_.coin() ? BigInt(255) : BigInt(std::uint64_t{1} << 40);
      if (r.lower) return Value::integer(*r.lower + rng_.range(BigInt(0), spread));
      if (r.upper) return Value::integer(*r.upper - rng_.range(BigInt(0), spread));
      return Value::integer(BigInt(static_cast<std::int64_t>(rng_.next())));
    }
    case Kind::Enumerated:
      return Value::enumerated(rng_.below(t.items.size()));
    case Kind::BitString:
      return Value::bits(random_bits(rng_, pick_length(t.size)));
    case Kind::OctetString:
      return Value::octets(random_octets(rng_, pick_length(t.size)));
    case Kind::Sequence: {
      val::Sequence s;
      for (const auto& f : t.fields) {
        if (f.optional) {
          const bool fits = budget >= 1 && height(f.type) <= budget - 1;
          const bool want = opts_.christmas_tree || (!frugal && rng_.coin());
          if (!fits || !want) continue;
        }
        s.members.push_back(val::Member{f.name, Box<Value>(gen(f.type, budget - 1))});
      }
      return s;
    }
    case Kind::SequenceOf: {
      const std::uint64_t lo = t.size ? t.size->lower : 0;
      std::uint64_t n = lo;
      const bool fits = budget >= 1 && height(*t.element) <= budget - 1;
      if (fits && !frugal) {
        std::uint64_t hi = lo + opts_.list_slack;
        if (t.size && t.size->upper) hi = std::min(*t.size->upper, lo + kListCap);
        n = rng_.range(lo, hi);
      }
      val::SequenceOf s;
      for (std::uint64_t i = 0; i < n; ++i) s.items.push_back(gen(*t.element, budget - 1));
      return s;
    }
    case Kind::Choice: {
      std::vector<std::size_t> candidates;
      std::optional<std::size_t> best_height;
      std::size_t best = 0;
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        auto h = heights_.of(t.fields[i].type);
        if (!h) continue;
        if (*h + 1 <= budget) candidates.push_back(i);
        if (!best_height || *h < *best_height) {
          best_height = h;
          best = i;
        }
      }
      std::size_t idx = best;
      if (!candidates.empty() && !frugal) idx = rng_.pick(candidates);
      return Value::choice(t.fields[idx].name, gen(t.fields[idx].type, budget - 1));
    }
    case Kind::Reference:
      break;
  }
  throw Error("unresolved reference during generation");
}

}  // namespace asnfuzz
