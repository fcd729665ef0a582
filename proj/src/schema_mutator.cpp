#include "asnfuzz/schema_mutator.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/rng.hpp"
#include "asnfuzz/schema_text.hpp"

namespace asnfuzz {

namespace {

constexpr std::uint64_t kMaxStringBits = 4096;
constexpr std::uint64_t kMaxOctets = 1024;
constexpr std::uint64_t kMaxListSize = 8;
constexpr int kDetailAttempts = 4;

// Follows references to the assignment that defines the node.
TypeExpr& definition(Schema& schema, TypeExpr& node) {
  TypeExpr* t = &node;
  for (std::size_t depth = 0; t->kind == Kind::Reference; ++depth) {
    TypeExpr* next = schema.find(t->ref);
    if (!next || depth >= kMaxReferenceDepth) {
      throw Error("reference '" + t->ref + "' does not resolve");
    }
    t = next;
  }
  return *t;
}

bool has_options(Kind k) {
  return k == Kind::Enumerated || k == Kind::Sequence || k == Kind::Choice;
}

std::size_t option_count(const TypeExpr& t) {
  return t.kind == Kind::Enumerated ? t.items.size() : t.fields.size();
}

bool sizeable(Kind k) {
  return k == Kind::Integer || k == Kind::BitString ||
         k == Kind::OctetString || k == Kind::SequenceOf;
}

std::uint64_t size_cap(Kind k) {
  switch (k) {
    case Kind::BitString:
      return kMaxStringBits;
    case Kind::OctetString:
      return kMaxOctets;
    default:
      return kMaxListSize;
  }
}

std::vector<std::string> structured_assignments(const Schema& schema) {
  std::vector<std::string> out;
  for (const auto& a : schema.assignments) {
    try {
      if (is_structured(deref(schema, a.type).kind)) out.push_back(a.name);
    } catch (const PathNotFound&) {
    }
  }
  return out;
}

TypeExpr converted(const TypeExpr& old, Kind to) {
  const bool was_string =
      old.kind == Kind::BitString || old.kind == Kind::OctetString;
  const auto size = was_string ? old.size : std::nullopt;
  switch (to) {
    case Kind::Boolean:
      return TypeExpr::boolean();
    case Kind::Integer:
      return TypeExpr::integer();
    case Kind::Enumerated:
      return TypeExpr::enumerated({"fuzz-code1", "fuzz-code2"});
    case Kind::BitString:
      return TypeExpr::bit_string(size);
    case Kind::OctetString:
      return TypeExpr::octet_string(size);
    default:
      throw Error("not a primitive kind");
  }
}

// Applies one record in place; throws Error with a reason on failure.
void apply_record(Schema& schema, const MutationRecord& r) {
  TypeExpr* node;
  try {
    node = &locate(schema, r.target);
  } catch (const PathNotFound& e) {
    throw Error(std::string("target does not resolve: ") + e.what());
  }

  if (r.strategy == SchemaStrategy::ChangeStructured) {
    const auto* d = std::get_if<detail::NewReference>(&r.detail);
    if (!d) throw Error("ChangeStructured needs a type name");
    if (node->kind != Kind::Reference) throw Error("target is not a type reference");
    if (!is_structured(definition(schema, *node).kind)) {
      throw Error("target does not reference a structured type");
    }
    const TypeExpr* repl = schema.find(d->name);
    if (!repl) throw Error("unknown type '" + d->name + "'");
    if (!is_structured(deref(schema, *repl).kind)) {
      throw Error("'" + d->name + "' is not a structured type");
    }
    if (d->name == node->ref) throw Error("reference already names '" + d->name + "'");
    node->ref = d->name;
    return;
  }

  TypeExpr& t = definition(schema, *node);
  switch (r.strategy) {
    case SchemaStrategy::ChangePrimitive: {
      const auto* d = std::get_if<detail::NewKind>(&r.detail);
      if (!d) throw Error("ChangePrimitive needs a kind");
      if (!is_primitive(t.kind)) throw Error("target is not a primitive type");
      if (!is_primitive(d->kind)) throw Error("new kind is not primitive");
      if (d->kind == t.kind) throw Error("new kind equals the current kind");
      t = converted(t, d->kind);
      return;
    }
    case SchemaStrategy::ExtendOptions: {
      if (!has_options(t.kind)) throw Error("target has no options");
      if (t.kind == Kind::Enumerated) {
        const auto* d = std::get_if<detail::AddedNames>(&r.detail);
        if (!d || d->names.empty()) throw Error("ExtendOptions needs names");
        t.items.insert(t.items.end(), d->names.begin(), d->names.end());
      } else {
        const auto* d = std::get_if<detail::AddedFields>(&r.detail);
        if (!d || d->fields.empty()) throw Error("ExtendOptions needs fields");
        t.fields.insert(t.fields.end(), d->fields.begin(), d->fields.end());
      }
      return;
    }
    case SchemaStrategy::ReduceOptions: {
      const auto* d = std::get_if<detail::RemovedNames>(&r.detail);
      if (!d || d->names.empty()) throw Error("ReduceOptions needs names");
      if (!has_options(t.kind)) throw Error("target has no options");
      std::set<std::string> drop(d->names.begin(), d->names.end());
      if (drop.size() != d->names.size()) throw Error("duplicate name to remove");
      for (const auto& n : drop) {
        const bool known = t.kind == Kind::Enumerated ? t.item_index(n).has_value()
                                                      : t.field_index(n).has_value();
        if (!known) throw Error("no option named '" + n + "'");
      }
      if (drop.size() >= option_count(t)) throw Error("would remove every option");
      if (t.kind == Kind::Enumerated) {
        std::erase_if(t.items, [&](const std::string& s) { return drop.count(s) != 0; });
      } else {
        std::erase_if(t.fields, [&](const Field& f) { return drop.count(f.name) != 0; });
      }
      return;
    }
    case SchemaStrategy::ScrambleOptions: {
      const auto* d = std::get_if<detail::Permutation>(&r.detail);
      if (!d) throw Error("ScrambleOptions needs a permutation");
      if (t.kind != Kind::Sequence && t.kind != Kind::Choice) {
        throw Error("target is not a SEQUENCE or CHOICE");
      }
      std::vector<std::size_t> sorted = d->order;
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> identity(t.fields.size());
      std::iota(identity.begin(), identity.end(), 0);
      if (sorted != identity) throw Error("order is not a permutation of the options");
      std::vector<Field> fields;
      for (auto i : d->order) fields.push_back(t.fields[i]);
      t.fields = std::move(fields);
      return;
    }
    case SchemaStrategy::ChangeSize: {
      const auto* d = std::get_if<detail::NewBounds>(&r.detail);
      if (!d) throw Error("ChangeSize needs bounds");
      if (!sizeable(t.kind)) {
        throw Error(std::string("ChangeSize does not apply to ") +
                    std::string(kind_name(t.kind)));
      }
      if (d->upper && *d->upper < d->lower) throw Error("lower bound exceeds upper");
      if (t.kind == Kind::Integer) {
        t.range = IntRange{d->lower, d->upper};
        return;
      }
      if (d->lower < 0) throw Error("negative size bound");
      const BigInt limit = std::numeric_limits<std::uint64_t>::max();
      if (d->lower > limit || (d->upper && *d->upper > limit)) {
        throw Error("size bound too large");
      }
      SizeConstraint sc;
      sc.lower = static_cast<std::uint64_t>(d->lower);
      if (d->upper) sc.upper = static_cast<std::uint64_t>(*d->upper);
      t.size = sc;
      return;
    }
    case SchemaStrategy::ChangeStructured:
      break;
  }
}

void collect(const TypeExpr& t, const TypePath& path, std::vector<TypePath>& out) {
  out.push_back(path);
  for (const auto& f : t.fields) collect(f.type, path.child(f.name), out);
  if (t.kind == Kind::SequenceOf && t.element) {
    collect(*t.element, path.child(std::size_t{0}), out);
  }
}

std::string fresh_name(const std::string& prefix, std::set<std::string>& taken) {
  for (std::size_t n = 1;; ++n) {
    std::string name = prefix + std::to_string(n);
    if (taken.insert(name).second) return name;
  }
}

MutationDetail new_bounds(const TypeExpr& t, Rng& rng) {
  if (t.kind == Kind::Integer) {
    const BigInt lo = t.range.lower.value_or(BigInt(0));
    const BigInt hi = t.range.upper.value_or(lo + 255);
    switch (rng.below(4)) {
      case 0:  // widen
        return detail::NewBounds{lo - rng.range(BigInt(1), BigInt(1000)),
                                 hi + rng.range(BigInt(1), BigInt(1000))};
      case 1: {  // narrow or shift inside the old range
        BigInt a = rng.range(lo, hi), b = rng.range(lo, hi);
        if (a > b) std::swap(a, b);
        return detail::NewBounds{a, b};
      }
      case 2:  // semi-constrained
        return detail::NewBounds{lo - rng.range(BigInt(0), BigInt(100)), std::nullopt};
      default: {  // move beyond the old upper bound
        BigInt a = hi + rng.range(BigInt(1), BigInt(1000));
        return detail::NewBounds{a, a + rng.range(BigInt(0), BigInt(1000))};
      }
    }
  }
  const std::uint64_t cap = size_cap(t.kind);
  const std::uint64_t lo = t.size ? t.size->lower : 0;
  const std::uint64_t hi =
      t.size && t.size->upper ? *t.size->upper : lo + std::min<std::uint64_t>(cap, 64);
  switch (rng.below(3)) {
    case 0: {  // fixed size, anywhere up to about twice the old maximum
      std::uint64_t n = rng.range(0, std::min(cap, 2 * hi + 64));
      return detail::NewBounds{BigInt(n), BigInt(n)};
    }
    case 1: {
      std::uint64_t a = rng.range(0, cap), b = rng.range(0, cap);
      if (a > b) std::swap(a, b);
      return detail::NewBounds{BigInt(a), BigInt(b)};
    }
    default:
      return detail::NewBounds{BigInt(rng.range(0, std::min<std::uint64_t>(cap, 16))),
                               std::nullopt};
  }
}

bool bounds_equal(const TypeExpr& t, const detail::NewBounds& b) {
  if (t.kind == Kind::Integer) return t.range == IntRange{b.lower, b.upper};
  if (!t.size) return false;
  std::optional<BigInt> upper;
  if (t.size->upper) upper = BigInt(*t.size->upper);
  return BigInt(t.size->lower) == b.lower && upper == b.upper;
}

// A seed-driven detail for strategy s at the node; nullopt if none exists.
std::optional<MutationDetail> make_detail(const Schema& schema, const TypePath& path,
                                          SchemaStrategy s, Rng& rng) {
  const TypeExpr& node = locate(schema, path);
  switch (s) {
    case SchemaStrategy::ChangePrimitive: {
      std::vector<Kind> kinds;
      for (Kind k : {Kind::Boolean, Kind::Integer, Kind::Enumerated,
                     Kind::BitString, Kind::OctetString}) {
        if (k != node.kind) kinds.push_back(k);
      }
      return detail::NewKind{rng.pick(kinds)};
    }
    case SchemaStrategy::ChangeStructured: {
      auto names = structured_assignments(schema);
      std::erase(names, node.ref);
      if (names.empty()) return std::nullopt;
      return detail::NewReference{rng.pick(names)};
    }
    case SchemaStrategy::ExtendOptions: {
      const std::size_t count = 1 + rng.below(2);
      if (node.kind == Kind::Enumerated) {
        std::set<std::string> taken(node.items.begin(), node.items.end());
        detail::AddedNames d;
        for (std::size_t i = 0; i < count; ++i) d.names.push_back(fresh_name("fuzz-code", taken));
        return d;
      }
      std::set<std::string> taken;
      for (const auto& f : node.fields) taken.insert(f.name);
      detail::AddedFields d;
      for (std::size_t i = 0; i < count; ++i) {
        const auto& target = schema.assignments[rng.below(schema.assignments.size())];
        d.fields.push_back(Field{fresh_name("new-field", taken),
                                 TypeExpr::reference(target.name), false});
      }
      return d;
    }
    case SchemaStrategy::ReduceOptions: {
      std::vector<std::string> names;
      if (node.kind == Kind::Enumerated) {
        names = node.items;
      } else {
        for (const auto& f : node.fields) names.push_back(f.name);
      }
      const std::size_t k = 1 + rng.below(names.size() - 1);
      std::vector<std::size_t> idx(names.size());
      std::iota(idx.begin(), idx.end(), 0);
      rng.shuffle(idx);
      idx.resize(k);
      std::sort(idx.begin(), idx.end());
      detail::RemovedNames d;
      for (auto i : idx) d.names.push_back(names[i]);
      return d;
    }
    case SchemaStrategy::ScrambleOptions: {
      detail::Permutation d;
      d.order.resize(node.fields.size());
      std::iota(d.order.begin(), d.order.end(), 0);
      const auto identity = d.order;
      while (d.order == identity) rng.shuffle(d.order);
      return d;
    }
    case SchemaStrategy::ChangeSize: {
      for (int i = 0; i < 8; ++i) {
        auto d = std::get<detail::NewBounds>(new_bounds(node, rng));
        if (!bounds_equal(node, d)) return d;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

Schema apply(const Schema& schema, const SchemaMutationPlan& plan) {
  Schema out = schema;
  for (std::size_t i = 0; i < plan.records.size(); ++i) {
    const auto& r = plan.records[i];
    try {
      apply_record(out, r);
    } catch (const InvalidMutation&) {
      throw;
    } catch (const Error& e) {
      throw InvalidMutation(i, e.what());
    }
    auto errors = validate_schema(out);
    if (!errors.empty()) {
      throw InvalidMutation(i, std::string(error_kind_name(errors[0].kind)) + " at " +
                                   errors[0].path.str() + ": " + errors[0].message);
    }
    out.provenance.push_back(r);
  }
  return out;
}

std::vector<TypePath> enumerate_nodes(const Schema& schema) {
  std::vector<TypePath> out;
  for (const auto& a : schema.assignments) collect(a.type, TypePath{a.name}, out);
  return out;
}

bool admits(const Schema& schema, const TypePath& path, SchemaStrategy s) {
  const TypeExpr* node;
  try {
    node = &locate(schema, path);
  } catch (const PathNotFound&) {
    return false;
  }
  switch (s) {
    case SchemaStrategy::ChangePrimitive:
      return is_primitive(node->kind);
    case SchemaStrategy::ChangeStructured: {
      if (node->kind != Kind::Reference) return false;
      try {
        if (!is_structured(deref(schema, *node).kind)) return false;
      } catch (const PathNotFound&) {
        return false;
      }
      auto names = structured_assignments(schema);
      return std::any_of(names.begin(), names.end(),
                         [&](const std::string& n) { return n != node->ref; });
    }
    case SchemaStrategy::ExtendOptions:
      return has_options(node->kind);
    case SchemaStrategy::ReduceOptions:
      return has_options(node->kind) && option_count(*node) >= 2;
    case SchemaStrategy::ScrambleOptions:
      return (node->kind == Kind::Sequence || node->kind == Kind::Choice) &&
             node->fields.size() >= 2;
    case SchemaStrategy::ChangeSize:
      return sizeable(node->kind);
  }
  return false;
}

SchemaMutationPlan plan_from_seed(const Schema& schema,
                                  const std::vector<SchemaStrategy>& strategies,
                                  std::uint64_t seed) {
  if (strategies.empty()) throw Error("no schema mutation strategies enabled");
  // Canonical order so the plan does not depend on how the set was spelled.
  std::vector<SchemaStrategy> enabled;
  for (auto s : kAllSchemaStrategies) {
    if (std::find(strategies.begin(), strategies.end(), s) != strategies.end()) {
      enabled.push_back(s);
    }
  }
  Rng rng(seed);
  std::vector<SchemaStrategy> order = enabled;
  rng.shuffle(order);
  const std::size_t wanted = enabled.size() == 1 ? 1 : 1 + rng.below(enabled.size());

  SchemaMutationPlan plan{seed, {}};
  Schema current = schema;
  for (auto s : order) {
    if (plan.records.size() == wanted) break;
    std::vector<TypePath> candidates;
    for (auto& p : enumerate_nodes(current)) {
      if (admits(current, p, s)) candidates.push_back(std::move(p));
    }
    if (candidates.empty()) continue;
    const std::size_t start = rng.below(candidates.size());
    bool placed = false;
    for (std::size_t k = 0; k < candidates.size() && !placed; ++k) {
      const auto& target = candidates[(start + k) % candidates.size()];
      for (int attempt = 0; attempt < kDetailAttempts && !placed; ++attempt) {
        auto d = make_detail(current, target, s, rng);
        if (!d) break;
        MutationRecord r{s, target, *d};
        try {
          current = apply(current, SchemaMutationPlan{seed, {r}});
          plan.records.push_back(std::move(r));
          placed = true;
        } catch (const InvalidMutation&) {
        }
      }
    }
  }
  if (plan.records.empty()) {
    throw NoEligibleTarget("no node admits any of the enabled strategies");
  }
  return plan;
}

std::string format_plan(const SchemaMutationPlan& plan) {
  std::string out = "# seed " + std::to_string(plan.seed) + "\n";
  for (const auto& r : plan.records) out += format_record(r) + "\n";
  return out;
}

SchemaMutationPlan parse_plan(std::string_view text) {
  SchemaMutationPlan plan;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kSeed = "# seed ";
      if (line.substr(0, kSeed.size()) == kSeed) {
        plan.seed = std::stoull(std::string(line.substr(kSeed.size())));
      }
      continue;
    }
    plan.records.push_back(parse_record(line));
  }
  return plan;
}

std::vector<SchemaStrategy> parse_strategy_list(std::string_view csv) {
  std::vector<SchemaStrategy> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string_view name = csv.substr(pos, comma - pos);
    pos = comma + 1;
    if (name.empty()) continue;
    if (name == "all") {
      out.assign(std::begin(kAllSchemaStrategies), std::end(kAllSchemaStrategies));
      continue;
    }
    auto s = schema_strategy_from_name(name);
    if (!s) throw ConfigError("unknown schema strategy '" + std::string(name) + "'");
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  return out;
}

}  // namespace asnfuzz
