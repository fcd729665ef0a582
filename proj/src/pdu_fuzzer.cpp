#include "asnfuzz/pdu_fuzzer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/generator.hpp"
#include "asnfuzz/mangler.hpp"
#include "asnfuzz/process.hpp"

namespace asnfuzz {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kUnboundedBits = 8000;
constexpr std::size_t kUnboundedOctets = 1000;
constexpr std::size_t kMaxAppend = 256;
constexpr std::size_t kSmallUpper = 65536;
constexpr std::size_t kMaxChristmasInserts = 4096;
constexpr auto kManglerTimeout = std::chrono::milliseconds(2000);

std::uint64_t elapsed_us(Clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
}

struct Site {
  Value* value;
  const TypeExpr* type;  // dereferenced
  std::string path;
  std::string name;  // field or alternative name, empty for roots and items
};

struct OptSite {
  val::Sequence* seq;
  const TypeExpr* seq_type;
  std::size_t field;
  std::string path;
  bool present;
};

struct Sites {
  std::vector<Site> nodes;
  std::vector<OptSite> optionals;
};

void collect(const Schema& schema, Value& value, const TypeExpr& declared,
             const std::string& path, const std::string& name, Sites& out) {
  const TypeExpr& t = deref(schema, declared);
  out.nodes.push_back({&value, &t, path, name});
  switch (t.kind) {
    case Kind::Sequence: {
      auto& seq = value.as<val::Sequence>();
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        const Field& f = t.fields[i];
        const std::string sub = path + "." + f.name;
        Value* member = seq.find(f.name);
        if (f.optional) out.optionals.push_back({&seq, &t, i, sub, member != nullptr});
        if (member) collect(schema, *member, f.type, sub, f.name, out);
      }
      break;
    }
    case Kind::SequenceOf: {
      auto& items = value.as<val::SequenceOf>().items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        collect(schema, items[i], *t.element, path + "." + std::to_string(i), "", out);
      }
      break;
    }
    case Kind::Choice: {
      auto& ch = value.as<val::Choice>();
      const Field* f = t.find_field(ch.name);
      if (f) collect(schema, *ch.value, f->type, path + "." + f->name, f->name, out);
      break;
    }
    default:
      break;
  }
}

Sites collect_all(const Schema& schema, Value& root_value, std::string_view root) {
  Sites s;
  collect(schema, root_value, schema.at(root), std::string(root), "", s);
  return s;
}

bool in_scope(const std::string& path, const std::string& scope) {
  if (scope.empty()) return true;
  return path == scope ||
         (path.size() > scope.size() && path.compare(0, scope.size(), scope) == 0 &&
          path[scope.size()] == '.');
}

bool matches_target(const std::string& path, const std::string& name,
                    const std::string& target) {
  if (name == target || path == target) return true;
  return path.size() > target.size() &&
         path.compare(path.size() - target.size(), target.size(), target) == 0 &&
         path[path.size() - target.size() - 1] == '.';
}

std::string last_name_of(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

void insert_member(val::Sequence& seq, const TypeExpr& seq_type, std::size_t field,
                   Value v) {
  std::size_t pos = 0;
  for (const auto& m : seq.members) {
    auto idx = seq_type.field_index(m.name);
    if (idx && *idx < field) ++pos;
  }
  seq.members.insert(seq.members.begin() + static_cast<std::ptrdiff_t>(pos),
                     val::Member{seq_type.fields[field].name, Box<Value>(std::move(v))});
}

void remove_member(val::Sequence& seq, const std::string& name) {
  std::erase_if(seq.members, [&](const val::Member& m) { return m.name == name; });
}

// Largest length the codec can carry for a string with this constraint.
std::size_t length_cap(const std::optional<SizeConstraint>& size) {
  if (size && size->upper && *size->upper < kSmallUpper) {
    return static_cast<std::size_t>(*size->upper);
  }
  return kMaxGeneralLength;
}

std::size_t fit_length(std::size_t n, const std::optional<SizeConstraint>& size) {
  const std::size_t lo = size ? static_cast<std::size_t>(size->lower) : 0;
  return std::clamp(n, lo, std::max(lo, length_cap(size)));
}

void set_octets(Value& v, std::vector<std::uint8_t> bytes, const TypeExpr& t) {
  bytes.resize(fit_length(bytes.size(), t.size), 0);
  v = Value::octets(std::move(bytes));
}

void set_bits_from_bytes(Value& v, std::vector<std::uint8_t> bytes, const TypeExpr& t) {
  val::BitString b;
  b.bit_length = bytes.size() * 8;
  b.bytes = std::move(bytes);
  b.resize(t.size && t.size->is_fixed() ? static_cast<std::size_t>(t.size->lower)
                                        : fit_length(b.bit_length, t.size));
  v = std::move(b);
}

std::vector<std::uint8_t> bytes_of(const Value& v) {
  if (auto* o = v.get_if<val::OctetString>()) return o->bytes;
  return v.as<val::BitString>().bytes;
}

bool is_unbounded(const std::optional<SizeConstraint>& size) {
  return !size || !size->upper;
}

class PduMutator {
 public:
  PduMutator(const Schema& schema, std::string_view root, const FuzzConfig& cfg)
      : schema_(schema), root_(root), cfg_(cfg), rng_(cfg.seed) {}

  void run(Value& value) {
    value_ = &value;
    if (cfg_.christmas_tree) {
      christmas();
      note("christmas-tree");
    }
    if (cfg_.target_field && !pick_target()) {
      note("none: no field named " + *cfg_.target_field);
      return;
    }
    auto has = [&](PduStrategy s) {
      return std::find(cfg_.strategies.begin(), cfg_.strategies.end(), s) !=
             cfg_.strategies.end();
    };
    if (has(PduStrategy::Optional) && !cfg_.christmas_tree) toggle_optional();
    for (PduStrategy s : {PduStrategy::Boolean, PduStrategy::Integer,
                          PduStrategy::Enumerated, PduStrategy::BitString,
                          PduStrategy::OctetString}) {
      if (has(s)) mutate_primitive(s);
    }
    if (has(PduStrategy::Append)) append();
  }

  std::string applied() const { return applied_.empty() ? "none" : applied_; }

 private:
  Sites sites() { return collect_all(schema_, *value_, root_); }

  void note(const std::string& what) {
    if (!applied_.empty()) applied_ += "; ";
    applied_ += what;
  }

  Value generate(const TypeExpr& t) {
    GeneratorOptions opts;
    opts.christmas_tree = cfg_.christmas_tree;
    ValueGenerator gen(schema_, rng_, opts);
    return gen.generate(t);
  }

  // Fills absent OPTIONAL fields until none is left. Recursive optional
  // types never run out, hence the cap.
  void christmas() {
    for (std::size_t n = 0; n < kMaxChristmasInserts; ++n) {
      Sites s = sites();
      auto it = std::find_if(s.optionals.begin(), s.optionals.end(),
                             [](const OptSite& o) { return !o.present; });
      if (it == s.optionals.end()) return;
      const Field& f = it->seq_type->fields[it->field];
      insert_member(*it->seq, *it->seq_type, it->field, generate(f.type));
    }
  }

  bool pick_target() {
    const std::string& target = *cfg_.target_field;
    Sites s = sites();
    std::vector<std::string> present;
    for (const auto& n : s.nodes) {
      if (matches_target(n.path, n.name, target)) present.push_back(n.path);
    }
    std::vector<const OptSite*> absent;
    for (const auto& o : s.optionals) {
      if (!o.present && matches_target(o.path, last_name_of(o.path), target)) {
        absent.push_back(&o);
      }
    }
    const std::size_t total = present.size() + absent.size();
    if (total == 0) return false;
    const std::size_t pick = rng_.below(total);
    if (pick < present.size()) {
      scope_ = present[pick];
    } else {
      const OptSite& o = *absent[pick - present.size()];
      scope_ = o.path;
      insert_member(*o.seq, *o.seq_type, o.field,
                    generate(o.seq_type->fields[o.field].type));
      note("Optional+@" + scope_);
    }
    return true;
  }

  void toggle_optional() {
    Sites s = sites();
    std::vector<const OptSite*> eligible;
    for (const auto& o : s.optionals) {
      if (in_scope(o.path, scope_)) eligible.push_back(&o);
    }
    if (eligible.empty()) return;
    const OptSite& o = *rng_.pick(eligible);
    const Field& f = o.seq_type->fields[o.field];
    if (o.present) {
      remove_member(*o.seq, f.name);
      note("Optional-@" + o.path);
    } else {
      insert_member(*o.seq, *o.seq_type, o.field, generate(f.type));
      note("Optional+@" + o.path);
    }
  }

  bool is_blob(const Site& s) const {
    return std::find(cfg_.blob_fields.begin(), cfg_.blob_fields.end(), s.name) !=
           cfg_.blob_fields.end();
  }

  static Kind kind_for(PduStrategy s) {
    switch (s) {
      case PduStrategy::Boolean: return Kind::Boolean;
      case PduStrategy::Integer: return Kind::Integer;
      case PduStrategy::Enumerated: return Kind::Enumerated;
      case PduStrategy::BitString: return Kind::BitString;
      default: return Kind::OctetString;
    }
  }

  void mutate_primitive(PduStrategy strategy) {
    const Kind kind = kind_for(strategy);
    Sites s = sites();
    std::vector<const Site*> eligible;
    for (const auto& n : s.nodes) {
      if (n.type->kind == kind && in_scope(n.path, scope_)) eligible.push_back(&n);
    }
    if (eligible.empty()) return;
    const Site& site = *rng_.pick(eligible);
    Value& v = *site.value;
    const TypeExpr& t = *site.type;
    std::string label = std::string(pdu_strategy_name(strategy)) + "@" + site.path;

    if (kind == Kind::Boolean || kind == Kind::Integer || kind == Kind::Enumerated) {
      v = generate(t);
    } else if (cfg_.external_mangler) {
      auto out = run_filter(*cfg_.external_mangler, bytes_of(v), kManglerTimeout);
      kind == Kind::OctetString ? set_octets(v, std::move(out), t)
                                : set_bits_from_bytes(v, std::move(out), t);
      label += " (external)";
    } else if (is_blob(site)) {
      auto out = mangle_bytes(bytes_of(v), rng_);
      kind == Kind::OctetString ? set_octets(v, std::move(out), t)
                                : set_bits_from_bytes(v, std::move(out), t);
      label += " (blob)";
    } else if (kind == Kind::OctetString) {
      v = Value::octets(random_octets(rng_, random_length(t.size, kUnboundedOctets)));
    } else {
      v = random_bits(rng_, random_length(t.size, kUnboundedBits));
    }
    note(label);
  }

  std::size_t random_length(const std::optional<SizeConstraint>& size,
                            std::size_t unbounded) {
    if (is_unbounded(size)) return fit_length(unbounded, size);
    const std::size_t lo = static_cast<std::size_t>(size->lower);
    return rng_.range(lo, std::max(lo, length_cap(size)));
  }

  void append() {
    Sites s = sites();
    std::vector<const Site*> eligible;
    for (const auto& n : s.nodes) {
      if (n.type->kind != Kind::OctetString || !in_scope(n.path, scope_)) continue;
      if (cfg_.blob_fields.empty() || is_blob(n)) eligible.push_back(&n);
    }
    if (eligible.empty()) return;
    const Site& site = *rng_.pick(eligible);
    auto bytes = site.value->as<val::OctetString>().bytes;
    const std::size_t k = rng_.range(1, kMaxAppend);
    auto extra = random_octets(rng_, k);
    bytes.insert(bytes.end(), extra.begin(), extra.end());
    set_octets(*site.value, std::move(bytes), *site.type);
    note("Append+" + std::to_string(k) + "@" + site.path);
  }

  const Schema& schema_;
  std::string root_;
  const FuzzConfig& cfg_;
  Rng rng_;
  Value* value_ = nullptr;
  std::string scope_;
  std::string applied_;
};

// Encodes value as message type `type`, inside the envelope alternative that
// carries it when the envelope exists in schema.
BitBuffer encode_message(const Schema& schema, const std::string& type, const Value& v,
                         const std::optional<std::string>& envelope) {
  if (envelope) {
    if (const TypeExpr* env = schema.find(*envelope)) {
      const TypeExpr& e = deref(schema, *env);
      if (e.kind == Kind::Choice) {
        for (const Field& f : e.fields) {
          if (f.type.kind == Kind::Reference && f.type.ref == type) {
            return encode(schema, *envelope, Value::choice(f.name, v));
          }
        }
      }
    }
  }
  return encode(schema, type, v);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view mode_name(FuzzMode m) {
  switch (m) {
    case FuzzMode::Mutation: return "mutate";
    case FuzzMode::Generation: return "generate";
    case FuzzMode::Perturbation: return "perturb";
  }
  return "";
}

std::optional<FuzzMode> mode_from_name(std::string_view name) {
  for (FuzzMode m : {FuzzMode::Mutation, FuzzMode::Generation, FuzzMode::Perturbation}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view pdu_strategy_name(PduStrategy s) {
  switch (s) {
    case PduStrategy::Boolean: return "Boolean";
    case PduStrategy::Integer: return "Integer";
    case PduStrategy::Enumerated: return "Enumerated";
    case PduStrategy::BitString: return "BitString";
    case PduStrategy::OctetString: return "OctetString";
    case PduStrategy::Optional: return "Optional";
    case PduStrategy::Append: return "Append";
  }
  return "";
}

std::optional<PduStrategy> pdu_strategy_from_name(std::string_view name) {
  const std::string want = lower(name);
  for (PduStrategy s : kAllPduStrategies) {
    if (lower(pdu_strategy_name(s)) == want) return s;
  }
  return std::nullopt;
}

std::vector<PduStrategy> parse_pdu_strategy_list(std::string_view csv) {
  std::vector<PduStrategy> out;
  if (lower(csv) == "all") return {std::begin(kAllPduStrategies), std::end(kAllPduStrategies)};
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string_view item = csv.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto s = pdu_strategy_from_name(item);
      if (!s) throw ConfigError("unknown PDU strategy '" + std::string(item) + "'");
      if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
    }
    start = comma + 1;
  }
  return out;
}

std::string message_type_of(const Schema& schema, std::string_view root,
                            const Value& value) {
  std::string name(root);
  const TypeExpr* t = &deref(schema, schema.at(root));
  const Value* v = &value;
  while (t->kind == Kind::Choice) {
    const auto* ch = v->get_if<val::Choice>();
    if (!ch) break;
    const Field* f = t->find_field(ch->name);
    if (!f) break;
    if (f->type.kind == Kind::Reference) name = f->type.ref;
    t = &deref(schema, f->type);
    v = ch->value.get();
  }
  return name;
}

FuzzOutcome mutate_pdu(const Schema& original, std::string_view root,
                       const BitBuffer& pdu, const FuzzConfig& cfg) {
  const auto start = Clock::now();
  Value value;
  try {
    value = decode(original, root, pdu).value;
  } catch (const DecodeError& e) {
    throw DecodeFailed(std::string("PDU does not decode: ") + e.what());
  }
  PduMutator m(original, root, cfg);
  m.run(value);
  FuzzOutcome out;
  out.pdu_star = encode(original, root, value);
  out.strategy_applied = m.applied();
  out.message_type = message_type_of(original, root, value);
  out.fuzzer_time_cost_us = elapsed_us(start);
  return out;
}

FuzzOutcome generate_pdu(const Schema& original, const Schema& mutated,
                         const std::vector<std::string>& message_pool,
                         const FuzzConfig& cfg) {
  (void)original;
  const auto start = Clock::now();
  if (message_pool.empty()) throw ConfigError("message pool is empty");
  Rng rng(cfg.seed);
  const std::string& type = rng.pick(message_pool);
  GeneratorOptions opts;
  opts.christmas_tree = cfg.christmas_tree;
  ValueGenerator gen(mutated, rng, opts);
  Value v = gen.generate(type);
  FuzzOutcome out;
  out.pdu_star = encode_message(mutated, type, v, cfg.envelope);
  out.strategy_applied = cfg.christmas_tree ? "generate christmas-tree" : "generate";
  out.message_type = type;
  out.fuzzer_time_cost_us = elapsed_us(start);
  return out;
}

FuzzOutcome perturb(const Schema& original, std::string_view expected,
                    const std::vector<std::string>& message_pool, std::uint64_t seed,
                    const std::optional<std::string>& envelope) {
  const auto start = Clock::now();
  std::vector<std::string> others;
  for (const auto& m : message_pool) {
    if (m != expected && std::find(others.begin(), others.end(), m) == others.end()) {
      others.push_back(m);
    }
  }
  if (others.empty()) throw ConfigError("perturbation needs another message type in the pool");
  Rng rng(seed);
  const std::string& type = rng.pick(others);
  ValueGenerator gen(original, rng);
  Value v = gen.generate(type);
  FuzzOutcome out;
  out.pdu_star = encode_message(original, type, v, envelope);
  out.strategy_applied = "perturb " + std::string(expected) + "->" + type;
  out.message_type = type;
  out.fuzzer_time_cost_us = elapsed_us(start);
  return out;
}

}  // namespace asnfuzz
