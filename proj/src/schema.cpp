#include "asnfuzz/schema.hpp"

#include <algorithm>
#include <set>

#include "asnfuzz/errors.hpp"

namespace asnfuzz {

const TypeExpr* Schema::find(std::string_view type_name) const {
  for (const auto& a : assignments) {
    if (a.name == type_name) return &a.type;
  }
  return nullptr;
}

TypeExpr* Schema::find(std::string_view type_name) {
  for (auto& a : assignments) {
    if (a.name == type_name) return &a.type;
  }
  return nullptr;
}

const TypeExpr& Schema::at(std::string_view type_name) const {
  if (const TypeExpr* t = find(type_name)) return *t;
  throw PathNotFound(1, "no assignment named '" + std::string(type_name) + "'");
}

namespace {

template <class SchemaT, class TypeT>
TypeT& deref_impl(SchemaT& schema, TypeT& type) {
  TypeT* cur = &type;
  for (std::size_t depth = 0; cur->kind == Kind::Reference; ++depth) {
    if (depth >= kMaxReferenceDepth) {
      throw PathNotFound(0, "reference chain deeper than " +
                                std::to_string(kMaxReferenceDepth) +
                                " at '" + cur->ref + "'");
    }
    TypeT* next = schema.find(cur->ref);
    if (next == nullptr) {
      throw PathNotFound(0, "unresolved reference '" + cur->ref + "'");
    }
    cur = next;
  }
  return *cur;
}

template <class SchemaT, class TypeT>
TypeT& locate_impl(SchemaT& schema, const TypePath& path) {
  if (path.empty()) throw PathNotFound(1, "empty path");
  const auto* root_name = std::get_if<std::string>(&path.steps[0]);
  if (root_name == nullptr) {
    throw PathNotFound(1, "path must start with an assignment name");
  }
  TypeT* cur = schema.find(*root_name);
  if (cur == nullptr) {
    throw PathNotFound(1, "no assignment named '" + *root_name + "'");
  }
  for (std::size_t i = 1; i < path.steps.size(); ++i) {
    const auto fail = [&](const std::string& why) {
      return PathNotFound(i + 1, "step " + std::to_string(i + 1) + " of '" +
                                     path.str() + "': " + why);
    };
    TypeT* node;
    try {
      node = &deref_impl(schema, *cur);
    } catch (const PathNotFound& e) {
      throw fail(e.what());
    }
    if (const auto* name = std::get_if<std::string>(&path.steps[i])) {
      if (node->kind != Kind::Sequence && node->kind != Kind::Choice) {
        throw fail("'" + *name + "' is not a field of a " +
                   std::string(kind_name(node->kind)));
      }
      auto* field = node->find_field(*name);
      if (field == nullptr) throw fail("no field named '" + *name + "'");
      cur = &field->type;
    } else {
      if (node->kind != Kind::SequenceOf) {
        throw fail("index step on a " + std::string(kind_name(node->kind)));
      }
      cur = node->element.get();
    }
  }
  return *cur;
}

}  // namespace

const TypeExpr& deref(const Schema& schema, const TypeExpr& type) {
  return deref_impl<const Schema, const TypeExpr>(schema, type);
}

const TypeExpr& locate(const Schema& schema, const TypePath& path) {
  return locate_impl<const Schema, const TypeExpr>(schema, path);
}

TypeExpr& locate(Schema& schema, const TypePath& path) {
  return locate_impl<Schema, TypeExpr>(schema, path);
}

const TypeExpr& resolve(const Schema& schema, const TypePath& path) {
  const TypeExpr& node = locate(schema, path);
  try {
    return deref(schema, node);
  } catch (const PathNotFound& e) {
    throw PathNotFound(path.size(), e.what());
  }
}

namespace {

bool conforms_impl(const Value& value, const TypeExpr& type,
                   const Schema& schema) {
  const TypeExpr* tp;
  try {
    tp = &deref(schema, type);
  } catch (const PathNotFound&) {
    return false;
  }
  const TypeExpr& t = *tp;
  switch (t.kind) {
    case Kind::Boolean:
      return value.is<val::Boolean>();
    case Kind::Integer: {
      const auto* v = value.get_if<val::Integer>();
      return v != nullptr && t.range.contains(v->value);
    }
    case Kind::Enumerated: {
      const auto* v = value.get_if<val::Enumerated>();
      return v != nullptr && v->index < t.items.size();
    }
    case Kind::BitString: {
      const auto* v = value.get_if<val::BitString>();
      if (v == nullptr) return false;
      if (v->bytes.size() != (v->bit_length + 7) / 8) return false;
      if (v->bit_length % 8 != 0 &&
          (v->bytes.back() & (0xFFu >> (v->bit_length % 8))) != 0) {
        return false;
      }
      return !t.size || t.size->contains(v->bit_length);
    }
    case Kind::OctetString: {
      const auto* v = value.get_if<val::OctetString>();
      return v != nullptr && (!t.size || t.size->contains(v->bytes.size()));
    }
    case Kind::Sequence: {
      const auto* v = value.get_if<val::Sequence>();
      if (v == nullptr) return false;
      std::size_t m = 0;
      for (const auto& f : t.fields) {
        if (m < v->members.size() && v->members[m].name == f.name) {
          const auto& member = v->members[m];
          if (!member.value || !conforms_impl(*member.value, f.type, schema)) {
            return false;
          }
          ++m;
        } else if (!f.optional) {
          return false;
        }
      }
      return m == v->members.size();
    }
    case Kind::SequenceOf: {
      const auto* v = value.get_if<val::SequenceOf>();
      if (v == nullptr || !t.element) return false;
      if (t.size && !t.size->contains(v->items.size())) return false;
      return std::all_of(v->items.begin(), v->items.end(),
                         [&](const Value& item) {
                           return conforms_impl(item, *t.element, schema);
                         });
    }
    case Kind::Choice: {
      const auto* v = value.get_if<val::Choice>();
      if (v == nullptr || !v->value) return false;
      const Field* f = t.find_field(v->name);
      return f != nullptr && conforms_impl(*v->value, f->type, schema);
    }
    case Kind::Reference:
      break;
  }
  return false;
}

}  // namespace

bool conforms_to(const Value& value, const TypeExpr& type,
                 const Schema& schema) {
  return conforms_impl(value, type, schema);
}

std::string_view error_kind_name(SchemaError::Kind kind) {
  switch (kind) {
    case SchemaError::Kind::DuplicateName:
      return "DuplicateName";
    case SchemaError::Kind::UnresolvedReference:
      return "UnresolvedReference";
    case SchemaError::Kind::InvalidConstraint:
      return "InvalidConstraint";
    case SchemaError::Kind::OptionalInChoice:
      return "OptionalInChoice";
    case SchemaError::Kind::EmptyOptions:
      return "EmptyOptions";
    case SchemaError::Kind::CyclicReference:
      return "CyclicReference";
    case SchemaError::Kind::UninhabitedType:
      return "UninhabitedType";
  }
  return "?";
}

namespace {

class Validator {
 public:
  explicit Validator(const Schema& schema) : schema_(schema) {}

  std::vector<SchemaError> run() {
    std::set<std::string> seen;
    for (const auto& a : schema_.assignments) {
      TypePath path{a.name};
      if (!seen.insert(a.name).second) {
        add(SchemaError::Kind::DuplicateName, path,
            "assignment '" + a.name + "' defined more than once");
      }
      walk(a.type, path);
    }
    check_reference_cycles();
    if (errors_.empty()) check_inhabited();
    return std::move(errors_);
  }

 private:
  void add(SchemaError::Kind kind, TypePath path, std::string message) {
    errors_.push_back(SchemaError{kind, std::move(path), std::move(message)});
  }

  void check_size(const std::optional<SizeConstraint>& size,
                  const TypePath& path) {
    if (size && size->upper && size->lower > *size->upper) {
      add(SchemaError::Kind::InvalidConstraint, path,
          "SIZE lower bound exceeds upper bound");
    }
  }

  void walk(const TypeExpr& t, const TypePath& path) {
    switch (t.kind) {
      case Kind::Boolean:
        break;
      case Kind::Integer:
        if (t.range.lower && t.range.upper && *t.range.lower > *t.range.upper) {
          add(SchemaError::Kind::InvalidConstraint, path,
              "INTEGER lower bound exceeds upper bound");
        }
        break;
      case Kind::Enumerated: {
        if (t.items.empty()) {
          add(SchemaError::Kind::EmptyOptions, path, "ENUMERATED has no items");
        }
        std::set<std::string> names;
        for (const auto& item : t.items) {
          if (!names.insert(item).second) {
            add(SchemaError::Kind::DuplicateName, path,
                "duplicate enumeration item '" + item + "'");
          }
        }
        break;
      }
      case Kind::BitString:
      case Kind::OctetString:
        check_size(t.size, path);
        break;
      case Kind::Sequence:
      case Kind::Choice: {
        if (t.kind == Kind::Choice && t.fields.empty()) {
          add(SchemaError::Kind::EmptyOptions, path, "CHOICE has no alternatives");
        }
        std::set<std::string> names;
        for (const auto& f : t.fields) {
          if (!names.insert(f.name).second) {
            add(SchemaError::Kind::DuplicateName, path,
                "duplicate field name '" + f.name + "'");
          }
          if (t.kind == Kind::Choice && f.optional) {
            add(SchemaError::Kind::OptionalInChoice, path.child(f.name),
                "OPTIONAL is not allowed on a CHOICE alternative");
          }
          walk(f.type, path.child(f.name));
        }
        break;
      }
      case Kind::SequenceOf:
        check_size(t.size, path);
        if (!t.element) {
          add(SchemaError::Kind::InvalidConstraint, path,
              "SEQUENCE OF without element type");
        } else {
          walk(*t.element, path.child(std::size_t{0}));
        }
        break;
      case Kind::Reference:
        if (schema_.find(t.ref) == nullptr) {
          add(SchemaError::Kind::UnresolvedReference, path,
              "reference to undefined type '" + t.ref + "'");
        }
        break;
    }
  }

  // Each cycle is reported once, at its first member in assignment order.
  void check_reference_cycles() {
    std::set<std::string> reported;
    for (const auto& a : schema_.assignments) {
      std::vector<std::string> chain{a.name};
      const TypeExpr* cur = &a.type;
      while (cur != nullptr && cur->kind == Kind::Reference) {
        auto it = std::find(chain.begin(), chain.end(), cur->ref);
        if (it != chain.end() || chain.size() > kMaxReferenceDepth) {
          const bool too_long = it == chain.end();
          if ((too_long || it == chain.begin()) &&
              reported.insert(a.name).second) {
            reported.insert(chain.begin(), chain.end());
            add(SchemaError::Kind::CyclicReference, TypePath{a.name},
                "reference chain from '" + a.name + "' does not terminate");
          }
          break;
        }
        chain.push_back(cur->ref);
        cur = schema_.find(cur->ref);
      }
    }
  }

  void check_inhabited() {
    HeightTable heights(schema_);
    for (const auto& a : schema_.assignments) {
      if (!heights.of(a.name)) {
        add(SchemaError::Kind::UninhabitedType, TypePath{a.name},
            "type '" + a.name + "' has no finite value");
      }
    }
  }

  const Schema& schema_;
  std::vector<SchemaError> errors_;
};

}  // namespace

std::vector<SchemaError> validate_schema(const Schema& schema) {
  return Validator(schema).run();
}

HeightTable::HeightTable(const Schema& schema) : schema_(&schema) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& a : schema.assignments) {
      auto h = compute(a.type);
      if (!h) continue;
      auto it = heights_.find(a.name);
      if (it == heights_.end() || *h < it->second) {
        heights_[a.name] = *h;
        changed = true;
      }
    }
  }
}

std::optional<std::size_t> HeightTable::of(const TypeExpr& type) const {
  return compute(type);
}

std::optional<std::size_t> HeightTable::of(std::string_view assignment) const {
  auto it = heights_.find(std::string(assignment));
  if (it == heights_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> HeightTable::compute(const TypeExpr& t) const {
  switch (t.kind) {
    case Kind::Boolean:
    case Kind::Integer:
    case Kind::Enumerated:
    case Kind::BitString:
    case Kind::OctetString:
      return 0;
    case Kind::Reference:
      return of(t.ref);
    case Kind::Sequence: {
      std::size_t h = 0;
      for (const auto& f : t.fields) {
        if (f.optional) continue;
        auto fh = compute(f.type);
        if (!fh) return std::nullopt;
        h = std::max(h, *fh);
      }
      return h + 1;
    }
    case Kind::Choice: {
      std::optional<std::size_t> best;
      for (const auto& f : t.fields) {
        auto fh = compute(f.type);
        if (fh && (!best || *fh < *best)) best = fh;
      }
      if (!best) return std::nullopt;
      return *best + 1;
    }
    case Kind::SequenceOf: {
      if (!t.size || t.size->lower == 0) return 1;
      if (!t.element) return std::nullopt;
      auto eh = compute(*t.element);
      if (!eh) return std::nullopt;
      return *eh + 1;
    }
  }
  return std::nullopt;
}

}  // namespace asnfuzz
