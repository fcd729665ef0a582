#include "asnfuzz/value_json.hpp"

#include "asnfuzz/errors.hpp"
#include "asnfuzz/uper.hpp"

namespace asnfuzz {

using Json = nlohmann::ordered_json;

Json value_to_json(const Schema& schema, const TypeExpr& declared, const Value& value) {
  const TypeExpr& t = deref(schema, declared);
  switch (t.kind) {
    case Kind::Boolean:
      return value.as<val::Boolean>().value;
    case Kind::Integer: {
      const BigInt& v = value.as<val::Integer>().value;
      if (v >= std::numeric_limits<std::int64_t>::min() &&
          v <= std::numeric_limits<std::int64_t>::max()) {
        return v.convert_to<std::int64_t>();
      }
      return v.str();
    }
    case Kind::Enumerated: {
      const std::size_t i = value.as<val::Enumerated>().index;
      if (i < t.items.size()) return t.items[i];
      return i;
    }
    case Kind::BitString: {
      const auto& b = value.as<val::BitString>();
      std::string s;
      s.reserve(b.bit_length);
      for (std::size_t i = 0; i < b.bit_length; ++i) s += b.bit(i) ? '1' : '0';
      return s;
    }
    case Kind::OctetString:
      return to_hex(value.as<val::OctetString>().bytes);
    case Kind::Sequence: {
      Json obj = Json::object();
      for (const auto& m : value.as<val::Sequence>().members) {
        const Field* f = t.find_field(m.name);
        if (!f) throw Error("value has unknown member " + m.name);
        obj[m.name] = value_to_json(schema, f->type, *m.value);
      }
      return obj;
    }
    case Kind::SequenceOf: {
      Json arr = Json::array();
      for (const auto& item : value.as<val::SequenceOf>().items) {
        arr.push_back(value_to_json(schema, *t.element, item));
      }
      return arr;
    }
    case Kind::Choice: {
      const auto& ch = value.as<val::Choice>();
      const Field* f = t.find_field(ch.name);
      if (!f) throw Error("value has unknown alternative " + ch.name);
      Json obj = Json::object();
      obj[ch.name] = value_to_json(schema, f->type, *ch.value);
      return obj;
    }
    case Kind::Reference:
      break;
  }
  throw Error("unresolved type");
}

namespace {

[[noreturn]] void mismatch(const TypeExpr& t, const Json& j) {
  throw Error("JSON " + j.dump() + " does not fit " + std::string(kind_name(t.kind)));
}

}  // namespace

Value value_from_json(const Schema& schema, const TypeExpr& declared, const Json& j) {
  const TypeExpr& t = deref(schema, declared);
  switch (t.kind) {
    case Kind::Boolean:
      if (!j.is_boolean()) mismatch(t, j);
      return Value::boolean(j.get<bool>());
    case Kind::Integer:
      if (j.is_number_integer()) {
        return j.is_number_unsigned() ? Value::integer(BigInt(j.get<std::uint64_t>()))
                                      : Value::integer(BigInt(j.get<std::int64_t>()));
      }
      if (j.is_string()) {
        try {
          return Value::integer(BigInt(j.get<std::string>()));
        } catch (const std::exception&) {
        }
      }
      mismatch(t, j);
    case Kind::Enumerated:
      if (j.is_string()) {
        if (auto i = t.item_index(j.get<std::string>())) return Value::enumerated(*i);
      } else if (j.is_number_unsigned()) {
        return Value::enumerated(j.get<std::size_t>());
      }
      mismatch(t, j);
    case Kind::BitString: {
      if (!j.is_string()) mismatch(t, j);
      const auto s = j.get<std::string>();
      auto b = val::BitString::zeros(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') mismatch(t, j);
        b.set_bit(i, s[i] == '1');
      }
      return Value::bits(std::move(b));
    }
    case Kind::OctetString:
      if (!j.is_string()) mismatch(t, j);
      return Value::octets(from_hex(j.get<std::string>()));
    case Kind::Sequence: {
      if (!j.is_object()) mismatch(t, j);
      val::Sequence seq;
      for (const Field& f : t.fields) {
        if (auto it = j.find(f.name); it != j.end()) {
          seq.members.push_back({f.name, Box<Value>(value_from_json(schema, f.type, *it))});
        }
      }
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!t.find_field(it.key())) throw Error("unknown member '" + it.key() + "'");
      }
      return seq;
    }
    case Kind::SequenceOf: {
      if (!j.is_array()) mismatch(t, j);
      std::vector<Value> items;
      for (const auto& e : j) items.push_back(value_from_json(schema, *t.element, e));
      return Value::sequence_of(std::move(items));
    }
    case Kind::Choice: {
      if (!j.is_object() || j.size() != 1) mismatch(t, j);
      const Field* f = t.find_field(j.begin().key());
      if (!f) throw Error("unknown alternative '" + j.begin().key() + "'");
      return Value::choice(f->name, value_from_json(schema, f->type, j.begin().value()));
    }
    case Kind::Reference:
      break;
  }
  throw Error("unresolved type");
}

}  // namespace asnfuzz
