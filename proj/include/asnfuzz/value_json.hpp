#pragma once

#include <json.hpp>

#include "asnfuzz/schema.hpp"
#include "asnfuzz/value.hpp"

namespace asnfuzz {

// Type-directed JSON form of a Value:
//   BOOLEAN true/false; INTEGER number (decimal string past 64 bits);
//   ENUMERATED item name; BIT STRING "0101..."; OCTET STRING hex;
//   SEQUENCE object of present members; SEQUENCE OF array;
//   CHOICE {"alternative": value}.
nlohmann::ordered_json value_to_json(const Schema& schema, const TypeExpr& type,
                                     const Value& value);
// Throws Error when the JSON does not fit the type.
Value value_from_json(const Schema& schema, const TypeExpr& type,
                      const nlohmann::ordered_json& json);

}  // namespace asnfuzz
