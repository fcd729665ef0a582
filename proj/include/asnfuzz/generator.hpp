#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "asnfuzz/rng.hpp"
#include "asnfuzz/schema.hpp"
#include "asnfuzz/value.hpp"

namespace asnfuzz {

struct GeneratorOptions {
  bool christmas_tree = false;  // include every OPTIONAL field that fits
  std::size_t max_depth = 24;
  // Past this many nodes the generator stops adding optional content.
  std::size_t soft_node_limit = 2000;
  // Extra elements beyond the lower bound for SEQUENCE OF and strings whose
  // upper bound is absent or far away.
  std::size_t list_slack = 4;
  std::size_t string_slack = 64;
};

// Builds random values that conform to a schema: mandatory fields always,
// OPTIONAL fields by coin flip, a random CHOICE alternative, random element
// counts and lengths within constraints.
class ValueGenerator {
 public:
  ValueGenerator(const Schema& schema, Rng& rng, GeneratorOptions opts = {});

  Value generate(const TypeExpr& type);
  Value generate(std::string_view assignment);

 private:
  Value gen(const TypeExpr& type, std::size_t budget);
  std::size_t height(const TypeExpr& t) const;
  std::size_t pick_length(const std::optional<SizeConstraint>& size);

  const Schema& schema_;
  Rng& rng_;
  GeneratorOptions opts_;
  HeightTable heights_;
  std::size_t nodes_ = 0;
};

val::BitString random_bits(Rng& rng, std::size_t n);
std::vector<std::uint8_t> random_octets(Rng& rng, std::size_t n);

}  // namespace asnfuzz
