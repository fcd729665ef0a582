#pragma once

#include <cstdint>
#include <vector>

#include "asnfuzz/rng.hpp"

namespace asnfuzz {

// Byte-level mutator used when no external mangler is configured: one to
// four operations drawn from bit flips, slice duplication and deletion,
// boundary-value substitution and random byte replacement.
std::vector<std::uint8_t> mangle_bytes(std::vector<std::uint8_t> data, Rng& rng);

}  // namespace asnfuzz
