#include "asnfuzz/mangler.hpp"

#include <algorithm>

namespace asnfuzz {

namespace {
constexpr std::uint8_t kBoundaries[] = {0x00, 0xFF, 0x7F, 0x80, 0x01};
constexpr std::size_t kMaxSlice = 16;
}  // namespace

std::vector<std::uint8_t> mangle_bytes(std::vector<std::uint8_t> data, Rng& rng) {
  const std::uint64_t ops = rng.range(1, 4);
  for (std::uint64_t i = 0; i < ops; ++i) {
    if (data.empty()) {
      data.push_back(rng.byte());
      continue;
    }
    const std::size_t at = rng.below(data.size());
    switch (rng.below(5)) {
      case 0:
        data[at] ^= static_cast<std::uint8_t>(1u << rng.below(8));
        break;
      case 1: {
        const std::size_t len = 1 + rng.below(std::min(kMaxSlice, data.size() - at));
        std::vector<std::uint8_t> slice(data.begin() + at, data.begin() + at + len);
        data.insert(data.begin() + at + len, slice.begin(), slice.end());
        break;
      }
      case 2: {
        const std::size_t len = 1 + rng.below(std::min(kMaxSlice, data.size() - at));
        data.erase(data.begin() + at, data.begin() + at + len);
        break;
      }
      case 3:
        data[at] = kBoundaries[rng.below(std::size(kBoundaries))];
        break;
      default:
        data[at] = rng.byte();
        break;
    }
  }
  return data;
}

}  // namespace asnfuzz
