#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asnfuzz/schema.hpp"
#include "asnfuzz/value.hpp"

namespace asnfuzz {

// Encoded bits, MSB-first. bytes holds bit_length bits rounded up to whole
// octets (at least one) with zero padding.
struct BitBuffer {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_length = 0;

  static BitBuffer from_bytes(std::vector<std::uint8_t> b) {
    std::size_t n = b.size() * 8;
    return BitBuffer{std::move(b), n};
  }
  friend bool operator==(const BitBuffer&, const BitBuffer&) = default;
};

std::string to_hex(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);  // throws Error

// Largest length the general length determinant can carry.
inline constexpr std::size_t kMaxGeneralLength = 16383;

// Throws EncodeError.
BitBuffer encode(const Schema& schema, std::string_view root,
                 const Value& value);
BitBuffer encode_type(const Schema& schema, const TypeExpr& type,
                      const Value& value);

struct Decoded {
  Value value;
  std::size_t bits_consumed = 0;
};

// Decodes one value from the front of bits. Throws DecodeError.
Decoded decode(const Schema& schema, std::string_view root,
               const BitBuffer& bits);
Decoded decode_type(const Schema& schema, const TypeExpr& type,
                    const BitBuffer& bits);

// Like decode, but also rejects anything after the value other than the
// zero padding up to the next octet boundary.
Value decode_exact(const Schema& schema, std::string_view root,
                   const BitBuffer& bits);

}  // namespace asnfuzz
