#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace asnfuzz {

using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const BigInt& v) { return v.str(); }

// Number of bits needed to represent 0..n-1 (ceil(log2 n)); 0 for n <= 1.
inline unsigned bits_for_range(const BigInt& n) {
  if (n <= 1) return 0;
  BigInt m = n - 1;
  return static_cast<unsigned>(boost::multiprecision::msb(m)) + 1;
}

}  // namespace asnfuzz
