#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace asnfuzz {

// One addressing step: a name (assignment, field or alternative) or a
// 0-based SEQUENCE OF element index.
using PathStep = std::variant<std::string, std::size_t>;

// Addresses one node inside a Schema or a Value. The first step is always
// an assignment name. Text form joins steps with '.', e.g.
// "RRCSetupRequest.rrcSetupRequest.ue-Identity" or "List.items.0".
struct TypePath {
  std::vector<PathStep> steps;

  TypePath() = default;
  TypePath(std::initializer_list<PathStep> s) : steps(s) {}
  explicit TypePath(std::vector<PathStep> s) : steps(std::move(s)) {}

  static TypePath parse(std::string_view text);
  std::string str() const;

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  TypePath child(PathStep step) const {
    TypePath p = *this;
    p.steps.push_back(std::move(step));
    return p;
  }
  // Last name step, skipping trailing indices; empty if none.
  std::string last_name() const;
  bool starts_with(const TypePath& prefix) const;

  friend bool operator==(const TypePath&, const TypePath&) = default;
  friend auto operator<=>(const TypePath&, const TypePath&) = default;
};

}  // namespace asnfuzz
