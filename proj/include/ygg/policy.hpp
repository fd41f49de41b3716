#pragma once

#include <ygg/errors.hpp>
#include <ygg/symstring.hpp>

#include <string>
#include <string_view>

namespace ygg {

// How the client picks which symbols to delete.
enum class DeletionStrategy {
  UniformRandom,  // a uniformly random subset of positions
  RunBreaking,    // shorten runs of identical symbols first
};

inline std::string_view to_string(DeletionStrategy s) {
  return s == DeletionStrategy::UniformRandom ? "uniform" : "runbreaking";
}

inline DeletionStrategy parse_strategy(std::string_view s) {
  if (s == "uniform")
    return DeletionStrategy::UniformRandom;
  if (s == "runbreaking")
    return DeletionStrategy::RunBreaking;
  throw InvalidArgument("unknown deletion strategy \"" + std::string(s) + "\"");
}

// What the cloud publishes to clients: the shape every uploaded base must have.
struct Policy {
  unsigned k = 8;
  std::size_t n_o = 128;
  std::size_t n_b = 120;
  DeletionStrategy strategy = DeletionStrategy::UniformRandom;

  friend bool operator==(const Policy&, const Policy&) = default;
};

} // namespace ygg
