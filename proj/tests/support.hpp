#pragma once

// Shared helpers for the unit tests: a seeded generator for property cases and
// the list of small groups every structural property is checked on.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mca/group.hpp"

namespace mca::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  long long between(long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng_); }
  Element element(const FiniteGroup& g) { return static_cast<Element>(below(g.order())); }
  std::vector<Element> word(const FiniteGroup& g, std::size_t len) {
    std::vector<Element> w(len);
    for (auto& x : w) x = element(g);
    return w;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<std::pair<std::string, GroupPtr>> small_groups() {
  return {
      {"Z1", make_cyclic(1)},
      {"Z2", make_cyclic(2)},
      {"Z4", make_cyclic(4)},
      {"Z6", make_cyclic(6)},
      {"Z2+Z2", make_direct_sum({2, 2})},
      {"Z2+Z4", make_direct_sum({2, 4})},
      {"Q8", make_quaternion()},
      {"Z5xZ4", make_modular_semidirect(5, 2, 4)},
      {"D7_3", make_modular_semidirect(7, 2, 3)},
      {"S3", make_modular_semidirect(3, 2, 2)},
      {"D4", make_modular_semidirect(4, 3, 2)},
  };
}

// Looks up a label that must exist.
inline Element el(const GroupPtr& g, const std::string& label) { return g->find_label(label).value(); }

}  // namespace mca::testing
