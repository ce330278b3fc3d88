#pragma once

// Mixed-radix helpers shared by the implementation files. Digit k of a word
// index is the k-th cell, least significant first.

#include <span>
#include <string>
#include <vector>

#include "mca/error.hpp"
#include "mca/group.hpp"

namespace mca::detail {

inline std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap, const std::string& what) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) throw Error(ErrorKind::SizeLimit, what + " exceeds the cap of " + std::to_string(cap));
    r *= base;
  }
  if (r > cap) throw Error(ErrorKind::SizeLimit, what + " exceeds the cap of " + std::to_string(cap));
  return r;
}

inline void next_word(std::vector<Element>& w, std::size_t n) {
  for (auto& x : w) {
    if (++x < n) return;
    x = 0;
  }
}

inline std::vector<Element> unrank(std::size_t idx, std::size_t n, std::size_t len) {
  std::vector<Element> w(len);
  for (auto& x : w) {
    x = static_cast<Element>(idx % n);
    idx /= n;
  }
  return w;
}

inline std::size_t rank_word(std::span<const Element> w, std::size_t n) {
  std::size_t idx = 0;
  for (std::size_t k = w.size(); k-- > 0;) idx = idx * n + w[k];
  return idx;
}

}  // namespace mca::detail
