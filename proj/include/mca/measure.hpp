#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mca/pseudoproduct.hpp"
#include "mca/rule.hpp"

namespace mca {

/// Exact probability numerator; every measure keeps one common denominator.
using Weight = unsigned __int128;

std::string to_string(Weight w);
double to_double(Weight w);

inline constexpr std::size_t kDefaultStateCap = 100'000'000;

/// Shift-invariant cell process: uniform, Bernoulli or stationary Markov, with
/// rational parameters over a single denominator.
struct MeasureSpec {
  enum class Kind { Uniform, Bernoulli, Markov };

  Kind kind = Kind::Uniform;
  std::size_t alphabet = 0;
  std::uint64_t denominator = 1;
  std::vector<std::uint64_t> cell;                     // Bernoulli weights or Markov initial law
  std::vector<std::vector<std::uint64_t>> transition;  // Markov rows

  static MeasureSpec uniform(std::size_t alphabet);
  /// Throws Error{InvalidSpec} unless the weights sum to `denominator`.
  static MeasureSpec bernoulli(std::vector<std::uint64_t> weights, std::uint64_t denominator);
  /// Decimal probabilities, rationalized over the smallest power of ten
  /// (at most 10^9) that represents all of them exactly.
  static MeasureSpec bernoulli(const std::vector<double>& probabilities);
  /// Rows must sum to `denominator` and `initial` must be stationary.
  static MeasureSpec markov(std::vector<std::uint64_t> initial, std::vector<std::vector<std::uint64_t>> transition,
                            std::uint64_t denominator);
  static MeasureSpec markov(const std::vector<double>& initial, const std::vector<std::vector<double>>& transition);

  double probability(Element x) const { return static_cast<double>(cell[x]) / static_cast<double>(denominator); }
  /// Entropy of the shift per cell, in bits.
  double shift_entropy_bits() const;

  Weight word_weight(std::span<const Element> word) const;
  /// denominator^length; throws Error{SizeLimit} past 128 bits.
  Weight word_denominator(std::size_t length) const;
};

/// λ ⊗ ν on B through the frame's bijection A × C -> B. Bernoulli or uniform
/// factors only.
MeasureSpec product_spec(const PseudoFrame& frame, const MeasureSpec& lambda, const MeasureSpec& nu);

/// Exact measure on alphabet^[first, first + length).
class WindowMeasure {
 public:
  WindowMeasure(std::size_t alphabet, long long first, std::size_t length, std::vector<Weight> weights,
                Weight denominator);

  static WindowMeasure from_spec(const MeasureSpec& spec, long long first, std::size_t length,
                                 std::size_t cap = kDefaultStateCap);
  static WindowMeasure point_mass(std::size_t alphabet, long long first, std::span<const Element> word);

  std::size_t alphabet() const noexcept { return alphabet_; }
  long long first() const noexcept { return first_; }
  long long end() const noexcept { return first_ + static_cast<long long>(length_); }
  std::size_t length() const noexcept { return length_; }
  const std::vector<Weight>& weights() const noexcept { return weights_; }
  Weight denominator() const noexcept { return denominator_; }
  double probability(std::size_t index) const { return to_double(weights_[index]) / to_double(denominator_); }

  /// Marginal on [first, first + length), which must lie inside the window.
  WindowMeasure marginal(long long first, std::size_t length) const;

  /// Same law in lowest terms.
  WindowMeasure reduced() const;

  /// Equal laws on the same window, whatever the denominators.
  friend bool operator==(const WindowMeasure& a, const WindowMeasure& b);

 private:
  std::size_t alphabet_;
  long long first_;
  std::size_t length_;
  std::vector<Weight> weights_;
  Weight denominator_;
};

/// Word-wise product through the frame; both windows must coincide.
WindowMeasure product_measure(const PseudoFrame& frame, const WindowMeasure& lambda, const WindowMeasure& nu);

/// Exact image measure on the shrunken window [first - v_lo, end - v_hi).
WindowMeasure push_forward(const LocalTable& table, const WindowMeasure& m, std::size_t workers = 0);
WindowMeasure push_forward(const McaRule& rule, const WindowMeasure& m, std::size_t workers = 0);
WindowMeasure push_forward(const Nhca& nhca, const WindowMeasure& m, std::size_t workers = 0);

}  // namespace mca
