#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mca/decompose.hpp"
#include "mca/measure.hpp"
#include "mca/rule.hpp"

namespace mca {

using Complex = std::complex<double>;

/// A finitely supported character of A^Z for abelian A ≅ ⊕ Z/n_i, possibly
/// scaled by a root of unity (an affine character). Coefficients refer to the
/// coordinates of `abelian_invariants(A)`.
class Character {
 public:
  using Tuple = std::vector<std::size_t>;

  Character() = default;
  /// Reduces coefficients mod n_i and drops all-zero tuples. `phase` is the
  /// exponent of exp(2πi/exponent), exponent = lcm of the invariants.
  Character(std::vector<std::size_t> invariants, std::map<long long, Tuple> support, std::size_t phase = 0);

  static Character trivial(std::vector<std::size_t> invariants);
  static Character single(std::vector<std::size_t> invariants, long long cell, Tuple coefficients);

  const std::vector<std::size_t>& invariants() const noexcept { return invariants_; }
  const std::map<long long, Tuple>& support() const noexcept { return support_; }
  std::size_t rank() const noexcept { return support_.size(); }
  bool is_trivial() const noexcept { return support_.empty() && phase_ == 0; }
  std::size_t phase() const noexcept { return phase_; }
  std::size_t exponent() const noexcept { return exponent_; }
  long long lowest_cell() const { return support_.begin()->first; }
  long long highest_cell() const { return support_.rbegin()->first; }

  /// Exponent of exp(2πi/exponent) contributed by element x under tuple c.
  std::size_t phase_of(const Tuple& c, const AbelianStructure& s, Element x) const;
  /// Value on the word at cells [first, first + word.size()), which must
  /// contain the support.
  Complex evaluate(const AbelianStructure& s, long long first, std::span<const Element> word) const;

  friend bool operator==(const Character& a, const Character& b) {
    return a.invariants_ == b.invariants_ && a.support_ == b.support_ && a.phase_ == b.phase_;
  }

 private:
  std::vector<std::size_t> invariants_;
  std::map<long long, Tuple> support_;
  std::size_t phase_ = 0;
  std::size_t exponent_ = 1;
};

Complex root_of_unity(std::size_t k, std::size_t n);

/// Every character supported in [first, first + length), ordered by rank and
/// then lexicographically by (cell, coefficient index). Throws
/// Error{NotAbelian} and Error{SizeLimit} above `cap` characters.
std::vector<Character> characters_of(const GroupPtr& group, long long first, std::size_t length,
                                     std::size_t cap = kDefaultEvaluationCap);

/// Σ_w m[w]·χ(w), summed exactly per root of unity. Throws
/// Error{WindowLength} when the support leaves the window.
Complex fourier_coefficient(const Character& chi, const AbelianStructure& s, const WindowMeasure& m);

/// Product over the support of single-cell sums for a Bernoulli cell law.
Complex bernoulli_fourier(const Character& chi, const AbelianStructure& s, const MeasureSpec& cell);

/// Dual form of an affine rule l(a)_k = bias + Σ_v f_v(a_{k+v}) over abelian A.
struct LinearRuleDual {
  std::vector<std::size_t> invariants;
  /// position v -> matrix T_v with (χ∘f_v) coefficients c' = T_v c.
  std::map<int, std::vector<std::vector<std::size_t>>> rows;
  Character::Tuple bias;  // coordinates of the bias element

  /// Throws Error{NotAbelian}.
  static LinearRuleDual of(const McaRule& rule);
  static LinearRuleDual of(const McaRule& rule, const AbelianStructure& s);
};

/// χ∘l: the tuple at cell k feeds cell k + v through T_v.
Character dual_action(const LinearRuleDual& dual, const Character& chi);

struct DiffusionReport {
  std::vector<std::size_t> ranks;  // rank of χ∘l^j for j = 0..j_max

  /// Fraction of j in [0, j_max] with rank > threshold.
  double density_above(std::size_t threshold) const;
};

DiffusionReport diffusion_report(const LinearRuleDual& dual, const Character& chi, std::size_t j_max);

/// Number of odd binomial coefficients C(j, k): 2^(binary digit sum of j).
std::size_t lucas_odd_count(std::uint64_t j);

struct RelativeDiffusion {
  std::size_t rank = 0;            // rank of α∘l^j
  bool verified = false;           // every fibre composite matched exactly
  std::size_t c_words_checked = 0;
  std::optional<std::vector<Element>> mismatch;  // first failing c-word
};

/// rank[α∘F_c^(j)] through the linear part of a central split. With `verify`,
/// builds F_c^(j) for every C-word of the needed window and compares its
/// character with α∘l^j up to phase.
RelativeDiffusion relative_diffusion_rank(const CentralSplit& split, const Character& alpha, std::size_t j,
                                          bool verify = true, std::size_t cap = kDefaultEvaluationCap);

/// A probe character on B (abelian B) or on the quotient C of a frame.
struct Probe {
  std::string id;
  Character chi;
  bool on_quotient = false;
};

struct RandomizationOptions {
  std::size_t n_max = 64;
  std::size_t tv_window = 1;                 // cells of the TV marginal, starting at 0
  std::size_t cap = kDefaultEvaluationCap;   // exact mode needs |B|^(input window) <= cap
  std::size_t samples = 100'000;             // Monte-Carlo chains beyond exact mode
  bool monte_carlo = true;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

struct RandomizationStep {
  std::size_t n = 0;
  std::string mode;  // "exact", "invariant", "mc" or "dual"
  std::size_t samples = 0;
  double tv = 0.0, cesaro_tv = 0.0, tv_stderr = 0.0;
  std::vector<double> coef;         // |<χ, G^n μ>| per probe
  std::vector<double> cesaro_coef;  // running Cesàro mean of coef
  std::vector<double> coef_stderr;  // zero unless sampled
  std::vector<bool> fast_path;      // coef from the dual path
  std::vector<std::optional<Complex>> measured;  // exact or sampled value, if computed
  std::vector<double> measured_stderr;            // zero unless sampled
};

struct RandomizationReport {
  std::vector<std::string> probe_ids;
  std::vector<RandomizationStep> steps;
  std::optional<std::vector<long long>> exponent_sums;
  bool hypothesis_holds = false;  // every exponent sum coprime to |B|
  std::string warning;
  std::size_t largest_exact_n = 0;
};

/// Iterates μ under the rule: exact push-forward while the input window fits
/// the cap, seeded Monte-Carlo afterwards. Probe coefficients use the dual
/// path whenever the probe's group is abelian and the relevant cell law is
/// Bernoulli. Cesàro means: value at n = 0, then (1/N) Σ_{n=1..N}.
RandomizationReport cesaro_randomization(const McaRule& rule, const MeasureSpec& init,
                                         const std::vector<Probe>& probes, const RandomizationOptions& options,
                                         const PseudoFramePtr& frame = nullptr);

/// Max |<χ, μ>| over characters of each rank 1..r_max. Bernoulli: the best
/// single-cell magnitude to the power r. Markov: exact maximum over supports
/// inside r + 2 consecutive cells, by transfer-matrix products.
std::vector<double> harmonic_mixing_profile(const MeasureSpec& spec, const AbelianStructure& s, std::size_t r_max);

/// Seed for Monte-Carlo chain i: splitmix64(splitmix64(seed) ^ i).
std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t chain);

}  // namespace mca
