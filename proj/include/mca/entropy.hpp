#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mca/decompose.hpp"
#include "mca/measure.hpp"
#include "mca/rule.hpp"

namespace mca {

/// Shannon entropy in bits, with 0·log 0 = 0.
double entropy_bits(std::span<const double> probabilities);
double partition_entropy(const WindowMeasure& m);

/// Atom weight -> number of atoms carrying it (zero weights omitted).
using WeightHistogram = std::map<Weight, std::uint64_t>;
double histogram_entropy(const WeightHistogram& histogram, Weight denominator);

struct EntropyOptions {
  std::size_t cap = kDefaultStateCap;  // bound on |B|^(N·V)
  std::size_t workers = 0;
};

struct TrajectoryEntropy {
  std::size_t steps = 0;
  int L = 0, R = 0;
  long long window_first = 0;  // generating input window [-N·L, N·R)
  std::size_t window_length = 0;
  Weight denominator = 1;
  WeightHistogram joint;     // law of the trajectory of the window [-L, R)
  WeightHistogram marginal;  // law of the input on the generating window
  double joint_bits = 0.0;
  double marginal_bits = 0.0;

  bool distributions_equal() const { return joint == marginal; }
  double per_step_rate() const { return steps == 0 ? 0.0 : joint_bits / static_cast<double>(steps); }
};

/// Joint law of the outputs on [-L, R) at times 0..N-1 (time 0 is the input
/// itself), by exact enumeration of the generating window.
TrajectoryEntropy trajectory_partition_entropy(const McaRule& rule, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options = {});
TrajectoryEntropy trajectory_partition_entropy(const LocalTable& table, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options = {});
/// steps[t] carries time t to t + 1 and must cover every cell reachable from
/// the generating window; all share one neighborhood.
TrajectoryEntropy trajectory_partition_entropy(const std::vector<Nhca>& steps, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options = {});

struct FormulaEntropy {
  double bits = 0.0;
  int V = 0;
  bool invariance_checked = false;  // push-forward of a short window matched exactly
  std::string warning;
};

/// V times the shift entropy of `spec`. Throws Error{NotPermutative} unless
/// the rule is bipermutative (V = 0 gives 0).
FormulaEntropy formula_entropy(const McaRule& rule, const MeasureSpec& spec, std::size_t cap = kDefaultEvaluationCap);

double skew_entropy(int V, int W, double h_lambda, double h_nu);

struct SkewEntropy {
  int V = 0, W = 0;
  double h_lambda = 0.0, h_nu = 0.0;
  double bits = 0.0;
};

/// V and W from the trimmed fibre and quotient tables. Throws
/// Error{NotPermutative} unless every fibre and the quotient rule are
/// bipermutative.
SkewEntropy skew_entropy(const SkewDecomposition& decomposition, const MeasureSpec& lambda, const MeasureSpec& nu);

struct RelativeTrajectoryEntropy {
  std::size_t steps = 0;
  double conditional_bits = 0.0;  // Σ_c ν(c)·H(A-trajectory | c on the window)
  double quotient_bits = 0.0;     // trajectory entropy of the quotient rule under ν
  bool fibres_exact = true;       // every fibre trajectory law equalled λ on the window
};

/// Finite-N fibrewise trajectory entropies averaged over the C-words of the
/// generating window.
RelativeTrajectoryEntropy relative_trajectory_entropy(const SkewDecomposition& decomposition, const MeasureSpec& lambda,
                                                      const MeasureSpec& nu, std::size_t N,
                                                      const EntropyOptions& options = {});

}  // namespace mca
