#include "mca/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mca/error.hpp"
#include "mca/parallel.hpp"
#include "words.hpp"

namespace mca {

double entropy_bits(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double partition_entropy(const WindowMeasure& m) {
  const double d = to_double(m.denominator());
  double h = 0.0;
  for (auto w : m.weights()) {
    if (w == 0) continue;
    const double p = to_double(w) / d;
    h -= p * std::log2(p);
  }
  return h;
}

double histogram_entropy(const WeightHistogram& histogram, Weight denominator) {
  const double d = to_double(denominator);
  double h = 0.0;
  for (const auto& [w, count] : histogram) {
    if (w == 0) continue;
    const double p = to_double(w) / d;
    h -= static_cast<double>(count) * p * std::log2(p);
  }
  return h;
}

namespace {

// Local map of output cell m at step t (time t -> t + 1).
using CellLookup = std::function<const LocalTable&(std::size_t t, long long m)>;

TrajectoryEntropy trajectory_core(std::size_t n, int v_lo, int v_hi, const CellLookup& cell, const MeasureSpec& spec,
                                  std::size_t N, const EntropyOptions& options) {
  if (N == 0) throw Error(ErrorKind::InvalidSpec, "trajectory needs at least one time step");
  if (spec.alphabet != n) throw Error(ErrorKind::InvalidSpec, "measure alphabet does not match the rule's group");
  const int L = v_lo < 0 ? -v_lo : 0, R = v_hi > 0 ? v_hi : 0, V = L + R;
  const std::size_t width = static_cast<std::size_t>(v_hi - v_lo + 1);
  const std::size_t len = N * static_cast<std::size_t>(V);
  detail::checked_power(n, len, options.cap, "|B|^(N*V)");

  TrajectoryEntropy out;
  out.steps = N;
  out.L = L;
  out.R = R;
  out.window_first = -static_cast<long long>(N) * L;
  out.window_length = len;
  out.denominator = spec.word_denominator(len);

  // Per-step cell tables over the shrinking windows.
  std::vector<std::vector<const LocalTable*>> tables(N - 1);
  std::vector<long long> firsts(N, out.window_first);
  std::vector<std::size_t> lengths(N, len);
  for (std::size_t t = 0; t + 1 < N; ++t) {
    firsts[t + 1] = firsts[t] - v_lo;
    lengths[t + 1] = lengths[t] + 1 - width;
    for (std::size_t k = 0; k < lengths[t + 1]; ++k)
      tables[t].push_back(&cell(t, firsts[t + 1] + static_cast<long long>(k)));
  }

  const std::size_t vv = static_cast<std::size_t>(V);
  const std::size_t blocks = detail::checked_power(n, vv, options.cap, "|B|^V");
  const std::size_t rest_len = len - vv;
  const std::size_t rest_size = detail::checked_power(n, rest_len, options.cap, "|B|^((N-1)V)");
  const std::size_t left_rest = (N - 1) * static_cast<std::size_t>(L);

  const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, blocks));
  std::vector<WeightHistogram> joint(chunks), marginal(chunks);

  parallel_for(chunks, chunks, [&](std::size_t cb, std::size_t ce) {
    std::vector<Weight> block_law(rest_size);
    std::vector<Element> word(len), rest(rest_len), cur, next;
    for (std::size_t ch = cb; ch < ce; ++ch) {
      const std::size_t begin = blocks * ch / chunks, end = blocks * (ch + 1) / chunks;
      for (std::size_t block = begin; block < end; ++block) {
        const auto centre = detail::unrank(block, n, vv);
        std::fill(block_law.begin(), block_law.end(), Weight{0});
        std::fill(rest.begin(), rest.end(), Element{0});
        for (std::size_t r = 0; r < rest_size; ++r, detail::next_word(rest, n)) {
          std::copy(rest.begin(), rest.begin() + static_cast<long long>(left_rest), word.begin());
          std::copy(centre.begin(), centre.end(), word.begin() + static_cast<long long>(left_rest));
          std::copy(rest.begin() + static_cast<long long>(left_rest), rest.end(),
                    word.begin() + static_cast<long long>(left_rest + vv));
          const Weight w = spec.word_weight(word);
          if (w == 0) continue;
          ++marginal[ch][w];
          // Key: windows at times 1..N-1, earliest least significant.
          cur = word;
          std::size_t key = 0, place = 1;
          for (std::size_t t = 0; t + 1 < N; ++t) {
            const auto& cells = tables[t];
            next.resize(cells.size());
            for (std::size_t k = 0; k < cells.size(); ++k) next[k] = (*cells[k])(cur.data() + k);
            const auto at = static_cast<std::size_t>(-L - firsts[t + 1]);
            for (std::size_t k = 0; k < vv; ++k, place *= n) key += place * next[at + k];
            cur.swap(next);
          }
          block_law[key] += w;
        }
        for (auto w : block_law)
          if (w != 0) ++joint[ch][w];
      }
    }
  });
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    for (const auto& [w, c] : joint[ch]) out.joint[w] += c;
    for (const auto& [w, c] : marginal[ch]) out.marginal[w] += c;
  }
  out.joint_bits = histogram_entropy(out.joint, out.denominator);
  out.marginal_bits = histogram_entropy(out.marginal, out.denominator);
  return out;
}

}  // namespace

TrajectoryEntropy trajectory_partition_entropy(const McaRule& rule, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options) {
  return trajectory_partition_entropy(LocalTable::of(rule), spec, N, options);
}

TrajectoryEntropy trajectory_partition_entropy(const LocalTable& table, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options) {
  return trajectory_core(
      table.group()->order(), table.v_lo(), table.v_hi(),
      [&](std::size_t, long long) -> const LocalTable& { return table; }, spec, N, options);
}

TrajectoryEntropy trajectory_partition_entropy(const std::vector<Nhca>& steps, const MeasureSpec& spec, std::size_t N,
                                               const EntropyOptions& options) {
  if (steps.empty()) throw Error(ErrorKind::InvalidSpec, "trajectory needs at least one step map");
  if (steps.size() + 1 < N)
    throw Error(ErrorKind::InvalidSpec, std::to_string(N) + " times need " + std::to_string(N - 1) + " step maps");
  const auto& shape = steps.front().shape();
  return trajectory_core(
      shape.group()->order(), shape.v_lo(), shape.v_hi(),
      [&](std::size_t t, long long m) -> const LocalTable& { return steps[t].at(m); }, spec, N, options);
}

FormulaEntropy formula_entropy(const McaRule& rule, const MeasureSpec& spec, std::size_t cap) {
  const std::size_t n = rule.group()->order();
  if (spec.alphabet != n) throw Error(ErrorKind::InvalidSpec, "measure alphabet does not match the rule's group");
  FormulaEntropy out;
  out.V = rule.V();
  if (out.V == 0) {
    out.invariance_checked = true;
    return out;
  }
  const auto table = LocalTable::of(rule, cap);
  if (!permutativity(table).bipermutative())
    throw Error(ErrorKind::NotPermutative, "entropy formula needs a bipermutative rule");
  out.bits = out.V * spec.shift_entropy_bits();
  if (spec.kind == MeasureSpec::Kind::Uniform) {
    out.invariance_checked = true;
    return out;
  }
  // Necessary condition on one short window: G_* μ|[0, width+1) = μ|[.., 2 cells).
  const std::size_t len = table.width() + 1;
  try {
    const auto in = WindowMeasure::from_spec(spec, 0, len, cap);
    const auto image = push_forward(table, in, 1);
    const auto expected = WindowMeasure::from_spec(spec, image.first(), image.length(), cap);
    if (image == expected) {
      out.invariance_checked = true;
      out.warning = "invariance verified only on windows of length " + std::to_string(image.length());
    } else {
      out.warning = "measure is not invariant under the rule; the formula's hypothesis fails";
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SizeLimit) throw;
    out.warning = "invariance not checked: " + std::string(e.what());
  }
  return out;
}

double skew_entropy(int V, int W, double h_lambda, double h_nu) { return V * h_lambda + W * h_nu; }

SkewEntropy skew_entropy(const SkewDecomposition& decomposition, const MeasureSpec& lambda, const MeasureSpec& nu) {
  const auto& frame = *decomposition.frame;
  if (lambda.alphabet != frame.a_group()->order() || nu.alphabet != frame.c_group()->order())
    throw Error(ErrorKind::InvalidSpec, "factor alphabets do not match the frame");
  SkewEntropy out;
  int fibre_lo = 0, fibre_hi = 0;
  for (std::size_t i = 0; i < decomposition.fibres.size(); ++i) {
    const auto trimmed = trim_neighborhood(*decomposition.fibres[i]);
    if (!permutativity(trimmed).bipermutative())
      throw Error(ErrorKind::NotPermutative, "fibre at c-word " + std::to_string(i) + " is not bipermutative");
    if (i == 0) {
      fibre_lo = trimmed.v_lo();
      fibre_hi = trimmed.v_hi();
    } else if (trimmed.v_lo() != fibre_lo || trimmed.v_hi() != fibre_hi) {
      throw Error(ErrorKind::NotPermutative, "fibres have different neighborhoods");
    }
    out.V = trimmed.V();
  }
  const auto h = trim_neighborhood(LocalTable::of(decomposition.h_rule));
  if (!permutativity(h).bipermutative()) throw Error(ErrorKind::NotPermutative, "quotient rule is not bipermutative");
  out.W = h.V();
  out.h_lambda = lambda.shift_entropy_bits();
  out.h_nu = nu.shift_entropy_bits();
  out.bits = skew_entropy(out.V, out.W, out.h_lambda, out.h_nu);
  return out;
}

RelativeTrajectoryEntropy relative_trajectory_entropy(const SkewDecomposition& decomposition, const MeasureSpec& lambda,
                                                      const MeasureSpec& nu, std::size_t N,
                                                      const EntropyOptions& options) {
  const auto& frame = *decomposition.frame;
  const std::size_t na = frame.a_group()->order(), nc = frame.c_group()->order();
  if (lambda.alphabet != na || nu.alphabet != nc)
    throw Error(ErrorKind::InvalidSpec, "factor alphabets do not match the frame");
  if (N == 0) throw Error(ErrorKind::InvalidSpec, "trajectory needs at least one time step");
  const int v_lo = decomposition.v_lo, v_hi = decomposition.v_hi;
  const int L = v_lo < 0 ? -v_lo : 0, R = v_hi > 0 ? v_hi : 0;
  const std::size_t len = N * static_cast<std::size_t>(L + R);
  const std::size_t c_words = detail::checked_power(nc, len, options.cap, "|C|^(N*V)");
  detail::checked_power(na, len, options.cap, "|A|^(N*V)");
  const long long first = -static_cast<long long>(N) * L;

  RelativeTrajectoryEntropy out;
  out.steps = N;
  out.quotient_bits = trajectory_partition_entropy(decomposition.h_rule, nu, N, options).joint_bits;

  const Weight c_denominator = nu.word_denominator(len);
  const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, c_words));
  std::vector<double> sums(chunks, 0.0);
  std::vector<char> exact(chunks, 1);
  EntropyOptions inner = options;
  inner.workers = 1;
  parallel_for(chunks, chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t ch = cb; ch < ce; ++ch) {
      const std::size_t begin = c_words * ch / chunks, end = c_words * (ch + 1) / chunks;
      double sum = 0.0;
      for (std::size_t ci = begin; ci < end; ++ci) {
        Config c{frame.c_group(), first, detail::unrank(ci, nc, len)};
        const Weight w = nu.word_weight(c.word);
        if (w == 0) continue;
        std::vector<Nhca> steps;
        for (std::size_t t = 0; t + 1 < N; ++t) {
          steps.push_back(fibre_nhca(decomposition, c));
          c = apply_window(decomposition.h_rule, c);
        }
        const auto traj = trajectory_core(
            na, v_lo, v_hi, [&](std::size_t t, long long m) -> const LocalTable& { return steps[t].at(m); }, lambda, N,
            inner);
        if (!traj.distributions_equal()) exact[ch] = 0;
        sum += to_double(w) / to_double(c_denominator) * traj.joint_bits;
      }
      sums[ch] = sum;
    }
  });
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    out.conditional_bits += sums[ch];
    out.fibres_exact = out.fibres_exact && exact[ch] != 0;
  }
  return out;
}

}  // namespace mca
