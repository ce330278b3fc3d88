#include "mca/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "mca/error.hpp"
#include "mca/parallel.hpp"
#include "words.hpp"

namespace mca {

namespace {

std::size_t lcm_of(const std::vector<std::size_t>& invariants) {
  std::size_t e = 1;
  for (auto n : invariants) e = std::lcm(e, n);
  return e;
}

// Exponent of exp(2πi/E) for coefficient tuple c against coordinates x.
std::size_t tuple_phase(const std::vector<std::size_t>& invariants, std::size_t E, const Character::Tuple& c,
                        const std::vector<std::size_t>& x) {
  std::size_t p = 0;
  for (std::size_t i = 0; i < invariants.size(); ++i) p = (p + (c[i] * x[i] % invariants[i]) * (E / invariants[i])) % E;
  return p;
}

void require_structure(const Character& chi, const AbelianStructure& s) {
  if (chi.invariants() != s.invariants)
    throw Error(ErrorKind::InvalidSpec, "character and group have different abelian invariants");
}

// Σ_k acc[k] ω^k / d.
Complex phase_sum(const std::vector<Weight>& acc, Weight d) {
  Complex z = 0.0;
  const double den = to_double(d);
  for (std::size_t k = 0; k < acc.size(); ++k)
    if (acc[k] != 0) z += to_double(acc[k]) / den * root_of_unity(k, acc.size());
  return z;
}

}  // namespace

Complex root_of_unity(std::size_t k, std::size_t n) {
  k %= n;
  if (k == 0) return 1.0;
  if (2 * k == n) return -1.0;
  if (4 * k == n) return Complex(0.0, 1.0);
  if (4 * k == 3 * n) return Complex(0.0, -1.0);
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

Character::Character(std::vector<std::size_t> invariants, std::map<long long, Tuple> support, std::size_t phase)
    : invariants_(std::move(invariants)), exponent_(lcm_of(invariants_)) {
  phase_ = phase % exponent_;
  for (auto& [cell, tuple] : support) {
    if (tuple.size() != invariants_.size())
      throw Error(ErrorKind::InvalidSpec, "coefficient tuple at cell " + std::to_string(cell) + " has the wrong length");
    bool zero = true;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      tuple[i] %= invariants_[i];
      zero = zero && tuple[i] == 0;
    }
    if (!zero) support_.emplace(cell, std::move(tuple));
  }
}

Character Character::trivial(std::vector<std::size_t> invariants) { return Character(std::move(invariants), {}); }

Character Character::single(std::vector<std::size_t> invariants, long long cell, Tuple coefficients) {
  return Character(std::move(invariants), {{cell, std::move(coefficients)}});
}

std::size_t Character::phase_of(const Tuple& c, const AbelianStructure& s, Element x) const {
  return tuple_phase(invariants_, exponent_, c, s.coords[x]);
}

Complex Character::evaluate(const AbelianStructure& s, long long first, std::span<const Element> word) const {
  require_structure(*this, s);
  std::size_t p = phase_;
  for (const auto& [cell, c] : support_) {
    const long long k = cell - first;
    if (k < 0 || k >= static_cast<long long>(word.size()))
      throw Error(ErrorKind::WindowLength, "character support leaves the word");
    p = (p + phase_of(c, s, word[static_cast<std::size_t>(k)])) % exponent_;
  }
  return root_of_unity(p, exponent_);
}

std::vector<Character> characters_of(const GroupPtr& group, long long first, std::size_t length, std::size_t cap) {
  const auto s = abelian_invariants(group);
  const std::size_t n = group->order();
  const std::size_t total = detail::checked_power(n, length, cap, "number of characters");
  // Coefficient tuples in mixed radix, first coordinate least significant.
  std::vector<Character::Tuple> tuples(n, Character::Tuple(s.invariants.size()));
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t rest = t;
    for (std::size_t i = 0; i < s.invariants.size(); ++i) {
      tuples[t][i] = rest % s.invariants[i];
      rest /= s.invariants[i];
    }
  }
  std::vector<Character> out;
  out.reserve(total);
  std::vector<Element> digits(length, 0);
  for (std::size_t idx = 0; idx < total; ++idx, detail::next_word(digits, n)) {
    std::map<long long, Character::Tuple> support;
    for (std::size_t k = 0; k < length; ++k)
      if (digits[k] != 0) support.emplace(first + static_cast<long long>(k), tuples[digits[k]]);
    out.emplace_back(s.invariants, std::move(support));
  }
  std::stable_sort(out.begin(), out.end(), [](const Character& a, const Character& b) {
    if (a.rank() != b.rank()) return a.rank() < b.rank();
    return a.support() < b.support();
  });
  return out;
}

Complex fourier_coefficient(const Character& chi, const AbelianStructure& s, const WindowMeasure& m) {
  require_structure(chi, s);
  const std::size_t n = m.alphabet(), E = chi.exponent();
  if (s.coords.size() != n) throw Error(ErrorKind::InvalidSpec, "measure alphabet does not match the group");
  std::vector<std::size_t> offsets;
  std::vector<std::vector<std::size_t>> phases;
  for (const auto& [cell, c] : chi.support()) {
    if (cell < m.first() || cell >= m.end())
      throw Error(ErrorKind::WindowLength, "character support at cell " + std::to_string(cell) + " leaves the window");
    offsets.push_back(detail::checked_power(n, static_cast<std::size_t>(cell - m.first()), m.weights().size(), "window"));
    std::vector<std::size_t> ph(n);
    for (Element x = 0; x < n; ++x) ph[x] = chi.phase_of(c, s, x);
    phases.push_back(std::move(ph));
  }
  std::vector<Weight> acc(E, 0);
  for (std::size_t idx = 0; idx < m.weights().size(); ++idx) {
    const Weight w = m.weights()[idx];
    if (w == 0) continue;
    std::size_t p = chi.phase();
    for (std::size_t k = 0; k < offsets.size(); ++k) p += phases[k][(idx / offsets[k]) % n];
    acc[p % E] += w;
  }
  return phase_sum(acc, m.denominator());
}

Complex bernoulli_fourier(const Character& chi, const AbelianStructure& s, const MeasureSpec& cell) {
  require_structure(chi, s);
  if (cell.kind == MeasureSpec::Kind::Markov) throw Error(ErrorKind::InvalidSpec, "factorization needs a Bernoulli law");
  if (cell.alphabet != s.coords.size()) throw Error(ErrorKind::InvalidSpec, "cell law does not match the group");
  const std::size_t E = chi.exponent();
  Complex z = root_of_unity(chi.phase(), E);
  for (const auto& [pos, c] : chi.support()) {
    std::vector<Weight> acc(E, 0);
    for (Element x = 0; x < cell.alphabet; ++x) acc[chi.phase_of(c, s, x)] += cell.cell[x];
    z *= phase_sum(acc, cell.denominator);
  }
  return z;
}

LinearRuleDual LinearRuleDual::of(const McaRule& rule) { return of(rule, abelian_invariants(rule.group())); }

LinearRuleDual LinearRuleDual::of(const McaRule& rule, const AbelianStructure& s) {
  if (!rule.group()->is_abelian()) throw Error(ErrorKind::NotAbelian, "dual action needs an abelian group");
  const std::size_t d = s.invariants.size();
  LinearRuleDual dual;
  dual.invariants = s.invariants;
  dual.bias = s.coords[rule.bias()];
  for (const auto& f : rule.factors()) {
    if (!f.coeff.is_homomorphism()) throw Error(ErrorKind::NotHomomorphism, "rule coefficient is not an endomorphism");
    auto& t = dual.rows[f.pos];
    if (t.empty()) t.assign(d, std::vector<std::size_t>(d, 0));
    for (std::size_t j = 0; j < d; ++j) {
      const auto& image = s.coords[f.coeff(s.generators[j])];
      for (std::size_t i = 0; i < d; ++i) {
        // c'_j / n_j = Σ_i c_i M_ij / n_i, and n_i divides M_ij n_j.
        const std::size_t entry = image[i] * s.invariants[j] / s.invariants[i];
        t[j][i] = (t[j][i] + entry) % s.invariants[j];
      }
    }
  }
  return dual;
}

Character dual_action(const LinearRuleDual& dual, const Character& chi) {
  if (chi.invariants() != dual.invariants) throw Error(ErrorKind::InvalidSpec, "character and rule have different groups");
  const std::size_t d = dual.invariants.size(), E = chi.exponent();
  std::map<long long, Character::Tuple> out;
  std::size_t phase = chi.phase();
  for (const auto& [k, c] : chi.support()) {
    phase = (phase + tuple_phase(dual.invariants, E, c, dual.bias)) % E;
    for (const auto& [v, t] : dual.rows) {
      auto [it, inserted] = out.try_emplace(k + v, Character::Tuple(d, 0));
      auto& target = it->second;
      for (std::size_t j = 0; j < d; ++j) {
        std::size_t acc = target[j];
        for (std::size_t i = 0; i < d; ++i) acc = (acc + t[j][i] * c[i]) % dual.invariants[j];
        target[j] = acc;
      }
    }
  }
  return Character(dual.invariants, std::move(out), phase);
}

double DiffusionReport::density_above(std::size_t threshold) const {
  if (ranks.empty()) return 0.0;
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](std::size_t r) { return r > threshold; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

DiffusionReport diffusion_report(const LinearRuleDual& dual, const Character& chi, std::size_t j_max) {
  DiffusionReport r;
  r.ranks.reserve(j_max + 1);
  Character cur = chi;
  for (std::size_t j = 0; j <= j_max; ++j) {
    r.ranks.push_back(cur.rank());
    if (j < j_max) cur = dual_action(dual, cur);
  }
  return r;
}

std::size_t lucas_odd_count(std::uint64_t j) { return std::size_t{1} << std::popcount(j); }

RelativeDiffusion relative_diffusion_rank(const CentralSplit& split, const Character& alpha, std::size_t j, bool verify,
                                          std::size_t cap) {
  const auto& frame = *split.frame;
  const auto& ag = frame.a_group();
  const auto s = abelian_invariants(ag);
  const auto dual = LinearRuleDual::of(split.linear, s);
  Character target = alpha;
  for (std::size_t t = 0; t < j; ++t) target = dual_action(dual, target);
  RelativeDiffusion out;
  out.rank = target.rank();
  if (!verify || alpha.rank() == 0) {
    out.verified = verify;
    return out;
  }

  const int v_lo = split.source.v_lo(), v_hi = split.source.v_hi();
  const long long lo = alpha.lowest_cell() + static_cast<long long>(j) * v_lo;
  const long long hi = alpha.highest_cell() + static_cast<long long>(j) * v_hi;
  const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
  const std::size_t nc = frame.c_group()->order();
  const std::size_t c_words = detail::checked_power(nc, len, cap, "|C|^window");
  const std::size_t E = alpha.exponent();

  // A-part of g^j(a ⋆ c), computed on B so that nothing from the split is reused.
  auto apply = [&](const std::vector<Element>& c, const std::vector<Element>& a) {
    std::vector<Element> b(len);
    for (std::size_t m = 0; m < len; ++m) b[m] = frame.star(a[m], c[m]);
    Config cur{frame.b(), lo, std::move(b)};
    for (std::size_t t = 0; t < j; ++t) cur = apply_window(split.source, cur);
    Config out{ag, cur.offset, std::vector<Element>(cur.word.size())};
    for (std::size_t m = 0; m < cur.word.size(); ++m) out.word[m] = frame.unstar(cur.word[m]).first;
    return out;
  };
  auto phase_at = [&](const Config& x) {
    std::size_t p = 0;
    for (const auto& [cell, c] : alpha.support()) p += alpha.phase_of(c, s, x.word[static_cast<std::size_t>(cell - x.offset)]);
    return p % E;
  };

  std::vector<Element> cw(len, 0);
  for (std::size_t ci = 0; ci < c_words; ++ci, detail::next_word(cw, nc)) {
    const std::size_t base = phase_at(apply(cw, std::vector<Element>(len, kIdentity)));
    std::map<long long, Character::Tuple> support;
    bool ok = true;
    for (std::size_t k = 0; k < len && ok; ++k) {
      Character::Tuple coeff(s.invariants.size(), 0);
      for (std::size_t i = 0; i < s.invariants.size(); ++i) {
        std::vector<Element> a(len, kIdentity);
        a[k] = s.generators[i];
        const std::size_t diff = (phase_at(apply(cw, a)) + E - base) % E;
        const std::size_t unit = E / s.invariants[i];
        if (diff % unit != 0) {
          ok = false;
          break;
        }
        coeff[i] = diff / unit;
      }
      support.emplace(lo + static_cast<long long>(k), std::move(coeff));
    }
    ++out.c_words_checked;
    if (!ok || Character(s.invariants, std::move(support)).support() != target.support()) {
      out.mismatch = cw;
      out.verified = false;
      return out;
    }
  }
  out.verified = true;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t chain) { return splitmix64(splitmix64(seed) ^ chain); }

namespace {

// Pushes a B-window measure down to C through π, cell by cell.
WindowMeasure project_measure(const WindowMeasure& m, const PseudoFrame& frame) {
  const std::size_t nb = m.alphabet(), nc = frame.c_group()->order();
  const auto size = detail::checked_power(nc, m.length(), m.weights().size(), "window");
  std::vector<Weight> out(size, 0);
  std::vector<Element> b(m.length(), 0), c(m.length());
  for (std::size_t idx = 0; idx < m.weights().size(); ++idx, detail::next_word(b, nb)) {
    for (std::size_t k = 0; k < b.size(); ++k) c[k] = frame.pi()(b[k]);
    out[detail::rank_word(c, nc)] += m.weights()[idx];
  }
  return WindowMeasure(nc, m.first(), m.length(), std::move(out), m.denominator());
}

double tv_from_uniform(const WindowMeasure& m) {
  const double u = 1.0 / static_cast<double>(m.weights().size());
  double tv = 0.0;
  for (std::size_t i = 0; i < m.weights().size(); ++i) tv += std::fabs(m.probability(i) - u);
  return tv / 2.0;
}

struct ProbeContext {
  AbelianStructure s;
  std::optional<LinearRuleDual> dual;
  std::optional<MeasureSpec> cell;  // Bernoulli cell law on the probe's group
};

// Draws a cell value from integer weights over `d`.
Element draw(std::mt19937_64& rng, const std::vector<std::uint64_t>& weights, std::uint64_t d) {
  std::uniform_int_distribution<std::uint64_t> dist(0, d - 1);
  std::uint64_t u = dist(rng);
  for (std::size_t x = 0; x < weights.size(); ++x) {
    if (u < weights[x]) return static_cast<Element>(x);
    u -= weights[x];
  }
  return static_cast<Element>(weights.size() - 1);
}

}  // namespace

RandomizationReport cesaro_randomization(const McaRule& rule, const MeasureSpec& init, const std::vector<Probe>& probes,
                                         const RandomizationOptions& options, const PseudoFramePtr& frame) {
  const auto& group = rule.group();
  const std::size_t nb = group->order();
  if (init.alphabet != nb) throw Error(ErrorKind::InvalidSpec, "initial measure does not match the rule's group");
  if (options.tv_window == 0) throw Error(ErrorKind::InvalidSpec, "TV window must have at least one cell");
  RandomizationReport report;

  report.exponent_sums = rule.exponent_sums();
  if (report.exponent_sums) {
    report.hypothesis_holds = std::all_of(report.exponent_sums->begin(), report.exponent_sums->end(), [&](long long l) {
      return std::gcd(static_cast<std::uint64_t>(l < 0 ? -l : l), static_cast<std::uint64_t>(nb)) == 1;
    });
    if (!report.hypothesis_holds)
      report.warning = "exponent sums are not all coprime to |B|; the randomization hypothesis fails";
  } else {
    report.warning = "coefficients are not power maps; the coprimality hypothesis was not checked";
  }

  // Observation window [0, T).
  std::size_t T = options.tv_window;
  std::vector<ProbeContext> ctx;
  std::optional<McaRule> h_rule;
  for (const auto& p : probes) {
    report.probe_ids.push_back(p.id);
    if (p.chi.rank() > 0) {
      if (p.chi.lowest_cell() < 0) throw Error(ErrorKind::WindowLength, "probe " + p.id + " has support left of cell 0");
      T = std::max(T, static_cast<std::size_t>(p.chi.highest_cell() + 1));
    }
    ProbeContext c;
    if (p.on_quotient) {
      if (!frame) throw Error(ErrorKind::InvalidSpec, "probe " + p.id + " needs a frame");
      c.s = abelian_invariants(frame->c_group());
      if (!h_rule) {
        try {
          h_rule = decompose_mca(rule, frame, DecomposeOptions{options.cap, options.workers}).h_rule;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NotInvariant && e.kind() != ErrorKind::SizeLimit) throw;
        }
      }
      if (h_rule && init.kind != MeasureSpec::Kind::Markov) {
        std::vector<std::uint64_t> w(frame->c_group()->order(), 0);
        for (Element b = 0; b < nb; ++b) w[frame->pi()(b)] += init.cell[b];
        c.dual = LinearRuleDual::of(*h_rule, c.s);
        c.cell = MeasureSpec::bernoulli(std::move(w), init.denominator);
      }
    } else {
      c.s = abelian_invariants(group);
      if (init.kind != MeasureSpec::Kind::Markov) {
        c.dual = LinearRuleDual::of(rule, c.s);
        c.cell = init;
      }
    }
    require_structure(p.chi, c.s);
    ctx.push_back(std::move(c));
  }
  const bool all_fast = std::all_of(ctx.begin(), ctx.end(), [](const ProbeContext& c) { return c.dual.has_value(); });

  const auto table = LocalTable::of(rule, options.cap);
  const std::size_t width = rule.width();
  const int v_lo = rule.v_lo();
  const auto perm = permutativity(table);
  const bool invariant = init.kind == MeasureSpec::Kind::Uniform && (perm.left || perm.right);

  auto window_size = [&](std::size_t n) {
    try {
      return detail::checked_power(nb, T + n * (width - 1), options.cap, "exact window");
    } catch (const Error&) {
      return std::size_t{0};
    }
  };

  // Dual-path coefficients for every n.
  std::vector<Character> dual_chars;
  for (const auto& p : probes) dual_chars.push_back(p.chi);

  std::optional<WindowMeasure> invariant_measure;
  std::size_t n_exact_end = 0;  // exact (or invariant) for n < n_exact_end
  for (std::size_t n = 0; n <= options.n_max; ++n) {
    if (invariant && n > 0) {
      n_exact_end = options.n_max + 1;
      break;
    }
    if (window_size(n) == 0) break;
    n_exact_end = n + 1;
  }
  report.largest_exact_n = n_exact_end == 0 ? 0 : n_exact_end - 1;
  const bool mc = options.monte_carlo && options.samples > 0 && n_exact_end <= options.n_max;
  const std::size_t n_end = mc || all_fast ? options.n_max + 1 : n_exact_end;

  // Monte-Carlo counts for n in [n_exact_end, n_max].
  const std::size_t K = detail::checked_power(nb, options.tv_window, options.cap, "TV categories");
  constexpr std::size_t kBatches = 20;
  std::vector<std::vector<std::uint64_t>> tv_counts;            // [n][batch * K + cat]
  std::vector<std::vector<std::vector<std::uint64_t>>> probe_counts;  // [n][probe][phase]
  if (mc) {
    const std::size_t steps = options.n_max + 1;
    const std::size_t len0 = T + options.n_max * (width - 1);
    const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
    const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, options.samples));
    std::vector<std::vector<std::vector<std::uint64_t>>> tv_part(chunks);
    std::vector<std::vector<std::vector<std::vector<std::uint64_t>>>> probe_part(chunks);
    parallel_for(chunks, chunks, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t ch = cb; ch < ce; ++ch) {
        auto& tvc = tv_part[ch];
        auto& prc = probe_part[ch];
        tvc.assign(steps, std::vector<std::uint64_t>(kBatches * K, 0));
        prc.assign(steps, std::vector<std::vector<std::uint64_t>>(probes.size()));
        for (std::size_t n = 0; n < steps; ++n)
          for (std::size_t p = 0; p < probes.size(); ++p) prc[n][p].assign(probes[p].chi.exponent(), 0);
        const std::size_t begin = options.samples * ch / chunks, end = options.samples * (ch + 1) / chunks;
        std::vector<Element> cur(len0), next;
        for (std::size_t chain = begin; chain < end; ++chain) {
          std::mt19937_64 rng(chain_seed(options.seed, chain));
          for (std::size_t k = 0; k < len0; ++k) {
            if (init.kind == MeasureSpec::Kind::Markov && k > 0)
              cur[k] = draw(rng, init.transition[cur[k - 1]], init.denominator);
            else
              cur[k] = draw(rng, init.cell, init.denominator);
          }
          const std::size_t batch = chain * kBatches / options.samples;
          // The law is shift-invariant, so the leftmost T cells serve as the
          // observation window at every time.
          auto state = cur;
          for (std::size_t n = 0; n < steps; ++n) {
            if (n > 0) {
              next.resize(state.size() + 1 - width);
              for (std::size_t k = 0; k < next.size(); ++k) next[k] = table(state.data() + k);
              state.swap(next);
            }
            if (n < n_exact_end) continue;
            const std::size_t at = 0;
            std::size_t cat = 0;
            for (std::size_t k = options.tv_window; k-- > 0;) cat = cat * nb + state[at + k];
            ++tvc[n][batch * K + cat];
            for (std::size_t p = 0; p < probes.size(); ++p) {
              const auto& chi = probes[p].chi;
              std::size_t ph = chi.phase();
              for (const auto& [cell, c] : chi.support()) {
                Element x = state[at + static_cast<std::size_t>(cell)];
                if (probes[p].on_quotient) x = frame->pi()(x);
                ph += chi.phase_of(c, ctx[p].s, x);
              }
              ++prc[n][p][ph % chi.exponent()];
            }
          }
        }
      }
    });
    tv_counts.assign(steps, std::vector<std::uint64_t>(kBatches * K, 0));
    probe_counts.assign(steps, std::vector<std::vector<std::uint64_t>>(probes.size()));
    for (std::size_t n = 0; n < steps; ++n)
      for (std::size_t p = 0; p < probes.size(); ++p) probe_counts[n][p].assign(probes[p].chi.exponent(), 0);
    for (std::size_t ch = 0; ch < chunks; ++ch)
      for (std::size_t n = 0; n < steps; ++n) {
        for (std::size_t i = 0; i < kBatches * K; ++i) tv_counts[n][i] += tv_part[ch][n][i];
        for (std::size_t p = 0; p < probes.size(); ++p)
          for (std::size_t k = 0; k < probe_counts[n][p].size(); ++k) probe_counts[n][p][k] += probe_part[ch][n][p][k];
      }
  }

  double tv_sum = 0.0;
  std::vector<double> coef_sum(probes.size(), 0.0);
  for (std::size_t n = 0; n < n_end; ++n) {
    RandomizationStep step;
    step.n = n;
    step.coef.resize(probes.size());
    step.cesaro_coef.resize(probes.size());
    step.coef_stderr.assign(probes.size(), 0.0);
    step.measured_stderr.assign(probes.size(), 0.0);
    step.fast_path.assign(probes.size(), false);
    step.measured.assign(probes.size(), std::nullopt);

    if (n < n_exact_end) {
      step.mode = invariant && n > 0 ? "invariant" : "exact";
      WindowMeasure m = [&] {
        if (invariant && invariant_measure) return *invariant_measure;
        auto w = WindowMeasure::from_spec(init, static_cast<long long>(n) * v_lo, T + n * (width - 1), options.cap);
        for (std::size_t t = 0; t < n; ++t) w = push_forward(table, w, options.workers);
        return w;
      }();
      if (invariant && !invariant_measure) invariant_measure = m;
      step.tv = tv_from_uniform(m.marginal(0, options.tv_window));
      std::optional<WindowMeasure> projected;
      for (std::size_t p = 0; p < probes.size(); ++p) {
        if (probes[p].on_quotient) {
          if (!projected) projected = project_measure(m, *frame);
          step.measured[p] = fourier_coefficient(probes[p].chi, ctx[p].s, *projected);
        } else {
          step.measured[p] = fourier_coefficient(probes[p].chi, ctx[p].s, m);
        }
      }
    } else if (mc) {
      step.mode = "mc";
      step.samples = options.samples;
      const auto& counts = tv_counts[n];
      std::vector<std::uint64_t> pooled(K, 0);
      std::vector<double> batch_tv;
      for (std::size_t b = 0; b < kBatches; ++b) {
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < K; ++k) total += counts[b * K + k];
        if (total == 0) continue;
        double tv = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          pooled[k] += counts[b * K + k];
          tv += std::fabs(static_cast<double>(counts[b * K + k]) / static_cast<double>(total) - 1.0 / static_cast<double>(K));
        }
        batch_tv.push_back(tv / 2.0);
      }
      double tv = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        tv += std::fabs(static_cast<double>(pooled[k]) / static_cast<double>(options.samples) - 1.0 / static_cast<double>(K));
      step.tv = tv / 2.0;
      if (batch_tv.size() > 1) {
        const double mean = std::accumulate(batch_tv.begin(), batch_tv.end(), 0.0) / static_cast<double>(batch_tv.size());
        double var = 0.0;
        for (double x : batch_tv) var += (x - mean) * (x - mean);
        var /= static_cast<double>(batch_tv.size() - 1);
        step.tv_stderr = std::sqrt(var / static_cast<double>(batch_tv.size()));
      }
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto& pc = probe_counts[n][p];
        Complex z = 0.0;
        for (std::size_t k = 0; k < pc.size(); ++k)
          if (pc[k] != 0) z += static_cast<double>(pc[k]) * root_of_unity(k, pc.size());
        z /= static_cast<double>(options.samples);
        step.measured[p] = z;
        step.measured_stderr[p] = std::sqrt(std::max(0.0, 1.0 - std::norm(z)) / static_cast<double>(options.samples));
        step.coef_stderr[p] = step.measured_stderr[p];
      }
    } else {
      step.mode = "dual";
      step.tv = std::numeric_limits<double>::quiet_NaN();
    }

    for (std::size_t p = 0; p < probes.size(); ++p) {
      if (ctx[p].dual) {
        if (n > 0) dual_chars[p] = dual_action(*ctx[p].dual, dual_chars[p]);
        step.coef[p] = std::abs(bernoulli_fourier(dual_chars[p], ctx[p].s, *ctx[p].cell));
        step.fast_path[p] = true;
        step.coef_stderr[p] = 0.0;
      } else {
        step.coef[p] = std::abs(*step.measured[p]);
      }
      if (n == 0) {
        step.cesaro_coef[p] = step.coef[p];
      } else {
        coef_sum[p] += step.coef[p];
        step.cesaro_coef[p] = coef_sum[p] / static_cast<double>(n);
      }
    }
    if (n == 0) {
      step.cesaro_tv = step.tv;
    } else {
      tv_sum += step.tv;
      step.cesaro_tv = tv_sum / static_cast<double>(n);
    }
    report.steps.push_back(std::move(step));
  }
  return report;
}

std::vector<double> harmonic_mixing_profile(const MeasureSpec& spec, const AbelianStructure& s, std::size_t r_max) {
  const std::size_t n = spec.alphabet;
  if (s.coords.size() != n) throw Error(ErrorKind::InvalidSpec, "measure alphabet does not match the group");
  const auto& inv = s.invariants;
  const std::size_t E = lcm_of(inv);
  // Nontrivial single-cell coefficient tuples.
  std::vector<Character::Tuple> tuples;
  for (std::size_t t = 1; t < n; ++t) {
    Character::Tuple c(inv.size());
    std::size_t rest = t;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      c[i] = rest % inv[i];
      rest /= inv[i];
    }
    tuples.push_back(std::move(c));
  }
  auto cell_value = [&](const Character::Tuple& c, Element x) { return root_of_unity(tuple_phase(inv, E, c, s.coords[x]), E); };
  const double d = static_cast<double>(spec.denominator);

  std::vector<double> out(r_max, 0.0);
  if (tuples.empty()) return out;
  if (spec.kind != MeasureSpec::Kind::Markov) {
    double best = 0.0;
    for (const auto& c : tuples) {
      Complex z = 0.0;
      for (Element x = 0; x < n; ++x) z += static_cast<double>(spec.cell[x]) / d * cell_value(c, x);
      best = std::max(best, std::abs(z));
    }
    for (std::size_t r = 0; r < r_max; ++r) out[r] = std::pow(best, static_cast<double>(r + 1));
    return out;
  }

  // Markov: <χ, μ> = π D_1 P^{g_1} D_2 ... D_r 1, over supports in r + 2 cells.
  std::vector<std::vector<double>> P(n, std::vector<double>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) P[x][y] = static_cast<double>(spec.transition[x][y]) / d;
  for (std::size_t r = 1; r <= r_max; ++r) {
    const std::size_t span = r + 2;
    double best = 0.0;
    // Supports: r-subsets of [0, span) containing 0.
    std::vector<std::size_t> cells(r);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t k, std::size_t from) {
      if (k == r) {
        // Coefficient choices: tuples^r.
        std::vector<std::size_t> pick(r, 0);
        while (true) {
          std::vector<Complex> row(n);
          for (std::size_t x = 0; x < n; ++x) row[x] = static_cast<double>(spec.cell[x]) / d;
          std::size_t pos = 0;
          for (std::size_t k2 = 0; k2 < r; ++k2) {
            for (; pos < cells[k2]; ++pos) {
              std::vector<Complex> nx(n, 0.0);
              for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) nx[y] += row[x] * P[x][y];
              row.swap(nx);
            }
            for (std::size_t x = 0; x < n; ++x) row[x] *= cell_value(tuples[pick[k2]], static_cast<Element>(x));
          }
          Complex z = 0.0;
          for (auto v : row) z += v;
          best = std::max(best, std::abs(z));
          std::size_t i = 0;
          while (i < r && ++pick[i] == tuples.size()) pick[i++] = 0;
          if (i == r) break;
        }
        return;
      }
      for (std::size_t c = from; c < span; ++c) {
        cells[k] = c;
        choose(k + 1, c + 1);
        if (k == 0) break;  // shift invariance: first cell at 0
      }
    };
    choose(0, 0);
    out[r - 1] = best;
  }
  return out;
}

}  // namespace mca
