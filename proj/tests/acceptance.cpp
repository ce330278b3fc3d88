// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mca/decompose.hpp"
#include "mca/entropy.hpp"
#include "mca/error.hpp"
#include "mca/spectral.hpp"

using namespace mca;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    out.pass = false;
    out.detail << " [over time budget " << budget_s << " s]";
  }
  if (!out.pass) ++failures;
  std::printf("%s %2d  %s (%.2f s)%s\n", out.pass ? "PASS" : "FAIL", id, title, secs, out.detail.str().c_str());
  std::fflush(stdout);
}

std::vector<Element> unrank(std::size_t idx, std::size_t n, std::size_t len) {
  std::vector<Element> w(len);
  for (auto& x : w) {
    x = static_cast<Element>(idx % n);
    idx /= n;
  }
  return w;
}

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

long long pow2_mod5(long long e) {
  long long r = 1;
  for (long long k = 0; k < ((e % 4) + 4) % 4; ++k) r = r * 2 % 5;
  return r;
}

Element label(const GroupPtr& g, const char* name) { return *g->find_label(name); }

GroupMap q8_map(const GroupPtr& q, const std::vector<const char*>& images) {
  const char* names[] = {"1", "-1", "i", "-i", "j", "-j", "k", "-k"};
  std::vector<Element> img(8);
  for (std::size_t k = 0; k < 8; ++k) img[label(q, names[k])] = label(q, images[k]);
  return GroupMap(q, q, img);
}

McaRule linear_rule(std::size_t n, int v_lo, const std::vector<long long>& coeffs, bool one_sided = false) {
  auto g = make_cyclic(n);
  std::vector<Factor> factors;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    factors.push_back(Factor{v_lo + static_cast<int>(k), GroupMap::power(g, coeffs[k])});
  return McaRule(g, v_lo, v_lo + static_cast<int>(coeffs.size()) - 1, std::move(factors), kIdentity, one_sided);
}

PseudoFramePtr z5z4_frame() {
  auto b = make_modular_semidirect(5, 2, 4);
  return make_frame(b, Subgroup(b, {0, 1, 2, 3, 4}));
}

McaRule rel_x1(const GroupPtr& b) { return McaRule::power_form(b, 0, 2, {{0, 1}, {1, 1}, {2, 1}}, kIdentity, true); }
McaRule rel_x2(const GroupPtr& b) { return McaRule::power_form(b, 0, 2, {{2, 4}, {1, 3}, {0, 1}}, kIdentity, true); }
McaRule quat_rule(const GroupPtr& q) { return McaRule::power_form(q, 0, 3, {{3, 1}, {0, 3}, {2, 5}, {1, -1}}); }

template <class F>
std::size_t count_fibre_mismatches(const SkewDecomposition& d, F&& expect) {
  const std::size_t na = d.frame->a_group()->order(), nc = d.frame->c_group()->order(), w = d.width();
  std::size_t bad = 0;
  for (std::size_t ci = 0; ci < ipow(nc, w); ++ci) {
    const auto c = unrank(ci, nc, w);
    for (std::size_t ai = 0; ai < ipow(na, w); ++ai) {
      const auto a = unrank(ai, na, w);
      if (d.fibre(c).eval(a) != expect(a, c)) ++bad;
    }
  }
  return bad;
}

}  // namespace

int main() {
  criterion(1, "Q8 upper central series {1} < {+-1} < Q8, nilpotent", 1.0, [](Outcome& o) {
    auto q = make_quaternion();
    const auto s = upper_central_series(q);
    o.require(s.chain.size() == 3, "three terms");
    if (s.chain.size() != 3) return;
    o.require(s.chain[0].members() == std::vector<Element>{0}, "{1}");
    o.require(s.chain[1].members() == std::vector<Element>{label(q, "1"), label(q, "-1")}, "{+-1}");
    o.require(s.chain[2].size() == 8, "Q8");
    o.require(is_nilpotent(q), "nilpotent");
  });

  criterion(2, "zeta cocycle on the canonical Q8 frame", 1.0, [](Outcome& o) {
    auto q = make_quaternion();
    auto f = make_frame(q, center(q));
    const auto plus = f->restrict(label(q, "1")), minus = f->restrict(label(q, "-1"));
    auto coset = [&](const char* x) { return f->pi()(label(q, x)); };
    o.require(cocycle_zeta(*f, coset("i"), coset("j")).value == plus, "zeta(I,J) = +1");
    o.require(cocycle_zeta(*f, coset("j"), coset("i")).value == minus, "zeta(J,I) = -1");
    for (Element c = 0; c < 4; ++c) o.require(cocycle_zeta(*f, kIdentity, c).value == plus, "zeta(O,c) = +1");
  });

  criterion(3, "split_endo tables for g1, g2 on Q8", 1.0, [](Outcome& o) {
    auto q = make_quaternion();
    auto f = make_frame(q, center(q));
    auto coset = [&](const char* x) { return f->pi()(label(q, x)); };
    const Element O = coset("1"), I = coset("i"), J = coset("j"), K = coset("k");
    const Element plus = f->restrict(label(q, "1")), minus = f->restrict(label(q, "-1"));
    const auto s1 = split_endo(*f, q8_map(q, {"1", "-1", "j", "-j", "k", "-k", "i", "-i"}));
    const auto s2 = split_endo(*f, q8_map(q, {"1", "-1", "-i", "i", "k", "-k", "j", "-j"}));
    const auto id = GroupMap::identity(f->a_group());
    o.require(s1.f == id && s2.f == id, "f1 = f2 = Id");
    std::vector<Element> h1(4), h2(4), g1(4), g2(4);
    h1[O] = O, h1[I] = J, h1[J] = K, h1[K] = I;
    h2[O] = O, h2[I] = I, h2[J] = K, h2[K] = J;
    g1.assign(4, plus);
    g2.assign(4, plus);
    g2[I] = minus;
    o.require(s1.h.images() == h1, "h1");
    o.require(s2.h.images() == h2, "h2");
    o.require(s1.gprime == g1, "g'1 trivial");
    o.require(s2.gprime == g2, "g'2(I) = -1, trivial elsewhere");
  });

  criterion(4, "closed-form fibres of the two Z/5 x| Z/4 products on all 8000 inputs", 5.0, [](Outcome& o) {
    auto frame = z5z4_frame();
    const auto b = frame->b();
    const auto d1 = decompose_mca(rel_x1(b), frame);
    const auto bad1 = count_fibre_mismatches(d1, [](const std::vector<Element>& a, const std::vector<Element>& c) {
      return static_cast<Element>((a[0] + pow2_mod5(c[0]) * a[1] + pow2_mod5(c[0] + c[1]) * a[2]) % 5);
    });
    const auto d2 = decompose_mca(rel_x2(b), frame);
    const auto bad2 = count_fibre_mismatches(d2, [](const std::vector<Element>& a, const std::vector<Element>& c) {
      const long long c1 = c[1], c2 = c[2];
      const long long k2 = 1 + pow2_mod5(c2) + pow2_mod5(2 * c2) + pow2_mod5(3 * c2);
      const long long k1 = pow2_mod5(4 * c2) + pow2_mod5(4 * c2 + c1) + pow2_mod5(4 * c2 + 2 * c1);
      const long long k0 = pow2_mod5(4 * c2 + 3 * c1);
      return static_cast<Element>((k2 * a[2] + k1 * a[1] + k0 * a[0]) % 5);
    });
    std::size_t bad_h1 = 0, bad_h2 = 0;
    for (std::size_t ci = 0; ci < 64; ++ci) {
      const auto c = unrank(ci, 4, 3);
      if (d1.h_rule.eval(c) != static_cast<Element>((c[0] + c[1] + c[2]) % 4)) ++bad_h1;
      if (d2.h_rule.eval(c) != static_cast<Element>(((c[0] - static_cast<long long>(c[1])) % 4 + 4) % 4)) ++bad_h2;
    }
    o.detail << " mismatches: f1 " << bad1 << ", f2 " << bad2 << ", h1 " << bad_h1 << ", h2 " << bad_h2;
    o.require(bad1 == 0 && bad2 == 0, "fibre closed forms");
    o.require(bad_h1 == 0 && bad_h2 == 0, "quotient rules");
    o.require(recompose_check(d1, rel_x1(b)).holds && recompose_check(d2, rel_x2(b)).holds, "recompose_check");
  });

  criterion(5, "fibres of the powered product are right-permutative iff c2 = 0", 5.0, [](Outcome& o) {
    auto frame = z5z4_frame();
    const auto d = decompose_mca(rel_x2(frame->b()), frame);
    std::size_t rows = 0, bad = 0;
    for (std::size_t ci = 0; ci < 64; ++ci) {
      const auto c = unrank(ci, 4, 3);
      const auto p = permutativity(*d.fibres[ci]);
      ++rows;
      if (p.right != (c[2] == 0)) ++bad;
    }
    o.detail << " " << rows << " fibres, " << bad << " mismatched flags";
    o.require(rows == 64 && bad == 0, "flag table");
  });

  criterion(6, "skew entropy 2 log2 5 + 4 and uniform trajectory entropy N V log2|B|", 30.0, [](Outcome& o) {
    auto frame = z5z4_frame();
    const auto rule = rel_x1(frame->b());
    const auto s = skew_entropy(decompose_mca(rule, frame), MeasureSpec::uniform(5), MeasureSpec::uniform(4));
    const double target = 2 * std::log2(5.0) + 4;
    o.detail << " skew = " << s.bits;
    o.require(std::fabs(s.bits - target) < 1e-9, "skew entropy within 1e-9");
    for (std::size_t N = 1; N <= 3; ++N) {
      const auto t = trajectory_partition_entropy(rule, MeasureSpec::uniform(20), N);
      // Exact: one weight class holding all 20^(N V) trajectories.
      const bool exact = t.joint.size() == 1 && t.joint.begin()->second == ipow(20, 2 * N);
      o.require(exact && t.distributions_equal(), "uniform trajectory law at N = " + std::to_string(N));
      o.require(std::fabs(t.joint_bits - 2.0 * N * std::log2(20.0)) < 1e-12, "entropy value at N = " + std::to_string(N));
    }
  });

  criterion(7, "trajectory law of b0 + b1 under Bernoulli(0.9) equals the input law, N <= 4", 10.0, [](Outcome& o) {
    const auto rule = linear_rule(2, 0, {1, 1}, true);
    const auto spec = MeasureSpec::bernoulli({9, 1}, 10);
    for (std::size_t N = 1; N <= 4; ++N) {
      const auto t = trajectory_partition_entropy(rule, spec, N);
      o.require(t.distributions_equal(), "multiset equality at N = " + std::to_string(N));
    }
  });

  criterion(8, "uniform windows are fixed by permutative rules", 60.0, [](Outcome& o) {
    auto q = make_quaternion();
    auto b = make_modular_semidirect(5, 2, 4);
    struct Case {
      const char* name;
      McaRule rule;
      std::size_t len;
    };
    const std::vector<Case> cases{
        {"Q8 x0 x1", McaRule::power_form(q, 0, 1, {{0, 1}, {1, 1}}), 6},
        {"Q8 x-1 x0 x1", McaRule::power_form(q, -1, 1, {{-1, 1}, {0, 1}, {1, 1}}), 6},
        {"Q8 mixed powers", quat_rule(q), 6},
        {"Z5xZ4 three-cell product", rel_x1(b), 4},
        {"Z5xZ4 x-1 x0 x1", McaRule::power_form(b, -1, 1, {{-1, 1}, {0, 1}, {1, 1}}), 4},
        {"Z/5 x-1 + 2 x0 + 3 x1", linear_rule(5, -1, {1, 2, 3}), 8},
        {"Z/6 5x-1 + 2x0 + x1", linear_rule(6, -1, {5, 2, 1}), 7},
        {"Z/2 x0 + x1", linear_rule(2, 0, {1, 1}), 19},
    };
    for (const auto& c : cases) {
      const auto p = permutativity(c.rule);
      if (!(p.left || p.right)) {
        o.require(false, std::string(c.name) + " is not permutative");
        continue;
      }
      const std::size_t n = c.rule.group()->order();
      if (ipow(n, c.len) > 1'000'000) {
        o.require(false, std::string(c.name) + " window exceeds 10^6");
        continue;
      }
      const auto m = WindowMeasure::from_spec(MeasureSpec::uniform(n), 0, c.len);
      const auto image = push_forward(c.rule, m);
      o.require(image == WindowMeasure::from_spec(MeasureSpec::uniform(n), image.first(), image.length()), c.name);
    }
  });

  criterion(9, "duality identity on Z/2, Z/4, Z/5, Z/2+Z/2 within 1e-12", 30.0, [](Outcome& o) {
    double worst = 0.0;
    std::size_t checked = 0;
    for (const auto& g : {make_cyclic(2), make_cyclic(4), make_cyclic(5), make_direct_sum({2, 2})}) {
      const auto s = abelian_invariants(g);
      const auto endos = enumerate_endomorphisms(g);
      const std::size_t n = g->order();
      std::vector<MeasureSpec> specs{MeasureSpec::uniform(n)};
      std::vector<std::uint64_t> skew(n, 1);
      skew[0] = 10 - (n - 1);
      specs.push_back(MeasureSpec::bernoulli(skew, 10));
      std::vector<std::uint64_t> ramp(n);
      for (std::size_t k = 0; k < n; ++k) ramp[k] = k + 1;
      specs.push_back(MeasureSpec::bernoulli(ramp, n * (n + 1) / 2));
      // Rules with two factors on {-1, 0, 1}, all endomorphism pairs.
      for (std::size_t e1 = 0; e1 < endos.size(); ++e1)
        for (std::size_t e2 = 0; e2 < endos.size(); ++e2) {
          const McaRule rule(g, -1, 1, {Factor{-1, endos[e1]}, Factor{1, endos[e2]}}, static_cast<Element>((e1 + e2) % n));
          const auto dual = LinearRuleDual::of(rule, s);
          for (const auto& chi : characters_of(g, 0, 3)) {
            if (chi.rank() > 3) continue;
            for (const auto& spec : specs) {
              const auto m = WindowMeasure::from_spec(spec, -1, 5);
              const auto lhs = fourier_coefficient(chi, s, push_forward(rule, m));
              const auto rhs = fourier_coefficient(dual_action(dual, chi), s, m);
              worst = std::max(worst, std::abs(lhs - rhs));
              ++checked;
            }
          }
        }
    }
    o.detail << " " << checked << " identities, max error " << worst;
    o.require(worst < 1e-12, "max error below 1e-12");
  });

  criterion(10, "b0 + b1 ranks follow the odd-binomial count; density of rank > 10 up to 512", 10.0, [](Outcome& o) {
    const auto dual = LinearRuleDual::of(linear_rule(2, 0, {1, 1}));
    const auto report = diffusion_report(dual, Character::single(dual.invariants, 0, {1}), 512);
    std::size_t bad = 0;
    for (std::size_t j = 0; j <= 64; ++j) {
      // Odd entries of row j of Pascal's triangle, counted directly.
      std::vector<int> row{1};
      for (std::size_t i = 0; i < j; ++i) {
        std::vector<int> next(row.size() + 1, 0);
        for (std::size_t k = 0; k < row.size(); ++k) next[k] ^= row[k], next[k + 1] ^= row[k];
        row.swap(next);
      }
      const auto odd = static_cast<std::size_t>(std::count(row.begin(), row.end(), 1));
      if (report.ranks[j] != odd || odd != (std::size_t{1} << std::popcount(j))) ++bad;
    }
    const double density = report.density_above(10);
    o.detail << " rank mismatches " << bad << ", density " << density;
    o.require(bad == 0, "rank(j) = 2^s(j) for j <= 64");
    o.require(density > 0.9, "density > 0.9");
  });

  criterion(11, "Cesaro randomization: Z/2 fast path and Q8 total variation", 300.0, [](Outcome& o) {
    // (a)
    const auto z2 = linear_rule(2, 0, {1, 1});
    const auto s2 = abelian_invariants(z2.group());
    RandomizationOptions a_opt;
    a_opt.n_max = 256;
    a_opt.monte_carlo = false;
    const auto a = cesaro_randomization(z2, MeasureSpec::bernoulli({9, 1}, 10),
                                        {Probe{"chi0", Character::single(s2.invariants, 0, {1}), false}}, a_opt);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 6; ++n) {
      const auto& st = a.steps[n];
      if (!st.measured[0] || !st.fast_path[0]) {
        o.require(false, "exact cross-check available at n = " + std::to_string(n));
        continue;
      }
      worst = std::max(worst, std::fabs(std::abs(*st.measured[0]) - st.coef[0]));
    }
    const double cesaro256 = a.steps[256].cesaro_coef[0];
    o.detail << " (a) Cesaro mean at 256 = " << cesaro256 << ", fast vs exact max error " << worst << ";";
    o.require(worst < 1e-12, "(a) fast path matches exact push-forward for n <= 6");
    o.require(cesaro256 < 0.05, "(a) Cesaro mean below 0.05 by N = 256");

    // (b)
    auto q = make_quaternion();
    auto frame = make_frame(q, center(q));
    const auto mu = product_spec(*frame, MeasureSpec::bernoulli({9, 1}, 10), MeasureSpec::bernoulli({7, 1, 1, 1}, 10));
    RandomizationOptions b_opt;
    b_opt.n_max = 64;
    b_opt.samples = 100'000;
    b_opt.seed = 1;
    const auto b = cesaro_randomization(quat_rule(q), mu, {}, b_opt, frame);
    o.require(b.hypothesis_holds, "(b) exponent sums coprime to 8");
    const auto ne = b.largest_exact_n;
    const double tv0 = b.steps[0].tv, tv_exact = b.steps[ne].cesaro_tv;
    o.detail << " (b) TV(0) = " << tv0 << ", Cesaro TV at exact n = " << ne << ": " << tv_exact << "; MC Cesaro TV";
    o.require(ne >= 1, "(b) at least one exact step");
    o.require(tv_exact * 2 <= tv0, "(b) factor >= 2 at the largest exact n");
    double prev = b.steps[1].cesaro_tv;
    bool monotone = true;
    for (std::size_t n = 1; n <= 64; n *= 2) {
      const auto& st = b.steps[n];
      o.detail << " n=" << n << ":" << st.cesaro_tv << (st.mode == "mc" ? "*" : "");
      if (st.cesaro_tv > prev) monotone = false;
      prev = st.cesaro_tv;
    }
    o.require(b.steps[64].mode == "mc" && b.steps[64].samples >= 100'000, "(b) Monte-Carlo reaches n = 64");
    o.require(monotone, "(b) Cesaro TV non-increasing at n = 1, 2, 4, ..., 64");
  });

  criterion(12, "negative controls", 5.0, [](Outcome& o) {
    RandomizationOptions opt;
    opt.n_max = 2;
    const auto r = cesaro_randomization(linear_rule(4, 0, {1, 2}), MeasureSpec::uniform(4), {}, opt);
    o.require(!r.hypothesis_holds && !r.warning.empty(), "non-coprime exponent sums warn");

    const auto profile = harmonic_mixing_profile(MeasureSpec::bernoulli({1, 0}, 1), abelian_invariants(make_cyclic(2)), 8);
    for (double v : profile) o.require(std::fabs(v - 1.0) < 1e-12, "point-mass profile is 1");

    auto q = make_quaternion();
    auto frame = make_frame(q, center(q));
    const auto rule = McaRule::power_form(q, 0, 1, {{0, 1}, {1, 1}});
    auto d = decompose_mca(rule, frame);
    o.require(recompose_check(d, rule).holds, "intact decomposition recomposes");
    d.error_map[5] = frame->a_group()->mul(d.error_map[5], 1);
    const auto bad = recompose_check(d, rule);
    o.require(!bad.holds, "corrupted decomposition fails");
    if (!bad.holds) {
      std::vector<Element> bw(2);
      for (std::size_t k = 0; k < 2; ++k) bw[k] = frame->star(bad.a_word[k], bad.c_word[k]);
      const Element fa = formula_value(d, d.c_index(bad.c_word), bad.a_word);
      o.require(rule.eval(bw) != frame->star(fa, d.h_rule.eval(bad.c_word)), "witness disagrees with the rule");
    }
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
