#include "mca/decompose.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "mca/error.hpp"
#include "mca/parallel.hpp"
#include "words.hpp"

namespace mca {

namespace {

using detail::checked_power;
using detail::next_word;
using detail::rank_word;
using detail::unrank;

// Element of B known to lie in A, reported as a decomposition bug otherwise.
Element in_a(const PseudoFrame& frame, Element b, const char* what) {
  if (!frame.a_subgroup().contains(b)) throw Error(ErrorKind::Internal, std::string(what) + " is not in A");
  return frame.restrict(b);
}

}  // namespace

std::size_t SkewDecomposition::c_index(std::span<const Element> c_word) const {
  if (c_word.size() != width()) throw Error(ErrorKind::WindowLength, "c-word does not cover the neighborhood");
  return rank_word(c_word, frame->c_group()->order());
}

SkewDecomposition decompose_mca(const McaRule& rule, const PseudoFramePtr& frame, const DecomposeOptions& options) {
  const auto& b = *frame->b();
  if (!rule.group()->same_table(b)) throw Error(ErrorKind::InvalidSpec, "rule and frame use different groups");
  const auto& ag = frame->a_group();
  const auto& cg = frame->c_group();
  const std::size_t na = ag->order(), nc = cg->order(), width = rule.width();
  const std::size_t n_c_words = checked_power(nc, width, options.cap, "|C|^width");
  const std::size_t n_a_words = checked_power(na, width, options.cap, "|A|^width");
  checked_power(b.order(), width, options.cap, "|B|^width");

  std::vector<SplitEndo> splits;
  std::vector<Factor> h_factors;
  for (const auto& f : rule.factors()) {
    splits.push_back(split_endo(*frame, f.coeff));
    h_factors.push_back(Factor{f.pos, splits.back().h});
  }
  const auto [bias_f, bias_h] = frame->unstar(rule.bias());
  McaRule h_rule(cg, rule.v_lo(), rule.v_hi(), std::move(h_factors), bias_h, rule.one_sided());
  const LocalTable h_table = LocalTable::of(h_rule, options.cap);

  SkewDecomposition d{frame,   rule.v_lo(), rule.v_hi(), rule.one_sided(), std::move(splits), bias_f, bias_h,
                      h_rule,  {},          {},          {},               std::nullopt};
  d.fibres.resize(n_c_words);
  d.formulas.resize(n_c_words);
  d.error_map.resize(n_c_words);

  const auto& sigma = frame->sigma();
  parallel_for(n_c_words, options.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<Element> bw(width);
    for (std::size_t ci = begin; ci < end; ++ci) {
      const auto c = unrank(ci, nc, width);
      // Conjugation prefixes: P_0 = sigma(h), P_{i+1} = P_i sigma(h_i(c_{v[i]})).
      FibreFormula formula;
      formula.lead = bias_f;
      Element prefix = sigma[bias_h];
      for (std::size_t i = 0; i < rule.factors().size(); ++i) {
        const auto& s = d.splits[i];
        const int pos = rule.factors()[i].pos;
        const Element ci_cell = c[static_cast<std::size_t>(pos - rule.v_lo())];
        std::vector<Element> images(na);
        for (std::size_t a = 0; a < na; ++a) {
          images[a] = in_a(*frame, b.conj(prefix, frame->embed(s.f(static_cast<Element>(a)))), "conjugated coefficient");
        }
        const Element constant = in_a(*frame, b.conj(prefix, frame->embed(s.gprime[ci_cell])), "conjugated g'");
        formula.terms.push_back(FibreFormula::Term{pos, GroupMap(ag, ag, std::move(images)), constant});
        prefix = b.mul(prefix, sigma[s.h(ci_cell)]);
      }
      const Element hc = h_table(c.data());
      d.error_map[ci] = in_a(*frame, b.mul(prefix, b.inv(sigma[hc])), "e(c)");
      d.formulas[ci] = std::move(formula);

      std::vector<Element> values(n_a_words);
      std::vector<Element> a(width, 0);
      for (std::size_t ai = 0; ai < n_a_words; ++ai) {
        for (std::size_t k = 0; k < width; ++k) bw[k] = frame->star(a[k], c[k]);
        const auto [fa, hc2] = frame->unstar(rule.eval_unchecked(bw.data()));
        if (hc2 != hc) throw Error(ErrorKind::Internal, "C-part of g(a ⋆ c) differs from h(c)");
        values[ai] = fa;
        next_word(a, na);
      }
      d.fibres[ci] = std::make_shared<const LocalTable>(ag, rule.v_lo(), rule.v_hi(), std::move(values), rule.one_sided());
    }
  });

  // Formula path against the evaluated fibres.
  std::vector<Element> a(width);
  for (std::size_t ci = 0; ci < n_c_words; ++ci) {
    std::fill(a.begin(), a.end(), 0);
    for (std::size_t ai = 0; ai < n_a_words; ++ai) {
      if (formula_value(d, ci, a) != d.fibres[ci]->at_index(ai)) {
        throw Error(ErrorKind::Internal, "formula path disagrees with evaluated fibre for c-word #" + std::to_string(ci));
      }
      next_word(a, na);
    }
  }

  if (ag->is_abelian()) {
    std::vector<AffineFibre> affine;
    affine.reserve(n_c_words);
    for (std::size_t ci = 0; ci < n_c_words; ++ci) {
      const auto& t = *d.fibres[ci];
      AffineFibre af;
      af.constant = t.at_index(0);
      std::size_t stride = 1;
      for (std::size_t k = 0; k < width; ++k, stride *= na) {
        std::vector<Element> images(na);
        for (std::size_t x = 0; x < na; ++x) images[x] = ag->mul(t.at_index(x * stride), ag->inv(af.constant));
        af.coeffs.emplace_back(ag, ag, std::move(images));
        if (!af.coeffs.back().is_homomorphism()) throw Error(ErrorKind::Internal, "fibre is not affine");
      }
      std::fill(a.begin(), a.end(), 0);
      for (std::size_t ai = 0; ai < n_a_words; ++ai) {
        Element acc = af.constant;
        for (std::size_t k = 0; k < width; ++k) acc = ag->mul(acc, af.coeffs[k](a[k]));
        if (acc != t.at_index(ai)) throw Error(ErrorKind::Internal, "fibre is not affine");
        next_word(a, na);
      }
      affine.push_back(std::move(af));
    }
    d.affine = std::move(affine);
  }
  return d;
}

Element formula_value(const SkewDecomposition& decomposition, std::size_t c_index, std::span<const Element> a_word) {
  const auto& ag = *decomposition.frame->a_group();
  const auto& formula = decomposition.formulas[c_index];
  Element acc = formula.lead;
  for (const auto& t : formula.terms) {
    acc = ag.mul(ag.mul(acc, t.hom(a_word[static_cast<std::size_t>(t.pos - decomposition.v_lo)])), t.constant);
  }
  return ag.mul(acc, decomposition.error_map[c_index]);
}

Nhca fibre_nhca(const SkewDecomposition& decomposition, const Config& c) {
  const std::size_t width = decomposition.width();
  if (c.word.size() < width) throw Error(ErrorKind::WindowLength, "C-configuration shorter than the neighborhood");
  std::vector<std::shared_ptr<const LocalTable>> cells;
  cells.reserve(c.word.size() - width + 1);
  for (std::size_t k = 0; k + width <= c.word.size(); ++k) {
    cells.push_back(decomposition.fibres[decomposition.c_index(std::span<const Element>(c.word).subspan(k, width))]);
  }
  return Nhca(std::move(cells), c.offset - decomposition.v_lo);
}

RecomposeResult recompose_check(const SkewDecomposition& decomposition, const McaRule& rule, std::size_t cap) {
  const auto& frame = *decomposition.frame;
  const std::size_t na = frame.a_group()->order(), nc = frame.c_group()->order(), width = rule.width();
  checked_power(frame.b()->order(), width, cap, "|B|^width");
  RecomposeResult r;
  std::vector<Element> c(width, 0), a(width), bw(width);
  const std::size_t n_c_words = checked_power(nc, width, cap, "|C|^width");
  const std::size_t n_a_words = checked_power(na, width, cap, "|A|^width");
  for (std::size_t ci = 0; ci < n_c_words; ++ci) {
    const Element hc = decomposition.h_rule.eval_unchecked(c.data());
    std::fill(a.begin(), a.end(), 0);
    for (std::size_t ai = 0; ai < n_a_words; ++ai) {
      for (std::size_t k = 0; k < width; ++k) bw[k] = frame.star(a[k], c[k]);
      if (rule.eval_unchecked(bw.data()) != frame.star(formula_value(decomposition, ci, a), hc)) {
        r.a_word = a;
        r.c_word = c;
        return r;
      }
      next_word(a, na);
    }
    next_word(c, nc);
  }
  r.holds = true;
  return r;
}

CentralSplit central_split(const McaRule& rule, const PseudoFramePtr& frame, const DecomposeOptions& options) {
  const auto z = center(frame->b());
  if (!frame->a_subgroup().is_subset_of(z)) throw Error(ErrorKind::NotCentral, "A is not contained in the center");
  const auto d = decompose_mca(rule, frame, options);
  const auto& ag = frame->a_group();
  const std::size_t width = rule.width();

  std::vector<Factor> linear_factors;
  std::vector<std::vector<Element>> sums(width, std::vector<Element>(ag->order(), kIdentity));
  for (std::size_t i = 0; i < d.splits.size(); ++i) {
    const int pos = rule.factors()[i].pos;
    linear_factors.push_back(Factor{pos, d.splits[i].f});
    auto& s = sums[static_cast<std::size_t>(pos - rule.v_lo())];
    for (std::size_t x = 0; x < s.size(); ++x) s[x] = ag->mul(s[x], d.splits[i].f(static_cast<Element>(x)));
  }
  McaRule linear(ag, rule.v_lo(), rule.v_hi(), std::move(linear_factors), kIdentity, rule.one_sided());
  std::vector<GroupMap> position_coeffs;
  for (auto& s : sums) position_coeffs.emplace_back(ag, ag, std::move(s));

  const std::size_t nc = frame->c_group()->order(), na = ag->order();
  std::vector<Element> block(d.fibres.size());
  std::vector<Element> c(width, 0);
  for (std::size_t ci = 0; ci < block.size(); ++ci) {
    Element p = ag->mul(d.bias_f, d.error_map[ci]);
    for (std::size_t i = 0; i < d.splits.size(); ++i) {
      p = ag->mul(p, d.splits[i].gprime[c[static_cast<std::size_t>(rule.factors()[i].pos - rule.v_lo())]]);
    }
    block[ci] = p;
    next_word(c, nc);
  }

  std::vector<Element> a(width);
  for (std::size_t ci = 0; ci < block.size(); ++ci) {
    std::fill(a.begin(), a.end(), 0);
    for (std::size_t ai = 0; ai < d.fibres[ci]->values().size(); ++ai) {
      if (ag->mul(linear.eval_unchecked(a.data()), block[ci]) != d.fibres[ci]->at_index(ai)) {
        throw Error(ErrorKind::Internal, "linear plus block form disagrees with the fibre for c-word #" + std::to_string(ci));
      }
      next_word(a, na);
    }
  }
  return CentralSplit{frame, std::move(linear), std::move(position_coeffs), std::move(block), d.h_rule, rule};
}

NilpotentTower nilpotent_tower(const McaRule& rule, const DecomposeOptions& options) {
  NilpotentTower tower;
  McaRule current = rule;
  while (true) {
    const auto g = current.group();
    if (g->is_abelian()) {
      tower.nilpotent = true;
      break;
    }
    const auto z = center(g);
    if (z.size() == 1) {
      tower.residue = g;
      break;
    }
    auto frame = make_frame(g, z);
    auto d = decompose_mca(current, frame, options);
    auto inv = abelian_invariants(frame->a_group());
    McaRule next = d.h_rule;
    tower.levels.push_back(TowerLevel{std::move(d), std::move(inv.invariants)});
    current = std::move(next);
  }
  tower.top = current;

  const std::size_t n = rule.group()->order(), width = rule.width();
  const std::size_t total = checked_power(n, width, options.cap, "|B|^width");
  std::vector<Element> w(width, 0);
  tower.verified = true;
  for (std::size_t idx = 0; idx < total && tower.verified; ++idx) {
    tower.verified = tower_eval(tower, w) == rule.eval_unchecked(w.data());
    next_word(w, n);
  }
  return tower;
}

namespace {

Element tower_eval_from(const NilpotentTower& tower, std::size_t level, std::span<const Element> word) {
  if (level == tower.levels.size()) return tower.top->eval(word);
  const auto& d = tower.levels[level].decomposition;
  const auto& frame = *d.frame;
  std::vector<Element> a(word.size()), c(word.size());
  for (std::size_t k = 0; k < word.size(); ++k) std::tie(a[k], c[k]) = frame.unstar(word[k]);
  const Element hc = tower_eval_from(tower, level + 1, c);
  return frame.star(d.fibre(c)(a.data()), hc);
}

}  // namespace

Element tower_eval(const NilpotentTower& tower, std::span<const Element> b_word) {
  if (!tower.top) throw Error(ErrorKind::InvalidSpec, "tower has no top rule");
  return tower_eval_from(tower, 0, b_word);
}

}  // namespace mca
