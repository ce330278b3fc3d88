#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mca/pseudoproduct.hpp"
#include "mca/rule.hpp"

namespace mca {

struct DecomposeOptions {
  std::size_t cap = kDefaultEvaluationCap;
  std::size_t workers = 0;  // 0: default_workers()
};

/// f_c(a) = lead · Π_i [hom_i(a_{pos_i}) · constant_i] · e(c), all in A; the
/// trailing e(c) lives in the decomposition's error map.
struct FibreFormula {
  struct Term {
    int pos;
    GroupMap hom;       // A -> A
    Element constant;   // A-index
  };
  Element lead = kIdentity;
  std::vector<Term> terms;
};

/// f_c(a) = constant + Σ_v coeffs[v - v_lo](a_v), for abelian A.
struct AffineFibre {
  std::vector<GroupMap> coeffs;
  Element constant = kIdentity;
};

struct SkewDecomposition {
  PseudoFramePtr frame;
  int v_lo = 0, v_hi = 0;
  bool one_sided = false;
  std::vector<SplitEndo> splits;   // one per rule factor
  Element bias_f = kIdentity;      // bias = bias_f ⋆ bias_h
  Element bias_h = kIdentity;
  McaRule h_rule;                  // over C
  /// Dense fibre tables over A^V, indexed by c-word (digit k is c_{v_lo+k},
  /// least significant first). Built by evaluating g(a ⋆ c).
  std::vector<std::shared_ptr<const LocalTable>> fibres;
  /// Fibre maps from the conjugation-prefix formulas.
  std::vector<FibreFormula> formulas;
  /// The e(c) term per c-word (A-index).
  std::vector<Element> error_map;
  /// Present when A is abelian.
  std::optional<std::vector<AffineFibre>> affine;

  std::size_t width() const { return static_cast<std::size_t>(v_hi - v_lo + 1); }
  std::size_t c_index(std::span<const Element> c_word) const;
  const LocalTable& fibre(std::span<const Element> c_word) const { return *fibres[c_index(c_word)]; }
};

/// Throws Error{NotInvariant} when a coefficient moves A, Error{SizeLimit}
/// above the caps and Error{Internal} when the formula path disagrees with the
/// evaluated fibres.
SkewDecomposition decompose_mca(const McaRule& rule, const PseudoFramePtr& frame, const DecomposeOptions& options = {});

/// f_c(a) from the formula for c-word index `c_index` and the stored e(c).
Element formula_value(const SkewDecomposition& decomposition, std::size_t c_index, std::span<const Element> a_word);

/// Per-cell fibre maps for the C-configuration `c`: cell m gets the fibre of
/// c restricted to m + [v_lo .. v_hi], for every m whose window fits.
Nhca fibre_nhca(const SkewDecomposition& decomposition, const Config& c);

struct RecomposeResult {
  bool holds = false;
  std::vector<Element> a_word, c_word;  // first failing input
};

/// Checks g(a ⋆ c) = f_c(a) ⋆ h(c) on every (a, c) pair, with f_c taken from
/// the formulas and the stored error map.
RecomposeResult recompose_check(const SkewDecomposition& decomposition, const McaRule& rule,
                                std::size_t cap = kDefaultEvaluationCap);

struct CentralSplit {
  PseudoFramePtr frame;
  McaRule linear;                      // l(a) = Σ_i f_i(a_{v[i]}) over A
  std::vector<GroupMap> position_coeffs;  // Σ of f_i at each position, index v - v_lo
  std::vector<Element> block_map;      // p(c) per c-word (A-index)
  McaRule h_rule;
  McaRule source;                      // the rule on B that was split
};

/// Throws Error{NotCentral} unless A lies in the center of B. The identity
/// f_c(a) = l(a) + p(c) is verified against decompose_mca on all inputs.
CentralSplit central_split(const McaRule& rule, const PseudoFramePtr& frame, const DecomposeOptions& options = {});

struct TowerLevel {
  SkewDecomposition decomposition;
  std::vector<std::size_t> invariants;  // abelian invariants of this level's A
};

struct NilpotentTower {
  std::vector<TowerLevel> levels;
  /// Rule on the final group: the last abelian quotient when the group is
  /// nilpotent, otherwise the residue the series could not split.
  std::optional<McaRule> top;
  bool nilpotent = false;
  GroupPtr residue;       // set only when the series stalls
  bool verified = false;  // recomposition matched g on all of B^V
};

NilpotentTower nilpotent_tower(const McaRule& rule, const DecomposeOptions& options = {});

/// Evaluates the tower on a B-word by descending through the levels.
Element tower_eval(const NilpotentTower& tower, std::span<const Element> b_word);

}  // namespace mca
