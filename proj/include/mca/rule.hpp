#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mca/group.hpp"

namespace mca {

inline constexpr std::size_t kDefaultEvaluationCap = 10'000'000;

struct Factor {
  int pos;
  GroupMap coeff;
};

/// Local map b -> bias · coeff_0(b_{pos_0}) · coeff_1(b_{pos_1}) · ... on the
/// neighborhood [v_lo .. v_hi]. Positions may repeat, which is how powers are
/// written (b_2^4 is four identity factors at position 2).
class McaRule {
 public:
  McaRule(GroupPtr group, int v_lo, int v_hi, std::vector<Factor> factors, Element bias = kIdentity,
          bool one_sided = false);

  /// Single identity factor at position 0.
  static McaRule identity(GroupPtr group, bool one_sided = false);

  /// Product b_{p_1}^{k_1} b_{p_2}^{k_2} ... in the listed order. Exponents
  /// are reduced modulo the group exponent, so negative powers are allowed.
  static McaRule power_form(GroupPtr group, int v_lo, int v_hi, const std::vector<std::pair<int, long long>>& powers,
                            Element bias = kIdentity, bool one_sided = false);

  const GroupPtr& group() const noexcept { return group_; }
  int v_lo() const noexcept { return v_lo_; }
  int v_hi() const noexcept { return v_hi_; }
  std::size_t width() const noexcept { return static_cast<std::size_t>(v_hi_ - v_lo_ + 1); }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  Element bias() const noexcept { return bias_; }
  bool one_sided() const noexcept { return one_sided_; }

  int L() const noexcept { return v_lo_ < 0 ? -v_lo_ : 0; }
  int R() const noexcept { return v_hi_ > 0 ? v_hi_ : 0; }
  int V() const noexcept { return L() + R(); }

  /// `window[k]` is the cell at position v_lo + k. Throws
  /// Error{WindowLength} when the window is not exactly `width()` long.
  Element eval(std::span<const Element> window) const;
  Element eval_unchecked(const Element* window) const noexcept;

  /// ℓ_v per position (index v - v_lo) when every coefficient is a power map
  /// x -> x^k; the sum of the exponents k at each position.
  std::optional<std::vector<long long>> exponent_sums() const;

 private:
  GroupPtr group_;
  int v_lo_;
  int v_hi_;
  std::vector<Factor> factors_;
  std::vector<std::size_t> offsets_;  // pos - v_lo per factor
  Element bias_;
  bool one_sided_;
};

std::size_t group_exponent(const FiniteGroup& group);

/// A finite configuration: `word[k]` sits at cell `offset + k`.
struct Config {
  GroupPtr group;
  long long offset = 0;
  std::vector<Element> word;

  long long end() const { return offset + static_cast<long long>(word.size()); }
};

/// A local map stored densely over all |B|^width windows; index digit k is the
/// cell at v_lo + k, least significant first.
class LocalTable {
 public:
  LocalTable(GroupPtr group, int v_lo, int v_hi, std::vector<Element> values, bool one_sided = false);

  static LocalTable of(const McaRule& rule, std::size_t cap = kDefaultEvaluationCap);

  const GroupPtr& group() const noexcept { return group_; }
  int v_lo() const noexcept { return v_lo_; }
  int v_hi() const noexcept { return v_hi_; }
  std::size_t width() const noexcept { return static_cast<std::size_t>(v_hi_ - v_lo_ + 1); }
  bool one_sided() const noexcept { return one_sided_; }
  int L() const noexcept { return v_lo_ < 0 ? -v_lo_ : 0; }
  int R() const noexcept { return v_hi_ > 0 ? v_hi_ : 0; }
  int V() const noexcept { return L() + R(); }
  const std::vector<Element>& values() const noexcept { return values_; }

  Element at_index(std::size_t index) const noexcept { return values_[index]; }
  Element operator()(const Element* window) const noexcept {
    std::size_t idx = 0;
    for (std::size_t k = width(); k-- > 0;) idx = idx * base_ + window[k];
    return values_[idx];
  }
  Element eval(std::span<const Element> window) const;

  /// Whether the value depends on the cell at position v.
  bool depends_on(int v) const;

 private:
  GroupPtr group_;
  int v_lo_;
  int v_hi_;
  std::vector<Element> values_;
  std::size_t base_;
  bool one_sided_;
};

/// Drops end coordinates the map ignores; the neighborhood never shrinks past
/// position 0, so an ignored cell at 0 stays.
LocalTable trim_neighborhood(const LocalTable& table);

/// A nonhomogeneous CA: cell m (first <= m < first + size) applies its own
/// local map; all maps share group and neighborhood.
class Nhca {
 public:
  Nhca(std::vector<std::shared_ptr<const LocalTable>> cells, long long first);
  static Nhca homogeneous(std::shared_ptr<const LocalTable> table, long long first, std::size_t count);

  const LocalTable& at(long long m) const;
  long long first() const noexcept { return first_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const LocalTable& shape() const noexcept { return *cells_.front(); }

 private:
  std::vector<std::shared_ptr<const LocalTable>> cells_;
  long long first_;
};

Element eval_local(const McaRule& rule, std::span<const Element> window);

/// Shrinking boundary: output covers [offset - v_lo, end - v_hi).
Config apply_window(const McaRule& rule, const Config& config);
Config apply_window(const LocalTable& table, const Config& config);
Config apply_window(const Nhca& nhca, const Config& config);
/// Cyclic boundary.
Config apply_periodic(const McaRule& rule, const Config& config);
Config apply_periodic(const LocalTable& table, const Config& config);

struct HomomorphismCheck {
  bool holds = false;
  std::vector<Element> x, y;  // witness with g(xy) != g(x) g(y) when !holds
};

/// Exhaustive test that the local map B^V -> B is a homomorphism.
HomomorphismCheck check_homomorphic_local(const McaRule& rule, std::size_t cap = kDefaultEvaluationCap);
bool is_homomorphic_local(const McaRule& rule, std::size_t cap = kDefaultEvaluationCap);

/// g_v = g ∘ i_v for each position (index v - v_lo). Throws
/// Error{NotHomomorphism} if the local map is not a homomorphism, and
/// Error{Internal} if the coefficient images fail to commute or to rebuild g.
std::vector<GroupMap> extract_eca_coefficients(const McaRule& rule, std::size_t cap = kDefaultEvaluationCap);

struct Permutativity {
  bool left = false;
  bool right = false;
  bool one_sided = false;
  int V = 0;
  /// Both sides on Z; right only on N.
  bool bipermutative() const { return one_sided ? right : (left && right); }
};

Permutativity permutativity(const LocalTable& table);
Permutativity permutativity(const McaRule& rule, std::size_t cap = kDefaultEvaluationCap);
/// Conjunction over all cells.
Permutativity permutativity(const Nhca& nhca);

/// Unique a on [J - L, K + R) with nhca(a) = target, given the seed on
/// [j - L, j + R) for some j in [J, K). Fills rightwards by inverting the right
/// coordinate and leftwards by inverting the left one. Throws
/// Error{NotPermutative} naming the first cell whose map cannot be inverted.
Config filling_solve(const Nhca& fibres, const Config& target, const Config& seed);

}  // namespace mca
