#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mca {

using Element = std::uint32_t;

// In every group the identity has index 0.
inline constexpr Element kIdentity = 0;

class FiniteGroup;
using GroupPtr = std::shared_ptr<const FiniteGroup>;

/// A finite group stored as its full multiplication table.
///
/// Instances are immutable and always validated: rows and columns are
/// permutations, index 0 is the two-sided identity, every element has an
/// inverse and the product is associative. Construct through `from_table` or
/// one of the `make_*` constructors below.
class FiniteGroup {
 public:
  /// Validates `table` (square, entries in range, identity, inverses,
  /// associativity). If the identity is not at index 0 it is swapped there,
  /// together with its label. Throws Error{TableInvalid} naming the first
  /// violation, e.g. the triple (x,y,z) with (xy)z != x(yz).
  static GroupPtr from_table(const std::vector<std::vector<Element>>& table,
                             std::vector<std::string> labels = {});

  std::size_t order() const noexcept { return order_; }
  Element mul(Element x, Element y) const noexcept { return table_[x * order_ + y]; }
  Element inv(Element x) const noexcept { return inverse_[x]; }
  Element pow(Element x, long long k) const;
  Element conj(Element g, Element x) const noexcept { return mul(mul(g, x), inv(g)); }
  std::size_t element_order(Element x) const;

  bool is_abelian() const noexcept { return abelian_; }

  const std::string& label(Element x) const { return labels_[x]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<Element> find_label(std::string_view label) const;

  /// Row-major table, `table()[x * order() + y] == mul(x, y)`.
  std::span<const Element> table() const noexcept { return table_; }
  std::vector<std::vector<Element>> table_rows() const;

  bool same_table(const FiniteGroup& other) const noexcept { return table_ == other.table_; }

  // Construction path for the builders in this library, whose tables are
  // associative by construction. Associativity is still checked exhaustively
  // when the order is small or `full_check` is set; everything else always is.
  struct Unchecked {};
  FiniteGroup(Unchecked, std::size_t order, std::vector<Element> table,
              std::vector<std::string> labels, bool full_check = false);

 private:
  void finish(bool check_associativity);

  std::size_t order_ = 0;
  std::vector<Element> table_;
  std::vector<Element> inverse_;
  std::vector<std::string> labels_;
  bool abelian_ = false;
};

/// A subgroup of `parent()`, members kept sorted.
class Subgroup {
 public:
  /// Throws Error{TableInvalid} if `members` is not closed under product
  /// and inverse or lacks the identity.
  Subgroup(GroupPtr parent, std::vector<Element> members);

  static Subgroup trivial(GroupPtr parent);
  static Subgroup whole(GroupPtr parent);
  static Subgroup generated(GroupPtr parent, std::span<const Element> generators);

  const GroupPtr& parent() const noexcept { return parent_; }
  const std::vector<Element>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(Element x) const noexcept { return mask_[x] != 0; }
  bool is_normal() const;
  bool is_subset_of(const Subgroup& other) const;

  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.parent_ == b.parent_ && a.members_ == b.members_;
  }

 private:
  GroupPtr parent_;
  std::vector<Element> members_;
  std::vector<char> mask_;
};

/// A total map between two groups, stored element-wise.
class GroupMap {
 public:
  GroupMap(GroupPtr source, GroupPtr target, std::vector<Element> images);

  static GroupMap identity(GroupPtr group);
  static GroupMap trivial(GroupPtr source, GroupPtr target);
  /// x -> g x g^-1
  static GroupMap conjugation(GroupPtr group, Element g);
  /// x -> x^k; a homomorphism exactly when the k-th power map is one
  /// (always for abelian groups).
  static GroupMap power(GroupPtr group, long long k);

  Element operator()(Element x) const noexcept { return images_[x]; }
  const GroupPtr& source() const noexcept { return source_; }
  const GroupPtr& target() const noexcept { return target_; }
  const std::vector<Element>& images() const noexcept { return images_; }

  bool is_homomorphism() const noexcept { return homomorphism_; }
  bool is_bijective() const;
  bool maps_into(const Subgroup& from, const Subgroup& into) const;

  friend bool operator==(const GroupMap& a, const GroupMap& b) {
    return a.images_ == b.images_ && a.source_->same_table(*b.source_) &&
           a.target_->same_table(*b.target_);
  }

 private:
  GroupPtr source_;
  GroupPtr target_;
  std::vector<Element> images_;
  bool homomorphism_ = false;
};

/// outer ∘ inner
GroupMap compose(const GroupMap& outer, const GroupMap& inner);

GroupPtr make_cyclic(std::size_t n);
/// Componentwise sum; the first component is the least significant digit of
/// the mixed-radix element index.
GroupPtr make_direct_sum(const std::vector<std::size_t>& orders);
/// Q8 with elements ordered 1, -1, i, -i, j, -j, k, -k.
GroupPtr make_quaternion();

/// normal ⋊ acting with (a1,c1)(a2,c2) = (a1 · c1*a2, c1 c2). `action[c]` is
/// the automorphism of `normal` attached to acting element c; the map
/// c -> action[c] must be a homomorphism into Aut(normal). Element (a, c) has
/// index a + |normal| * c, so the canonical section is c -> (e, c).
GroupPtr make_semidirect(GroupPtr normal, const std::vector<GroupMap>& action, GroupPtr acting);

/// Z/modulus ⋊ Z/acting_order with c*a = multiplier^c · a (mod modulus).
/// Z/5 ⋊ Z/4 uses (5, 2, 4); D_{7;3} uses (7, 2, 3).
GroupPtr make_modular_semidirect(std::size_t modulus, std::size_t multiplier,
                                 std::size_t acting_order);

/// Direct product G × H with (g,h) at index g + |G| * h.
GroupPtr make_direct_product(GroupPtr first, GroupPtr second);

Subgroup center(GroupPtr group);
Subgroup commutator_subgroup(GroupPtr group);

struct SubgroupGroup {
  GroupPtr group;                  // the subgroup as a standalone group
  GroupMap embedding;              // group -> parent
  std::vector<Element> members;    // index in `group` -> parent element
  std::vector<long long> index_of; // parent element -> index in `group`, or -1
};

/// Reindexes a subgroup as a group in its own right, preserving the member
/// order (so the identity stays at 0).
SubgroupGroup as_group(const Subgroup& subgroup);

struct Quotient {
  GroupPtr group;
  GroupMap projection;
  std::vector<Element> representatives;  // coset index -> minimal member
};

/// Cosets are indexed by ascending minimal representative; the identity coset
/// is index 0. Throws Error{NotNormal}.
Quotient quotient(GroupPtr group, const Subgroup& normal);

struct EnumerationCaps {
  std::size_t max_order = 64;
  std::size_t max_maps = 10'000'000;
};

/// Greedy generating set: repeatedly adds the element whose inclusion yields
/// the largest generated subgroup (ties broken by smallest index).
std::vector<Element> generating_set(const GroupPtr& group);

/// All endomorphisms, ordered lexicographically by the images of
/// `generating_set(group)`. Throws Error{SizeLimit} above the caps.
std::vector<GroupMap> enumerate_endomorphisms(const GroupPtr& group, const EnumerationCaps& caps = {});
std::vector<GroupMap> enumerate_automorphisms(const GroupPtr& group, const EnumerationCaps& caps = {});

bool is_fully_characteristic(const GroupPtr& group, const Subgroup& subgroup,
                             const EnumerationCaps& caps = {});

struct CharSeries {
  std::vector<Subgroup> chain;                        // Z_0 = {e}, Z_1 = Z(G), ...
  std::vector<std::vector<std::size_t>> factor_invariants;  // invariants of Z_k / Z_{k-1}, k >= 1
  bool reaches_whole = false;
};

CharSeries upper_central_series(const GroupPtr& group);
bool is_nilpotent(const GroupPtr& group);

/// Explicit decomposition A ≅ Z/n_1 ⊕ ... ⊕ Z/n_d with n_1 | n_2 | ... and
/// all n_i > 1 (the trivial group has no factors).
struct AbelianStructure {
  std::vector<std::size_t> invariants;
  std::vector<Element> generators;
  std::vector<std::vector<std::size_t>> coords;  // element -> coefficient tuple

  Element element_of(std::span<const std::size_t> coefficients) const;

  std::vector<Element> by_index_;  // mixed-radix coefficient index -> element
};

/// Throws Error{NotAbelian}.
AbelianStructure abelian_invariants(const GroupPtr& group);

}  // namespace mca
