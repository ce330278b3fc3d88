#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mca/group.hpp"

namespace mca {

/// B = A ⋆ C for a normal subgroup A of B and C = B/A.
///
/// A-elements are indices into `a_group()` (A reindexed as a standalone
/// group, member order preserved); C-elements are coset indices of the
/// quotient.
class PseudoFrame {
 public:
  /// Canonical section: sigma(c) is the minimal element index of coset c.
  /// Throws Error{NotNormal}.
  PseudoFrame(GroupPtr b, const Subgroup& a);
  /// User-supplied section (C-index -> B element). Throws
  /// Error{FrameInconsistency} unless pi(sigma(c)) = c and sigma(e) = e.
  PseudoFrame(GroupPtr b, const Subgroup& a, std::vector<Element> section);

  const GroupPtr& b() const noexcept { return b_; }
  const Subgroup& a_subgroup() const noexcept { return a_; }
  const GroupPtr& a_group() const noexcept { return a_as_group_.group; }
  const GroupPtr& c_group() const noexcept { return quotient_.group; }
  const GroupMap& pi() const noexcept { return quotient_.projection; }
  const std::vector<Element>& sigma() const noexcept { return sigma_; }
  /// True when sigma is a homomorphism C -> B (semidirect product).
  bool semidirect() const noexcept { return semidirect_; }

  /// A-index -> element of B.
  Element embed(Element a) const noexcept { return a_as_group_.members[a]; }
  /// Element of B known to lie in A -> A-index.
  Element restrict(Element b) const;

  Element star(Element a, Element c) const noexcept { return star_[a + a_size_ * c]; }
  std::pair<Element, Element> unstar(Element b) const noexcept { return unstar_[b]; }

 private:
  void build();

  GroupPtr b_;
  Subgroup a_;
  SubgroupGroup a_as_group_;
  Quotient quotient_;
  std::vector<Element> sigma_;
  bool semidirect_ = false;
  std::size_t a_size_ = 0;
  std::vector<Element> star_;
  std::vector<std::pair<Element, Element>> unstar_;
};

using PseudoFramePtr = std::shared_ptr<const PseudoFrame>;

PseudoFramePtr make_frame(GroupPtr b, const Subgroup& a);
PseudoFramePtr make_frame(GroupPtr b, const Subgroup& a, std::vector<Element> section);

/// a ⋆ c = a · sigma(c)
Element star_compose(const PseudoFrame& frame, Element a, Element c);
std::pair<Element, Element> star_decompose(const PseudoFrame& frame, Element b);

/// c* a = sigma(c) a sigma(c)^-1, as an automorphism of A.
GroupMap conj_auto(const PseudoFrame& frame, Element c);

struct Zeta {
  Element value;   // A-index
  bool central;    // whether A lies in the center of B
};

/// sigma(c1 c2)^-1 sigma(c1) sigma(c2).
Zeta cocycle_zeta(const PseudoFrame& frame, Element c1, Element c2);

struct PolymorphReport {
  bool semidirect = false;
  bool a_fully_characteristic = false;
  bool section_fully_characteristic = false;
  bool conjugations_central_in_aut = false;
  bool holds() const {
    return semidirect && a_fully_characteristic && section_fully_characteristic && conjugations_central_in_aut;
  }
};

PolymorphReport polymorph_conditions(const PseudoFrame& frame, const EnumerationCaps& caps = {});
bool is_polymorph(const PseudoFrame& frame, const EnumerationCaps& caps = {});

/// g = f ⋆ h with g′(c) = g(sigma(c)) sigma(h(c))^-1.
struct SplitEndo {
  GroupMap f;                  // A -> A
  GroupMap h;                  // C -> C
  std::vector<Element> gprime; // C-index -> A-index
};

/// Throws Error{NotInvariant} when g(A) is not inside A, Error{NotHomomorphism}
/// when g is not an endomorphism of B. The identity
/// g(a ⋆ c) = (f(a) g′(c)) ⋆ h(c) is verified on all pairs before returning.
SplitEndo split_endo(const PseudoFrame& frame, const GroupMap& g);

/// Splits a bias element g = f ⋆ h.
std::pair<Element, Element> split_element(const PseudoFrame& frame, Element g);

}  // namespace mca
