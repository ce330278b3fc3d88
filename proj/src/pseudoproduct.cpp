#include "mca/pseudoproduct.hpp"

#include <string>

#include "mca/error.hpp"

namespace mca {

PseudoFrame::PseudoFrame(GroupPtr b, const Subgroup& a)
    : b_(std::move(b)), a_(a), a_as_group_(as_group(a)), quotient_(quotient(b_, a)) {
  sigma_ = quotient_.representatives;
  build();
}

PseudoFrame::PseudoFrame(GroupPtr b, const Subgroup& a, std::vector<Element> section)
    : b_(std::move(b)), a_(a), a_as_group_(as_group(a)), quotient_(quotient(b_, a)), sigma_(std::move(section)) {
  if (sigma_.size() != quotient_.group->order()) {
    throw Error(ErrorKind::FrameInconsistency, "section needs one element per coset");
  }
  for (std::size_t c = 0; c < sigma_.size(); ++c) {
    if (sigma_[c] >= b_->order() || quotient_.projection(sigma_[c]) != c) {
      throw Error(ErrorKind::FrameInconsistency, "section element for coset " + std::to_string(c) + " lies outside it");
    }
  }
  if (sigma_[kIdentity] != kIdentity) throw Error(ErrorKind::FrameInconsistency, "section must send e to e");
  build();
}

void PseudoFrame::build() {
  if (a_.parent()->order() != b_->order()) throw Error(ErrorKind::FrameInconsistency, "subgroup of another group");
  a_size_ = a_.size();
  const std::size_t nc = quotient_.group->order();
  star_.assign(a_size_ * nc, 0);
  unstar_.assign(b_->order(), {0, 0});
  std::vector<char> hit(b_->order(), 0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t a = 0; a < a_size_; ++a) {
      const Element b = b_->mul(a_as_group_.members[a], sigma_[c]);
      if (hit[b]) throw Error(ErrorKind::FrameInconsistency, "a ⋆ c is not injective");
      hit[b] = 1;
      star_[a + a_size_ * c] = b;
      unstar_[b] = {static_cast<Element>(a), static_cast<Element>(c)};
    }
  }
  semidirect_ = true;
  for (std::size_t c1 = 0; c1 < nc && semidirect_; ++c1) {
    for (std::size_t c2 = 0; c2 < nc; ++c2) {
      if (sigma_[quotient_.group->mul(c1, c2)] != b_->mul(sigma_[c1], sigma_[c2])) {
        semidirect_ = false;
        break;
      }
    }
  }
}

Element PseudoFrame::restrict(Element b) const {
  const long long idx = a_as_group_.index_of[b];
  if (idx < 0) throw Error(ErrorKind::FrameInconsistency, "element " + b_->label(b) + " is not in A");
  return static_cast<Element>(idx);
}

PseudoFramePtr make_frame(GroupPtr b, const Subgroup& a) { return std::make_shared<PseudoFrame>(std::move(b), a); }

PseudoFramePtr make_frame(GroupPtr b, const Subgroup& a, std::vector<Element> section) {
  return std::make_shared<PseudoFrame>(std::move(b), a, std::move(section));
}

Element star_compose(const PseudoFrame& frame, Element a, Element c) { return frame.star(a, c); }

std::pair<Element, Element> star_decompose(const PseudoFrame& frame, Element b) { return frame.unstar(b); }

GroupMap conj_auto(const PseudoFrame& frame, Element c) {
  const auto& b = *frame.b();
  const Element s = frame.sigma()[c];
  std::vector<Element> images(frame.a_group()->order());
  for (std::size_t a = 0; a < images.size(); ++a) {
    images[a] = frame.restrict(b.conj(s, frame.embed(static_cast<Element>(a))));
  }
  return GroupMap(frame.a_group(), frame.a_group(), std::move(images));
}

Zeta cocycle_zeta(const PseudoFrame& frame, Element c1, Element c2) {
  const auto& b = *frame.b();
  const auto& sigma = frame.sigma();
  const Element c12 = frame.c_group()->mul(c1, c2);
  const Element z = b.mul(b.inv(sigma[c12]), b.mul(sigma[c1], sigma[c2]));
  bool central = true;
  for (Element a : frame.a_subgroup().members()) {
    for (std::size_t x = 0; x < b.order() && central; ++x) central = b.mul(a, x) == b.mul(x, a);
  }
  return Zeta{frame.restrict(z), central};
}

PolymorphReport polymorph_conditions(const PseudoFrame& frame, const EnumerationCaps& caps) {
  PolymorphReport r;
  r.semidirect = frame.semidirect();
  const auto ends = enumerate_endomorphisms(frame.b(), caps);
  r.a_fully_characteristic = true;
  for (const auto& g : ends) r.a_fully_characteristic &= g.maps_into(frame.a_subgroup(), frame.a_subgroup());
  if (r.semidirect) {
    Subgroup image(frame.b(), frame.sigma());
    r.section_fully_characteristic = true;
    for (const auto& g : ends) r.section_fully_characteristic &= g.maps_into(image, image);
  }
  const auto autos = enumerate_automorphisms(frame.a_group(), caps);
  r.conjugations_central_in_aut = true;
  for (std::size_t c = 0; c < frame.c_group()->order() && r.conjugations_central_in_aut; ++c) {
    const GroupMap k = conj_auto(frame, static_cast<Element>(c));
    for (const auto& phi : autos) {
      if (compose(k, phi).images() != compose(phi, k).images()) {
        r.conjugations_central_in_aut = false;
        break;
      }
    }
  }
  return r;
}

bool is_polymorph(const PseudoFrame& frame, const EnumerationCaps& caps) {
  return polymorph_conditions(frame, caps).holds();
}

SplitEndo split_endo(const PseudoFrame& frame, const GroupMap& g) {
  const auto& b = *frame.b();
  if (!g.source()->same_table(b) || !g.target()->same_table(b)) {
    throw Error(ErrorKind::InvalidSpec, "split_endo needs an endomorphism of the frame's group");
  }
  if (!g.is_homomorphism()) throw Error(ErrorKind::NotHomomorphism, "coefficient is not an endomorphism");
  if (!g.maps_into(frame.a_subgroup(), frame.a_subgroup())) {
    for (Element a : frame.a_subgroup().members()) {
      if (!frame.a_subgroup().contains(g(a))) {
        throw Error(ErrorKind::NotInvariant, "g(" + b.label(a) + ") = " + b.label(g(a)) + " leaves A");
      }
    }
  }
  const std::size_t na = frame.a_group()->order(), nc = frame.c_group()->order();
  std::vector<Element> f(na), h(nc), gprime(nc);
  for (std::size_t a = 0; a < na; ++a) f[a] = frame.restrict(g(frame.embed(static_cast<Element>(a))));
  for (std::size_t c = 0; c < nc; ++c) {
    const Element gs = g(frame.sigma()[c]);
    h[c] = frame.pi()(gs);
    gprime[c] = frame.restrict(b.mul(gs, b.inv(frame.sigma()[h[c]])));
  }
  SplitEndo s{GroupMap(frame.a_group(), frame.a_group(), std::move(f)),
              GroupMap(frame.c_group(), frame.c_group(), std::move(h)), std::move(gprime)};
  const auto& ag = *frame.a_group();
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t a = 0; a < na; ++a) {
      const Element lhs = g(frame.star(static_cast<Element>(a), static_cast<Element>(c)));
      const Element rhs = frame.star(ag.mul(s.f(static_cast<Element>(a)), s.gprime[c]), s.h(static_cast<Element>(c)));
      if (lhs != rhs) throw Error(ErrorKind::Internal, "endomorphism splitting identity fails");
    }
  }
  if (!s.f.is_homomorphism() || !s.h.is_homomorphism()) {
    throw Error(ErrorKind::Internal, "split parts are not homomorphisms");
  }
  return s;
}

std::pair<Element, Element> split_element(const PseudoFrame& frame, Element g) { return frame.unstar(g); }

}  // namespace mca
