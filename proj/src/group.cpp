#include "mca/group.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "mca/error.hpp"

namespace mca {

namespace {

constexpr std::size_t kAssociativityCheckLimit = 128;

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

std::string triple(std::size_t x, std::size_t y, std::size_t z) {
  std::ostringstream os;
  os << "(" << x << "," << y << "," << z << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- FiniteGroup

FiniteGroup::FiniteGroup(Unchecked, std::size_t order, std::vector<Element> table,
                         std::vector<std::string> labels, bool full_check)
    : order_(order), table_(std::move(table)), labels_(std::move(labels)) {
  if (labels_.empty()) labels_ = default_labels(order_);
  finish(full_check || order_ <= kAssociativityCheckLimit);
}

void FiniteGroup::finish(bool check_associativity) {
  const std::size_t n = order_;
  if (n == 0) throw Error(ErrorKind::InvalidOrder, "group order must be positive");
  if (table_.size() != n * n) throw Error(ErrorKind::TableInvalid, "table is not square");
  if (labels_.size() != n) throw Error(ErrorKind::TableInvalid, "label count differs from order");
  for (Element v : table_) {
    if (v >= n) throw Error(ErrorKind::TableInvalid, "entry " + std::to_string(v) + " out of range");
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (mul(0, x) != x || mul(x, 0) != x) {
      throw Error(ErrorKind::TableInvalid, "index 0 is not an identity at element " + std::to_string(x));
    }
  }
  std::vector<char> seen(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t y = 0; y < n; ++y) {
      Element v = mul(x, y);
      if (seen[v]) throw Error(ErrorKind::TableInvalid, "row " + std::to_string(x) + " is not a permutation");
      seen[v] = 1;
    }
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t y = 0; y < n; ++y) {
      Element v = mul(y, x);
      if (seen[v]) throw Error(ErrorKind::TableInvalid, "column " + std::to_string(x) + " is not a permutation");
      seen[v] = 1;
    }
  }
  inverse_.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    bool found = false;
    for (std::size_t y = 0; y < n; ++y) {
      if (mul(x, y) == 0) {
        if (mul(y, x) != 0) {
          throw Error(ErrorKind::TableInvalid, "element " + std::to_string(x) + " has no two-sided inverse");
        }
        inverse_[x] = static_cast<Element>(y);
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::TableInvalid, "element " + std::to_string(x) + " has no inverse");
  }
  if (check_associativity) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const Element xy = mul(x, y);
        for (std::size_t z = 0; z < n; ++z) {
          if (mul(xy, z) != mul(x, mul(y, z))) {
            throw Error(ErrorKind::TableInvalid, "associativity fails at " + triple(x, y, z));
          }
        }
      }
    }
  }
  abelian_ = true;
  for (std::size_t x = 0; x < n && abelian_; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      if (mul(x, y) != mul(y, x)) {
        abelian_ = false;
        break;
      }
    }
  }
}

GroupPtr FiniteGroup::from_table(const std::vector<std::vector<Element>>& table,
                                 std::vector<std::string> labels) {
  const std::size_t n = table.size();
  if (n == 0) throw Error(ErrorKind::InvalidOrder, "empty table");
  for (const auto& row : table) {
    if (row.size() != n) throw Error(ErrorKind::TableInvalid, "table is not square");
    for (Element v : row) {
      if (v >= n) throw Error(ErrorKind::TableInvalid, "entry " + std::to_string(v) + " out of range");
    }
  }
  if (!labels.empty() && labels.size() != n) {
    throw Error(ErrorKind::TableInvalid, "label count differs from order");
  }
  std::optional<std::size_t> identity;
  for (std::size_t e = 0; e < n && !identity; ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) ok = table[e][x] == x && table[x][e] == x;
    if (ok) identity = e;
  }
  if (!identity) throw Error(ErrorKind::TableInvalid, "no identity element");
  if (labels.empty()) labels = default_labels(n);

  // Swap the identity into index 0.
  const std::size_t e = *identity;
  auto relabel = [e](std::size_t x) -> std::size_t { return x == e ? 0 : (x == 0 ? e : x); };
  std::vector<Element> flat(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      flat[relabel(x) * n + relabel(y)] = static_cast<Element>(relabel(table[x][y]));
    }
  }
  std::swap(labels[0], labels[e]);

  return std::make_shared<FiniteGroup>(Unchecked{}, n, std::move(flat), std::move(labels), true);
}

Element FiniteGroup::pow(Element x, long long k) const {
  const long long n = static_cast<long long>(order_);
  long long e = ((k % n) + n) % n;
  Element result = kIdentity;
  Element base = x;
  while (e > 0) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
    e >>= 1;
  }
  return result;
}

std::size_t FiniteGroup::element_order(Element x) const {
  std::size_t k = 1;
  Element y = x;
  while (y != kIdentity) {
    y = mul(y, x);
    ++k;
  }
  return k;
}

std::optional<Element> FiniteGroup::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < order_; ++i) {
    if (labels_[i] == label) return static_cast<Element>(i);
  }
  return std::nullopt;
}

std::vector<std::vector<Element>> FiniteGroup::table_rows() const {
  std::vector<std::vector<Element>> rows(order_);
  for (std::size_t x = 0; x < order_; ++x) {
    rows[x].assign(table_.begin() + x * order_, table_.begin() + (x + 1) * order_);
  }
  return rows;
}

// ------------------------------------------------------------------ Subgroup

Subgroup::Subgroup(GroupPtr parent, std::vector<Element> members)
    : parent_(std::move(parent)), members_(std::move(members)) {
  const std::size_t n = parent_->order();
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  mask_.assign(n, 0);
  for (Element x : members_) {
    if (x >= n) throw Error(ErrorKind::TableInvalid, "subgroup member out of range");
    mask_[x] = 1;
  }
  if (members_.empty() || !mask_[kIdentity]) {
    throw Error(ErrorKind::TableInvalid, "subgroup lacks the identity");
  }
  for (Element x : members_) {
    if (!mask_[parent_->inv(x)]) throw Error(ErrorKind::TableInvalid, "subgroup not closed under inverse");
    for (Element y : members_) {
      if (!mask_[parent_->mul(x, y)]) {
        throw Error(ErrorKind::TableInvalid, "subgroup not closed under product");
      }
    }
  }
}

Subgroup Subgroup::trivial(GroupPtr parent) { return Subgroup(std::move(parent), {kIdentity}); }

Subgroup Subgroup::whole(GroupPtr parent) {
  std::vector<Element> all(parent->order());
  std::iota(all.begin(), all.end(), Element{0});
  return Subgroup(std::move(parent), std::move(all));
}

namespace {

// Closure of {e} ∪ gens under right multiplication by the generators. In a
// finite group this is the generated subgroup.
std::vector<Element> closure(const FiniteGroup& g, std::span<const Element> gens) {
  std::vector<char> in(g.order(), 0);
  std::vector<Element> out{kIdentity};
  in[kIdentity] = 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (Element s : gens) {
      Element y = g.mul(out[i], s);
      if (!in[y]) {
        in[y] = 1;
        out.push_back(y);
      }
    }
  }
  return out;
}

}  // namespace

Subgroup Subgroup::generated(GroupPtr parent, std::span<const Element> generators) {
  auto members = closure(*parent, generators);
  return Subgroup(std::move(parent), std::move(members));
}

bool Subgroup::is_normal() const {
  for (std::size_t g = 0; g < parent_->order(); ++g) {
    for (Element x : members_) {
      if (!mask_[parent_->conj(static_cast<Element>(g), x)]) return false;
    }
  }
  return true;
}

bool Subgroup::is_subset_of(const Subgroup& other) const {
  if (other.parent_->order() != parent_->order()) return false;
  return std::all_of(members_.begin(), members_.end(), [&](Element x) { return other.contains(x); });
}

// ------------------------------------------------------------------ GroupMap

GroupMap::GroupMap(GroupPtr source, GroupPtr target, std::vector<Element> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
  const std::size_t n = source_->order();
  if (images_.size() != n) throw Error(ErrorKind::InvalidSpec, "map size differs from source order");
  for (Element v : images_) {
    if (v >= target_->order()) throw Error(ErrorKind::InvalidSpec, "map image out of range");
  }
  homomorphism_ = true;
  for (std::size_t x = 0; x < n && homomorphism_; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (images_[source_->mul(x, y)] != target_->mul(images_[x], images_[y])) {
        homomorphism_ = false;
        break;
      }
    }
  }
}

GroupMap GroupMap::identity(GroupPtr group) {
  std::vector<Element> images(group->order());
  std::iota(images.begin(), images.end(), Element{0});
  return GroupMap(group, group, std::move(images));
}

GroupMap GroupMap::trivial(GroupPtr source, GroupPtr target) {
  std::vector<Element> images(source->order(), kIdentity);
  return GroupMap(std::move(source), std::move(target), std::move(images));
}

GroupMap GroupMap::conjugation(GroupPtr group, Element g) {
  std::vector<Element> images(group->order());
  for (std::size_t x = 0; x < images.size(); ++x) images[x] = group->conj(g, static_cast<Element>(x));
  return GroupMap(group, group, std::move(images));
}

GroupMap GroupMap::power(GroupPtr group, long long k) {
  std::vector<Element> images(group->order());
  for (std::size_t x = 0; x < images.size(); ++x) images[x] = group->pow(static_cast<Element>(x), k);
  return GroupMap(group, group, std::move(images));
}

bool GroupMap::is_bijective() const {
  if (source_->order() != target_->order()) return false;
  std::vector<char> seen(target_->order(), 0);
  for (Element v : images_) {
    if (seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

bool GroupMap::maps_into(const Subgroup& from, const Subgroup& into) const {
  return std::all_of(from.members().begin(), from.members().end(),
                     [&](Element x) { return into.contains(images_[x]); });
}

GroupMap compose(const GroupMap& outer, const GroupMap& inner) {
  if (!inner.target()->same_table(*outer.source())) {
    throw Error(ErrorKind::InvalidSpec, "composed maps do not share a middle group");
  }
  std::vector<Element> images(inner.source()->order());
  for (std::size_t x = 0; x < images.size(); ++x) images[x] = outer(inner(static_cast<Element>(x)));
  return GroupMap(inner.source(), outer.target(), std::move(images));
}

// -------------------------------------------------------------- constructors

GroupPtr make_cyclic(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidOrder, "cyclic group of order 0");
  std::vector<Element> table(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) table[x * n + y] = static_cast<Element>((x + y) % n);
  }
  return std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, n, std::move(table), default_labels(n));
}

GroupPtr make_direct_sum(const std::vector<std::size_t>& orders) {
  if (orders.empty()) throw Error(ErrorKind::InvalidArity, "direct sum of no factors");
  std::size_t n = 1;
  for (std::size_t k : orders) {
    if (k == 0) throw Error(ErrorKind::InvalidOrder, "direct sum factor of order 0");
    n *= k;
  }
  auto digits = [&](std::size_t x) {
    std::vector<std::size_t> d(orders.size());
    for (std::size_t i = 0; i < orders.size(); ++i) {
      d[i] = x % orders[i];
      x /= orders[i];
    }
    return d;
  };
  std::vector<Element> table(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto dx = digits(x);
    std::string label;
    for (std::size_t i = 0; i < dx.size(); ++i) label += (i ? "," : "") + std::to_string(dx[i]);
    labels[x] = orders.size() == 1 ? label : "(" + label + ")";
    for (std::size_t y = 0; y < n; ++y) {
      auto dy = digits(y);
      std::size_t z = 0, radix = 1;
      for (std::size_t i = 0; i < orders.size(); ++i) {
        z += ((dx[i] + dy[i]) % orders[i]) * radix;
        radix *= orders[i];
      }
      table[x * n + y] = static_cast<Element>(z);
    }
  }
  return std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, n, std::move(table), std::move(labels));
}

GroupPtr make_quaternion() {
  // Units 1,i,j,k as 0..3; unit product u*v = sign * w.
  static constexpr int kUnit[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static constexpr int kNeg[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  std::vector<Element> table(64);
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      const int u = x / 2, v = y / 2;
      const int sign = (x % 2) ^ (y % 2) ^ kNeg[u][v];
      table[x * 8 + y] = static_cast<Element>(2 * kUnit[u][v] + sign);
    }
  }
  return std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, 8, std::move(table),
                                       std::vector<std::string>{"1", "-1", "i", "-i", "j", "-j", "k", "-k"});
}

GroupPtr make_semidirect(GroupPtr normal, const std::vector<GroupMap>& action, GroupPtr acting) {
  const std::size_t na = normal->order(), nc = acting->order();
  if (action.size() != nc) {
    throw Error(ErrorKind::InvalidAction, "action needs one automorphism per acting element");
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const GroupMap& phi = action[c];
    if (!phi.source()->same_table(*normal) || !phi.target()->same_table(*normal)) {
      throw Error(ErrorKind::InvalidAction, "action map " + std::to_string(c) + " is not on the normal group");
    }
    if (!phi.is_homomorphism() || !phi.is_bijective()) {
      throw Error(ErrorKind::InvalidAction, "action map " + std::to_string(c) + " is not an automorphism");
    }
  }
  for (std::size_t c1 = 0; c1 < nc; ++c1) {
    for (std::size_t c2 = 0; c2 < nc; ++c2) {
      const GroupMap& lhs = action[acting->mul(c1, c2)];
      for (std::size_t a = 0; a < na; ++a) {
        if (lhs(a) != action[c1](action[c2](a))) {
          throw Error(ErrorKind::InvalidAction, "action is not a homomorphism at (" + std::to_string(c1) + "," +
                                                    std::to_string(c2) + ")");
        }
      }
    }
  }
  const std::size_t n = na * nc;
  std::vector<Element> table(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t a1 = x % na, c1 = x / na;
    labels[x] = "(" + normal->label(a1) + "," + acting->label(c1) + ")";
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t a2 = y % na, c2 = y / na;
      const Element a = normal->mul(a1, action[c1](a2));
      const Element c = acting->mul(c1, c2);
      table[x * n + y] = static_cast<Element>(a + na * c);
    }
  }
  return std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, n, std::move(table), std::move(labels));
}

GroupPtr make_modular_semidirect(std::size_t modulus, std::size_t multiplier, std::size_t acting_order) {
  if (modulus == 0 || acting_order == 0) throw Error(ErrorKind::InvalidOrder, "order 0 factor");
  auto normal = make_cyclic(modulus);
  auto acting = make_cyclic(acting_order);
  std::vector<GroupMap> action;
  std::size_t unit = 1 % modulus;
  for (std::size_t c = 0; c < acting_order; ++c) {
    action.push_back(GroupMap::power(normal, static_cast<long long>(unit)));
    unit = (unit * multiplier) % modulus;
  }
  return make_semidirect(normal, action, acting);
}

GroupPtr make_direct_product(GroupPtr first, GroupPtr second) {
  std::vector<GroupMap> action(second->order(), GroupMap::identity(first));
  return make_semidirect(std::move(first), action, std::move(second));
}

// ------------------------------------------------------- structural subgroups

Subgroup center(GroupPtr group) {
  std::vector<Element> members;
  const std::size_t n = group->order();
  for (std::size_t z = 0; z < n; ++z) {
    bool central = true;
    for (std::size_t b = 0; b < n && central; ++b) central = group->mul(b, z) == group->mul(z, b);
    if (central) members.push_back(static_cast<Element>(z));
  }
  return Subgroup(std::move(group), std::move(members));
}

Subgroup commutator_subgroup(GroupPtr group) {
  std::vector<char> seen(group->order(), 0);
  std::vector<Element> commutators;
  for (std::size_t b = 0; b < group->order(); ++b) {
    for (std::size_t h = 0; h < group->order(); ++h) {
      Element c = group->mul(group->mul(b, h), group->mul(group->inv(b), group->inv(h)));
      if (!seen[c]) {
        seen[c] = 1;
        commutators.push_back(c);
      }
    }
  }
  return Subgroup::generated(std::move(group), commutators);
}

SubgroupGroup as_group(const Subgroup& subgroup) {
  const auto& parent = subgroup.parent();
  const auto& members = subgroup.members();
  const std::size_t m = members.size();
  std::vector<long long> index_of(parent->order(), -1);
  for (std::size_t i = 0; i < m; ++i) index_of[members[i]] = static_cast<long long>(i);
  std::vector<Element> table(m * m);
  std::vector<std::string> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = parent->label(members[i]);
    for (std::size_t j = 0; j < m; ++j) {
      table[i * m + j] = static_cast<Element>(index_of[parent->mul(members[i], members[j])]);
    }
  }
  auto group = std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, m, std::move(table), std::move(labels));
  GroupMap embedding(group, parent, members);
  return SubgroupGroup{group, std::move(embedding), members, std::move(index_of)};
}

Quotient quotient(GroupPtr group, const Subgroup& normal) {
  if (!normal.is_normal()) throw Error(ErrorKind::NotNormal, "quotient by a non-normal subgroup");
  const std::size_t n = group->order();
  constexpr Element kUnset = ~Element{0};
  std::vector<Element> coset(n, kUnset);
  std::vector<Element> reps;
  for (std::size_t x = 0; x < n; ++x) {
    if (coset[x] != kUnset) continue;
    const auto idx = static_cast<Element>(reps.size());
    reps.push_back(static_cast<Element>(x));
    for (Element a : normal.members()) coset[group->mul(x, a)] = idx;
  }
  const std::size_t m = reps.size();
  std::vector<Element> table(m * m);
  std::vector<std::string> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = group->label(reps[i]);
    for (std::size_t j = 0; j < m; ++j) table[i * m + j] = coset[group->mul(reps[i], reps[j])];
  }
  auto q = std::make_shared<FiniteGroup>(FiniteGroup::Unchecked{}, m, std::move(table), std::move(labels));
  GroupMap projection(group, q, std::move(coset));
  return Quotient{q, std::move(projection), std::move(reps)};
}

// ------------------------------------------------------------- endomorphisms

std::vector<Element> generating_set(const GroupPtr& group) {
  const std::size_t n = group->order();
  std::vector<Element> gens;
  std::size_t reached = 1;
  while (reached < n) {
    std::size_t best_size = 0;
    Element best = 0;
    std::vector<char> covered(n, 0);
    for (Element x : closure(*group, gens)) covered[x] = 1;
    for (std::size_t x = 1; x < n; ++x) {
      if (covered[x]) continue;
      gens.push_back(static_cast<Element>(x));
      const std::size_t size = closure(*group, gens).size();
      gens.pop_back();
      if (size > best_size) {
        best_size = size;
        best = static_cast<Element>(x);
      }
    }
    gens.push_back(best);
    reached = best_size;
  }
  return gens;
}

std::vector<GroupMap> enumerate_endomorphisms(const GroupPtr& group, const EnumerationCaps& caps) {
  const std::size_t n = group->order();
  if (n > caps.max_order) {
    throw Error(ErrorKind::SizeLimit, "group of order " + std::to_string(n) + " exceeds the enumeration cap of " +
                                          std::to_string(caps.max_order));
  }
  const auto gens = generating_set(group);
  std::vector<std::size_t> gen_order(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) gen_order[i] = group->element_order(gens[i]);

  constexpr Element kUnset = ~Element{0};
  std::vector<GroupMap> result;
  std::vector<Element> chosen;
  std::size_t attempts = 0;

  // Extends `image` (a homomorphism on <gens[0..k)>) by gens[k] -> t; false on
  // any inconsistency. Right-multiplication consistency for every generator
  // implies the homomorphism property on the generated subgroup.
  auto extend = [&](std::vector<Element>& image, std::size_t k) {
    std::vector<Element> frontier;
    for (std::size_t x = 0; x < n; ++x) {
      if (image[x] != kUnset) frontier.push_back(static_cast<Element>(x));
    }
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const Element x = frontier[i];
      for (std::size_t g = 0; g <= k; ++g) {
        const Element y = group->mul(x, gens[g]);
        const Element v = group->mul(image[x], chosen[g]);
        if (image[y] == kUnset) {
          image[y] = v;
          frontier.push_back(y);
        } else if (image[y] != v) {
          return false;
        }
      }
    }
    return true;
  };

  std::function<void(std::size_t, const std::vector<Element>&)> search =
      [&](std::size_t k, const std::vector<Element>& image) {
        if (k == gens.size()) {
          GroupMap map(group, group, image);
          if (!map.is_homomorphism()) throw Error(ErrorKind::Internal, "endomorphism extension produced a non-homomorphism");
          result.push_back(std::move(map));
          return;
        }
        for (std::size_t t = 0; t < n; ++t) {
          if (gen_order[k] % group->element_order(static_cast<Element>(t)) != 0) continue;
          if (++attempts > caps.max_maps) {
            throw Error(ErrorKind::SizeLimit, "endomorphism search exceeded " + std::to_string(caps.max_maps) +
                                                  " candidates");
          }
          chosen.push_back(static_cast<Element>(t));
          std::vector<Element> next = image;
          if (extend(next, k)) search(k + 1, next);
          chosen.pop_back();
        }
      };

  std::vector<Element> image(n, kUnset);
  image[kIdentity] = kIdentity;
  search(0, image);
  return result;
}

std::vector<GroupMap> enumerate_automorphisms(const GroupPtr& group, const EnumerationCaps& caps) {
  std::vector<GroupMap> autos;
  for (auto& m : enumerate_endomorphisms(group, caps)) {
    if (m.is_bijective()) autos.push_back(std::move(m));
  }
  return autos;
}

bool is_fully_characteristic(const GroupPtr& group, const Subgroup& subgroup, const EnumerationCaps& caps) {
  for (const auto& phi : enumerate_endomorphisms(group, caps)) {
    if (!phi.maps_into(subgroup, subgroup)) return false;
  }
  return true;
}

// ---------------------------------------------------- upper central series

CharSeries upper_central_series(const GroupPtr& group) {
  CharSeries series;
  series.chain.push_back(Subgroup::trivial(group));
  while (true) {
    const Subgroup& current = series.chain.back();
    Quotient q = quotient(group, current);
    Subgroup zq = center(q.group);
    std::vector<Element> preimage;
    for (std::size_t b = 0; b < group->order(); ++b) {
      if (zq.contains(q.projection(static_cast<Element>(b)))) preimage.push_back(static_cast<Element>(b));
    }
    if (preimage.size() == current.size()) break;
    Subgroup next(group, std::move(preimage));

    // Q_k = Z_k / Z_{k-1}, computed inside Z_k.
    SubgroupGroup inner = as_group(next);
    std::vector<Element> lower;
    for (Element x : current.members()) lower.push_back(static_cast<Element>(inner.index_of[x]));
    Quotient factor = quotient(inner.group, Subgroup(inner.group, std::move(lower)));
    series.factor_invariants.push_back(abelian_invariants(factor.group).invariants);
    series.chain.push_back(std::move(next));
  }
  series.reaches_whole = series.chain.back().size() == group->order();
  return series;
}

bool is_nilpotent(const GroupPtr& group) { return upper_central_series(group).reaches_whole; }

// --------------------------------------------------------- abelian structure

namespace {

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> primes;
  for (std::size_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      primes.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) primes.push_back(n);
  return primes;
}

// Decomposes the p-part (members listed in `part`) into cyclic factors by
// peeling elements of maximal order whose cyclic subgroup meets the span so
// far trivially, backtracking if a choice cannot be completed.
bool peel(const FiniteGroup& g, const std::vector<Element>& candidates, std::size_t target,
          std::vector<char>& span, std::size_t span_size, std::size_t max_order,
          std::vector<Element>& basis) {
  if (span_size == target) return true;
  for (Element y : candidates) {
    const std::size_t oy = g.element_order(y);
    if (oy > max_order) continue;
    bool disjoint = true;
    Element p = y;
    for (std::size_t k = 1; k < oy && disjoint; ++k, p = g.mul(p, y)) disjoint = !span[p];
    if (!disjoint) continue;
    std::vector<char> next(span.size(), 0);
    std::size_t next_size = 0;
    for (std::size_t x = 0; x < span.size(); ++x) {
      if (!span[x]) continue;
      Element z = static_cast<Element>(x);
      for (std::size_t k = 0; k < oy; ++k, z = g.mul(z, y)) {
        if (!next[z]) {
          next[z] = 1;
          ++next_size;
        }
      }
    }
    basis.push_back(y);
    if (peel(g, candidates, target, next, next_size, oy, basis)) return true;
    basis.pop_back();
  }
  return false;
}

}  // namespace

Element AbelianStructure::element_of(std::span<const std::size_t> coefficients) const {
  if (coefficients.size() != invariants.size()) {
    throw Error(ErrorKind::InvalidArity, "coefficient tuple has the wrong length");
  }
  std::size_t idx = 0, radix = 1;
  for (std::size_t i = 0; i < invariants.size(); ++i) {
    idx += (coefficients[i] % invariants[i]) * radix;
    radix *= invariants[i];
  }
  return by_index_[idx];
}

AbelianStructure abelian_invariants(const GroupPtr& group) {
  if (!group->is_abelian()) throw Error(ErrorKind::NotAbelian, "abelian invariants of a non-abelian group");
  const FiniteGroup& g = *group;
  const std::size_t n = g.order();

  // Primary decomposition: per prime, cyclic factors (generator, order) in
  // descending order.
  std::vector<std::vector<std::pair<Element, std::size_t>>> primary;
  for (std::size_t p : prime_factors(n)) {
    std::size_t target = 1;
    for (std::size_t m = n; m % p == 0; m /= p) target *= p;
    std::vector<Element> part;
    for (std::size_t x = 0; x < n; ++x) {
      if (target % g.element_order(static_cast<Element>(x)) == 0 && x != kIdentity) part.push_back(static_cast<Element>(x));
    }
    std::stable_sort(part.begin(), part.end(),
                     [&](Element a, Element b) { return g.element_order(a) > g.element_order(b); });
    std::vector<char> span(n, 0);
    span[kIdentity] = 1;
    std::vector<Element> basis;
    if (!peel(g, part, target, span, 1, target, basis)) {
      throw Error(ErrorKind::Internal, "primary decomposition failed");
    }
    std::vector<std::pair<Element, std::size_t>> factors;
    for (Element b : basis) factors.emplace_back(b, g.element_order(b));
    primary.push_back(std::move(factors));
  }

  // Invariant factors: combine the k-th largest primary factors across primes.
  std::size_t depth = 0;
  for (const auto& f : primary) depth = std::max(depth, f.size());
  AbelianStructure s;
  for (std::size_t k = 0; k < depth; ++k) {
    Element gen = kIdentity;
    std::size_t order = 1;
    for (const auto& f : primary) {
      if (k < f.size()) {
        gen = g.mul(gen, f[k].first);
        order *= f[k].second;
      }
    }
    s.invariants.push_back(order);
    s.generators.push_back(gen);
  }
  std::reverse(s.invariants.begin(), s.invariants.end());
  std::reverse(s.generators.begin(), s.generators.end());
  for (std::size_t i = 1; i < s.invariants.size(); ++i) {
    if (s.invariants[i] % s.invariants[i - 1] != 0) {
      throw Error(ErrorKind::Internal, "invariant factors are not a divisor chain");
    }
  }

  s.by_index_.assign(n, kIdentity);
  s.coords.assign(n, {});
  std::vector<char> hit(n, 0);
  std::vector<std::size_t> digits(s.invariants.size(), 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rest = idx;
    Element x = kIdentity;
    for (std::size_t i = 0; i < s.invariants.size(); ++i) {
      digits[i] = rest % s.invariants[i];
      rest /= s.invariants[i];
      x = g.mul(x, g.pow(s.generators[i], static_cast<long long>(digits[i])));
    }
    if (hit[x]) throw Error(ErrorKind::Internal, "abelian coordinates are not injective");
    hit[x] = 1;
    s.by_index_[idx] = x;
    s.coords[x] = digits;
  }
  return s;
}

}  // namespace mca
