#include "mca/rule.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "mca/error.hpp"
#include "words.hpp"

namespace mca {

namespace {

using detail::checked_power;
using detail::next_word;

std::string window_text(const FiniteGroup& g, const std::vector<Element>& w) {
  std::string s = "(";
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) s += ",";
    s += g.label(w[k]);
  }
  return s + ")";
}

}  // namespace

std::size_t group_exponent(const FiniteGroup& group) {
  std::size_t e = 1;
  for (std::size_t x = 0; x < group.order(); ++x) e = std::lcm(e, group.element_order(static_cast<Element>(x)));
  return e;
}

McaRule::McaRule(GroupPtr group, int v_lo, int v_hi, std::vector<Factor> factors, Element bias, bool one_sided)
    : group_(std::move(group)), v_lo_(v_lo), v_hi_(v_hi), factors_(std::move(factors)), bias_(bias),
      one_sided_(one_sided) {
  if (!group_) throw Error(ErrorKind::InvalidSpec, "rule needs a group");
  if (v_lo_ > v_hi_) throw Error(ErrorKind::InvalidSpec, "empty neighborhood");
  if (one_sided_ && v_lo_ < 0) throw Error(ErrorKind::InvalidSpec, "one-sided rule with a negative position");
  if (bias_ >= group_->order()) throw Error(ErrorKind::InvalidSpec, "bias is not an element");
  offsets_.reserve(factors_.size());
  for (const auto& f : factors_) {
    if (f.pos < v_lo_ || f.pos > v_hi_) {
      throw Error(ErrorKind::InvalidSpec, "factor position " + std::to_string(f.pos) + " outside the neighborhood");
    }
    if (!f.coeff.source()->same_table(*group_) || !f.coeff.target()->same_table(*group_)) {
      throw Error(ErrorKind::InvalidSpec, "coefficient is not a map of the rule's group");
    }
    if (!f.coeff.is_homomorphism()) {
      throw Error(ErrorKind::NotHomomorphism, "coefficient at position " + std::to_string(f.pos) + " is not an endomorphism");
    }
    offsets_.push_back(static_cast<std::size_t>(f.pos - v_lo_));
  }
}

McaRule McaRule::identity(GroupPtr group, bool one_sided) {
  auto id = GroupMap::identity(group);
  return McaRule(std::move(group), 0, 0, {Factor{0, std::move(id)}}, kIdentity, one_sided);
}

McaRule McaRule::power_form(GroupPtr group, int v_lo, int v_hi, const std::vector<std::pair<int, long long>>& powers,
                            Element bias, bool one_sided) {
  const auto exp = static_cast<long long>(group_exponent(*group));
  const auto id = GroupMap::identity(group);
  std::vector<Factor> factors;
  for (const auto& [pos, k] : powers) {
    const long long r = ((k % exp) + exp) % exp;
    for (long long i = 0; i < r; ++i) factors.push_back(Factor{pos, id});
  }
  return McaRule(std::move(group), v_lo, v_hi, std::move(factors), bias, one_sided);
}

Element McaRule::eval_unchecked(const Element* window) const noexcept {
  const auto& g = *group_;
  Element acc = bias_;
  for (std::size_t i = 0; i < factors_.size(); ++i) acc = g.mul(acc, factors_[i].coeff(window[offsets_[i]]));
  return acc;
}

Element McaRule::eval(std::span<const Element> window) const {
  if (window.size() != width()) {
    throw Error(ErrorKind::WindowLength, "window of length " + std::to_string(window.size()) + ", neighborhood needs " +
                                             std::to_string(width()));
  }
  for (Element x : window) {
    if (x >= group_->order()) throw Error(ErrorKind::InvalidSpec, "window entry is not an element");
  }
  return eval_unchecked(window.data());
}

std::optional<std::vector<long long>> McaRule::exponent_sums() const {
  const std::size_t exp = group_exponent(*group_);
  std::vector<std::vector<Element>> powers(exp);
  for (std::size_t k = 0; k < exp; ++k) powers[k] = GroupMap::power(group_, static_cast<long long>(k)).images();
  std::vector<long long> sums(width(), 0);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto it = std::find(powers.begin(), powers.end(), factors_[i].coeff.images());
    if (it == powers.end()) return std::nullopt;
    sums[offsets_[i]] += it - powers.begin();
  }
  return sums;
}

Element eval_local(const McaRule& rule, std::span<const Element> window) { return rule.eval(window); }

LocalTable::LocalTable(GroupPtr group, int v_lo, int v_hi, std::vector<Element> values, bool one_sided)
    : group_(std::move(group)), v_lo_(v_lo), v_hi_(v_hi), values_(std::move(values)), base_(group_->order()),
      one_sided_(one_sided) {
  if (v_lo_ > v_hi_) throw Error(ErrorKind::InvalidSpec, "empty neighborhood");
  std::size_t expect = 1;
  for (std::size_t k = 0; k < width(); ++k) expect *= base_;
  if (values_.size() != expect) throw Error(ErrorKind::InvalidSpec, "local table has the wrong size");
  for (Element v : values_) {
    if (v >= base_) throw Error(ErrorKind::InvalidSpec, "local table value is not an element");
  }
}

LocalTable LocalTable::of(const McaRule& rule, std::size_t cap) {
  const std::size_t n = rule.group()->order();
  const std::size_t total = checked_power(n, rule.width(), cap, "|B|^width");
  std::vector<Element> values(total);
  std::vector<Element> w(rule.width(), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    values[idx] = rule.eval_unchecked(w.data());
    next_word(w, n);
  }
  return LocalTable(rule.group(), rule.v_lo(), rule.v_hi(), std::move(values), rule.one_sided());
}

Element LocalTable::eval(std::span<const Element> window) const {
  if (window.size() != width()) {
    throw Error(ErrorKind::WindowLength, "window of length " + std::to_string(window.size()) + ", neighborhood needs " +
                                             std::to_string(width()));
  }
  return (*this)(window.data());
}

bool LocalTable::depends_on(int v) const {
  if (v < v_lo_ || v > v_hi_) return false;
  std::size_t stride = 1;
  for (int k = v_lo_; k < v; ++k) stride *= base_;
  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    if ((idx / stride) % base_ != 0) continue;
    for (std::size_t x = 1; x < base_; ++x) {
      if (values_[idx + x * stride] != values_[idx]) return true;
    }
  }
  return false;
}

LocalTable trim_neighborhood(const LocalTable& table) {
  int lo = table.v_lo(), hi = table.v_hi();
  while (lo < hi && lo != 0 && !table.depends_on(lo)) ++lo;
  while (hi > lo && hi != 0 && !table.depends_on(hi)) --hi;
  if (lo == table.v_lo() && hi == table.v_hi()) return table;
  const std::size_t n = table.group()->order();
  std::size_t skip = 1;
  for (int k = table.v_lo(); k < lo; ++k) skip *= n;
  std::size_t total = 1;
  for (int k = lo; k <= hi; ++k) total *= n;
  std::vector<Element> values(total);
  for (std::size_t idx = 0; idx < total; ++idx) values[idx] = table.at_index(idx * skip);
  return LocalTable(table.group(), lo, hi, std::move(values), table.one_sided());
}

Nhca::Nhca(std::vector<std::shared_ptr<const LocalTable>> cells, long long first)
    : cells_(std::move(cells)), first_(first) {
  if (cells_.empty()) throw Error(ErrorKind::InvalidSpec, "nonhomogeneous CA without cells");
  const auto& s = *cells_.front();
  for (const auto& c : cells_) {
    if (!c || c->v_lo() != s.v_lo() || c->v_hi() != s.v_hi() || c->one_sided() != s.one_sided() ||
        !c->group()->same_table(*s.group())) {
      throw Error(ErrorKind::InvalidSpec, "cell maps must share group and neighborhood");
    }
  }
}

Nhca Nhca::homogeneous(std::shared_ptr<const LocalTable> table, long long first, std::size_t count) {
  return Nhca(std::vector<std::shared_ptr<const LocalTable>>(count, std::move(table)), first);
}

const LocalTable& Nhca::at(long long m) const {
  if (m < first_ || m >= first_ + static_cast<long long>(cells_.size())) {
    throw Error(ErrorKind::InvalidSpec, "no local map at cell " + std::to_string(m));
  }
  return *cells_[static_cast<std::size_t>(m - first_)];
}

namespace {

template <class Eval>
Config window_apply(const GroupPtr& group, int v_lo, int v_hi, const Config& config, Eval&& eval) {
  const std::size_t width = static_cast<std::size_t>(v_hi - v_lo + 1);
  if (config.word.size() < width) {
    throw Error(ErrorKind::WindowLength, "configuration of length " + std::to_string(config.word.size()) +
                                             " is shorter than the neighborhood");
  }
  Config out{group, config.offset - v_lo, std::vector<Element>(config.word.size() - width + 1)};
  for (std::size_t m = 0; m < out.word.size(); ++m) out.word[m] = eval(out.offset + static_cast<long long>(m), &config.word[m]);
  return out;
}

template <class Eval>
Config periodic_apply(const GroupPtr& group, int v_lo, int v_hi, const Config& config, Eval&& eval) {
  const std::size_t width = static_cast<std::size_t>(v_hi - v_lo + 1);
  const std::size_t n = config.word.size();
  if (n < width) throw Error(ErrorKind::WindowLength, "cycle is shorter than the neighborhood");
  Config out{group, config.offset, std::vector<Element>(n)};
  std::vector<Element> w(width);
  const long long nn = static_cast<long long>(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < width; ++k) {
      const long long idx = ((static_cast<long long>(m) + v_lo + static_cast<long long>(k)) % nn + nn) % nn;
      w[k] = config.word[static_cast<std::size_t>(idx)];
    }
    out.word[m] = eval(w.data());
  }
  return out;
}

}  // namespace

Config apply_window(const McaRule& rule, const Config& config) {
  return window_apply(rule.group(), rule.v_lo(), rule.v_hi(), config,
                      [&](long long, const Element* w) { return rule.eval_unchecked(w); });
}

Config apply_window(const LocalTable& table, const Config& config) {
  return window_apply(table.group(), table.v_lo(), table.v_hi(), config,
                      [&](long long, const Element* w) { return table(w); });
}

Config apply_window(const Nhca& nhca, const Config& config) {
  const auto& s = nhca.shape();
  return window_apply(s.group(), s.v_lo(), s.v_hi(), config,
                      [&](long long m, const Element* w) { return nhca.at(m)(w); });
}

Config apply_periodic(const McaRule& rule, const Config& config) {
  return periodic_apply(rule.group(), rule.v_lo(), rule.v_hi(), config,
                        [&](const Element* w) { return rule.eval_unchecked(w); });
}

Config apply_periodic(const LocalTable& table, const Config& config) {
  return periodic_apply(table.group(), table.v_lo(), table.v_hi(), config,
                        [&](const Element* w) { return table(w); });
}

HomomorphismCheck check_homomorphic_local(const McaRule& rule, std::size_t cap) {
  const LocalTable table = LocalTable::of(rule, cap);
  const auto& g = *rule.group();
  const std::size_t n = g.order(), width = rule.width();
  HomomorphismCheck r;
  std::vector<Element> e(width, kIdentity);
  if (table(e.data()) != kIdentity) {
    r.x = r.y = e;
    return r;
  }
  const auto gens = generating_set(rule.group());
  std::vector<Element> x(width, 0), xs(width);
  for (std::size_t idx = 0; idx < table.values().size(); ++idx) {
    const Element gx = table.at_index(idx);
    for (std::size_t p = 0; p < width; ++p) {
      for (Element t : gens) {
        xs = x;
        xs[p] = g.mul(x[p], t);
        std::vector<Element> s(width, kIdentity);
        s[p] = t;
        if (table(xs.data()) != g.mul(gx, table(s.data()))) {
          r.x = x;
          r.y = std::move(s);
          return r;
        }
      }
    }
    next_word(x, n);
  }
  r.holds = true;
  return r;
}

bool is_homomorphic_local(const McaRule& rule, std::size_t cap) { return check_homomorphic_local(rule, cap).holds; }

std::vector<GroupMap> extract_eca_coefficients(const McaRule& rule, std::size_t cap) {
  const auto check = check_homomorphic_local(rule, cap);
  const auto& g = *rule.group();
  if (!check.holds) {
    throw Error(ErrorKind::NotHomomorphism, "local map fails at x=" + window_text(g, check.x) + ", y=" +
                                                window_text(g, check.y));
  }
  const LocalTable table = LocalTable::of(rule, cap);
  const std::size_t n = g.order(), width = rule.width();
  std::vector<GroupMap> coeffs;
  coeffs.reserve(width);
  for (std::size_t v = 0; v < width; ++v) {
    std::vector<Element> images(n), w(width, kIdentity);
    for (std::size_t b = 0; b < n; ++b) {
      w[v] = static_cast<Element>(b);
      images[b] = table(w.data());
    }
    coeffs.emplace_back(rule.group(), rule.group(), std::move(images));
    if (!coeffs.back().is_homomorphism()) throw Error(ErrorKind::Internal, "coefficient is not an endomorphism");
  }
  for (std::size_t v = 0; v < width; ++v) {
    for (std::size_t u = v + 1; u < width; ++u) {
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
          const Element a = coeffs[v](static_cast<Element>(x)), b = coeffs[u](static_cast<Element>(y));
          if (g.mul(a, b) != g.mul(b, a)) throw Error(ErrorKind::Internal, "coefficient images do not commute");
        }
      }
    }
  }
  std::vector<Element> w(width, 0);
  for (std::size_t idx = 0; idx < table.values().size(); ++idx) {
    Element acc = kIdentity;
    for (std::size_t v = 0; v < width; ++v) acc = g.mul(acc, coeffs[v](w[v]));
    if (acc != table.at_index(idx)) throw Error(ErrorKind::Internal, "coefficients do not rebuild the local map");
    next_word(w, n);
  }
  return coeffs;
}

namespace {

// Whether digit `digit` of the table index is a bijective coordinate for
// every assignment of the remaining digits.
bool bijective_in(const LocalTable& table, std::size_t digit) {
  const std::size_t n = table.group()->order();
  std::size_t stride = 1;
  for (std::size_t k = 0; k < digit; ++k) stride *= n;
  std::vector<std::size_t> seen(n, 0);
  std::size_t stamp = 0;
  for (std::size_t idx = 0; idx < table.values().size(); ++idx) {
    if ((idx / stride) % n != 0) continue;
    ++stamp;
    for (std::size_t x = 0; x < n; ++x) {
      const Element v = table.at_index(idx + x * stride);
      if (seen[v] == stamp) return false;
      seen[v] = stamp;
    }
  }
  return true;
}

}  // namespace

Permutativity permutativity(const LocalTable& table) {
  Permutativity p;
  p.one_sided = table.one_sided();
  p.V = table.V();
  p.left = table.L() > 0 && bijective_in(table, 0);
  p.right = table.R() > 0 && bijective_in(table, table.width() - 1);
  return p;
}

Permutativity permutativity(const McaRule& rule, std::size_t cap) { return permutativity(LocalTable::of(rule, cap)); }

Permutativity permutativity(const Nhca& nhca) {
  Permutativity p = permutativity(nhca.shape());
  std::map<const LocalTable*, Permutativity> seen;
  for (long long m = nhca.first(); m < nhca.first() + static_cast<long long>(nhca.size()); ++m) {
    const LocalTable* t = &nhca.at(m);
    auto it = seen.find(t);
    if (it == seen.end()) it = seen.emplace(t, permutativity(*t)).first;
    p.left = p.left && it->second.left;
    p.right = p.right && it->second.right;
  }
  return p;
}

Config filling_solve(const Nhca& fibres, const Config& target, const Config& seed) {
  const auto& shape = fibres.shape();
  const auto group = shape.group();
  const std::size_t n = group->order();
  const int L = shape.L(), R = shape.R();
  const long long J = target.offset, K = target.end();
  if (J >= K) throw Error(ErrorKind::WindowLength, "empty target");
  if (seed.word.size() != static_cast<std::size_t>(L + R)) {
    throw Error(ErrorKind::WindowLength, "seed must cover exactly L + R = " + std::to_string(L + R) + " cells");
  }
  const long long j = seed.offset + L;
  if (j < J || j >= K) throw Error(ErrorKind::InvalidSpec, "seed window is not anchored inside the target");
  if (fibres.first() > J || fibres.first() + static_cast<long long>(fibres.size()) < K) {
    throw Error(ErrorKind::InvalidSpec, "nonhomogeneous CA does not cover the target cells");
  }

  Config a{group, J - L, std::vector<Element>(static_cast<std::size_t>(K - J + L + R), 0)};
  auto cell = [&](long long x) -> Element& { return a.word[static_cast<std::size_t>(x - a.offset)]; };
  for (std::size_t k = 0; k < seed.word.size(); ++k) cell(seed.offset + static_cast<long long>(k)) = seed.word[k];

  std::map<const LocalTable*, Permutativity> flags;
  auto flag_of = [&](const LocalTable& t) {
    auto it = flags.find(&t);
    if (it == flags.end()) it = flags.emplace(&t, permutativity(t)).first;
    return it->second;
  };
  const std::size_t width = shape.width();
  std::vector<Element> w(width);
  auto solve_at = [&](long long m, std::size_t unknown) {
    const LocalTable& t = fibres.at(m);
    const long long base = m + shape.v_lo();
    for (std::size_t k = 0; k < width; ++k) w[k] = cell(base + static_cast<long long>(k));
    const Element d = target.word[static_cast<std::size_t>(m - J)];
    for (std::size_t x = 0; x < n; ++x) {
      w[unknown] = static_cast<Element>(x);
      if (t(w.data()) == d) {
        cell(base + static_cast<long long>(unknown)) = static_cast<Element>(x);
        return;
      }
    }
    throw Error(ErrorKind::Internal, "permutative coordinate has no preimage at cell " + std::to_string(m));
  };

  for (long long m = j; m < K; ++m) {
    const auto f = flag_of(fibres.at(m));
    if (!f.right) throw Error(ErrorKind::NotPermutative, "local map at cell " + std::to_string(m) + " is not right-permutative");
    solve_at(m, width - 1);
  }
  for (long long m = j - 1; m >= J; --m) {
    const auto f = flag_of(fibres.at(m));
    if (!f.left) throw Error(ErrorKind::NotPermutative, "local map at cell " + std::to_string(m) + " is not left-permutative");
    solve_at(m, 0);
  }
  for (long long m = J; m < K; ++m) {
    if (fibres.at(m)(&cell(m + shape.v_lo())) != target.word[static_cast<std::size_t>(m - J)]) {
      throw Error(ErrorKind::Internal, "filled configuration misses the target at cell " + std::to_string(m));
    }
  }
  return a;
}

}  // namespace mca
