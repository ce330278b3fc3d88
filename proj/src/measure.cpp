#include "mca/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mca/error.hpp"
#include "mca/parallel.hpp"
#include "words.hpp"

namespace mca {

namespace {

constexpr Weight kWeightMax = ~Weight{0};

Weight checked_mul(Weight a, Weight b, const char* what) {
  if (a != 0 && b > kWeightMax / a) throw Error(ErrorKind::SizeLimit, std::string(what) + " overflows 128 bits");
  return a * b;
}

// Smallest power-of-ten denominator (<= 10^9) representing every entry exactly.
std::uint64_t decimal_denominator(const std::vector<double>& values) {
  for (std::uint64_t d = 1; d <= 1'000'000'000ULL; d *= 10) {
    bool ok = true;
    for (double p : values) {
      const double scaled = p * static_cast<double>(d);
      if (std::fabs(scaled - std::round(scaled)) > 1e-6) {
        ok = false;
        break;
      }
    }
    if (ok) return d;
  }
  throw Error(ErrorKind::InvalidSpec, "probabilities must be decimals with at most 9 fractional digits");
}

std::vector<std::uint64_t> scale(const std::vector<double>& values, std::uint64_t d) {
  std::vector<std::uint64_t> out;
  out.reserve(values.size());
  for (double p : values) {
    if (!(p >= 0.0)) throw Error(ErrorKind::InvalidSpec, "probabilities must be nonnegative");
    out.push_back(static_cast<std::uint64_t>(std::llround(p * static_cast<double>(d))));
  }
  return out;
}

void check_row(const std::vector<std::uint64_t>& row, std::size_t alphabet, std::uint64_t d, const char* what) {
  if (row.size() != alphabet)
    throw Error(ErrorKind::InvalidSpec, std::string(what) + " has " + std::to_string(row.size()) + " entries, expected " +
                                            std::to_string(alphabet));
  Weight sum = 0;
  for (auto w : row) sum += w;
  if (sum != d) throw Error(ErrorKind::InvalidSpec, std::string(what) + " does not sum to 1");
}

double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

std::string to_string(Weight w) {
  if (w == 0) return "0";
  std::string s;
  while (w != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(w % 10)));
    w /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

double to_double(Weight w) {
  const auto hi = static_cast<std::uint64_t>(w >> 64);
  const auto lo = static_cast<std::uint64_t>(w);
  return std::ldexp(static_cast<double>(hi), 64) + static_cast<double>(lo);
}

MeasureSpec MeasureSpec::uniform(std::size_t alphabet) {
  if (alphabet == 0) throw Error(ErrorKind::InvalidSpec, "empty alphabet");
  MeasureSpec s;
  s.kind = Kind::Uniform;
  s.alphabet = alphabet;
  s.denominator = alphabet;
  s.cell.assign(alphabet, 1);
  return s;
}

MeasureSpec MeasureSpec::bernoulli(std::vector<std::uint64_t> weights, std::uint64_t denominator) {
  if (weights.empty() || denominator == 0) throw Error(ErrorKind::InvalidSpec, "empty Bernoulli specification");
  check_row(weights, weights.size(), denominator, "Bernoulli vector");
  MeasureSpec s;
  s.kind = Kind::Bernoulli;
  s.alphabet = weights.size();
  s.denominator = denominator;
  s.cell = std::move(weights);
  return s;
}

MeasureSpec MeasureSpec::bernoulli(const std::vector<double>& probabilities) {
  const auto d = decimal_denominator(probabilities);
  return bernoulli(scale(probabilities, d), d);
}

MeasureSpec MeasureSpec::markov(std::vector<std::uint64_t> initial, std::vector<std::vector<std::uint64_t>> transition,
                                std::uint64_t denominator) {
  const std::size_t n = initial.size();
  if (n == 0 || denominator == 0) throw Error(ErrorKind::InvalidSpec, "empty Markov specification");
  check_row(initial, n, denominator, "initial vector");
  if (transition.size() != n) throw Error(ErrorKind::InvalidSpec, "transition matrix must be square");
  for (const auto& row : transition) check_row(row, n, denominator, "transition row");
  for (std::size_t y = 0; y < n; ++y) {
    Weight flow = 0;
    for (std::size_t x = 0; x < n; ++x) flow += Weight{initial[x]} * transition[x][y];
    if (flow != Weight{initial[y]} * denominator)
      throw Error(ErrorKind::InvalidSpec, "initial vector is not stationary for the transition matrix");
  }
  MeasureSpec s;
  s.kind = Kind::Markov;
  s.alphabet = n;
  s.denominator = denominator;
  s.cell = std::move(initial);
  s.transition = std::move(transition);
  return s;
}

MeasureSpec MeasureSpec::markov(const std::vector<double>& initial, const std::vector<std::vector<double>>& transition) {
  std::vector<double> all = initial;
  for (const auto& row : transition) all.insert(all.end(), row.begin(), row.end());
  const auto d = decimal_denominator(all);
  std::vector<std::vector<std::uint64_t>> rows;
  for (const auto& row : transition) rows.push_back(scale(row, d));
  return markov(scale(initial, d), std::move(rows), d);
}

double MeasureSpec::shift_entropy_bits() const {
  const double d = static_cast<double>(denominator);
  if (kind != Kind::Markov) {
    double h = 0.0;
    for (auto w : cell) h += entropy_term(static_cast<double>(w) / d);
    return h;
  }
  double h = 0.0;
  for (std::size_t x = 0; x < alphabet; ++x) {
    double row = 0.0;
    for (auto w : transition[x]) row += entropy_term(static_cast<double>(w) / d);
    h += static_cast<double>(cell[x]) / d * row;
  }
  return h;
}

Weight MeasureSpec::word_weight(std::span<const Element> word) const {
  Weight w = 1;
  if (kind != Kind::Markov) {
    for (auto x : word) w *= cell[x];
    return w;
  }
  for (std::size_t k = 0; k < word.size(); ++k) w *= k == 0 ? cell[word[0]] : transition[word[k - 1]][word[k]];
  return w;
}

Weight MeasureSpec::word_denominator(std::size_t length) const {
  Weight w = 1;
  for (std::size_t k = 0; k < length; ++k) w = checked_mul(w, denominator, "measure denominator");
  return w;
}

MeasureSpec product_spec(const PseudoFrame& frame, const MeasureSpec& lambda, const MeasureSpec& nu) {
  const std::size_t na = frame.a_group()->order(), nc = frame.c_group()->order();
  if (lambda.kind == MeasureSpec::Kind::Markov || nu.kind == MeasureSpec::Kind::Markov)
    throw Error(ErrorKind::InvalidSpec, "product measures need Bernoulli or uniform factors");
  if (lambda.alphabet != na || nu.alphabet != nc)
    throw Error(ErrorKind::InvalidSpec, "factor alphabets do not match the frame");
  if (lambda.denominator > std::numeric_limits<std::uint64_t>::max() / nu.denominator)
    throw Error(ErrorKind::SizeLimit, "product denominator overflows 64 bits");
  std::vector<std::uint64_t> weights(na * nc);
  for (Element a = 0; a < na; ++a)
    for (Element c = 0; c < nc; ++c) weights[frame.star(a, c)] = lambda.cell[a] * nu.cell[c];
  auto s = MeasureSpec::bernoulli(std::move(weights), lambda.denominator * nu.denominator);
  if (lambda.kind == MeasureSpec::Kind::Uniform && nu.kind == MeasureSpec::Kind::Uniform) s.kind = MeasureSpec::Kind::Uniform;
  return s;
}

WindowMeasure::WindowMeasure(std::size_t alphabet, long long first, std::size_t length, std::vector<Weight> weights,
                             Weight denominator)
    : alphabet_(alphabet), first_(first), length_(length), weights_(std::move(weights)), denominator_(denominator) {
  if (alphabet_ == 0) throw Error(ErrorKind::InvalidSpec, "empty alphabet");
  const auto size = detail::checked_power(alphabet_, length_, std::numeric_limits<std::size_t>::max() / 2, "window");
  if (weights_.size() != size)
    throw Error(ErrorKind::InvalidSpec, "window measure needs " + std::to_string(size) + " weights, got " +
                                            std::to_string(weights_.size()));
  if (denominator_ == 0) throw Error(ErrorKind::InvalidSpec, "zero denominator");
  Weight sum = 0;
  for (auto w : weights_) {
    if (w > kWeightMax - sum) throw Error(ErrorKind::InvalidSpec, "weights overflow");
    sum += w;
  }
  if (sum != denominator_) throw Error(ErrorKind::InvalidSpec, "window weights do not sum to the denominator");
}

WindowMeasure WindowMeasure::from_spec(const MeasureSpec& spec, long long first, std::size_t length, std::size_t cap) {
  const std::size_t n = spec.alphabet;
  const auto size = detail::checked_power(n, length, cap, "window measure size");
  const Weight denominator = spec.word_denominator(length);
  std::vector<Weight> weights(size);
  weights[0] = 1;
  // Extend one cell at a time; the new cell is the most significant digit.
  std::size_t filled = 1, prev_place = 0;
  for (std::size_t k = 0; k < length; ++k) {
    for (std::size_t x = n; x-- > 0;) {
      for (std::size_t p = 0; p < filled; ++p) {
        Weight factor;
        if (spec.kind != MeasureSpec::Kind::Markov)
          factor = spec.cell[x];
        else if (k == 0)
          factor = spec.cell[x];
        else
          factor = spec.transition[p / prev_place][x];
        weights[p + filled * x] = weights[p] * factor;
      }
    }
    prev_place = filled;
    filled *= n;
  }
  return WindowMeasure(n, first, length, std::move(weights), denominator);
}

WindowMeasure WindowMeasure::point_mass(std::size_t alphabet, long long first, std::span<const Element> word) {
  const auto size = detail::checked_power(alphabet, word.size(), std::numeric_limits<std::size_t>::max() / 2, "window");
  std::vector<Weight> weights(size, 0);
  weights[detail::rank_word(word, alphabet)] = 1;
  return WindowMeasure(alphabet, first, word.size(), std::move(weights), 1);
}

WindowMeasure WindowMeasure::reduced() const {
  Weight g = denominator_;
  for (auto w : weights_) {
    Weight a = w;
    while (a != 0) {
      const Weight r = g % a;
      g = a;
      a = r;
    }
    if (g == 1) return *this;
  }
  std::vector<Weight> weights(weights_.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = weights_[i] / g;
  return WindowMeasure(alphabet_, first_, length_, std::move(weights), denominator_ / g);
}

bool operator==(const WindowMeasure& a, const WindowMeasure& b) {
  if (a.alphabet_ != b.alphabet_ || a.first_ != b.first_ || a.length_ != b.length_) return false;
  if (a.denominator_ == b.denominator_) return a.weights_ == b.weights_;
  const auto ra = a.reduced(), rb = b.reduced();
  return ra.denominator_ == rb.denominator_ && ra.weights_ == rb.weights_;
}

WindowMeasure WindowMeasure::marginal(long long first, std::size_t length) const {
  if (first < first_ || first + static_cast<long long>(length) > end())
    throw Error(ErrorKind::WindowLength, "marginal window lies outside the measure's window");
  const auto skip = detail::checked_power(alphabet_, static_cast<std::size_t>(first - first_), weights_.size(), "marginal");
  const auto size = detail::checked_power(alphabet_, length, weights_.size(), "marginal");
  std::vector<Weight> out(size, 0);
  for (std::size_t idx = 0; idx < weights_.size(); ++idx) out[(idx / skip) % size] += weights_[idx];
  return WindowMeasure(alphabet_, first, length, std::move(out), denominator_);
}

WindowMeasure product_measure(const PseudoFrame& frame, const WindowMeasure& lambda, const WindowMeasure& nu) {
  const std::size_t na = frame.a_group()->order(), nc = frame.c_group()->order(), nb = frame.b()->order();
  if (lambda.alphabet() != na || nu.alphabet() != nc)
    throw Error(ErrorKind::InvalidSpec, "factor alphabets do not match the frame");
  if (lambda.first() != nu.first() || lambda.length() != nu.length())
    throw Error(ErrorKind::WindowLength, "product factors must share a window");
  const Weight denominator = checked_mul(lambda.denominator(), nu.denominator(), "product denominator");
  const std::size_t len = lambda.length();
  const auto size = detail::checked_power(nb, len, std::numeric_limits<std::size_t>::max() / 2, "window");
  std::vector<Weight> weights(size);
  std::vector<Element> b(len, 0);
  for (std::size_t idx = 0; idx < size; ++idx, detail::next_word(b, nb)) {
    std::size_t ia = 0, ic = 0;
    for (std::size_t k = len; k-- > 0;) {
      const auto [a, c] = frame.unstar(b[k]);
      ia = ia * na + a;
      ic = ic * nc + c;
    }
    weights[idx] = lambda.weights()[ia] * nu.weights()[ic];
  }
  return WindowMeasure(nb, lambda.first(), len, std::move(weights), denominator);
}

namespace {

// cell_table(k) gives the local map producing output cell k of the image.
template <class CellTable>
WindowMeasure push_impl(const LocalTable& shape, CellTable&& cell_table, const WindowMeasure& m, std::size_t workers) {
  const std::size_t n = m.alphabet(), width = shape.width();
  if (shape.group()->order() != n) throw Error(ErrorKind::InvalidSpec, "measure alphabet does not match the rule's group");
  if (m.length() + 1 < width)
    throw Error(ErrorKind::WindowLength, "window of length " + std::to_string(m.length()) +
                                             " is shorter than the neighborhood minus one");
  const std::size_t out_len = m.length() + 1 - width;
  const auto out_size = detail::checked_power(n, out_len, m.weights().size(), "image window");
  std::vector<const LocalTable*> tables(out_len);
  for (std::size_t k = 0; k < out_len; ++k) tables[k] = &cell_table(k);

  const std::size_t in_size = m.weights().size();
  if (workers == 0) workers = default_workers();
  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, in_size / 4096 + 1));
  std::vector<std::vector<Weight>> partial(chunks);
  parallel_for(chunks, chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t ch = cb; ch < ce; ++ch) {
      auto& acc = partial[ch];
      acc.assign(out_size, 0);
      const std::size_t begin = in_size * ch / chunks, end = in_size * (ch + 1) / chunks;
      auto word = detail::unrank(begin, n, m.length());
      for (std::size_t idx = begin; idx < end; ++idx, detail::next_word(word, n)) {
        const Weight w = m.weights()[idx];
        if (w == 0) continue;
        std::size_t out = 0;
        for (std::size_t k = out_len; k-- > 0;) out = out * n + (*tables[k])(word.data() + k);
        acc[out] += w;
      }
    }
  });
  std::vector<Weight> out(out_size, 0);
  for (const auto& acc : partial)
    for (std::size_t i = 0; i < out_size; ++i) out[i] += acc[i];
  return WindowMeasure(n, m.first() - shape.v_lo(), out_len, std::move(out), m.denominator());
}

}  // namespace

WindowMeasure push_forward(const LocalTable& table, const WindowMeasure& m, std::size_t workers) {
  return push_impl(table, [&](std::size_t) -> const LocalTable& { return table; }, m, workers);
}

WindowMeasure push_forward(const McaRule& rule, const WindowMeasure& m, std::size_t workers) {
  return push_forward(LocalTable::of(rule), m, workers);
}

WindowMeasure push_forward(const Nhca& nhca, const WindowMeasure& m, std::size_t workers) {
  const long long out_first = m.first() - nhca.shape().v_lo();
  return push_impl(
      nhca.shape(), [&](std::size_t k) -> const LocalTable& { return nhca.at(out_first + static_cast<long long>(k)); }, m,
      workers);
}

}  // namespace mca
