#include "spec_io.hpp"

#include <algorithm>

#include "mca/error.hpp"

namespace mca::lab {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidSpec, "at " + path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

template <class T>
T as(const json& j, const std::string& path, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(path, std::string("expected ") + what);
  }
}

std::size_t positive(const json& j, const std::string& path) {
  const auto v = as<long long>(j, path, "an integer");
  if (v <= 0) fail(path, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> doubles(const json& j, const std::string& path) {
  return as<std::vector<double>>(j, path, "an array of numbers");
}

// Wraps library errors raised while building an object with the field path.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidSpec) throw;
    throw Error(e.kind(), std::string(e.what()) + " (at " + path + ")");
  }
}

}  // namespace

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::InvalidSpec,
                "config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

GroupPtr parse_group(const json& j, const std::string& path) {
  const auto kind = as<std::string>(field(j, "kind", path), path + "/kind", "a string");
  return at_path(path, [&]() -> GroupPtr {
    if (kind == "cyclic") return make_cyclic(positive(field(j, "n", path), path + "/n"));
    if (kind == "direct_sum") return make_direct_sum(as<std::vector<std::size_t>>(field(j, "orders", path), path + "/orders", "an array of orders"));
    if (kind == "quaternion") return make_quaternion();
    if (kind == "direct_product") {
      const auto& fs = field(j, "factors", path);
      if (!fs.is_array() || fs.size() != 2) fail(path + "/factors", "expected two group specs");
      return make_direct_product(parse_group(fs[0], path + "/factors/0"), parse_group(fs[1], path + "/factors/1"));
    }
    if (kind == "semidirect") {
      if (j.contains("modulus")) {
        return make_modular_semidirect(positive(field(j, "modulus", path), path + "/modulus"),
                                       positive(field(j, "multiplier", path), path + "/multiplier"),
                                       positive(field(j, "acting_order", path), path + "/acting_order"));
      }
      auto normal = parse_group(field(j, "normal", path), path + "/normal");
      auto acting = parse_group(field(j, "acting", path), path + "/acting");
      const auto& act = field(j, "action", path);
      if (!act.is_array() || act.size() != acting->order()) fail(path + "/action", "expected one image array per acting element");
      std::vector<GroupMap> maps;
      for (std::size_t c = 0; c < act.size(); ++c) {
        const auto p = path + "/action/" + std::to_string(c);
        if (!act[c].is_array() || act[c].size() != normal->order()) fail(p, "expected an image for every element");
        std::vector<Element> images;
        for (std::size_t x = 0; x < act[c].size(); ++x) images.push_back(parse_element(normal, act[c][x], p + "/" + std::to_string(x)));
        maps.emplace_back(normal, normal, std::move(images));
      }
      return make_semidirect(normal, maps, acting);
    }
    if (kind == "table") {
      const auto& t = field(j, "table", path);
      auto table = as<std::vector<std::vector<Element>>>(t, path + "/table", "a square array of indices");
      std::vector<std::string> labels;
      if (j.contains("labels")) labels = as<std::vector<std::string>>(j["labels"], path + "/labels", "an array of strings");
      return FiniteGroup::from_table(table, labels);
    }
    fail(path + "/kind", "unknown group kind \"" + kind + "\"");
  });
}

Element parse_element(const GroupPtr& g, const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto label = j.get<std::string>();
    if (auto x = g->find_label(label)) return *x;
    fail(path, "no element labelled \"" + label + "\"");
  }
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0 || static_cast<std::size_t>(v) >= g->order()) fail(path, "element index out of range");
    return static_cast<Element>(v);
  }
  fail(path, "expected an element label or index");
}

Subgroup parse_subgroup(const GroupPtr& g, const json& j, const std::string& path) {
  return at_path(path, [&]() -> Subgroup {
    if (j.is_string()) {
      const auto name = j.get<std::string>();
      if (name == "center") return center(g);
      if (name == "commutator") return commutator_subgroup(g);
      if (name == "trivial") return Subgroup::trivial(g);
      if (name == "whole") return Subgroup::whole(g);
      fail(path, "unknown subgroup \"" + name + "\"");
    }
    auto elements = [&](const json& arr, const std::string& p) {
      if (!arr.is_array()) fail(p, "expected an array of elements");
      std::vector<Element> xs;
      for (std::size_t k = 0; k < arr.size(); ++k) xs.push_back(parse_element(g, arr[k], p + "/" + std::to_string(k)));
      return xs;
    };
    if (j.is_object()) {
      const auto gens = elements(field(j, "generated", path), path + "/generated");
      return Subgroup::generated(g, gens);
    }
    return Subgroup(g, elements(j, path));
  });
}

PseudoFramePtr parse_frame(const GroupPtr& g, const json& j, const std::string& path) {
  const auto a = parse_subgroup(g, field(j, "subgroup", path), path + "/subgroup");
  return at_path(path, [&]() -> PseudoFramePtr {
    if (!j.contains("section")) return make_frame(g, a);
    const auto& sec = j["section"];
    if (!sec.is_array()) fail(path + "/section", "expected an array of elements");
    std::vector<Element> section;
    for (std::size_t k = 0; k < sec.size(); ++k) section.push_back(parse_element(g, sec[k], path + "/section/" + std::to_string(k)));
    return make_frame(g, a, std::move(section));
  });
}

GroupMap parse_endo(const GroupPtr& g, const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "identity") return GroupMap::identity(g);
    fail(path, "expected \"identity\" or an object");
  }
  if (!j.is_object()) fail(path, "expected an endomorphism spec");
  GroupMap map = [&] {
    if (j.contains("conj")) return GroupMap::conjugation(g, parse_element(g, j["conj"], path + "/conj"));
    if (j.contains("power")) return GroupMap::power(g, as<long long>(j["power"], path + "/power", "an integer"));
    if (j.contains("images")) {
      const auto& im = j["images"];
      if (!im.is_array() || im.size() != g->order()) fail(path + "/images", "expected an image for every element");
      std::vector<Element> images;
      for (std::size_t x = 0; x < im.size(); ++x) images.push_back(parse_element(g, im[x], path + "/images/" + std::to_string(x)));
      return GroupMap(g, g, std::move(images));
    }
    fail(path, "expected one of \"conj\", \"power\", \"images\"");
  }();
  if (!map.is_homomorphism()) fail(path, "map is not an endomorphism");
  return map;
}

McaRule parse_rule(const GroupPtr& g, const json& j, const std::string& path) {
  const auto nb = as<std::vector<int>>(field(j, "neighborhood", path), path + "/neighborhood", "[v_lo, v_hi]");
  if (nb.size() != 2) fail(path + "/neighborhood", "expected [v_lo, v_hi]");
  const Element bias = j.contains("bias") ? parse_element(g, j["bias"], path + "/bias") : kIdentity;
  const bool one_sided = j.contains("one_sided") && as<bool>(j["one_sided"], path + "/one_sided", "a boolean");
  const auto& fs = field(j, "factors", path);
  if (!fs.is_array()) fail(path + "/factors", "expected an array");
  std::vector<Factor> factors;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto p = path + "/factors/" + std::to_string(k);
    const int pos = as<int>(field(fs[k], "pos", p), p + "/pos", "an integer");
    const auto coeff = fs[k].contains("coeff") ? parse_endo(g, fs[k]["coeff"], p + "/coeff") : GroupMap::identity(g);
    const long long times = fs[k].contains("repeat") ? static_cast<long long>(positive(fs[k]["repeat"], p + "/repeat")) : 1;
    for (long long t = 0; t < times; ++t) factors.push_back(Factor{pos, coeff});
  }
  return at_path(path, [&] { return McaRule(g, nb[0], nb[1], std::move(factors), bias, one_sided); });
}

MeasureSpec parse_measure(const json& j, std::size_t alphabet, const PseudoFramePtr& frame, const std::string& path) {
  const auto kind = as<std::string>(field(j, "kind", path), path + "/kind", "a string");
  const auto spec = at_path(path, [&]() -> MeasureSpec {
    if (kind == "uniform") return MeasureSpec::uniform(alphabet);
    if (kind == "bernoulli") {
      if (j.contains("weights")) {
        return MeasureSpec::bernoulli(as<std::vector<std::uint64_t>>(j["weights"], path + "/weights", "integer weights"),
                                      as<std::uint64_t>(field(j, "denominator", path), path + "/denominator", "an integer"));
      }
      return MeasureSpec::bernoulli(doubles(field(j, "p", path), path + "/p"));
    }
    if (kind == "markov") {
      return MeasureSpec::markov(doubles(field(j, "initial", path), path + "/initial"),
                                 as<std::vector<std::vector<double>>>(field(j, "transition", path), path + "/transition",
                                                                      "a matrix of numbers"));
    }
    if (kind == "product") {
      if (!frame) fail(path, "a product measure needs a frame");
      const auto a = parse_measure(field(j, "a", path), frame->a_group()->order(), nullptr, path + "/a");
      const auto c = parse_measure(field(j, "c", path), frame->c_group()->order(), nullptr, path + "/c");
      return product_spec(*frame, a, c);
    }
    fail(path + "/kind", "unknown measure kind \"" + kind + "\"");
  });
  if (spec.alphabet != alphabet) fail(path, "measure has " + std::to_string(spec.alphabet) + " symbols, expected " + std::to_string(alphabet));
  return spec;
}

Character parse_character(const AbelianStructure& s, const json& j, const std::string& path) {
  const auto& cells = field(j, "cells", path);
  if (!cells.is_object()) fail(path + "/cells", "expected an object mapping cells to coefficient tuples");
  std::map<long long, Character::Tuple> support;
  for (const auto& [key, value] : cells.items()) {
    const auto p = path + "/cells/" + key;
    long long cell = 0;
    try {
      std::size_t used = 0;
      cell = std::stoll(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      fail(p, "cell keys must be integers");
    }
    auto coeffs = as<Character::Tuple>(value, p, "an array of coefficients");
    if (coeffs.size() != s.invariants.size())
      fail(p, "expected " + std::to_string(s.invariants.size()) + " coefficients (one per invariant)");
    support[cell] = std::move(coeffs);
  }
  const std::size_t phase = j.contains("phase") ? as<std::size_t>(j["phase"], path + "/phase", "an integer") : 0;
  return Character(s.invariants, std::move(support), phase);
}

json labels_of(const FiniteGroup& g, std::span<const Element> xs) {
  json out = json::array();
  for (Element x : xs) out.push_back(g.label(x));
  return out;
}

json group_to_json(const FiniteGroup& g) {
  return json{{"order", g.order()}, {"labels", g.labels()}, {"table", g.table_rows()}};
}

json rule_to_json(const McaRule& rule) {
  const auto& g = *rule.group();
  json factors = json::array();
  for (const auto& f : rule.factors()) {
    json coeff;
    if (f.coeff == GroupMap::identity(rule.group()))
      coeff = "identity";
    else
      coeff = json{{"images", labels_of(g, f.coeff.images())}};
    factors.push_back(json{{"pos", f.pos}, {"coeff", coeff}});
  }
  return json{{"neighborhood", {rule.v_lo(), rule.v_hi()}},
              {"bias", g.label(rule.bias())},
              {"one_sided", rule.one_sided()},
              {"factors", factors}};
}

}  // namespace mca::lab
