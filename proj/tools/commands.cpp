#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mca/entropy.hpp"
#include "mca/error.hpp"
#include "mca/parallel.hpp"

namespace mca::lab {

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<Element> unrank(std::size_t idx, std::size_t n, std::size_t len) {
  std::vector<Element> w(len);
  for (auto& x : w) {
    x = static_cast<Element>(idx % n);
    idx /= n;
  }
  return w;
}

std::string word_text(const FiniteGroup& g, std::span<const Element> w) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? " " : "") + g.label(w[k]);
  return s;
}

// RFC 4180 quoting for fields that carry labels.
std::string csv_field(const std::string& x) {
  if (x.find_first_of(",\"\n") == std::string::npos) return x;
  std::string out = "\"";
  for (char ch : x) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::string set_text(const FiniteGroup& g, const Subgroup& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.members().size(); ++k) out += (k ? ", " : "") + g.label(s.members()[k]);
  return out + "}";
}

struct Run {
  const json& config;
  fs::path out;
  std::size_t workers = 0;
  std::uint64_t seed = 1;
  std::size_t cap = kDefaultEvaluationCap;
  std::vector<std::string> outputs;
  json verification = json::object();

  void write(const std::string& name, const std::string& body) {
    std::ofstream f(out / name, std::ios::binary);
    f << body;
    if (!f) throw Error(ErrorKind::Internal, "cannot write " + (out / name).string());
    outputs.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const json& need(const char* key) const {
    auto it = config.find(key);
    if (it == config.end()) throw Error(ErrorKind::InvalidSpec, std::string("at /: missing field \"") + key + "\"");
    return *it;
  }
  template <class T>
  T get(const char* key, T fallback) const {
    auto it = config.find(key);
    if (it == config.end()) return fallback;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::InvalidSpec, std::string("at /") + key + ": wrong type");
    }
  }

  GroupPtr group() const { return parse_group(need("group"), "/group"); }
  McaRule rule(const GroupPtr& g) const { return parse_rule(g, need("rule"), "/rule"); }
  PseudoFramePtr frame(const GroupPtr& g) const {
    return config.contains("frame") ? parse_frame(g, config["frame"], "/frame") : nullptr;
  }
  DecomposeOptions decompose_options() const { return DecomposeOptions{cap, workers}; }
};

std::string fibre_flags_csv(const SkewDecomposition& d) {
  const auto& cg = *d.frame->c_group();
  const std::size_t nc = cg.order(), w = d.width();
  std::ostringstream csv;
  csv << "c_index,c_word,left,right,bipermutative\n";
  for (std::size_t ci = 0; ci < d.fibres.size(); ++ci) {
    const auto p = permutativity(*d.fibres[ci]);
    csv << ci << "," << csv_field(word_text(cg, unrank(ci, nc, w))) << "," << p.left << "," << p.right << "," << p.bipermutative()
        << "\n";
  }
  return csv.str();
}

json permutativity_json(const Permutativity& p) {
  return json{{"left", p.left}, {"right", p.right}, {"one_sided", p.one_sided}, {"V", p.V}, {"bipermutative", p.bipermutative()}};
}

void cmd_group(Run& run) {
  const auto g = run.group();
  const auto series = upper_central_series(g);
  json chain = json::array();
  std::string text;
  for (std::size_t k = 0; k < series.chain.size(); ++k) {
    chain.push_back(labels_of(*g, series.chain[k].members()));
    text += (k ? " < " : "") + set_text(*g, series.chain[k]);
  }
  json report{{"order", g->order()},
              {"abelian", g->is_abelian()},
              {"center", labels_of(*g, center(g).members())},
              {"commutator", labels_of(*g, commutator_subgroup(g).members())},
              {"upper_central_series", chain},
              {"upper_central_series_text", text},
              {"factor_invariants", series.factor_invariants},
              {"nilpotent", series.reaches_whole},
              {"group", group_to_json(*g)}};
  if (g->is_abelian()) report["abelian_invariants"] = abelian_invariants(g).invariants;
  run.write_json("group.json", report);
  std::cout << "order " << g->order() << ", series " << text << ", nilpotent: " << (series.reaches_whole ? "true" : "false")
            << "\n";
}

void cmd_decompose(Run& run) {
  const auto g = run.group();
  const auto rule = run.rule(g);
  const auto frame = run.frame(g);
  if (!frame) throw Error(ErrorKind::InvalidSpec, "at /: missing field \"frame\"");
  const auto d = decompose_mca(rule, frame, run.decompose_options());
  const auto check = recompose_check(d, rule, run.cap);
  const auto& ag = *frame->a_group();
  const auto& cg = *frame->c_group();
  json fibres = json::array();
  for (std::size_t ci = 0; ci < d.fibres.size(); ++ci) {
    json f{{"c_index", ci}, {"c_word", labels_of(cg, unrank(ci, cg.order(), d.width()))}, {"e", ag.label(d.error_map[ci])}};
    if (d.affine) {
      const auto& af = (*d.affine)[ci];
      json coeffs = json::array();
      for (const auto& c : af.coeffs) coeffs.push_back(labels_of(ag, c.images()));
      f["affine"] = json{{"constant", ag.label(af.constant)}, {"coeffs", coeffs}};
    }
    fibres.push_back(f);
  }
  json report{{"A", labels_of(*g, frame->a_subgroup().members())},
              {"C_order", cg.order()},
              {"semidirect", frame->semidirect()},
              {"neighborhood", {d.v_lo, d.v_hi}},
              {"h_rule", rule_to_json(d.h_rule)},
              {"fibres", fibres},
              {"recompose_check", check.holds}};
  if (!check.holds) report["witness"] = json{{"a_word", labels_of(ag, check.a_word)}, {"c_word", labels_of(cg, check.c_word)}};
  run.verification["recompose_check"] = check.holds;
  run.write_json("decomposition.json", report);
  run.write("fibre_flags.csv", fibre_flags_csv(d));
  std::cout << "decomposition over |A| = " << ag.order() << ", |C| = " << cg.order() << ": recompose_check "
            << (check.holds ? "passed" : "FAILED") << "\n";
}

void cmd_permute(Run& run) {
  const auto g = run.group();
  const auto rule = run.rule(g);
  const auto frame = run.frame(g);
  json report{{"rule", permutativity_json(permutativity(rule, run.cap))}};
  if (frame) {
    const auto d = decompose_mca(rule, frame, run.decompose_options());
    report["h_rule"] = permutativity_json(permutativity(trim_neighborhood(LocalTable::of(d.h_rule, run.cap))));
    std::size_t right = 0;
    for (const auto& f : d.fibres) right += permutativity(*f).right ? 1 : 0;
    report["fibres"] = d.fibres.size();
    report["right_permutative_fibres"] = right;
    run.write("fibre_flags.csv", fibre_flags_csv(d));
    std::cout << right << " of " << d.fibres.size() << " fibres are right-permutative\n";
  }
  run.write_json("permutativity.json", report);
}

void cmd_entropy(Run& run) {
  const auto g = run.group();
  const auto rule = run.rule(g);
  const auto frame = run.frame(g);
  const auto& mj = run.need("measure");
  const auto spec = parse_measure(mj, g->order(), frame, "/measure");
  const auto n_max = run.get<std::size_t>("N_max", 3);
  const EntropyOptions opt{run.cap, run.workers};

  std::ostringstream csv;
  csv << "N,joint_entropy_bits,marginal_entropy_bits,per_step_rate\n";
  json per_n = json::array();
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto t = trajectory_partition_entropy(rule, spec, n, opt);
    csv << n << "," << num(t.joint_bits) << "," << num(t.marginal_bits) << "," << num(t.per_step_rate()) << "\n";
    per_n.push_back(json{{"N", n}, {"distributions_equal", t.distributions_equal()}, {"window", {t.window_first, t.window_length}}});
  }
  json report{{"trajectory", per_n}};
  const double tol = run.config.contains("expect") ? run.config["expect"].value("tolerance", 1e-9) : 1e-9;
  auto expect = [&](const char* key, double value) {
    if (!run.config.contains("expect") || !run.config["expect"].contains(key)) return;
    const double want = run.config["expect"][key].get<double>();
    run.verification[key] = std::fabs(value - want) <= tol;
  };
  try {
    const auto f = formula_entropy(rule, spec, run.cap);
    report["formula"] = json{{"bits", f.bits}, {"V", f.V}, {"invariance_checked", f.invariance_checked}, {"warning", f.warning}};
    expect("formula_bits", f.bits);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPermutative) throw;
    report["formula"] = json{{"error", e.what()}};
  }
  if (frame && mj.value("kind", "") == "product") {
    const auto lambda = parse_measure(mj["a"], frame->a_group()->order(), nullptr, "/measure/a");
    const auto nu = parse_measure(mj["c"], frame->c_group()->order(), nullptr, "/measure/c");
    const auto s = skew_entropy(decompose_mca(rule, frame, run.decompose_options()), lambda, nu);
    report["skew"] = json{{"bits", s.bits}, {"V", s.V}, {"W", s.W}, {"h_lambda", s.h_lambda}, {"h_nu", s.h_nu}};
    expect("skew_bits", s.bits);
    std::cout << "skew-product entropy " << num(s.bits) << " bits (V = " << s.V << ", W = " << s.W << ")\n";
  }
  run.write("entropy.csv", csv.str());
  run.write_json("entropy.json", report);
}

void cmd_diffuse(Run& run) {
  const auto g = run.group();
  const auto rule = run.rule(g);
  const auto frame = run.frame(g);
  const auto j_max = run.get<std::size_t>("j_max", 64);
  const auto thresholds = run.get<std::vector<std::size_t>>("thresholds", {10});
  std::ostringstream csv;
  json report{{"j_max", j_max}};
  DiffusionReport ranks;
  if (!frame) {
    const auto s = abelian_invariants(g);
    const auto chi = parse_character(s, run.need("character"), "/character");
    ranks = diffusion_report(LinearRuleDual::of(rule, s), chi, j_max);
    csv << "j,rank\n";
    for (std::size_t j = 0; j <= j_max; ++j) csv << j << "," << ranks.ranks[j] << "\n";
  } else {
    const auto split = central_split(rule, frame, run.decompose_options());
    const auto s = abelian_invariants(frame->a_group());
    const auto alpha = parse_character(s, run.need("character"), "/character");
    const auto verify_max = run.get<std::size_t>("verify_j_max", 1);
    const auto dual = LinearRuleDual::of(split.linear, s);
    report["linear_rule"] = rule_to_json(split.linear);
    ranks = diffusion_report(dual, alpha, j_max);
    bool all = true;
    csv << "j,rank,fibre_check\n";
    for (std::size_t j = 0; j <= j_max; ++j) {
      std::string status = "skipped";
      if (j <= verify_max) {
        const auto r = relative_diffusion_rank(split, alpha, j, true, run.cap);
        status = r.verified ? "verified" : "mismatch";
        all = all && r.verified && r.rank == ranks.ranks[j];
      }
      csv << j << "," << ranks.ranks[j] << "," << status << "\n";
    }
    run.verification["fibre_rank_independence"] = all;
  }
  json dens = json::object();
  for (auto t : thresholds) dens[std::to_string(t)] = ranks.density_above(t);
  report["density_above"] = dens;
  run.write("diffusion.csv", csv.str());
  run.write_json("diffusion.json", report);
  for (auto t : thresholds) std::cout << "density of {j <= " << j_max << " : rank > " << t << "} = " << num(ranks.density_above(t)) << "\n";
}

void cmd_randomize(Run& run) {
  const auto g = run.group();
  const auto rule = run.rule(g);
  const auto frame = run.frame(g);
  const auto init = parse_measure(run.need("measure"), g->order(), frame, "/measure");
  std::vector<Probe> probes;
  if (run.config.contains("probes")) {
    const auto& ps = run.config["probes"];
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const auto path = "/probes/" + std::to_string(k);
      const bool quotient = ps[k].value("on", "B") == "C";
      if (quotient && !frame) throw Error(ErrorKind::InvalidSpec, "at " + path + ": quotient probes need a frame");
      const auto s = abelian_invariants(quotient ? frame->c_group() : g);
      probes.push_back(Probe{ps[k].value("id", "probe" + std::to_string(k)), parse_character(s, ps[k], path), quotient});
    }
  }
  RandomizationOptions opt;
  opt.n_max = run.get<std::size_t>("n_max", opt.n_max);
  opt.tv_window = run.get<std::size_t>("tv_window", opt.tv_window);
  opt.samples = run.get<std::size_t>("samples", opt.samples);
  opt.monte_carlo = run.get<bool>("monte_carlo", opt.monte_carlo);
  opt.cap = run.cap;
  opt.seed = run.seed;
  opt.workers = run.workers;
  const auto rep = cesaro_randomization(rule, init, probes, opt, frame);

  std::ostringstream csv;
  csv << "n,probe_id,|coef|,cesaro_mean,tv_distance,cesaro_tv,mode,samples,stderr\n";
  for (const auto& st : rep.steps) {
    const std::string tail = "," + st.mode + "," + std::to_string(st.samples) + ",";
    const std::string tv = "," + num(st.tv) + "," + num(st.cesaro_tv);
    csv << st.n << ",tv,,," << num(st.tv) << "," << num(st.cesaro_tv) << tail << num(st.tv_stderr) << "\n";
    for (std::size_t p = 0; p < probes.size(); ++p)
      csv << st.n << "," << csv_field(probes[p].id) << "," << num(st.coef[p]) << "," << num(st.cesaro_coef[p]) << tv << tail
          << num(st.coef_stderr[p]) << "\n";
  }
  json fast = json::object();
  if (!rep.steps.empty())
    for (std::size_t p = 0; p < probes.size(); ++p) fast[probes[p].id] = static_cast<bool>(rep.steps[0].fast_path[p]);
  json report{{"hypothesis_holds", rep.hypothesis_holds},
              {"warning", rep.warning},
              {"largest_exact_n", rep.largest_exact_n},
              {"fast_path", fast},
              {"n_max", opt.n_max},
              {"samples", opt.samples},
              {"tv_window", opt.tv_window}};
  if (rep.exponent_sums) report["exponent_sums"] = *rep.exponent_sums;
  if (!rep.warning.empty()) std::cerr << "warning: " << rep.warning << "\n";
  run.write("randomize.csv", csv.str());
  run.write_json("randomize.json", report);
  if (!rep.steps.empty()) {
    const auto& last = rep.steps.back();
    std::cout << "n = " << last.n << ": Cesaro TV " << num(last.cesaro_tv);
    for (std::size_t p = 0; p < probes.size(); ++p) std::cout << ", Cesaro |" << probes[p].id << "| " << num(last.cesaro_coef[p]);
    std::cout << "\n";
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"group", "decompose", "permute", "entropy", "diffuse", "randomize"};
  return names;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run_command(const std::string& command, const json& config, const RunSettings& settings) {
  if (!config.is_object()) throw Error(ErrorKind::InvalidSpec, "at /: expected an object");
  Run run{config, settings.out_dir, 0, 1, kDefaultEvaluationCap, {}, json::object()};
  if (settings.workers)
    run.workers = *settings.workers;
  else if (std::getenv("MCA_LAB_WORKERS"))
    run.workers = default_workers();
  else
    run.workers = run.get<std::size_t>("workers", 0);
  run.seed = settings.seed ? *settings.seed : run.get<std::uint64_t>("seed", 1);
  run.cap = settings.cap ? static_cast<std::size_t>(*settings.cap) : run.get<std::size_t>("cap_states", kDefaultEvaluationCap);
  if (run.cap == 0) throw Error(ErrorKind::InvalidSpec, "cap_states must be positive");
  fs::create_directories(run.out);

  const auto started = utc_now();
  if (command == "group") cmd_group(run);
  else if (command == "decompose") cmd_decompose(run);
  else if (command == "permute") cmd_permute(run);
  else if (command == "entropy") cmd_entropy(run);
  else if (command == "diffuse") cmd_diffuse(run);
  else if (command == "randomize") cmd_randomize(run);
  else throw Error(ErrorKind::InvalidSpec, "unknown command \"" + command + "\"");

  bool ok = true;
  for (const auto& [name, passed] : run.verification.items()) ok = ok && passed.get<bool>();
  for (const auto& name : run.outputs)
    if (!fs::exists(run.out / name) || fs::file_size(run.out / name) == 0) ok = false;

  const json manifest{{"tool", "mca_lab"},
                      {"version", kToolVersion},
                      {"command", command},
                      {"config_hash", "fnv1a64:" + fnv1a_hex(config.dump())},
                      {"seed", run.seed},
                      {"cap_states", run.cap},
                      {"workers", run.workers == 0 ? default_workers() : run.workers},
                      {"started_utc", started},
                      {"finished_utc", utc_now()},
                      {"outputs", run.outputs},
                      {"verification", run.verification},
                      {"status", ok ? "ok" : "verification-failed"}};
  std::ofstream(run.out / "manifest.json") << manifest.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace mca::lab
