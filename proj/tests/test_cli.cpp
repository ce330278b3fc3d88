#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "mca/error.hpp"

using namespace mca;
using namespace mca::lab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MCA_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const std::string& name) { return parse_config_text(slurp(kConfigs / name)); }

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mca_lab_test_" + name);
  fs::remove_all(p);
  return p;
}

RunSettings into(const fs::path& dir) {
  RunSettings s;
  s.out_dir = dir;
  s.workers = 1;
  return s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          row.back() += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          row.back() += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.emplace_back();
      } else {
        row.back() += ch;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("group reports") {
  const auto dir = scratch("group_q8");
  REQUIRE(run_command("group", load("quaternion_group.json"), into(dir)) == 0);
  const auto r = json::parse(slurp(dir / "group.json"));
  CHECK(r["upper_central_series_text"] == "{1} < {1, -1} < {1, -1, i, -i, j, -j, k, -k}");
  CHECK(r["nilpotent"] == true);
  CHECK(r["factor_invariants"] == json::parse("[[2],[2,2]]"));

  const auto t = scratch("group_trivial");
  REQUIRE(run_command("group", load("trivial_group.json"), into(t)) == 0);
  const auto tr = json::parse(slurp(t / "group.json"));
  CHECK(tr["order"] == 1);
  CHECK(tr["nilpotent"] == true);
  CHECK(tr["upper_central_series"].size() == 1);

  const auto d = scratch("group_d7");
  REQUIRE(run_command("group", load("z7_z3_group.json"), into(d)) == 0);
  const auto dr = json::parse(slurp(d / "group.json"));
  CHECK(dr["order"] == 21);
  CHECK(dr["nilpotent"] == false);
  CHECK(dr["center"].size() == 1);
}

TEST_CASE("decompose writes a verified report") {
  const auto dir = scratch("decompose");
  REQUIRE(run_command("decompose", load("three_cell_decompose.json"), into(dir)) == 0);
  const auto r = json::parse(slurp(dir / "decomposition.json"));
  CHECK(r["recompose_check"] == true);
  REQUIRE(r["fibres"].size() == 64);
  // f_c(a) = a0 + 2^c0 a1 + 2^(c0+c1) a2: the image of the generator (1,0).
  const auto& f = r["fibres"][1];  // c = (1, 0, 0)
  CHECK(f["affine"]["coeffs"][1][1] == "(2,0)");
  CHECK(f["affine"]["coeffs"][2][1] == "(2,0)");
  const auto m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["verification"]["recompose_check"] == true);

  const auto id = scratch("decompose_id");
  REQUIRE(run_command("decompose", load("identity_decompose.json"), into(id)) == 0);
  const auto ir = json::parse(slurp(id / "decomposition.json"));
  CHECK(ir["h_rule"]["factors"].size() == 1);
  for (const auto& fib : ir["fibres"]) CHECK(fib["e"] == "1");
}

TEST_CASE("a non-characteristic frame is rejected") {
  try {
    run_command("decompose", load("not_invariant_decompose.json"), into(scratch("bad")));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotInvariant);
  }
}

TEST_CASE("fibre permutativity table") {
  const auto dir = scratch("permute");
  REQUIRE(run_command("permute", load("powered_product_permute.json"), into(dir)) == 0);
  const auto rows = read_csv(dir / "fibre_flags.csv");
  REQUIRE(rows.size() == 65);
  CHECK(rows[0] == std::vector<std::string>{"c_index", "c_word", "left", "right", "bipermutative"});
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const std::size_t ci = std::stoul(rows[k][0]);
    const bool c2_zero = ci / 16 == 0;
    CHECK(rows[k][3] == (c2_zero ? "1" : "0"));
  }
}

TEST_CASE("entropy command") {
  const auto dir = scratch("entropy");
  REQUIRE(run_command("entropy", load("three_cell_entropy.json"), into(dir)) == 0);
  const auto r = json::parse(slurp(dir / "entropy.json"));
  CHECK(std::fabs(r["skew"]["bits"].get<double>() - (2 * std::log2(5.0) + 4)) < 1e-9);
  const auto rows = read_csv(dir / "entropy.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"N", "joint_entropy_bits", "marginal_entropy_bits", "per_step_rate"});
  CHECK(std::fabs(std::stod(rows[2][1]) - 4 * std::log2(20.0)) < 1e-9);

  auto cfg = load("three_cell_entropy.json");
  cfg["expect"]["skew_bits"] = 8.5;
  const auto bad = scratch("entropy_bad");
  CHECK(run_command("entropy", cfg, into(bad)) == 1);
  CHECK(json::parse(slurp(bad / "manifest.json"))["status"] == "verification-failed");
}

TEST_CASE("diffuse command") {
  const auto dir = scratch("diffuse");
  REQUIRE(run_command("diffuse", load("pascal_diffuse.json"), into(dir)) == 0);
  const auto rows = read_csv(dir / "diffusion.csv");
  REQUIRE(rows.size() == 514);
  for (std::size_t j = 0; j <= 512; ++j) CHECK(std::stoul(rows[j + 1][1]) == (std::size_t{1} << std::popcount(j)));

  const auto rel = scratch("diffuse_rel");
  REQUIRE(run_command("diffuse", load("quaternion_relative_diffuse.json"), into(rel)) == 0);
  const auto rr = read_csv(rel / "diffusion.csv");
  CHECK(rr[2] == std::vector<std::string>{"1", "4", "verified"});
  CHECK(rr[3] == std::vector<std::string>{"2", "4", "verified"});
}

TEST_CASE("randomize command") {
  const auto dir = scratch("randomize_uniform");
  REQUIRE(run_command("randomize", load("uniform_randomize.json"), into(dir)) == 0);
  const auto rows = read_csv(dir / "randomize.csv");
  CHECK(rows[0] == std::vector<std::string>{"n", "probe_id", "|coef|", "cesaro_mean", "tv_distance", "cesaro_tv", "mode",
                                            "samples", "stderr"});
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][1] == "tv") {
      CHECK(std::stod(rows[k][4]) == 0.0);
    } else {
      CHECK(std::stod(rows[k][2]) == 0.0);
      CHECK(std::stod(rows[k][3]) == 0.0);
    }
  }

  const auto p = scratch("randomize_pascal");
  REQUIRE(run_command("randomize", load("pascal_randomize.json"), into(p)) == 0);
  const auto pr = read_csv(p / "randomize.csv");
  CHECK(pr.back()[0] == "256");
  CHECK(std::fabs(std::stod(pr.back()[3]) - 0.11187) < 1e-5);

  auto warn = load("pascal_randomize.json");
  warn["group"]["n"] = 4;
  warn["measure"] = json{{"kind", "uniform"}};
  warn["probes"] = json::array();
  warn["rule"]["factors"][1]["coeff"] = json{{"power", 2}};
  warn["n_max"] = 3;
  const auto w = scratch("randomize_warn");
  REQUIRE(run_command("randomize", warn, into(w)) == 0);
  const auto wr = json::parse(slurp(w / "randomize.json"));
  CHECK(wr["hypothesis_holds"] == false);
  CHECK_FALSE(wr["warning"].get<std::string>().empty());
}

TEST_CASE("outputs are reproducible and the manifest is complete") {
  auto cfg = load("quaternion_randomize.json");
  cfg["samples"] = 4000;
  cfg["n_max"] = 8;
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  auto sa = into(a), sb = into(b);
  sb.workers = 3;
  REQUIRE(run_command("randomize", cfg, sa) == 0);
  REQUIRE(run_command("randomize", cfg, sb) == 0);
  CHECK(slurp(a / "randomize.csv") == slurp(b / "randomize.csv"));
  const auto m = json::parse(slurp(a / "manifest.json"));
  CHECK(m["seed"] == 1);
  CHECK(m["cap_states"].get<std::uint64_t>() > 0);
  CHECK(m["config_hash"] == "fnv1a64:" + fnv1a_hex(cfg.dump()));
  for (const auto& name : m["outputs"]) {
    CHECK(fs::exists(a / name.get<std::string>()));
    CHECK(fs::file_size(a / name.get<std::string>()) > 0);
  }

  auto seeded = into(scratch("repro_c"));
  seeded.seed = 99;
  REQUIRE(run_command("randomize", cfg, seeded) == 0);
  CHECK(slurp(seeded.out_dir / "randomize.csv") != slurp(a / "randomize.csv"));
  CHECK(json::parse(slurp(seeded.out_dir / "manifest.json"))["seed"] == 99);
}

TEST_CASE("config diagnostics") {
  try {
    parse_config_text("{\n  \"group\": {\"kind\": \"cyclic\",\n  \"n\": }\n}");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const auto g = make_quaternion();
  auto expect_path = [&](auto&& f, const std::string& path) {
    try {
      f();
      FAIL("expected a spec error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidSpec);
      CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
  };
  expect_path([&] { parse_group(json::parse(R"({"kind": "cyclc", "n": 3})"), "/group"); }, "/group/kind");
  expect_path([&] { parse_group(json::parse(R"({"kind": "cyclic"})"), "/group"); }, "missing field \"n\"");
  expect_path([&] { parse_element(g, json("q"), "/rule/bias"); }, "/rule/bias");
  expect_path([&] { parse_endo(g, json::parse(R"({"power": -1})"), "/rule/factors/0/coeff"); }, "/rule/factors/0/coeff");
  expect_path([&] { parse_rule(g, json::parse(R"({"neighborhood": [0], "factors": []})"), "/rule"); }, "/rule/neighborhood");
  expect_path([&] { parse_measure(json::parse(R"({"kind": "bernoulli", "p": [0.5, 0.5]})"), 8, nullptr, "/measure"); },
              "/measure");
  expect_path([&] { parse_character(abelian_invariants(make_cyclic(2)), json::parse(R"({"cells": {"x": [1]}})"), "/c"); },
              "/c/cells/x");
  CHECK_THROWS_AS(run_command("frobnicate", json::object(), into(scratch("unknown"))), Error);

  // Element references by label and by index agree.
  CHECK(parse_element(g, json("-1"), "/") == parse_element(g, json(1), "/"));
  CHECK(parse_endo(g, json::parse(R"({"conj": "i"})"), "/")(parse_element(g, json("j"), "/")) == parse_element(g, json("-j"), "/"));
}
