#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "mca/error.hpp"

namespace {

const char* hint(mca::ErrorKind kind) {
  switch (kind) {
    case mca::ErrorKind::NotInvariant:
      return "choose a fully characteristic subgroup for the frame, e.g. \"center\" or \"commutator\"";
    case mca::ErrorKind::NotNormal: return "the frame subgroup must be normal";
    case mca::ErrorKind::NotCentral: return "relative diffusion needs the frame subgroup inside the center";
    case mca::ErrorKind::NotAbelian: return "characters exist only for abelian groups; use a frame with abelian A or C";
    case mca::ErrorKind::SizeLimit: return "raise --cap-states or shrink N, n_max or the window";
    case mca::ErrorKind::NotPermutative: return "the requested quantity needs a bipermutative rule";
    default: return nullptr;
  }
}

std::string describe(const std::string& name) {
  if (name == "group") return "center, commutator, upper central series, nilpotency";
  if (name == "decompose") return "skew-product decomposition over a frame, verified by recomposition";
  if (name == "permute") return "permutativity of the rule and of every fibre map";
  if (name == "entropy") return "trajectory, formula and skew-product entropies";
  if (name == "diffuse") return "rank growth of a character under the dual action";
  if (name == "randomize") return "Cesaro randomization: probe coefficients and total variation";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative cellular automata experiments"};
  app.require_subcommand(1);
  std::string config_path;
  mca::lab::RunSettings settings;
  std::string out_dir = "out";
  std::size_t workers = 0;
  std::uint64_t seed = 0, cap = 0;

  std::vector<CLI::App*> subs;
  for (const auto& name : mca::lab::command_names()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads (fallback: MCA_LAB_WORKERS, then config \"workers\")");
    sub->add_option("--seed", seed, "Monte-Carlo seed");
    sub->add_option("--cap-states", cap, "cap on enumerated states");
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    settings.out_dir = out_dir;
    if (sub->count("--workers")) settings.workers = workers;
    if (sub->count("--seed")) settings.seed = seed;
    if (sub->count("--cap-states")) settings.cap = cap;
    try {
      std::ifstream in(config_path);
      std::stringstream text;
      text << in.rdbuf();
      const auto config = mca::lab::parse_config_text(text.str());
      const int code = mca::lab::run_command(sub->get_name(), config, settings);
      if (code != 0) std::cerr << "verification failed; see " << (settings.out_dir / "manifest.json").string() << "\n";
      return code;
    } catch (const mca::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      if (const char* h = hint(e.kind())) std::cerr << "hint: " << h << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
