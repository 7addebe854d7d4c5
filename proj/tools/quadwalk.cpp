#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quadwalk/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw quadwalk::Error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadwalk: Green functions, harmonic functions and Martin-kernel limits of "
               "killed lattice walks on the quadrant"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string experiment = "all";
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int threads_override = -1;

  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--threads", threads_override, "override the config thread count (0 = auto)");

  int sweep_override = 0;
  auto* sub_validate = app.add_subcommand("validate", "check hypotheses (H1)-(H4) and the period");
  auto* sub_geometry = app.add_subcommand("geometry", "spectral-curve sweep CSV");
  auto* sweep_opt = sub_geometry->add_option("--sweep", sweep_override, "number of directions");
  auto* sub_mc = app.add_subcommand("mc", "Monte Carlo exit probability of a twisted walk");
  auto* sub_green = app.add_subcommand("green", "one Green-function column");
  auto* sub_harmonic = app.add_subcommand("harmonic", "harmonic function over a window");
  auto* sub_limits = app.add_subcommand("limits", "limit-theorem experiments");
  sub_limits->add_option("--experiment", experiment,
                         "theorem1|neyspitzer|lograte|ratiolimit|xi|bounds|all");
  app.add_subcommand("verify", "run the full verification battery");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    std::string echo = slurp(config_path);
    quadwalk::RunConfig cfg = quadwalk::parse_config(echo);
    if (seed_set) cfg.seed = seed_override;
    if (threads_override >= 0) cfg.threads = threads_override;
    if (sweep_opt->count() > 0) cfg.sweep = sweep_override;

    quadwalk::RunResult res;
    if (sub_validate->parsed()) res = quadwalk::run_validate(cfg, out_dir, echo);
    else if (sub_geometry->parsed()) res = quadwalk::run_geometry(cfg, out_dir, echo);
    else if (sub_mc->parsed()) res = quadwalk::run_mc(cfg, out_dir, echo);
    else if (sub_green->parsed()) res = quadwalk::run_green(cfg, out_dir, echo);
    else if (sub_harmonic->parsed()) res = quadwalk::run_harmonic(cfg, out_dir, echo);
    else if (sub_limits->parsed()) res = quadwalk::run_limits(cfg, experiment, out_dir, echo);
    else res = quadwalk::run_verify(cfg, out_dir, echo);

    std::cout << (res.pass ? "PASS" : "FAIL") << " (manifest: " << res.manifest_path << ")\n";
    return res.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
