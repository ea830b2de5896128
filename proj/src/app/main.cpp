#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "l1rom/cli.hpp"

using namespace l1rom;

namespace {

cli::Tolerances load_tolerances(const std::string& path, double abs, double rel) {
  cli::Tolerances tol;
  tol.fallback = {abs, rel};
  if (path.empty()) return tol;
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read tolerances " + path);
  const auto j = nlohmann::json::parse(in);
  for (const auto& [file, t] : j.items()) tol.per_file[file] = {t.value("abs", abs), t.value("rel", rel)};
  return tol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary-based reduced-order models by residual minimization"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  std::string config_path, out_dir, functionals;
  std::optional<std::uint64_t> seed;
  bool desk = false;
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Seed of the regression draw and rank repair");
  run->add_option("--functionals", functionals, "Comma-separated subset of l2,l1lp,l1irls,huber,galerkin");
  run->add_flag("--desk-scale", desk, "Shrink grids to laptop scale");

  auto* diff = app.add_subcommand("diff", "Compare a run directory against a reference");
  std::string run_dir, ref_dir, tol_path;
  double abs_tol = 1e-12, rel_tol = 1e-9;
  diff->add_option("run", run_dir)->required()->check(CLI::ExistingDirectory);
  diff->add_option("reference", ref_dir)->required()->check(CLI::ExistingDirectory);
  diff->add_option("--abs", abs_tol, "Absolute tolerance");
  diff->add_option("--rel", rel_tol, "Relative tolerance");
  diff->add_option("--tolerances", tol_path, "JSON map file -> {abs, rel}");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cli::ExperimentConfig cfg = cli::load_config(config_path, desk);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (seed) cfg.seed = cfg.perturbation.seed = *seed;
      if (!functionals.empty()) {
        cfg.functionals.clear();
        std::stringstream ss(functionals);
        for (std::string f; std::getline(ss, f, ',');) cfg.functionals.push_back(f);
      }
      cfg.validate();
      const auto result = cli::run_experiment(cfg);
      for (const auto& m : result.methods) std::cout << m.method << ": " << m.status << '\n';
      std::cout << "wrote " << result.dir.string() << '\n';
      return result.exit_code();
    }
    const auto report = cli::diff_against_reference(run_dir, ref_dir, load_tolerances(tol_path, abs_tol, rel_tol));
    for (const auto& m : report.messages) std::cout << m << '\n';
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    return report.pass ? 0 : 1;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
