#pragma once

// Experiment registry, batch runner and artifact plumbing.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "l1rom/rom.hpp"

namespace l1rom::cli {

enum class Experiment { Regression, Advect1d, AdvDiff2d, BurgersSteady, BurgersUnsteady, Euler, PodDecay };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& token);

struct ExperimentConfig {
  Experiment experiment = Experiment::Advect1d;
  Index n = 0;                     // 1D grid size, or nodes per side in 2D
  std::vector<double> mus;         // dictionary parameters
  double mu_target = 0.0;
  std::vector<std::string> functionals;  // l2, l1lp, l1irls, huber, galerkin
  double cfl = 0.5;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  double eta = 0.0;
  int q = 2;
  rom::PerturbationConfig perturbation;
  std::vector<std::string> strategies;  // euler: single, per-variable
  std::vector<Index> n_list;            // pod-decay

  /// Throws ConfigInvalid when a value lies outside the experiment's domain.
  void validate() const;
};

/// Full-scale defaults of an experiment. `desk` shrinks the grids.
ExperimentConfig default_config(Experiment e, bool desk = false);

/// Reads a JSON config on top of default_config. Errors name the offending
/// key and its line in `text`.
ExperimentConfig parse_config(const std::string& text, bool desk = false);
ExperimentConfig load_config(const std::filesystem::path& path, bool desk = false);
std::string config_to_json(const ExperimentConfig& cfg);

// Regression demo.

struct RegressionInstance {
  std::vector<double> x, y;
  std::vector<double> outlier_x, outlier_y;
};

/// 22 points, x ~ U(0, 1), y = 2x + 0.4 + 0.1 U(-1, 1), plus the two outliers
/// (0.5, 3.5) and (0.9, 4.5).
RegressionInstance make_regression_instance(std::uint64_t seed);

struct RegressionFit {
  std::string method;
  bool with_outliers = false;
  std::optional<Eigen::Vector2d> alpha;  // empty on failure
  std::string status;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
};

std::vector<RegressionFit> run_regression(const ExperimentConfig& cfg);

// Batch runner.

struct MethodStatus {
  std::string method;
  std::string status;  // "ok" or "failed: ..."
  bool failed() const { return status != "ok"; }
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> files;  // relative to dir, manifest excluded
  std::vector<MethodStatus> methods;
  /// 0 success, 2 when a requested functional threw.
  int exit_code() const;
};

/// Writes solutions.csv, residuals.csv, coefficients.csv and manifest.json.
RunResult run_experiment(const ExperimentConfig& cfg);

std::string sha256_file(const std::filesystem::path& path);

// Reference comparison.

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-9;
};

struct Tolerances {
  Tolerance fallback;
  std::map<std::string, Tolerance> per_file;
  const Tolerance& of(const std::string& file) const;
};

struct DiffReport {
  bool pass = true;
  std::vector<std::string> messages;  // one per failing file
};

/// Compares every CSV of `reference_dir` against `run_dir`.
DiffReport diff_against_reference(const std::filesystem::path& run_dir,
                                  const std::filesystem::path& reference_dir, const Tolerances& tol);

/// Round-trip formatting with 17 significant digits.
std::string format_number(double v);

}  // namespace l1rom::cli
