#include <cmath>
#include <fstream>
#include <future>
#include <random>

#include "json.hpp"
#include "l1rom/cli.hpp"
#include "l1rom/pod.hpp"
#include "output.hpp"

namespace l1rom::cli {

using minimize::Functional;

namespace {

constexpr double kPi = hdm::kPi;
constexpr const char* kVersion = "1.0.0";

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

Functional functional_of(const std::string& name, const ExperimentConfig& cfg) {
  Functional f = minimize::parse_functional(name);
  f.eta = cfg.eta;
  f.q = cfg.q;
  return f;
}

std::vector<std::string> alpha_header(std::vector<std::string> head, Index r) {
  for (Index l = 1; l <= r; ++l) head.push_back("alpha_" + std::to_string(l));
  return head;
}

// Runs fn(i) for every i concurrently and returns the results in order.
template <typename T, typename F>
std::vector<T> run_all(std::size_t count, F fn) {
  std::vector<std::future<T>> jobs;
  for (std::size_t i = 0; i < count; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  std::vector<T> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string failure(const std::exception& e) { return std::string("failed: ") + e.what(); }

struct Outputs {
  Csv solutions;
  Csv residuals;
  Csv coefficients;
  std::vector<MethodStatus> methods;
};

// Steady ROMs.

struct SteadyOutcome {
  std::optional<rom::SteadyRomResult> result;
  std::string status = "ok";
};

Outputs run_steady(const ExperimentConfig& cfg) {
  std::function<hdm::SteadyProblem(double)> make;
  const Index n = cfg.n;
  const bool two_d = cfg.experiment == Experiment::AdvDiff2d;
  switch (cfg.experiment) {
    case Experiment::Advect1d: make = [n](double mu) { return hdm::advect1d_steady(mu, n); }; break;
    case Experiment::BurgersSteady: make = [n](double mu) { return hdm::burgers1d_steady(mu, n); }; break;
    default: make = [n](double mu) { return hdm::advdiff2d(mu, n); }; break;
  }
  const rom::Dictionary dict = rom::build_steady_dictionary(make, cfg.mus);
  const hdm::SteadyProblem target = make(cfg.mu_target);
  const DenseVector u_hdm = hdm::solve(target);

  const auto outcomes = run_all<SteadyOutcome>(cfg.functionals.size(), [&](std::size_t k) {
    SteadyOutcome o;
    const std::string& name = cfg.functionals[k];
    try {
      o.result = name == "galerkin" ? rom::solve_galerkin(target, dict)
                                    : rom::solve_steady_rom(target, dict, functional_of(name, cfg), cfg.perturbation);
    } catch (const Error& e) {
      o.status = failure(e);
    }
    return o;
  });

  std::vector<std::string> sol_head = two_d ? std::vector<std::string>{"method", "i", "x", "y", "u"}
                                            : std::vector<std::string>{"method", "i", "x", "u"};
  Outputs out{Csv(sol_head), Csv({"method", "i", "r"}),
              Csv(alpha_header({"method", "status", "converged", "iterations", "objective", "linf_error"}, dict.size())),
              {}};
  const auto coords = [&](Index i, Csv::Row& row) {
    if (two_d) {
      const Index m = n - 1;
      row << static_cast<double>(i % m + 1) * target.grid2d.hx + target.grid2d.x0
          << static_cast<double>(i / m + 1) * target.grid2d.hy + target.grid2d.y0;
    } else {
      row << target.grid.x(i);
    }
  };
  const auto write_solution = [&](const std::string& method, const DenseVector& u) {
    for (Index i = 0; i < u.size(); ++i) {
      auto& row = out.solutions.row() << method << i;
      coords(i, row);
      row << u(i);
    }
  };
  write_solution("hdm", u_hdm);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const std::string& name = cfg.functionals[k];
    const auto& o = outcomes[k];
    out.methods.push_back({name, o.status});
    auto& row = out.coefficients.row() << name << o.status;
    if (!o.result) continue;
    const auto& c = o.result->coefficients;
    row << c.converged << c.iterations << c.objective
        << (o.result->reconstruction - u_hdm).lpNorm<Eigen::Infinity>();
    for (Index l = 0; l < c.alpha.size(); ++l) row << c.alpha(l);
    write_solution(name, o.result->reconstruction);
    for (Index i = 0; i < o.result->residual.size(); ++i) out.residuals.row() << name << i << o.result->residual(i);
  }
  return out;
}

// Unsteady Burgers.

struct UnsteadyOutcome {
  std::optional<rom::RomTrajectory> traj;
  std::string status = "ok";
};

std::vector<Index> output_steps(Index steps, Index stride) {
  std::vector<Index> out;
  for (Index k = 0; k <= steps; k += stride) out.push_back(k);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

void write_unsteady_coefficients(Outputs& out, const std::string& name, const UnsteadyOutcome& o, double dt) {
  out.methods.push_back({name, o.status});
  if (!o.traj) {
    out.coefficients.row() << name << o.status;
    return;
  }
  for (std::size_t k = 0; k < o.traj->coefficients.size(); ++k) {
    const auto& c = o.traj->coefficients[k];
    auto& row = out.coefficients.row() << name << o.status << c.time_index << static_cast<double>(c.time_index) * dt
                                       << c.converged << c.iterations;
    for (Index l = 0; l < c.alpha.size(); ++l) row << c.alpha(l);
    out.residuals.row() << name << c.time_index << static_cast<double>(c.time_index) * dt << o.traj->residual_norms[k];
  }
}

Outputs run_burgers_unsteady(const ExperimentConfig& cfg) {
  const auto grid = hdm::Grid1D::cells(cfg.n, 0.0, 2.0 * kPi);
  double smax = hdm::burgers_initial(cfg.mu_target, grid).cwiseAbs().maxCoeff();
  for (double mu : cfg.mus) smax = std::max(smax, hdm::burgers_initial(mu, grid).cwiseAbs().maxCoeff());
  // One dt for every member, aligned so that pi/4 is a whole number of steps.
  const double dt = hdm::aligned_dt(cfg.cfl * grid.dx / smax, kPi / 4.0);
  const Index steps = static_cast<Index>(std::floor(cfg.t_end / dt + 1e-9));
  const Index quarter = static_cast<Index>(std::llround(kPi / 4.0 / dt));

  rom::Dictionary dict;
  dict.mus = cfg.mus;
  for (auto& t : run_all<hdm::Trajectory>(cfg.mus.size(), [&](std::size_t l) {
         return hdm::burgers1d_unsteady_fixed(cfg.mus[l], cfg.n, steps, dt);
       })) {
    dict.trajectories.push_back(std::move(t.states));
  }
  const hdm::Trajectory truth = hdm::burgers1d_unsteady_fixed(cfg.mu_target, cfg.n, steps, dt);
  const double ratio = dt / grid.dx;
  const rom::StepFunction step = [ratio](const DenseVector& w) { return hdm::burgers_step(w, ratio); };

  const auto outcomes = run_all<UnsteadyOutcome>(cfg.functionals.size(), [&](std::size_t k) {
    UnsteadyOutcome o;
    try {
      o.traj = rom::run_unsteady_rom(dict, cfg.mu_target, truth.states.front(), functional_of(cfg.functionals[k], cfg),
                                     step, steps, cfg.perturbation);
      if (o.traj->failure) o.status = "failed at " + *o.traj->failure;
    } catch (const Error& e) {
      o.status = failure(e);
    }
    return o;
  });

  Outputs out{Csv({"method", "step", "t", "i", "x", "u"}), Csv({"method", "step", "t", "objective"}),
              Csv(alpha_header({"method", "status", "step", "t", "converged", "iterations"}, dict.size())), {}};
  const auto snapshots = output_steps(steps, quarter);
  const auto write_states = [&](const std::string& method, const std::vector<DenseVector>& states) {
    for (Index s : snapshots) {
      if (s >= static_cast<Index>(states.size())) break;
      const DenseVector& u = states[static_cast<std::size_t>(s)];
      for (Index i = 0; i < u.size(); ++i) {
        out.solutions.row() << method << s << static_cast<double>(s) * dt << i << grid.x(i) << u(i);
      }
    }
  };
  write_states("hdm", truth.states);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    write_unsteady_coefficients(out, cfg.functionals[k], outcomes[k], dt);
    if (outcomes[k].traj) write_states(cfg.functionals[k], outcomes[k].traj->reconstructed);
  }
  return out;
}

// Euler.

Outputs run_euler(const ExperimentConfig& cfg) {
  const auto grid = hdm::Grid1D::cells(cfg.n, 0.0, 1.0);
  double smax = hdm::euler_max_speed(hdm::euler_initial(cfg.mu_target, grid));
  for (double mu : cfg.mus) smax = std::max(smax, hdm::euler_max_speed(hdm::euler_initial(mu, grid)));
  const double dt = hdm::aligned_dt(cfg.cfl * grid.dx / smax, cfg.t_end);
  const Index steps = static_cast<Index>(std::llround(cfg.t_end / dt));

  rom::Dictionary dict;
  dict.mus = cfg.mus;
  for (const auto& t : run_all<hdm::EulerTrajectory>(cfg.mus.size(), [&](std::size_t l) {
         return hdm::euler1d_unsteady_fixed(cfg.mus[l], cfg.n, steps, dt);
       })) {
    std::vector<DenseVector> states;
    for (const auto& s : t.states) states.push_back(s.stacked());
    dict.trajectories.push_back(std::move(states));
  }
  const hdm::EulerTrajectory truth = hdm::euler1d_unsteady_fixed(cfg.mu_target, cfg.n, steps, dt);

  std::vector<std::pair<std::string, std::string>> runs;  // (strategy, functional)
  for (const auto& s : cfg.strategies) {
    for (const auto& f : cfg.functionals) runs.emplace_back(s, f);
  }
  const auto outcomes = run_all<UnsteadyOutcome>(runs.size(), [&](std::size_t k) {
    UnsteadyOutcome o;
    const auto& [strategy, name] = runs[k];
    const Functional f = functional_of(name, cfg);
    try {
      o.traj = strategy == "single"
                   ? rom::euler_rom_single_expansion(dict, cfg.mu_target, truth.states.front(), f, dt / grid.dx, steps,
                                                     cfg.perturbation)
                   : rom::euler_rom_per_variable(dict, cfg.mu_target, truth.states.front(), f, dt / grid.dx, steps,
                                                 cfg.perturbation);
      if (o.traj->failure) o.status = "failed at " + *o.traj->failure;
    } catch (const Error& e) {
      o.status = failure(e);
    }
    return o;
  });

  Outputs out{Csv({"method", "step", "t", "i", "x", "rho", "u", "p"}), Csv({"method", "step", "t", "objective"}),
              Csv(alpha_header({"method", "status", "step", "t", "converged", "iterations"}, 3 * dict.size())), {}};
  const auto snapshots = output_steps(steps, steps);
  const auto write_state = [&](const std::string& method, Index s, const hdm::EulerState& st) {
    const DenseVector u = st.velocity();
    const DenseVector p = st.pressure();
    for (Index i = 0; i < st.size(); ++i) {
      out.solutions.row() << method << s << static_cast<double>(s) * dt << i << grid.x(i) << st.rho(i) << u(i) << p(i);
    }
  };
  for (Index s : snapshots) write_state("hdm", s, truth.states[static_cast<std::size_t>(s)]);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const std::string name = runs[k].first + ":" + runs[k].second;
    write_unsteady_coefficients(out, name, outcomes[k], dt);
    if (!outcomes[k].traj) continue;
    const auto& reached = outcomes[k].traj->reconstructed;
    // A failed run also reports the last level it reached.
    std::vector<Index> levels = snapshots;
    if (static_cast<Index>(reached.size()) <= steps) levels.back() = static_cast<Index>(reached.size()) - 1;
    for (Index s : levels) {
      write_state(name, s, hdm::EulerState::from_stacked(outcomes[k].traj->reconstructed[static_cast<std::size_t>(s)]));
    }
  }
  return out;
}

// POD decay.

Outputs run_pod_decay(const ExperimentConfig& cfg) {
  const auto rows = pod::pod_decay_study(cfg.n_list);
  Outputs out{Csv({"N", "ell", "lambda_ratio", "sigma"}), Csv({"N", "M", "truncation_error"}),
              Csv({"N", "sigma_1", "sigma_1_over_N", "slope"}), {}};
  for (const auto& r : rows) out.solutions.row() << r.n << r.ell << r.ratio << r.sigma;
  for (Index n : cfg.n_list) {
    double total = 0.0, sigma1 = 0.0;
    std::vector<double> energy;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.ell == 1) sigma1 = r.sigma;
      energy.push_back(r.sigma * r.sigma);
      total += r.sigma * r.sigma;
    }
    double tail = total;
    for (Index m = 0; m <= std::min<Index>(40, static_cast<Index>(energy.size())); ++m) {
      out.residuals.row() << n << m << tail / total;
      if (m < static_cast<Index>(energy.size())) tail -= energy[static_cast<std::size_t>(m)];
    }
    out.coefficients.row() << n << sigma1 << sigma1 / static_cast<double>(n) << pod::loglog_slope(rows, n, 2, n / 10);
  }
  out.methods.push_back({"pod", "ok"});
  return out;
}

// Regression.

Outputs run_regression_outputs(const ExperimentConfig& cfg) {
  const RegressionInstance inst = make_regression_instance(cfg.seed);
  const auto fits = run_regression(cfg);
  Outputs out{Csv({"case", "i", "x", "y", "outlier"}), Csv({"case", "method", "i", "r"}),
              Csv({"case", "method", "status", "converged", "iterations", "objective", "alpha_1", "alpha_2"}),
              {}};
  for (int with = 0; with < 2; ++with) {
    const std::string tag = with ? "outliers" : "clean";
    std::vector<double> x = inst.x, y = inst.y;
    if (with) {
      x.insert(x.end(), inst.outlier_x.begin(), inst.outlier_x.end());
      y.insert(y.end(), inst.outlier_y.begin(), inst.outlier_y.end());
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.solutions.row() << tag << static_cast<Index>(i) << x[i] << y[i] << (i >= inst.x.size());
    }
    for (const auto& f : fits) {
      if (f.with_outliers != static_cast<bool>(with)) continue;
      if (!with) out.methods.push_back({f.method, f.status});
      auto& row = out.coefficients.row() << tag << f.method << f.status;
      if (!f.alpha) continue;
      row << f.converged << f.iterations << f.objective << (*f.alpha)(0) << (*f.alpha)(1);
      for (std::size_t i = 0; i < x.size(); ++i) {
        out.residuals.row() << tag << f.method << static_cast<Index>(i) << (*f.alpha)(0) * x[i] + (*f.alpha)(1) - y[i];
      }
    }
  }
  for (const auto& f : fits) {
    if (f.with_outliers && f.status != "ok") {
      for (auto& m : out.methods) {
        if (m.method == f.method && m.status == "ok") m.status = f.status;
      }
    }
  }
  return out;
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

RegressionInstance make_regression_instance(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  RegressionInstance inst;
  for (int i = 0; i < 22; ++i) {
    const double x = uniform01(gen);
    inst.x.push_back(x);
    inst.y.push_back(2.0 * x + 0.4 + 0.1 * (2.0 * uniform01(gen) - 1.0));
  }
  inst.outlier_x = {0.5, 0.9};
  inst.outlier_y = {3.5, 4.5};
  return inst;
}

std::vector<RegressionFit> run_regression(const ExperimentConfig& cfg) {
  const RegressionInstance inst = make_regression_instance(cfg.seed);
  std::vector<RegressionFit> fits;
  for (int with = 0; with < 2; ++with) {
    std::vector<double> x = inst.x, y = inst.y;
    if (with) {
      x.insert(x.end(), inst.outlier_x.begin(), inst.outlier_x.end());
      y.insert(y.end(), inst.outlier_y.begin(), inst.outlier_y.end());
    }
    DenseMatrix a(static_cast<Index>(x.size()), 2);
    DenseVector target(static_cast<Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      a(static_cast<Index>(i), 0) = x[i];
      a(static_cast<Index>(i), 1) = 1.0;
      target(static_cast<Index>(i)) = y[i];
    }
    for (const auto& name : cfg.functionals) {
      RegressionFit fit;
      fit.method = name;
      fit.with_outliers = with;
      try {
        const auto rep = rom::fit_linear(a, target, functional_of(name, cfg), DenseVector::Zero(2));
        fit.alpha = Eigen::Vector2d(rep.solution(0), rep.solution(1));
        fit.converged = rep.converged;
        fit.iterations = rep.iterations;
        fit.objective = rep.objective;
        fit.status = "ok";
      } catch (const Error& e) {
        fit.status = failure(e);
      }
      fits.push_back(fit);
    }
  }
  return fits;
}

int RunResult::exit_code() const {
  for (const auto& m : methods) {
    if (m.failed()) return 2;
  }
  return 0;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Outputs out = [&] {
    switch (cfg.experiment) {
      case Experiment::Regression: return run_regression_outputs(cfg);
      case Experiment::Advect1d:
      case Experiment::AdvDiff2d:
      case Experiment::BurgersSteady: return run_steady(cfg);
      case Experiment::BurgersUnsteady: return run_burgers_unsteady(cfg);
      case Experiment::Euler: return run_euler(cfg);
      case Experiment::PodDecay: return run_pod_decay(cfg);
    }
    throw ConfigInvalid("unknown experiment");
  }();

  RunResult result;
  result.dir = cfg.out_dir;
  result.methods = out.methods;
  std::filesystem::create_directories(cfg.out_dir);
  out.solutions.write(cfg.out_dir / "solutions.csv");
  out.residuals.write(cfg.out_dir / "residuals.csv");
  out.coefficients.write(cfg.out_dir / "coefficients.csv");
  result.files = {"coefficients.csv", "residuals.csv", "solutions.csv"};

  nlohmann::ordered_json manifest;
  manifest["experiment"] = to_string(cfg.experiment);
  manifest["config"] = nlohmann::json::parse(config_to_json(cfg));
  manifest["seed"] = cfg.seed;
  manifest["versions"] = {{"l1rom", kVersion}, {"eigen", eigen_version()}, {"compiler", __VERSION__}};
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : result.files) {
    manifest["files"].push_back({{"name", f},
                                 {"sha256", sha256_file(cfg.out_dir / f)},
                                 {"bytes", std::filesystem::file_size(cfg.out_dir / f)}});
  }
  manifest["methods"] = nlohmann::json::array();
  for (const auto& m : result.methods) manifest["methods"].push_back({{"method", m.method}, {"status", m.status}});
  std::ofstream(cfg.out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  return result;
}

}  // namespace l1rom::cli
