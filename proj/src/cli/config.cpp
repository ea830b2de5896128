#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "l1rom/cli.hpp"

namespace l1rom::cli {

using nlohmann::json;

namespace {

constexpr double kPi = hdm::kPi;

const std::vector<std::pair<Experiment, std::string>> kNames = {
    {Experiment::Regression, "regression"},       {Experiment::Advect1d, "advect1d"},
    {Experiment::AdvDiff2d, "advdiff2d"},         {Experiment::BurgersSteady, "burgers-steady"},
    {Experiment::BurgersUnsteady, "burgers-unsteady"}, {Experiment::Euler, "euler"},
    {Experiment::PodDecay, "pod-decay"}};

bool is_unsteady(Experiment e) { return e == Experiment::BurgersUnsteady || e == Experiment::Euler; }

// 1-based line of the first occurrence of "key" in the config text.
int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::pair<double, double> mu_domain(Experiment e) {
  switch (e) {
    case Experiment::Advect1d:
    case Experiment::BurgersSteady: return {0.0, 1.0};
    case Experiment::AdvDiff2d: return {0.0, kPi / 2.0};
    case Experiment::BurgersUnsteady:
    case Experiment::Euler: return {0.0, 1.0};
    default: return {-INFINITY, INFINITY};
  }
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : kNames) {
    if (k == e) return name;
  }
  return "?";
}

Experiment parse_experiment(const std::string& token) {
  for (const auto& [k, name] : kNames) {
    if (name == token) return k;
  }
  throw ConfigInvalid("unknown experiment '" + token + "'");
}

ExperimentConfig default_config(Experiment e, bool desk) {
  ExperimentConfig c;
  c.experiment = e;
  c.out_dir = "out/" + to_string(e);
  const std::vector<double> steady_mus{0.3, 0.34, 0.38, 0.42, 0.46, 0.5};
  switch (e) {
    case Experiment::Regression: c.functionals = {"l2", "l1lp", "l1irls", "huber"}; break;
    case Experiment::Advect1d:
    case Experiment::BurgersSteady:
      c.n = desk ? 250 : 1000;
      c.mus = steady_mus;
      c.mu_target = 0.45;
      c.functionals = {"l2", "l1lp", "l1irls", "huber", "galerkin"};
      break;
    case Experiment::AdvDiff2d:
      c.n = desk ? 64 : 304;
      c.mus = {kPi / 6.0, kPi / 3.0};
      c.mu_target = kPi / 4.0;
      // LP is intractable at full scale.
      c.functionals = {"l2", "l1irls", "huber", "galerkin"};
      break;
    case Experiment::BurgersUnsteady:
      c.n = desk ? 250 : 1000;
      c.mus = {0.0, 0.2, 0.4, 0.6, 1.0};
      c.mu_target = 0.5;
      c.t_end = kPi;
      c.functionals = {"l2", "l1lp", "l1irls", "huber"};
      c.perturbation = {true, 1e-8, 0};
      break;
    case Experiment::Euler:
      c.n = desk ? 300 : 1000;
      c.mus = {0.0, 0.2, 0.4, 0.5, 0.8, 1.0};
      c.mu_target = 0.6;
      c.t_end = hdm::kEulerEndTime;
      c.functionals = {"l2", "l1lp", "l1irls", "huber"};
      c.perturbation = {true, 1e-8, 0};
      c.strategies = {"single", "per-variable"};
      break;
    case Experiment::PodDecay:
      c.n_list = desk ? std::vector<Index>{400, 600, 800} : std::vector<Index>{400, 600, 800, 1000, 1500};
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigInvalid("\"" + key + "\": " + what);
  };
  if (experiment == Experiment::PodDecay) {
    if (n_list.empty()) fail("n_list", "must not be empty");
    for (Index n : n_list) {
      if (n < 20) fail("n_list", "grid sizes must be >= 20");
    }
    return;
  }
  if (functionals.empty()) fail("functionals", "must not be empty");
  for (const auto& f : functionals) {
    if (f == "galerkin") {
      if (is_unsteady(experiment) || experiment == Experiment::Regression) {
        fail("functionals", "galerkin is available for steady ROM experiments only");
      }
      continue;
    }
    minimize::Functional fn = minimize::parse_functional(f);
    fn.eta = eta;
    fn.q = q;
    fn.validate();
  }
  if (eta < 0.0) fail("eta", "must be >= 0");
  if (q != 1 && q != 2) fail("q", "must be 1 or 2");
  if (perturbation.scale < 0.0) fail("perturbation", "scale must be >= 0");
  if (experiment == Experiment::Regression) return;

  if (n < 8) fail("n", "grid too small");
  if (mus.empty()) fail("mus", "dictionary needs at least one parameter");
  const auto [lo, hi] = mu_domain(experiment);
  for (double mu : mus) {
    if (!(mu >= lo && mu <= hi)) fail("mus", "parameter " + format_number(mu) + " outside the domain");
  }
  if (!(mu_target >= lo && mu_target <= hi)) fail("mu_target", "outside the parameter domain");
  if (is_unsteady(experiment)) {
    if (!(cfl > 0.0 && cfl <= 1.0)) fail("cfl", "must lie in (0, 1]");
    if (!(t_end > 0.0)) fail("t_end", "must be > 0");
  }
  if (experiment == Experiment::Euler) {
    if (strategies.empty()) fail("strategies", "must not be empty");
    for (const auto& s : strategies) {
      if (s != "single" && s != "per-variable") fail("strategies", "unknown strategy '" + s + "'");
    }
  }
}

ExperimentConfig parse_config(const std::string& text, bool desk) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw ConfigInvalid("line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigInvalid("line 1: config must be a JSON object");
  if (!j.contains("experiment")) throw ConfigInvalid("missing key \"experiment\"");

  const auto at = [&](const std::string& key) { return "line " + std::to_string(line_of(text, key)) + ": "; };
  ExperimentConfig c;
  try {
    c = default_config(parse_experiment(j.at("experiment").get<std::string>()), desk);
  } catch (const std::exception& e) {
    throw ConfigInvalid(at("experiment") + e.what());
  }

  static const std::set<std::string> known = {"experiment", "n",        "mus",          "mu_target", "functionals",
                                              "cfl",        "t_end",    "seed",         "out",       "eta",
                                              "q",          "n_list",   "perturbation", "strategies"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigInvalid(at(key) + "unknown key \"" + key + "\"");
    try {
      if (key == "n" && !desk) c.n = value.get<Index>();
      else if (key == "mus") c.mus = value.get<std::vector<double>>();
      else if (key == "mu_target") c.mu_target = value.get<double>();
      else if (key == "functionals") c.functionals = value.get<std::vector<std::string>>();
      else if (key == "cfl") c.cfl = value.get<double>();
      else if (key == "t_end") c.t_end = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "out") c.out_dir = value.get<std::string>();
      else if (key == "eta") c.eta = value.get<double>();
      else if (key == "q") c.q = value.get<int>();
      else if (key == "n_list" && !desk) c.n_list = value.get<std::vector<Index>>();
      else if (key == "strategies") c.strategies = value.get<std::vector<std::string>>();
      else if (key == "perturbation") {
        for (const auto& [pk, pv] : value.items()) {
          if (pk == "enabled") c.perturbation.enabled = pv.get<bool>();
          else if (pk == "scale") c.perturbation.scale = pv.get<double>();
          else throw ConfigInvalid("unknown key \"perturbation." + pk + "\"");
        }
      }
    } catch (const json::exception& e) {
      throw ConfigInvalid(at(key) + "\"" + key + "\": " + e.what());
    }
  }
  c.perturbation.seed = c.seed;
  try {
    c.validate();
  } catch (const ConfigInvalid& e) {
    // validate() names the key first; attach its line.
    const std::string msg = e.what();
    const auto close = msg.find('"', 1);
    const std::string key = msg.size() > 1 && msg[0] == '"' && close != std::string::npos ? msg.substr(1, close - 1) : "";
    throw ConfigInvalid((key.empty() ? std::string() : at(key)) + msg);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool desk) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), desk);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir.string();
  if (cfg.experiment == Experiment::PodDecay) {
    j["n_list"] = cfg.n_list;
    return j.dump(2);
  }
  j["functionals"] = cfg.functionals;
  j["eta"] = cfg.eta;
  j["q"] = cfg.q;
  if (cfg.experiment != Experiment::Regression) {
    j["n"] = cfg.n;
    j["mus"] = cfg.mus;
    j["mu_target"] = cfg.mu_target;
    j["perturbation"] = {{"enabled", cfg.perturbation.enabled}, {"scale", cfg.perturbation.scale}};
  }
  if (is_unsteady(cfg.experiment)) {
    j["cfl"] = cfg.cfl;
    j["t_end"] = cfg.t_end;
  }
  if (cfg.experiment == Experiment::Euler) j["strategies"] = cfg.strategies;
  return j.dump(2);
}

}  // namespace l1rom::cli
