#include <cmath>
#include <future>
#include <random>

#include "l1rom/rom.hpp"

namespace l1rom::rom {

std::string to_string(VariableTag tag) {
  switch (tag) {
    case VariableTag::All: return "all";
    case VariableTag::Rho: return "rho";
    case VariableTag::M: return "m";
    case VariableTag::E: return "E";
  }
  return "all";
}

Index Dictionary::state_length() const {
  if (unsteady()) return trajectories.front().front().size();
  return states.empty() ? 0 : states.front().size();
}

Index Dictionary::steps() const {
  return unsteady() ? static_cast<Index>(trajectories.front().size()) : 1;
}

void Dictionary::validate() const {
  if (mus.empty()) throw DegenerateDictionary("dictionary has no members");
  if (unsteady()) {
    require_dims(trajectories.size() == mus.size(), "dictionary: one trajectory per mu");
    for (const auto& traj : trajectories) {
      require_dims(!traj.empty(), "dictionary: empty trajectory");
      require_dims(traj.size() == trajectories.front().size(), "dictionary: trajectories differ in length");
      for (const auto& s : traj) require_dims(s.size() == state_length(), "dictionary: state length");
    }
  } else {
    require_dims(states.size() == mus.size(), "dictionary: one state per mu");
    for (const auto& s : states) require_dims(s.size() == state_length(), "dictionary: state length");
  }
}

DenseMatrix Dictionary::matrix() const {
  DenseMatrix d(state_length(), size());
  for (Index l = 0; l < size(); ++l) d.col(l) = states[static_cast<std::size_t>(l)];
  return d;
}

DenseMatrix Dictionary::matrix_at(Index n) const {
  DenseMatrix d(state_length(), size());
  for (Index l = 0; l < size(); ++l) {
    d.col(l) = trajectories[static_cast<std::size_t>(l)].at(static_cast<std::size_t>(n));
  }
  return d;
}

Dictionary Dictionary::block(Index offset, Index length, VariableTag block_tag) const {
  Dictionary out;
  out.mus = mus;
  out.tag = block_tag;
  for (const auto& s : states) out.states.push_back(s.segment(offset, length));
  for (const auto& traj : trajectories) {
    std::vector<DenseVector> t;
    t.reserve(traj.size());
    for (const auto& s : traj) t.push_back(s.segment(offset, length));
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

Index Dictionary::nearest(double mu) const {
  Index best = 0;
  for (Index l = 1; l < size(); ++l) {
    if (std::abs(mus[static_cast<std::size_t>(l)] - mu) < std::abs(mus[static_cast<std::size_t>(best)] - mu)) {
      best = l;
    }
  }
  return best;
}

Dictionary build_steady_dictionary(const std::function<hdm::SteadyProblem(double)>& make,
                                   const std::vector<double>& mus) {
  std::vector<std::future<DenseVector>> jobs;
  jobs.reserve(mus.size());
  for (double mu : mus) {
    jobs.push_back(std::async(std::launch::async, [&make, mu] { return hdm::solve(make(mu)); }));
  }
  Dictionary dict;
  dict.mus = mus;
  for (auto& j : jobs) dict.states.push_back(j.get());
  dict.validate();
  return dict;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, Index time_index, VariableTag tag) {
  const auto salt = static_cast<std::uint64_t>(time_index) * 4U + static_cast<std::uint64_t>(tag);
  return splitmix64(seed ^ splitmix64(salt));
}

double variable_range(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.maxCoeff() - a.minCoeff();
}

DenseMatrix rank_repair(const DenseMatrix& a, const PerturbationConfig& cfg, double range) {
  if (!cfg.enabled || cfg.scale == 0.0) return a;
  if (cfg.scale < 0.0) throw ConfigInvalid("rank_repair: scale must be >= 0");
  // Manual mapping to [-1, 1): std::uniform_real_distribution is not
  // guaranteed to produce the same stream on every standard library.
  std::mt19937_64 gen(cfg.seed);
  const double amplitude = cfg.scale * range;
  DenseMatrix out = a;
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      out(i, j) += (2.0 * u - 1.0) * amplitude;
    }
  }
  return out;
}

}  // namespace l1rom::rom
