#include <iomanip>
#include <ostream>
#include <sstream>

#include "l1rom/hdm.hpp"

namespace l1rom::hdm {

void write_columns_csv(std::ostream& out, const DenseVector& x, const std::vector<std::string>& names,
                       const std::vector<DenseVector>& columns) {
  require_dims(names.size() == columns.size(), "write_columns_csv: names/columns mismatch");
  for (const auto& c : columns) require_dims(c.size() == x.size(), "write_columns_csv: column length");
  out << "x";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < x.size(); ++i) {
    out << x(i);
    for (const auto& c : columns) out << ',' << c(i);
    out << '\n';
  }
}

namespace {

std::string time_label(const std::string& prefix, double t) {
  std::ostringstream s;
  s << prefix << "t=" << std::setprecision(6) << t;
  return s.str();
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::vector<Index>& steps) {
  std::vector<std::string> names;
  std::vector<DenseVector> columns;
  for (Index s : steps) {
    names.push_back(time_label("u@", traj.times.at(static_cast<std::size_t>(s))));
    columns.push_back(traj.states.at(static_cast<std::size_t>(s)));
  }
  write_columns_csv(out, traj.grid.x, names, columns);
}

void write_euler_csv(std::ostream& out, const EulerTrajectory& traj, const std::vector<Index>& steps) {
  std::vector<std::string> names;
  std::vector<DenseVector> columns;
  for (Index s : steps) {
    const EulerState& st = traj.states.at(static_cast<std::size_t>(s));
    const double t = traj.times.at(static_cast<std::size_t>(s));
    names.push_back(time_label("rho@", t));
    columns.push_back(st.rho);
    names.push_back(time_label("u@", t));
    columns.push_back(st.velocity());
    names.push_back(time_label("p@", t));
    columns.push_back(st.pressure());
  }
  write_columns_csv(out, traj.grid.x, names, columns);
}

}  // namespace l1rom::hdm
