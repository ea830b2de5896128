#include <cmath>

#include "l1rom/hdm.hpp"

namespace l1rom::hdm {

double roe_flux_burgers(double ul, double ur) {
  const double a = 0.5 * (ul + ur);
  return 0.5 * (0.5 * ul * ul + 0.5 * ur * ur) - 0.5 * std::abs(a) * (ur - ul);
}

std::array<double, 2> roe_flux_burgers_derivative(double ul, double ur) {
  const double a = 0.5 * (ul + ur);
  const double sg = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  const double jump = ur - ul;
  return {0.5 * ul - 0.25 * sg * jump + 0.5 * std::abs(a),
          0.5 * ur - 0.25 * sg * jump - 0.5 * std::abs(a)};
}

namespace {

struct Primitive {
  double rho, u, p, h;  // h: total specific enthalpy
};

Primitive primitive(const Vec3& s, double gamma) {
  Primitive w;
  w.rho = s[0];
  if (!(w.rho > 0.0)) throw NonPhysicalState("roe_flux_euler: non-positive density");
  w.u = s[1] / s[0];
  w.p = (gamma - 1.0) * (s[2] - 0.5 * s[1] * w.u);
  if (!(w.p > 0.0)) throw NonPhysicalState("roe_flux_euler: non-positive pressure");
  w.h = (s[2] + w.p) / w.rho;
  return w;
}

}  // namespace

Vec3 euler_physical_flux(const Vec3& s, double gamma) {
  const double u = s[1] / s[0];
  const double p = (gamma - 1.0) * (s[2] - 0.5 * s[1] * u);
  return {s[1], s[1] * u + p, u * (s[2] + p)};
}

Vec3 roe_flux_euler(const Vec3& ul, const Vec3& ur, double gamma) {
  const Primitive l = primitive(ul, gamma);
  const Primitive r = primitive(ur, gamma);
  const double sl = std::sqrt(l.rho);
  const double sr = std::sqrt(r.rho);
  const double u = (sl * l.u + sr * r.u) / (sl + sr);
  const double h = (sl * l.h + sr * r.h) / (sl + sr);
  const double c2 = (gamma - 1.0) * (h - 0.5 * u * u);
  if (!(c2 > 0.0)) throw NonPhysicalState("roe_flux_euler: imaginary Roe sound speed");
  const double c = std::sqrt(c2);
  const double rho = sl * sr;

  const double d_rho = r.rho - l.rho;
  const double d_u = r.u - l.u;
  const double d_p = r.p - l.p;
  const double a1 = (d_p - rho * c * d_u) / (2.0 * c2);
  const double a2 = d_rho - d_p / c2;
  const double a3 = (d_p + rho * c * d_u) / (2.0 * c2);
  const double l1 = std::abs(u - c);
  const double l2 = std::abs(u);
  const double l3 = std::abs(u + c);

  const Vec3 fl = euler_physical_flux(ul, gamma);
  const Vec3 fr = euler_physical_flux(ur, gamma);
  const Vec3 diss = {
      l1 * a1 + l2 * a2 + l3 * a3,
      l1 * a1 * (u - c) + l2 * a2 * u + l3 * a3 * (u + c),
      l1 * a1 * (h - u * c) + l2 * a2 * 0.5 * u * u + l3 * a3 * (h + u * c),
  };
  return {0.5 * (fl[0] + fr[0] - diss[0]), 0.5 * (fl[1] + fr[1] - diss[1]),
          0.5 * (fl[2] + fr[2] - diss[2])};
}

}  // namespace l1rom::hdm
