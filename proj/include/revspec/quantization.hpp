#pragma once

// Action integrals and the EBK lattice of quasi-eigenvalues E + i eps ⟨q⟩.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "revspec/classical.hpp"
#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"
#include "revspec/observable.hpp"
#include "revspec/quadrature.hpp"

namespace revspec {

struct ActionPair {
  double I1 = 0.0;
  double I2 = 0.0;
};

/// I1 = (1/π) ∫ √(E - F²/u²) ds over [s-, s+], I2 = F.
inline ActionPair actions(const SurfaceProfile& surface, double E, double F, const QuadratureOptions& opt = {}) {
  require(E > 0.0, ErrorKind::DomainError, "energy must be positive");
  const double rE = std::sqrt(E);
  require(std::abs(F) < surface.u_max() * rE, ErrorKind::DomainError, "|F| must be below u_max sqrt(E)");
  if (F == 0.0) return {rE * surface.length() / std::numbers::pi, 0.0};
  const double a = std::abs(F) / rE;
  if (surface.u_max() - a <= 1e-12 * surface.u_max()) return {0.0, F};
  const double J = turning_integral(surface, a, [](double, double u, double D) { return std::sqrt(D) / u; }, opt);
  return {rE * J / std::numbers::pi, F};
}

/// E with actions(E, F).I1 = I1_target.
inline double invert_actions(const SurfaceProfile& surface, double I1_target, double F) {
  require(I1_target >= 0.0 && std::isfinite(I1_target), ErrorKind::DomainError, "I1 target must be >= 0");
  const double um = surface.u_max();
  const double E_lo = (F / um) * (F / um);
  if (I1_target == 0.0) return E_lo;
  if (F == 0.0) {
    const double r = std::numbers::pi * I1_target / surface.length();
    return r * r;
  }
  auto g = [&](double E) {
    if (E <= E_lo * (1.0 + 2e-12)) return -I1_target;
    return actions(surface, E, F).I1 - I1_target;
  };
  // I1 ≤ √E L/π, so E ≥ (π I1/L)²; grow from the larger of that and E_lo.
  double hi = std::max(E_lo, std::pow(std::numbers::pi * I1_target / surface.length(), 2)) * 1.5 + 1e-300;
  int grow = 0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (++grow > 200) fail(ErrorKind::RootNotBracketed, "energy bracket for the action inversion not found");
  }
  double lo = E_lo;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 4e-16 * std::max(std::abs(x), std::abs(y)); };
  std::uintmax_t iters = 300;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi), tol, iters);
  return 0.5 * (r.first + r.second);
}

// ⟨q⟩ on the meridian torus a = 0, where the density u/√(u²-a²) tends to 1.
inline double meridian_average(const SurfaceProfile& surface, const Observable& q) {
  return composite_gauss([&](double s) { return q.theta_mean(surface, s); }, 0.0, surface.length(), 32) /
         surface.length();
}

struct QuasiEigenvalue {
  long k1 = 0;
  long k2 = 0;
  double E = 0.0;
  double F = 0.0;
  std::complex<double> z;
  double q_avg = 0.0;
  double omega = 0.0;
  RotationClass torus_class;
  bool near_equator = false;
};

struct LatticeOptions {
  long q_max = 1000;
  double alpha = 0.01;
  double d = 0.5;
  double equator_tag = 1e-3;  // relative distance of a to u_max that gets tagged
  // Optional restriction of the torus parameter a = F/√E (both ends inclusive).
  double a_lo = -INFINITY;
  double a_hi = INFINITY;
};

struct Lattice {
  std::string surface_id;
  std::string q_id;
  double h = 0.0;
  double eps = 0.0;
  double E_lo = 0.0;
  double E_hi = 0.0;
  std::vector<QuasiEigenvalue> entries;
};

/// EBK lattice I1 = h(k1 + 1/2), F = h k2 with E in [E_lo, E_hi]; ordered by k2 then k1.
inline Lattice ebk_lattice(const SurfaceProfile& surface, const Observable& q, double h, double eps, double E_lo,
                           double E_hi, const LatticeOptions& opt = {}) {
  require(h > 0.0 && h <= 0.5, ErrorKind::DomainError, "h must lie in (0, 0.5]");
  require(eps >= 0.0, ErrorKind::DomainError, "eps must be >= 0");
  require(E_lo > 0.0 && E_hi >= E_lo, ErrorKind::DomainError, "energy window must lie in (0, inf)");
  Lattice L;
  L.surface_id = surface.id();
  L.q_id = q.id();
  L.h = h;
  L.eps = eps;
  L.E_lo = E_lo;
  L.E_hi = E_hi;
  const double um = surface.u_max();
  const long k2max = static_cast<long>(std::ceil(um * std::sqrt(E_hi) / h));
  for (long k2 = -k2max; k2 <= k2max; ++k2) {
    const double F = h * k2;
    if (std::abs(F) >= um * std::sqrt(E_hi)) continue;
    if (opt.a_lo > -INFINITY || opt.a_hi < INFINITY) {
      // a = F/√E is monotone in E; skip k2 rows that cannot reach the a-range.
      const double a_min = F / std::sqrt(F >= 0 ? E_lo : E_hi), a_max = F / std::sqrt(F >= 0 ? E_hi : E_lo);
      if (a_max < opt.a_lo || a_min > opt.a_hi) continue;
    }
    for (long k1 = 0;; ++k1) {
      const double E = invert_actions(surface, h * (k1 + 0.5), F);
      if (E > E_hi) break;
      if (E < E_lo) continue;
      const double a = F / std::sqrt(E);
      if (a < opt.a_lo || a > opt.a_hi) continue;
      QuasiEigenvalue qe;
      qe.k1 = k1;
      qe.k2 = k2;
      qe.E = E;
      qe.F = F;
      qe.near_equator = um - std::abs(a) <= opt.equator_tag * um;
      if (F == 0.0) {
        qe.q_avg = meridian_average(surface, q);
        qe.omega = 1.0;
        qe.torus_class = RotationClass{};
      } else {
        qe.q_avg = torus_average(surface, q, a);
        qe.omega = rotation_number(surface, a);
        qe.torus_class = classify(qe.omega, opt.q_max, opt.alpha, opt.d);
      }
      qe.z = {E, eps * qe.q_avg};
      L.entries.push_back(qe);
    }
  }
  return L;
}

}  // namespace revspec
