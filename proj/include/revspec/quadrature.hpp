#pragma once

// Integrals between the turning parallels s- < s+ of a torus, where the
// integrand carries (u² - a²)^{±1/2} endpoint behaviour.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"

namespace revspec {

struct QuadratureOptions {
  double tolerance = 1e-10;  // absolute
  bool allow_fallback = true;
};

namespace detail {

// Sample point with u and D = u² - a² computed relative to the nearest turning point.
struct TurningSample {
  double s, u, D;
};

inline TurningSample turning_sample(const SurfaceProfile& surface, double a, const TurningPoints& tp, double d,
                                    bool from_left) {
  const double r = from_left ? tp.s_minus : tp.s_plus;
  const double off = from_left ? d : -d;
  const double inc = surface.increment(r, off);
  return {r + off, a + inc, inc * (2.0 * a + inc)};
}

// s = s- + Δ sin²φ, periodic trapezoid in φ with midpoint nodes.
template <class F>
double sin2_trapezoid(const SurfaceProfile& surface, double a, const TurningPoints& tp, F&& f, double tol,
                      double* err) {
  const double width = tp.s_plus - tp.s_minus;
  auto rule = [&](int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double phi = (i + 0.5) * std::numbers::pi / n;
      const double sn = std::sin(phi), cs = std::cos(phi);
      const bool left = sn * sn <= 0.5;
      const double d = width * (left ? sn * sn : cs * cs);
      const auto smp = turning_sample(surface, a, tp, d, left);
      acc += f(smp.s, smp.u, smp.D) * width * std::abs(2.0 * sn * cs);
    }
    return 0.5 * acc * std::numbers::pi / n;
  };
  double prev = rule(32);
  for (int n = 64; n <= (1 << 17); n *= 2) {
    const double cur = rule(n);
    *err = std::abs(cur - prev);
    if (*err <= 0.1 * tol) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace detail

/// ∫_{s-}^{s+} f(s, u(s), u(s)² - a²) ds for the torus with parameter a > 0.
template <class F>
double turning_integral(const SurfaceProfile& surface, double a, F&& f, const QuadratureOptions& opt = {}) {
  const auto tp = turning_points(surface, a);
  const double mid = 0.5 * (tp.s_minus + tp.s_plus);
  auto g = [&](double x, double xc) {
    const bool left = x < mid;
    const auto smp = detail::turning_sample(surface, a, tp, std::abs(xc), left);
    if (!(smp.D > 0.0)) return 0.0;
    return f(smp.s, smp.u, smp.D);
  };
  double err = INFINITY, l1 = 0.0;
  double value = NAN;
  try {
    boost::math::quadrature::tanh_sinh<double> ts(12);
    value = ts.integrate(g, tp.s_minus, tp.s_plus, 1e-14, &err, &l1);
  } catch (const std::exception&) {
    err = INFINITY;
  }
  if (std::isfinite(value) && err <= 0.1 * opt.tolerance) return value;
  if (opt.allow_fallback) {
    double err2 = INFINITY;
    const double v2 = detail::sin2_trapezoid(surface, a, tp, f, opt.tolerance, &err2);
    if (std::isfinite(v2) && err2 <= opt.tolerance) return v2;
    err = std::min(err, err2);
  }
  fail(ErrorKind::QuadratureFailure,
       "turning-point quadrature error estimate " + std::to_string(err) + " exceeds tolerance");
}

/// Composite 20-point Gauss-Legendre on [a, b] with `panels` equal panels.
template <class F>
auto composite_gauss(F&& f, double a, double b, int panels) {
  using boost::math::quadrature::gauss;
  using R = decltype(f(a));
  R acc{};
  const double w = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * w;
    acc += gauss<double, 20>::integrate(f, lo, lo + w);
  }
  return acc;
}

}  // namespace revspec
