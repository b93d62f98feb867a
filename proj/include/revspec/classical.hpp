#pragma once

// Geodesic flow on a surface of revolution: rotation numbers, torus and flow
// averages of observables, Q_inf intervals and arithmetic classification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"
#include "revspec/observable.hpp"
#include "revspec/quadrature.hpp"

namespace revspec {

struct Torus {
  double E = 1.0;
  double F = 0.0;
  double a = 0.0;  // F / sqrt(E)
  double s_minus = 0.0;
  double s_plus = 0.0;
};

inline Torus make_torus(const SurfaceProfile& surface, double E, double F) {
  require(E > 0.0, ErrorKind::DomainError, "torus energy must be positive");
  const double a = F / std::sqrt(E);
  require(std::abs(a) < surface.u_max() && a != 0.0, ErrorKind::DomainError, "torus parameter outside (-u_max, u_max)\\{0}");
  const auto tp = turning_points(surface, std::abs(a));
  return {E, F, a, tp.s_minus, tp.s_plus};
}

inline void check_torus_parameter(const SurfaceProfile& surface, double a) {
  require(std::isfinite(a) && a != 0.0 && std::abs(a) < surface.u_max(), ErrorKind::DomainError,
          "torus parameter outside (-u_max, u_max)\\{0}");
}

/// ω(Λ_a) = (a/π) ∫ u⁻² (1 - a²/u²)^{-1/2} ds, odd in a.
inline double rotation_number(const SurfaceProfile& surface, double a, const QuadratureOptions& opt = {}) {
  check_torus_parameter(surface, a);
  const double b = std::abs(a);
  const double v = b / std::numbers::pi *
                   turning_integral(surface, b, [](double, double u, double D) { return 1.0 / (u * std::sqrt(D)); }, opt);
  return a < 0 ? -v : v;
}

// Limit of ω as a -> u_max.
inline double equator_rotation_number(const SurfaceProfile& surface) {
  return 1.0 / std::sqrt(surface.u_max() * std::abs(surface.d2u(surface.s0())));
}

/// Haar average of q over Λ_a: density u/√(u²-a²) ds times dθ/2π.
inline double torus_average(const SurfaceProfile& surface, const Observable& q, double a, const QuadratureOptions& opt = {}) {
  check_torus_parameter(surface, a);
  const double b = std::abs(a);
  const double num = turning_integral(
      surface, b, [&](double s, double u, double D) { return q.theta_mean(surface, s) * u / std::sqrt(D); }, opt);
  const double den = turning_integral(surface, b, [](double, double u, double D) { return u / std::sqrt(D); }, opt);
  return num / den;
}

// Averaging kernels with unit mass supported on [-1, 1].
enum class KernelKind { Bump, Box };

struct Kernel {
  KernelKind kind = KernelKind::Bump;

  static double bump_mass() {
    static const double m = composite_gauss([](double t) { return std::exp(-1.0 / (1.0 - t * t)); }, -1.0, 1.0, 16);
    return m;
  }

  double operator()(double t) const {
    if (std::abs(t) >= 1.0) return 0.0;
    if (kind == KernelKind::Box) return 0.5;
    return std::exp(-1.0 / (1.0 - t * t)) / bump_mass();
  }

  // K̂(τ) = ∫ K(t) e^{-itτ} dt, real and even.
  double fourier(double tau) const {
    tau = std::abs(tau);
    if (kind == KernelKind::Box) return tau < 1e-8 ? 1.0 - tau * tau / 6.0 : std::sin(tau) / tau;
    if (tau > 2000.0) return 0.0;
    const int panels = 16 + static_cast<int>(tau / 4.0);
    auto f = [&](double t) { return std::exp(-1.0 / (1.0 - t * t)) * std::cos(tau * t); };
    return 2.0 * composite_gauss(f, 0.0, 1.0, panels) / bump_mass();
  }

  std::string name() const { return kind == KernelKind::Bump ? "bump" : "box"; }
};

struct PhasePoint {
  double s = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
  double theta_star = 0.0;
};

// Point of Λ_{E,F} on the equatorial crossing s = s0 with σ > 0.
inline PhasePoint torus_start(const SurfaceProfile& surface, double E, double F, double theta0 = 0.0) {
  const double um = surface.u_max();
  const double sig2 = E - F * F / (um * um);
  require(sig2 > 0.0, ErrorKind::DomainError, "no equatorial crossing for this (E, F)");
  return {surface.s0(), theta0, std::sqrt(sig2), F};
}

struct FlowOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double energy_tol = 1e-7;  // relative; RKF78 at 1e-12 drifts ~1e-8 over T = 1000 near the poles
};

namespace detail {

using FlowState = std::vector<double>;

// Integrates ∫ K_T(t) c_j(s(t)) e^{ijθ(t)} dt for the analytic weights c_j of q.
inline std::vector<std::complex<double>> flow_modes(const SurfaceProfile& surface, const Observable& q,
                                                    const PhasePoint& start, double T, const Kernel& kernel,
                                                    const FlowOptions& opt) {
  namespace ode = boost::numeric::odeint;
  require(T > 0.0, ErrorKind::DomainError, "flow horizon must be positive");
  require(start.s > 0.0 && start.s < surface.length(), ErrorKind::DomainError, "start must avoid the poles");
  const int deg = q.theta_degree();
  const double F = start.theta_star;
  const double u0 = surface.u(start.s);
  const double E = start.sigma * start.sigma + F * F / (u0 * u0);

  auto rhs = [&](const FlowState& x, FlowState& dx, double t) {
    const auto v = surface.eval(x[0]);
    if (!(v.u > 1e-9) || !std::isfinite(x[0])) fail(ErrorKind::IntegrationFailure, "trajectory reached a pole");
    const double iu2 = 1.0 / (v.u * v.u);
    dx[0] = 2.0 * x[2];
    dx[1] = 2.0 * F * iu2;
    dx[2] = 2.0 * F * F * iu2 * v.du / v.u;
    const double w = kernel(t / T) / T;
    if (w == 0.0) {
      std::fill(dx.begin() + 3, dx.end(), 0.0);
      return;
    }
    const auto c = q.analytic_weights(surface, x[0]);
    for (int j = 0; j <= deg; ++j) {
      const auto z = w * c[j] * std::polar(1.0, j * x[1]);
      dx[3 + 2 * j] = z.real();
      dx[4 + 2 * j] = z.imag();
    }
  };

  std::vector<std::complex<double>> modes(deg + 1, 0.0);
  for (double dir : {1.0, -1.0}) {
    FlowState x(3 + 2 * (deg + 1), 0.0);
    x[0] = start.s;
    x[1] = start.theta;
    x[2] = start.sigma;
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_fehlberg78<FlowState>());
    double t = 0.0, dt = dir * 1e-2;
    const double t_end = dir * T;
    long steps = 0;
    while (dir * (t_end - t) > 0.0) {
      if (dir * (t + dt - t_end) > 0.0) dt = t_end - t;
      if (stepper.try_step(rhs, x, t, dt) == ode::fail) {
        if (std::abs(dt) < 1e-12) fail(ErrorKind::IntegrationFailure, "step-size collapse");
      }
      if (++steps > 2000000) fail(ErrorKind::IntegrationFailure, "step budget exhausted");
    }
    const double u = surface.u(x[0]);
    const double Eend = x[2] * x[2] + F * F / (u * u);
    require(std::abs(Eend - E) <= opt.energy_tol * E, ErrorKind::IntegrationFailure, "energy drift above tolerance");
    for (int j = 0; j <= deg; ++j) modes[j] += dir * std::complex<double>(x[3 + 2 * j], x[4 + 2 * j]);
  }
  return modes;
}

}  // namespace detail

/// ⟨q⟩_{T,K}(start) = ∫ K(t/T)/T · q(exp(tH_p) start) dt.
inline double flow_average(const SurfaceProfile& surface, const Observable& q, const PhasePoint& start, double T,
                           const Kernel& kernel = {}, const FlowOptions& opt = {}) {
  const auto m = detail::flow_modes(surface, q, start, T, kernel, opt);
  double acc = 0.0;
  for (const auto& c : m) acc += c.real();
  return acc;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x, double pad = 0.0) const { return x >= lo - pad && x <= hi + pad; }
};

/// [min, max] of flow averages over n_starts orbits of Λ_a (E = 1).
// All orbits cross s = s0 with σ > 0, so starts differ only in θ; one
// trajectory and a phase rotation of its mode integrals covers them all.
inline Interval q_infinity(const SurfaceProfile& surface, const Observable& q, double a, double T, int n_starts,
                           const Kernel& kernel = {}, const FlowOptions& opt = {}) {
  require(n_starts >= 8, ErrorKind::DomainError, "q_infinity needs at least 8 starts");
  check_torus_parameter(surface, a);
  const auto modes = detail::flow_modes(surface, q, torus_start(surface, 1.0, a), T, kernel, opt);
  Interval out{INFINITY, -INFINITY};
  for (int k = 0; k < n_starts; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_starts;
    double v = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j) v += (modes[j] * std::polar(1.0, j * th)).real();
    out.lo = std::min(out.lo, v);
    out.hi = std::max(out.hi, v);
  }
  return out;
}

// --- arithmetic --------------------------------------------------------------

struct RotationClass {
  enum Kind { Rational, DiophantineCertified, Unresolved } kind = Unresolved;
  long m = 0;
  long n = 1;
  long height = 0;
  double alpha = 0.0;
  double d = 0.0;
  long q_max = 0;

  std::string name() const {
    switch (kind) {
      case Rational: return "rational";
      case DiophantineCertified: return "diophantine";
      case Unresolved: return "unresolved";
    }
    return "unresolved";
  }
};

struct Convergent {
  long p, q;
};

inline std::vector<Convergent> convergents(double x, long q_max) {
  std::vector<Convergent> out;
  long p0 = 1, q0 = 0;
  long p1 = static_cast<long>(std::floor(x)), q1 = 1;
  out.push_back({p1, q1});
  double r = x - std::floor(x);
  for (int it = 0; it < 64 && r > 1e-300; ++it) {
    const double inv = 1.0 / r;
    if (!(inv < 1e15)) break;
    const long ak = static_cast<long>(std::floor(inv));
    r = inv - ak;
    const long p2 = ak * p1 + p0, q2 = ak * q1 + q0;
    if (q2 > q_max) break;
    out.push_back({p2, q2});
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return out;
}

/// Rational if a convergent with q ≤ q_max matches within 1e-12/q²; else
/// Diophantine-certified if |ω - p/q| ≥ α/q^{2+d} for all q ≤ q_max.
inline RotationClass classify(double omega, long q_max, double alpha, double d) {
  RotationClass rc;
  rc.alpha = alpha;
  rc.d = d;
  rc.q_max = q_max;
  const double x = std::abs(omega);
  const auto cv = convergents(x, q_max);
  for (const auto& c : cv) {
    if (std::abs(x - static_cast<double>(c.p) / c.q) <= 1e-12 / (double(c.q) * c.q)) {
      rc.kind = RotationClass::Rational;
      rc.m = omega < 0 ? -c.p : c.p;
      rc.n = c.q;
      rc.height = c.p + c.q;
      return rc;
    }
  }
  auto gap_ok = [&](long p, long q) { return std::abs(x - double(p) / q) >= alpha / std::pow(double(q), 2.0 + d); };
  bool ok = true;
  if (alpha < 0.5) {
    // α/q^{2+d} < 1/(2q²), so any violating p/q is a convergent (Legendre).
    for (const auto& c : cv) ok = ok && gap_ok(c.p, c.q);
  } else {
    for (long q = 1; q <= q_max && ok; ++q) ok = gap_ok(std::lround(x * q), q);
  }
  rc.kind = ok ? RotationClass::DiophantineCertified : RotationClass::Unresolved;
  return rc;
}

// --- rational tori -----------------------------------------------------------

/// a in [lo, hi] with ω(a) = target; RootNotBracketed when not attained.
inline double locate_rotation(const SurfaceProfile& surface, double target, double lo, double hi) {
  return detail::bracketed_root([&](double a) { return rotation_number(surface, a) - target; }, lo, hi, 1e-14);
}

struct WidthRow {
  long height = 0;
  long m = 0;
  long n = 1;
  double a = 0.0;
  Interval q_inf;
  double width = 0.0;
};

struct WidthOptions {
  double T = 400.0;
  int n_starts = 32;
  Kernel kernel{};
};

/// Q_inf width at a rational torus of each requested height inside the a-edge.
inline std::vector<WidthRow> width_vs_height(const SurfaceProfile& surface, const Observable& q, double a_lo,
                                             double a_hi, const std::vector<long>& heights,
                                             const WidthOptions& opt = {}) {
  const double w_lo = rotation_number(surface, a_lo), w_hi = rotation_number(surface, a_hi);
  const double lo = std::min(w_lo, w_hi), hi = std::max(w_lo, w_hi);
  std::vector<WidthRow> rows;
  for (long k : heights) {
    std::optional<WidthRow> found;
    for (long n = 1; n < k && !found; ++n) {
      const long m = k - n;
      if (std::gcd(m, n) != 1) continue;
      const double r = double(m) / n;
      if (r <= lo || r >= hi) continue;
      WidthRow row;
      row.height = k;
      row.m = m;
      row.n = n;
      row.a = locate_rotation(surface, r, a_lo, a_hi);
      found = row;
    }
    if (!found)
      fail(ErrorKind::RootNotBracketed, "no rational rotation number of height " + std::to_string(k) +
                                            " in the range of omega on the edge");
    found->q_inf = q_infinity(surface, q, found->a, opt.T, opt.n_starts, opt.kernel);
    found->width = found->q_inf.width();
    rows.push_back(*found);
  }
  return rows;
}

// --- scans -------------------------------------------------------------------

struct ScanOptions {
  double a_min = 0.05;
  double a_max_frac = 0.98;  // of u_max
  int n_a = 120;
  double T = 200.0;
  int n_starts = 16;
  long q_max = 1000;
  double alpha = 0.01;
  double d = 0.5;
  long height_cap = 30;  // rational tori located explicitly up to this height
  bool flow_qinf = true;
  Kernel kernel{};
};

struct ScanRow {
  double a = 0.0;
  double omega = 0.0;
  RotationClass cls;
  double q_avg = 0.0;
  Interval q_inf;
  double T = 0.0;
};

struct RationalTorus {
  long m = 0;
  long n = 1;
  long height = 0;
  double a = 0.0;
  double q_avg = 0.0;
  Interval q_inf;
  double domega_da = 0.0;
};

struct ClassicalScan {
  std::string surface_id;
  std::string q_id;
  ScanOptions options;
  std::vector<ScanRow> rows;
  std::vector<RationalTorus> rational;
};

// Tori are symmetric under a -> -a (ω odd, ⟨q⟩ even), so only a > 0 is scanned.
inline ClassicalScan scan(const SurfaceProfile& surface, const Observable& q, const ScanOptions& opt = {}) {
  require(opt.n_a >= 2, ErrorKind::DomainError, "scan needs at least two a values");
  const double a_hi = opt.a_max_frac * surface.u_max();
  require(opt.a_min > 0.0 && opt.a_min < a_hi, ErrorKind::DomainError, "scan a-range is empty");
  ClassicalScan out;
  out.surface_id = surface.id();
  out.q_id = q.id();
  out.options = opt;
  for (int i = 0; i < opt.n_a; ++i) {
    ScanRow r;
    r.a = opt.a_min + (a_hi - opt.a_min) * i / (opt.n_a - 1);
    r.omega = rotation_number(surface, r.a);
    r.cls = classify(r.omega, opt.q_max, opt.alpha, opt.d);
    r.q_avg = torus_average(surface, q, r.a);
    r.T = opt.T;
    r.q_inf = opt.flow_qinf ? q_infinity(surface, q, r.a, opt.T, opt.n_starts, opt.kernel) : Interval{r.q_avg, r.q_avg};
    out.rows.push_back(r);
  }
  const double w0 = out.rows.front().omega, w1 = out.rows.back().omega;
  const double lo = std::min(w0, w1), hi = std::max(w0, w1);
  for (long n = 1; n < opt.height_cap; ++n) {
    for (long m = 1; m + n <= opt.height_cap; ++m) {
      if (std::gcd(m, n) != 1) continue;
      const double r = double(m) / n;
      if (r <= lo || r >= hi) continue;
      RationalTorus t;
      t.m = m;
      t.n = n;
      t.height = m + n;
      t.a = locate_rotation(surface, r, opt.a_min, a_hi);
      t.q_avg = torus_average(surface, q, t.a);
      t.q_inf = q_infinity(surface, q, t.a, opt.T, opt.n_starts, opt.kernel);
      const double da = 1e-5;
      t.domega_da = (rotation_number(surface, t.a + da) - rotation_number(surface, t.a - da)) / (2 * da);
      out.rational.push_back(t);
    }
  }
  std::sort(out.rational.begin(), out.rational.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  return out;
}

}  // namespace revspec
