#pragma once

// Simple analytic surfaces of revolution, parametrized by meridian arclength s
// and rotation angle θ, with metric ds² + u(s)² dθ².

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "revspec/errors.hpp"

namespace revspec {

struct ProfileValue {
  double u;
  double du;
  double d2u;
};

class SurfaceProfile {
 public:
  // Only builtin families can be constructed; use make_profile().
  const std::string& family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  double length() const { return length_; }
  double s0() const { return s0_; }
  double u_max() const { return u_max_; }
  // False when |u'| exceeds 1 somewhere, so no isometric embedding in R³ with
  // this arclength parametrization exists. The abstract metric is still fine.
  bool embeddable() const { return embeddable_; }

  double u(double s) const { return eval(s).u; }
  double du(double s) const { return eval(s).du; }
  double d2u(double s) const { return eval(s).d2u; }

  ProfileValue eval(double s) const {
    const double b = beta_;
    const double sn = std::sin(s), cs = std::cos(s);
    const double sn2 = sn * sn;
    return {sn * (1.0 + b * sn2), cs * (1.0 + 3.0 * b * sn2),
            -sn + b * (6.0 * sn * cs * cs - 3.0 * sn2 * sn)};
  }

  // u(s) - u(r) without cancellation when s and r are close.
  double difference(double s, double r) const {
    const double ss = std::sin(s), sr = std::sin(r);
    const double dsin = 2.0 * std::cos(0.5 * (s + r)) * std::sin(0.5 * (s - r));
    return dsin * (1.0 + beta_ * (ss * ss + ss * sr + sr * sr));
  }

  // u(r + d) - u(r), accurate for tiny offsets d.
  double increment(double r, double d) const {
    const double s = r + d;
    const double ss = std::sin(s), sr = std::sin(r);
    const double dsin = 2.0 * std::cos(r + 0.5 * d) * std::sin(0.5 * d);
    return dsin * (1.0 + beta_ * (ss * ss + ss * sr + sr * sr));
  }

  // Height v(s) of the embedded meridian, v(0) = 0. Only for embeddable profiles.
  double height(double s) const {
    require(embeddable_, ErrorKind::DomainError, "profile is not embeddable in R^3 (|u'| > 1)");
    require(s >= 0.0 && s <= length_, ErrorKind::DomainError, "s outside [0, L]");
    auto integrand = [this](double t) {
      const double d = du(t);
      return std::sqrt(std::max(0.0, 1.0 - d * d));
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, s, 15, 1e-13);
  }

  // Stable identifier used for config hashing and output echo.
  std::string id() const {
    std::string out = family_;
    for (double p : params_) {
      char buf[40];
      std::snprintf(buf, sizeof buf, ":%.17g", p);
      out += buf;
    }
    return out;
  }

  friend SurfaceProfile make_profile(const std::string& family, const std::vector<double>& params);

 private:
  SurfaceProfile() = default;

  std::string family_;
  std::vector<double> params_;
  double beta_ = 0.0;
  double length_ = std::numbers::pi;
  double s0_ = 0.0;
  double u_max_ = 0.0;
  bool embeddable_ = true;
};

namespace detail {

template <class F>
double bracketed_root(F&& f, double lo, double hi, double rel_tol = 1e-12) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require(flo * fhi < 0.0, ErrorKind::RootNotBracketed, "function does not change sign on bracket");
  std::uintmax_t iters = 200;
  auto tol = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) + 1e-300;
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Builds a validated builtin profile.
///
/// Families: "deformed-sphere" with params {β} gives u(s) = sin s (1 + β sin² s)
/// on [0, π]; "sphere" (no params) is the β = 0 member.
inline SurfaceProfile make_profile(const std::string& family, const std::vector<double>& params) {
  SurfaceProfile p;
  if (family == "sphere") {
    require(params.empty() || (params.size() == 1 && params[0] == 0.0), ErrorKind::InvalidProfile,
            "sphere takes no parameters");
    p.family_ = "deformed-sphere";
    p.params_ = {0.0};
    p.beta_ = 0.0;
  } else if (family == "deformed-sphere") {
    require(params.size() == 1, ErrorKind::InvalidProfile, "deformed-sphere expects one parameter (beta)");
    require(std::isfinite(params[0]), ErrorKind::InvalidProfile, "beta must be finite");
    p.family_ = family;
    p.params_ = params;
    p.beta_ = params[0];
  } else {
    fail(ErrorKind::InvalidProfile, "unknown profile family '" + family + "'");
  }
  p.length_ = std::numbers::pi;
  const double L = p.length_;

  const auto v0 = p.eval(0.0), vL = p.eval(L);
  require(std::abs(v0.u) < 1e-14 && std::abs(vL.u) < 1e-14, ErrorKind::InvalidProfile, "u must vanish at the poles");
  require(std::abs(v0.du - 1.0) < 1e-12 && std::abs(vL.du + 1.0) < 1e-12, ErrorKind::InvalidProfile,
          "pole regularity needs u'(0) = 1 and u'(L) = -1");

  // Count sign changes of u' on a fine grid; a simple surface has exactly one.
  constexpr int kScan = 4096;
  std::vector<std::pair<double, double>> brackets;
  double prev_s = 0.0, prev_d = v0.du;
  double max_slope = std::abs(v0.du);
  for (int i = 1; i <= kScan; ++i) {
    const double s = L * i / kScan;
    const auto v = p.eval(s);
    if (i < kScan) require(v.u > 0.0, ErrorKind::InvalidProfile, "u must be positive inside (0, L)");
    max_slope = std::max(max_slope, std::abs(v.du));
    if (v.du == 0.0 && i < kScan) {
      brackets.emplace_back(s, s);
    } else if (prev_d * v.du < 0.0) {
      brackets.emplace_back(prev_s, s);
    }
    prev_s = s;
    prev_d = v.du;
  }
  require(brackets.size() == 1, ErrorKind::InvalidProfile,
          "profile must have exactly one interior critical point, found " + std::to_string(brackets.size()));

  auto [lo, hi] = brackets.front();
  p.s0_ = lo == hi ? lo : detail::bracketed_root([&p](double s) { return p.du(s); }, lo, hi, 1e-14);
  const auto at0 = p.eval(p.s0_);
  require(at0.d2u < -1e-12, ErrorKind::InvalidProfile, "equatorial critical point must be a non-degenerate maximum");
  p.u_max_ = at0.u;
  p.embeddable_ = max_slope <= 1.0 + 1e-12;
  return p;
}

/// Principal symbol σ² + θ*²/u(s)² of -h²Δ in (s, θ, σ, θ*) coordinates.
inline double symbol_p(const SurfaceProfile& surface, double s, double sigma, double theta_star) {
  const double L = surface.length();
  require(s >= 0.0 && s <= L, ErrorKind::DomainError, "s outside [0, L]");
  if (s == 0.0 || s == L) {
    require(theta_star == 0.0, ErrorKind::DomainError, "symbol undefined at a pole with nonzero angular momentum");
    return sigma * sigma;
  }
  const double u = surface.u(s);
  return sigma * sigma + theta_star * theta_star / (u * u);
}

struct TurningPoints {
  double s_minus;
  double s_plus;
};

/// Parallels where the torus Λ_a touches: u(s±) = a, s- < s0 < s+.
inline TurningPoints turning_points(const SurfaceProfile& surface, double a) {
  const double umax = surface.u_max();
  require(a > 0.0 && a <= umax * (1.0 + 1e-13), ErrorKind::DomainError, "torus parameter outside (0, u_max)");
  require(umax - a > 1e-13 * umax, ErrorKind::DegenerateTorus, "torus parameter at the equator");
  auto f = [&](double s) { return surface.difference(s, surface.s0()) + (umax - a); };
  TurningPoints tp;
  tp.s_minus = detail::bracketed_root(f, 0.0, surface.s0(), 1e-15);
  tp.s_plus = detail::bracketed_root(f, surface.s0(), surface.length(), 1e-15);
  return tp;
}

}  // namespace revspec
