#pragma once

// Builtin analytic observables q(s, θ): finite trigonometric polynomials in θ
// whose coefficients are analytic profiles in s.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"

namespace revspec {

enum class ProfileKind {
  CosSeries,    // Σ c_k cos(k s)
  SinPowerCos,  // sin(s)^power · Σ c_k cos(k s)
  BesselOfU,    // c_0 · I_order(kappa · u(s)), c_0 = 1 when coeffs is empty
};

struct SProfile {
  ProfileKind kind = ProfileKind::CosSeries;
  std::vector<double> coeffs;  // CosSeries / SinPowerCos
  int power = 0;               // SinPowerCos
  double kappa = 0.0;          // BesselOfU
  int order = 0;               // BesselOfU
  double tilt = 0.0;           // BesselOfU: extra factor (1 + tilt cos s)

  double operator()(const SurfaceProfile& surface, double s) const {
    switch (kind) {
      case ProfileKind::CosSeries:
        return cos_series(s);
      case ProfileKind::SinPowerCos:
        return std::pow(std::sin(s), power) * cos_series(s);
      case ProfileKind::BesselOfU:
        return (coeffs.empty() ? 1.0 : coeffs[0]) * (1.0 + tilt * std::cos(s)) *
               std::cyl_bessel_i(static_cast<double>(order), kappa * surface.u(s));
    }
    return 0.0;
  }

 private:
  double cos_series(double s) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * std::cos(static_cast<double>(k) * s);
    return acc;
  }
};

enum class Trig { Cos, Sin };

struct ObservableTerm {
  int mode = 0;  // θ-frequency j ≥ 0
  Trig trig = Trig::Cos;
  SProfile profile;
};

class Observable {
 public:
  Observable() = default;
  Observable(std::string name, std::vector<ObservableTerm> terms) : name_(std::move(name)), terms_(std::move(terms)) {
    for (const auto& t : terms_) require(t.mode >= 0, ErrorKind::DomainError, "observable modes must be >= 0");
  }

  const std::string& name() const { return name_; }
  const std::vector<ObservableTerm>& terms() const { return terms_; }

  double operator()(const SurfaceProfile& surface, double s, double theta) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
      const double ang = t.mode * theta;
      acc += t.profile(surface, s) * (t.trig == Trig::Cos ? std::cos(ang) : std::sin(ang));
    }
    return acc;
  }

  // θ-mean q̄(s).
  double theta_mean(const SurfaceProfile& surface, double s) const {
    double acc = 0.0;
    for (const auto& t : terms_)
      if (t.mode == 0 && t.trig == Trig::Cos) acc += t.profile(surface, s);
    return acc;
  }

  int theta_degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.mode);
    return d;
  }

  bool rotational() const {
    for (const auto& t : terms_)
      if (t.mode != 0) return false;
    return true;
  }

  // No sin(jθ) terms, so q(s, -θ) = q(s, θ).
  bool even_in_theta() const {
    for (const auto& t : terms_)
      if (t.trig == Trig::Sin && t.mode != 0) return false;
    return true;
  }

  // Fourier coefficients q̂_j(s) with q = Σ_j q̂_j(s) e^{ijθ}, j in [-deg, deg].
  std::map<int, std::complex<double>> theta_fourier(const SurfaceProfile& surface, double s) const {
    std::map<int, std::complex<double>> out;
    const std::complex<double> I(0.0, 1.0);
    for (const auto& t : terms_) {
      const double g = t.profile(surface, s);
      if (t.mode == 0) {
        if (t.trig == Trig::Cos) out[0] += g;
        continue;
      }
      if (t.trig == Trig::Cos) {
        out[t.mode] += 0.5 * g;
        out[-t.mode] += 0.5 * g;
      } else {
        out[t.mode] += g / (2.0 * I);
        out[-t.mode] -= g / (2.0 * I);
      }
    }
    return out;
  }

  // Per-mode complex weights c_j(s) so that q = Re Σ_{j≥0} c_j(s) e^{ijθ}.
  std::vector<std::complex<double>> analytic_weights(const SurfaceProfile& surface, double s) const {
    std::vector<std::complex<double>> w(theta_degree() + 1, 0.0);
    for (const auto& t : terms_) {
      const double g = t.profile(surface, s);
      if (t.trig == Trig::Cos)
        w[t.mode] += g;
      else if (t.mode != 0)
        w[t.mode] += std::complex<double>(0.0, -g);
    }
    return w;
  }

  // Range of q over the surface, sampled on a tensor grid.
  std::pair<double, double> range(const SurfaceProfile& surface, int ns = 400, int ntheta = 256) const {
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i <= ns; ++i) {
      const double s = surface.length() * i / ns;
      for (int k = 0; k < (rotational() ? 1 : ntheta); ++k) {
        const double v = (*this)(surface, s, 2.0 * std::numbers::pi * k / ntheta);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return {lo, hi};
  }

  std::string id() const {
    std::string out = name_;
    char buf[64];
    for (const auto& t : terms_) {
      std::snprintf(buf, sizeof buf, "|%d%c%d", t.mode, t.trig == Trig::Cos ? 'c' : 's', static_cast<int>(t.profile.kind));
      out += buf;
      for (double c : t.profile.coeffs) {
        std::snprintf(buf, sizeof buf, ",%.17g", c);
        out += buf;
      }
      std::snprintf(buf, sizeof buf, ";%d;%.17g;%d;%.17g", t.profile.power, t.profile.kappa, t.profile.order,
                    t.profile.tilt);
      out += buf;
    }
    return out;
  }

 private:
  std::string name_;
  std::vector<ObservableTerm> terms_;
};

namespace observables {

inline Observable constant(double c) {
  return Observable("constant", {{0, Trig::Cos, {ProfileKind::CosSeries, {c}}}});
}

// q(s) = cos(k s)
inline Observable cos_ks(int k) {
  std::vector<double> c(k + 1, 0.0);
  c[k] = 1.0;
  return Observable("cos" + std::to_string(k) + "s", {{0, Trig::Cos, {ProfileKind::CosSeries, c}}});
}

// q = cos(jθ) with constant s-profile. Not smooth at the poles for j > 0; only
// used for torus/flow averages, which never visit the poles.
inline Observable cos_theta(int j, double amplitude = 1.0) {
  return Observable("cos" + std::to_string(j) + "theta", {{j, Trig::Cos, {ProfileKind::CosSeries, {amplitude}}}});
}

// q = sin(s)^j cos(jθ): Re((x + iy)^j) on the round sphere, analytic on M.
inline Observable harmonic(int j, double amplitude = 1.0) {
  return Observable("harmonic" + std::to_string(j), {{j, Trig::Cos, {ProfileKind::SinPowerCos, {amplitude}, j}}});
}

// Degree-J truncation of exp(κ u(s) cos θ) = I_0(κu) + 2 Σ_j I_j(κu) cos(jθ),
// optionally times (1 + tilt cos s) to break the s -> L - s reflection.
inline Observable exp_x(double kappa, int degree, double tilt = 0.0) {
  std::vector<ObservableTerm> terms;
  for (int j = 0; j <= degree; ++j) {
    SProfile p;
    p.kind = ProfileKind::BesselOfU;
    p.kappa = kappa;
    p.order = j;
    p.tilt = tilt;
    if (j > 0) p.coeffs = {2.0};
    terms.push_back({j, Trig::Cos, p});
  }
  return Observable(tilt == 0.0 ? "exp-x" : "exp-x-tilted", std::move(terms));
}

// Termwise sum; names are joined with '+'.
inline Observable sum(const Observable& a, const Observable& b) {
  auto terms = a.terms();
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return Observable(a.name() + "+" + b.name(), std::move(terms));
}

}  // namespace observables
}  // namespace revspec
