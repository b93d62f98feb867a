#pragma once

// Fock space on C with weight e^{-|z|²/h}: Bergman kernel, Toeplitz matrices in
// the monomial basis, trace-class checks, Legendre transforms and the Parseval
// weights of exponential modes on a cylinder.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "revspec/errors.hpp"
#include "revspec/quadrature.hpp"

namespace revspec {

using cplx = std::complex<double>;

/// e_k(z) = z^k / sqrt(π h^{k+1} k!)
struct FockBasis {
  double h = 0.1;
  int M = 10;

  FockBasis(double h_, int M_) : h(h_), M(M_) {
    require(h > 0.0, ErrorKind::DomainError, "h must be positive");
    require(M >= 1, ErrorKind::DomainError, "basis needs at least one element");
  }

  double log_norm(int k) const {
    return 0.5 * (std::log(std::numbers::pi) + (k + 1) * std::log(h) + std::lgamma(k + 1.0));
  }

  // |e_k(r e^{iφ})| e^{-r²/2h}
  double radial(int k, double r) const {
    if (r == 0.0) return k == 0 ? std::exp(-log_norm(0)) : 0.0;
    return std::exp(k * std::log(r) - r * r / (2.0 * h) - log_norm(k));
  }

  cplx operator()(int k, cplx z) const {
    if (z == 0.0) return k == 0 ? std::exp(-log_norm(0)) : 0.0;
    return std::exp(double(k) * std::log(z) - log_norm(k));
  }
};

inline cplx bergman_kernel(cplx x, cplx y, double h) {
  return std::exp(x * std::conj(y) / h) / (std::numbers::pi * h);
}

/// Symbol on C in polar coordinates, supported in r ≤ R.
struct PlaneSymbol {
  std::string id;
  double R = 1.0;
  bool radial = true;
  std::function<double(double r, double phi)> f;

  double operator()(double r, double phi) const { return r >= R ? 0.0 : f(r, phi); }
};

namespace symbols {

inline PlaneSymbol disc(double R) {
  return {"disc", R, true, [](double, double) { return 1.0; }};
}

// exp(1 - 1/(1 - (r/R)²)), peak value 1 at the origin.
inline PlaneSymbol bump(double R = 1.0) {
  return {"bump", R, true, [R](double r, double) {
            const double t = r / R;
            return t >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t));
          }};
}

inline PlaneSymbol lobed_bump(double R = 1.0, double c = 0.5) {
  auto b = bump(R);
  return {"bump-lobed", R, false, [b, c](double r, double phi) { return b.f(r, phi) * (1.0 + c * std::cos(phi)); }};
}

inline PlaneSymbol zero(double R = 1.0) {
  return {"zero", R, true, [](double, double) { return 0.0; }};
}

}  // namespace symbols

struct RadialRule {
  std::vector<double> x, w;
};

// 20-point Gauss-Legendre on `panels` equal pieces of [a, b].
inline RadialRule gauss_panels(double a, double b, int panels) {
  using G = boost::math::quadrature::gauss<double, 20>;
  RadialRule rule;
  const double step = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * step, half = 0.5 * step;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
      const double xi = G::abscissa()[i], wi = G::weights()[i];
      if (xi == 0.0) {
        rule.x.push_back(c);
        rule.w.push_back(half * wi);
      } else {
        rule.x.push_back(c - half * xi);
        rule.w.push_back(half * wi);
        rule.x.push_back(c + half * xi);
        rule.w.push_back(half * wi);
      }
    }
  }
  return rule;
}

inline int radial_panels(double R, double h) { return std::max(8, int(std::ceil(4.0 * R / std::sqrt(h)))); }

/// ∫ p dA
inline double symbol_mass(const PlaneSymbol& p, int panels = 64, int n_phi = 128) {
  const auto rule = gauss_panels(0.0, p.R, panels);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    double ang = 0.0;
    if (p.radial) {
      ang = 2.0 * std::numbers::pi * p(rule.x[i], 0.0);
    } else {
      for (int j = 0; j < n_phi; ++j) ang += p(rule.x[i], 2.0 * std::numbers::pi * j / n_phi);
      ang *= 2.0 * std::numbers::pi / n_phi;
    }
    acc += rule.w[i] * rule.x[i] * ang;
  }
  return acc;
}

struct ToeplitzMatrix {
  Eigen::MatrixXcd entries;
  std::string symbol_id;
  double h = 0.0;
  int radial_nodes = 0;
  int angular_nodes = 0;
  double hermitian_defect = 0.0;  // max |T - T*|
};

/// T_jk = ⟨p e_k, e_j⟩ in L²(e^{-|z|²/h} dA), polar tensor quadrature.
inline ToeplitzMatrix toeplitz_matrix(const PlaneSymbol& p, const FockBasis& basis, int panels = 0) {
  const int M = basis.M;
  if (panels <= 0) panels = radial_panels(p.R, basis.h);
  const auto rule = gauss_panels(0.0, p.R, panels);
  const int n_phi = p.radial ? 1 : 2 * M + 64;
  ToeplitzMatrix T;
  T.symbol_id = p.id;
  T.h = basis.h;
  T.radial_nodes = int(rule.x.size());
  T.angular_nodes = n_phi;
  T.entries = Eigen::MatrixXcd::Zero(M, M);

  std::vector<double> amp(M);
  std::vector<cplx> P(2 * M - 1);
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double r = rule.x[i];
    for (int k = 0; k < M; ++k) amp[k] = basis.radial(k, r);
    // P[m + M - 1] = ∫ p(r, φ) e^{imφ} dφ
    std::fill(P.begin(), P.end(), cplx(0.0));
    if (p.radial) {
      P[M - 1] = 2.0 * std::numbers::pi * p(r, 0.0);
    } else {
      for (int j = 0; j < n_phi; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / n_phi;
        const double v = p(r, phi) * 2.0 * std::numbers::pi / n_phi;
        if (v == 0.0) continue;
        for (int m = -(M - 1); m <= M - 1; ++m) P[m + M - 1] += v * std::polar(1.0, m * phi);
      }
    }
    const double wr = rule.w[i] * r;
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k) {
        const cplx a = P[k - j + M - 1];
        if (a != 0.0) T.entries(j, k) += wr * amp[j] * amp[k] * a;
      }
  }
  T.hermitian_defect = (T.entries - T.entries.adjoint()).cwiseAbs().maxCoeff();
  return T;
}

inline double trace_norm(const Eigen::MatrixXcd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
  return svd.singularValues().sum();
}

inline double trace_norm(const ToeplitzMatrix& T) { return trace_norm(T.entries); }

struct TraceBoundRow {
  double h = 0.0;
  int M = 0;
  double tail_bound = 0.0;
  double trace = 0.0;
  double trace_norm = 0.0;
  double mass = 0.0;
  double ratio = 0.0;         // tr · πh / ∫p
  double min_eigen = 0.0;
  double op_norm = 0.0;
  bool trace_identity = false;  // |ratio - 1| ≤ 1e-6
  bool positivity = false;      // |‖T‖_tr - tr| ≤ 1e-8 max(1, tr)
};

struct TraceBoundReport {
  std::string symbol_id;
  std::vector<TraceBoundRow> rows;
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.trace_identity && r.positivity; });
  }
};

// Smallest M with Σ_{k≥M} P(k+1, R²/h) < tol; sup p ≤ 1 is assumed by the builtins.
inline int truncation_size(double R, double h, double tol, int cap) {
  const double x = R * R / h;
  std::vector<double> t;
  for (int k = 0; k < cap + 1; ++k) {
    t.push_back(boost::math::gamma_p(k + 1.0, x));
    if (k > x && t.back() < 1e-30) break;
  }
  double tail = 0.0;
  int M = int(t.size());
  while (M > 1 && tail + t[M - 1] < tol) tail += t[--M];
  if (M > cap || (M == int(t.size()) && t.back() >= 1e-30))
    fail(ErrorKind::TruncationTooSmall, "basis cap too small for the requested truncation tail");
  return M;
}

inline TraceBoundReport verify_trace_bound(const PlaneSymbol& p, const std::vector<double>& h_list,
                                           double tail_tol = 1e-8, int M_cap = 1500) {
  TraceBoundReport rep;
  rep.symbol_id = p.id;
  const double mass = symbol_mass(p);
  for (double h : h_list) {
    TraceBoundRow row;
    row.h = h;
    row.M = truncation_size(p.R, h, tail_tol, M_cap);
    for (int k = row.M;; ++k) {
      const double t = boost::math::gamma_p(k + 1.0, p.R * p.R / h);
      row.tail_bound += t;
      if (t < 1e-30) break;
    }
    const auto T = toeplitz_matrix(p, FockBasis(h, row.M));
    row.trace = T.entries.trace().real();
    row.trace_norm = trace_norm(T);
    row.mass = mass;
    row.ratio = mass == 0.0 ? (row.trace == 0.0 ? 1.0 : INFINITY) : row.trace * std::numbers::pi * h / mass;
    Eigen::MatrixXcd H = 0.5 * (T.entries + T.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    row.min_eigen = es.eigenvalues().minCoeff();
    row.op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    row.trace_identity = mass == 0.0 ? row.trace == 0.0 : std::abs(row.ratio - 1.0) <= 1e-6;
    row.positivity = std::abs(row.trace_norm - row.trace) <= 1e-8 * std::max(1.0, row.trace);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- Legendre transforms on uniform grids ----

struct SampledFunction {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  double x(std::size_t i) const { return x0 + double(i) * dx; }
  double x_last() const { return x(y.size() - 1); }

  static SampledFunction sample(const std::function<double(double)>& f, double a, double b, int n) {
    require(n >= 3 && b > a, ErrorKind::DomainError, "need at least 3 samples on a nondegenerate interval");
    SampledFunction s{a, (b - a) / (n - 1), {}};
    s.y.resize(n);
    for (int i = 0; i < n; ++i) s.y[i] = f(s.x(i));
    return s;
  }
};

inline void require_convex(const SampledFunction& f) {
  require(f.size() >= 3, ErrorKind::NotConvex, "too few samples to test convexity");
  for (std::size_t i = 1; i + 1 < f.size(); ++i)
    if (!(f.y[i + 1] - 2.0 * f.y[i] + f.y[i - 1] > 0.0))
      fail(ErrorKind::NotConvex, "second difference not positive at x = " + std::to_string(f.x(i)));
}

/// sup_x (xξ - f(x)) over the grid, refined by a parabola through the maximizer and its neighbours.
inline double legendre_at(const SampledFunction& f, double xi) {
  std::size_t best = 0;
  double bv = -INFINITY;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f.x(i) * xi - f.y[i];
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == f.size()) return bv;
  const double gm = f.x(best - 1) * xi - f.y[best - 1], gp = f.x(best + 1) * xi - f.y[best + 1];
  const double curv = gm - 2.0 * bv + gp;
  if (curv >= 0.0) return bv;
  const double d = 0.5 * (gm - gp) / curv;
  return bv - 0.25 * (gm - gp) * d;
}

// Slopes at the two ends from one-sided second-order differences.
inline std::pair<double, double> end_slopes(const SampledFunction& f) {
  const std::size_t n = f.size();
  const double a = (-3.0 * f.y[0] + 4.0 * f.y[1] - f.y[2]) / (2.0 * f.dx);
  const double b = (3.0 * f.y[n - 1] - 4.0 * f.y[n - 2] + f.y[n - 3]) / (2.0 * f.dx);
  return {a, b};
}

/// Lf sampled on [xi_lo, xi_hi] with n points; the default range is the slope range of f.
inline SampledFunction legendre_transform(const SampledFunction& f, double xi_lo, double xi_hi, int n) {
  require_convex(f);
  SampledFunction out{xi_lo, (xi_hi - xi_lo) / (n - 1), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) out.y[i] = legendre_at(f, out.x(i));
  return out;
}

inline SampledFunction legendre_transform(const SampledFunction& f) {
  require_convex(f);
  const auto [a, b] = end_slopes(f);
  return legendre_transform(f, a, b, int(f.size()));
}

/// Max |L(Lf) - f| over the grid of f.
inline double legendre_involution_defect(const SampledFunction& f) {
  const auto Lf = legendre_transform(f);
  const auto LLf = legendre_transform(Lf, f.x0, f.x_last(), int(f.size()));
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(LLf.y[i] - f.y[i]));
  return m;
}

struct DualityReport {
  double defect = 0.0;  // max over η of |(LΦ3)(-η) - (η²/2 - √ε Φ1(η))|
  double grid_spacing = 0.0;
  int points = 0;
};

/// Builds Φ3(t) = sup_η (√ε Φ1(η) - η²/2 - ηt) on a t-grid, then compares (LΦ3)(-η) with η²/2 - √ε Φ1(η).
inline DualityReport weight_duality(const std::function<double(double)>& Phi1, double sqrt_eps, double eta_lo,
                                    double eta_hi, int n) {
  const auto f = SampledFunction::sample([&](double e) { return 0.5 * e * e - sqrt_eps * Phi1(e); }, eta_lo, eta_hi, n);
  require_convex(f);
  // Φ3(t) = (Lf)(-t); t ranges over minus the slope range of f.
  const auto [a, b] = end_slopes(f);
  SampledFunction Phi3{-b, (b - a) / (n - 1), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) Phi3.y[i] = legendre_at(f, -Phi3.x(i));
  require_convex(Phi3);
  DualityReport rep;
  rep.grid_spacing = f.dx;
  rep.points = n;
  for (int i = 0; i < n; ++i) {
    const double eta = f.x(i);
    rep.defect = std::max(rep.defect, std::abs(legendre_at(Phi3, -eta) - f.y[i]));
  }
  return rep;
}

// ---- Parseval weights on the cylinder ----

struct CylinderWeight {
  std::string id;
  std::function<double(double)> phi, dphi, d2phi;
};

namespace weights {

inline CylinderWeight quadratic() {
  return {"quadratic", [](double t) { return 0.5 * t * t; }, [](double t) { return t; }, [](double) { return 1.0; }};
}

// t²/2 + c t⁴
inline CylinderWeight quartic(double c) {
  return {"quartic", [c](double t) { return 0.5 * t * t + c * t * t * t * t; },
          [c](double t) { return t + 4.0 * c * t * t * t; }, [c](double t) { return 1.0 + 12.0 * c * t * t; }};
}

}  // namespace weights

struct ParsevalRow {
  long k = 0;
  double t_crit = 0.0;
  double legendre = 0.0;  // LΦ(-kh)
  double log_direct = 0.0;
  double log_laplace = 0.0;
  double discrepancy = 0.0;  // |direct / laplace - 1|
};

struct ParsevalReport {
  std::string weight_id;
  double h = 0.0;
  std::vector<ParsevalRow> rows;
  double max_discrepancy() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.discrepancy);
    return m;
  }
};

/// ‖e^{ikz}‖² two ways: 2π∫exp(-(2/h)(Φ(t)+kht))dt by quadrature, and the Laplace term h^{1/2} a0 e^{(2/h)LΦ(-kh)}.
inline ParsevalReport parseval_check(const CylinderWeight& W, double h, long k_lo, long k_hi) {
  require(h > 0.0 && k_hi >= k_lo, ErrorKind::DomainError, "bad Parseval request");
  ParsevalReport rep;
  rep.weight_id = W.id;
  rep.h = h;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double s = k * h;
    // Φ'(t) = -s by Newton from t = -s.
    double t = -s;
    for (int it = 0; it < 200; ++it) {
      const double d2 = W.d2phi(t);
      if (!(d2 > 0.0)) fail(ErrorKind::NotConvex, "weight is not strictly convex near t = " + std::to_string(t));
      const double step = (W.dphi(t) + s) / d2;
      t -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(t))) break;
    }
    const double g0 = W.phi(t) + s * t;
    const double c2 = W.d2phi(t);
    if (!(c2 > 0.0)) fail(ErrorKind::NotConvex, "weight is not strictly convex at the critical point");
    const double width = std::sqrt(h / c2);
    const double lo = t - 40.0 * width, hi = t + 40.0 * width;
    const double I = composite_gauss([&](double u) { return std::exp(-(2.0 / h) * (W.phi(u) + s * u - g0)); }, lo,
                                     hi, 64);
    const double laplace = std::sqrt(std::numbers::pi * h / c2);
    ParsevalRow row;
    row.k = k;
    row.t_crit = t;
    row.legendre = -g0;
    row.log_direct = std::log(2.0 * std::numbers::pi * I) - (2.0 / h) * g0;
    row.log_laplace = 0.5 * std::log(h) + std::log(2.0 * std::numbers::pi * std::sqrt(std::numbers::pi / c2)) +
                      (2.0 / h) * row.legendre;
    row.discrepancy = std::abs(I / laplace - 1.0);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace revspec
