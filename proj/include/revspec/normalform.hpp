#pragma once

// Fourier series in angles x ∈ T² with coefficients sampled on a ξ-grid:
// averaging, Poisson brackets, homological equations, Lie-series secular
// reduction and the G_T weight.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "revspec/classical.hpp"
#include "revspec/errors.hpp"

namespace revspec {

using cplx = std::complex<double>;

struct XiGrid {
  double lo1 = -1.0, hi1 = 1.0;
  int n1 = 3;
  double lo2 = -1.0, hi2 = 1.0;
  int n2 = 3;

  int size() const { return n1 * n2; }
  int index(int i, int j) const { return i * n2 + j; }
  double d1() const { return n1 > 1 ? (hi1 - lo1) / (n1 - 1) : 0.0; }
  double d2() const { return n2 > 1 ? (hi2 - lo2) / (n2 - 1) : 0.0; }
  double xi1(int i) const { return lo1 + i * d1(); }
  double xi2(int j) const { return lo2 + j * d2(); }

  bool operator==(const XiGrid& o) const {
    return lo1 == o.lo1 && hi1 == o.hi1 && n1 == o.n1 && lo2 == o.lo2 && hi2 == o.hi2 && n2 == o.n2;
  }
};

using Mode = std::pair<int, int>;
using Coeff = std::vector<cplx>;

struct FourierTaylorSymbol {
  XiGrid grid;
  int K_max = 4;
  std::map<Mode, Coeff> coeffs;
  bool real_valued = false;

  FourierTaylorSymbol() = default;
  FourierTaylorSymbol(const XiGrid& g, int K) : grid(g), K_max(K) {}

  bool in_range(const Mode& k) const { return std::abs(k.first) <= K_max && std::abs(k.second) <= K_max; }

  Coeff& at(const Mode& k) {
    require(in_range(k), ErrorKind::DomainError, "mode outside the cutoff");
    auto it = coeffs.find(k);
    if (it == coeffs.end()) it = coeffs.emplace(k, Coeff(grid.size(), 0.0)).first;
    return it->second;
  }

  Coeff coefficient(const Mode& k) const {
    auto it = coeffs.find(k);
    return it == coeffs.end() ? Coeff(grid.size(), 0.0) : it->second;
  }

  // Adds f(ξ1, ξ2) e^{i k·x}.
  FourierTaylorSymbol& add_mode(const Mode& k, const std::function<cplx(double, double)>& f) {
    auto& c = at(k);
    for (int i = 0; i < grid.n1; ++i)
      for (int j = 0; j < grid.n2; ++j) c[grid.index(i, j)] += f(grid.xi1(i), grid.xi2(j));
    return *this;
  }

  static FourierTaylorSymbol xi_function(const XiGrid& g, int K, const std::function<double(double, double)>& f) {
    FourierTaylorSymbol s(g, K);
    s.add_mode({0, 0}, [&](double a, double b) { return cplx(f(a, b)); });
    s.real_valued = true;
    return s;
  }

  bool xi_only() const {
    for (const auto& [k, c] : coeffs)
      if (k != Mode{0, 0})
        for (const auto& z : c)
          if (z != 0.0) return false;
    return true;
  }

  // Σ_k sup_ξ |c_k|, an upper bound for sup over (x, ξ).
  double norm() const {
    double acc = 0.0;
    for (const auto& [k, c] : coeffs) {
      double m = 0.0;
      for (const auto& z : c) m = std::max(m, std::abs(z));
      acc += m;
    }
    return acc;
  }

  // max over modes and ξ of |c_k|
  double max_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : coeffs)
      for (const auto& z : c) m = std::max(m, std::abs(z));
    return m;
  }

  cplx value(double x1, double x2, int xi_index) const {
    cplx acc = 0.0;
    for (const auto& [k, c] : coeffs) acc += c[xi_index] * std::polar(1.0, k.first * x1 + k.second * x2);
    return acc;
  }

  // sup over an nx × nx angle grid at one ξ node.
  double sup_x(int xi_index, int nx = 32) const {
    double m = 0.0;
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < nx; ++b)
        m = std::max(m, std::abs(value(2 * std::numbers::pi * a / nx, 2 * std::numbers::pi * b / nx, xi_index)));
    return m;
  }

  FourierTaylorSymbol& operator+=(const FourierTaylorSymbol& o) {
    require(grid == o.grid, ErrorKind::GridMismatch, "symbols live on different ξ-grids");
    for (const auto& [k, c] : o.coeffs) {
      if (!in_range(k)) continue;
      auto& t = at(k);
      for (std::size_t i = 0; i < c.size(); ++i) t[i] += c[i];
    }
    real_valued = real_valued && o.real_valued;
    return *this;
  }
  FourierTaylorSymbol& operator*=(cplx s) {
    for (auto& [k, c] : coeffs)
      for (auto& z : c) z *= s;
    if (s.imag() != 0.0) real_valued = false;
    return *this;
  }
  friend FourierTaylorSymbol operator+(FourierTaylorSymbol a, const FourierTaylorSymbol& b) { return a += b; }
  friend FourierTaylorSymbol operator-(FourierTaylorSymbol a, FourierTaylorSymbol b) { return a += (b *= -1.0); }
  friend FourierTaylorSymbol operator*(cplx s, FourierTaylorSymbol a) { return a *= s; }

  // Largest |c_{-k} - conj(c_k)|.
  double reality_defect() const {
    double m = 0.0;
    for (const auto& [k, c] : coeffs) {
      const auto o = coefficient({-k.first, -k.second});
      for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(o[i] - std::conj(c[i])));
    }
    return m;
  }
};

namespace detail {

// Centered ξ-differences, second-order one-sided at the edges (exact on quadratics).
inline Coeff d_xi(const XiGrid& g, const Coeff& c, int dir) {
  Coeff out(c.size(), 0.0);
  const int n = dir == 1 ? g.n1 : g.n2;
  const double h = dir == 1 ? g.d1() : g.d2();
  if (n < 3) return out;
  auto at = [&](int i, int j) { return c[g.index(i, j)]; };
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const int t = dir == 1 ? i : j;
      auto f = [&](int o) { return dir == 1 ? at(i + o, j) : at(i, j + o); };
      cplx v;
      if (t == 0)
        v = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
      else if (t == n - 1)
        v = (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h);
      else
        v = (f(1) - f(-1)) / (2.0 * h);
      out[g.index(i, j)] = v;
    }
  return out;
}

}  // namespace detail

inline FourierTaylorSymbol average_x2(const FourierTaylorSymbol& s) {
  FourierTaylorSymbol out(s.grid, s.K_max);
  out.real_valued = s.real_valued;
  for (const auto& [k, c] : s.coeffs)
    if (k.second == 0) out.coeffs[k] = c;
  return out;
}

inline FourierTaylorSymbol average_x1(const FourierTaylorSymbol& s) {
  FourierTaylorSymbol out(s.grid, s.K_max);
  out.real_valued = s.real_valued;
  for (const auto& [k, c] : s.coeffs)
    if (k.first == 0) out.coeffs[k] = c;
  return out;
}

// Modes with k2 ≠ 0.
inline FourierTaylorSymbol x2_dependent(const FourierTaylorSymbol& s) {
  FourierTaylorSymbol out(s.grid, s.K_max);
  for (const auto& [k, c] : s.coeffs)
    if (k.second != 0) out.coeffs[k] = c;
  return out;
}

/// {f, g} = f_ξ·g_x - f_x·g_ξ; products beyond K_max are dropped and their norm added to *tail.
inline FourierTaylorSymbol poisson_bracket(const FourierTaylorSymbol& f, const FourierTaylorSymbol& g,
                                           double* tail = nullptr) {
  require(f.grid == g.grid, ErrorKind::GridMismatch, "symbols live on different ξ-grids");
  const XiGrid& G = f.grid;
  const int K = std::min(f.K_max, g.K_max);
  FourierTaylorSymbol out(G, K);
  out.real_valued = f.real_valued && g.real_valued;
  std::map<Mode, std::pair<Coeff, Coeff>> df, dg;
  for (const auto& [k, c] : f.coeffs) df[k] = {detail::d_xi(G, c, 1), detail::d_xi(G, c, 2)};
  for (const auto& [k, c] : g.coeffs) dg[k] = {detail::d_xi(G, c, 1), detail::d_xi(G, c, 2)};
  const cplx I(0.0, 1.0);
  double dropped = 0.0;
  for (const auto& [kf, cf] : f.coeffs) {
    const auto& [f1, f2] = df[kf];
    for (const auto& [kg, cg] : g.coeffs) {
      const auto& [g1, g2] = dg[kg];
      const Mode k{kf.first + kg.first, kf.second + kg.second};
      Coeff term(G.size());
      double m = 0.0;
      for (int i = 0; i < G.size(); ++i) {
        term[i] = f1[i] * (I * double(kg.first)) * cg[i] + f2[i] * (I * double(kg.second)) * cg[i] -
                  (I * double(kf.first)) * cf[i] * g1[i] - (I * double(kf.second)) * cf[i] * g2[i];
        m = std::max(m, std::abs(term[i]));
      }
      if (m == 0.0) continue;
      if (!out.in_range(k)) {
        dropped += m;
        continue;
      }
      auto& t = out.at(k);
      for (int i = 0; i < G.size(); ++i) t[i] += term[i];
    }
  }
  if (tail) *tail += dropped;
  return out;
}

struct HomologicalSolution {
  FourierTaylorSymbol G;
  FourierTaylorSymbol dropped;
};

inline std::vector<std::pair<Coeff, Coeff>> xi_gradient(const FourierTaylorSymbol& p) {
  const auto c = p.coefficient({0, 0});
  return {{detail::d_xi(p.grid, c, 1), detail::d_xi(p.grid, c, 2)}};
}

/// Ĝ = r̂hs / (i p'(ξ)·k) where |p'·k| ≥ floor; the rest goes to `dropped`. The k = 0 mode is left out.
inline HomologicalSolution solve_homological(const FourierTaylorSymbol& p, const FourierTaylorSymbol& rhs,
                                             double floor = 1e-6) {
  require(p.grid == rhs.grid, ErrorKind::GridMismatch, "symbols live on different ξ-grids");
  require(p.xi_only(), ErrorKind::DomainError, "homological operator needs an x-independent p");
  const auto grad = xi_gradient(p).front();
  HomologicalSolution sol{FourierTaylorSymbol(rhs.grid, rhs.K_max), FourierTaylorSymbol(rhs.grid, rhs.K_max)};
  const cplx I(0.0, 1.0);
  for (const auto& [k, c] : rhs.coeffs) {
    if (k == Mode{0, 0}) continue;
    Coeff g(c.size(), 0.0), dr(c.size(), 0.0);
    bool any_g = false, any_d = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const cplx div = grad.first[i] * double(k.first) + grad.second[i] * double(k.second);
      if (std::abs(div) >= floor) {
        g[i] = c[i] / (I * div);
        any_g = any_g || g[i] != 0.0;
      } else {
        dr[i] = c[i];
        any_d = any_d || c[i] != 0.0;
      }
    }
    if (any_g) sol.G.coeffs[k] = std::move(g);
    if (any_d) sol.dropped.coeffs[k] = std::move(dr);
  }
  return sol;
}

/// H_p G = {p, G} for x-independent p.
inline FourierTaylorSymbol hamilton_derivative(const FourierTaylorSymbol& p, const FourierTaylorSymbol& G) {
  return poisson_bracket(p, G);
}

struct ReductionReport {
  int order = 0;
  std::vector<double> residual;      // x2-dependent part after each step
  std::vector<double> dropped_norm;  // small-divisor modes per step
  std::vector<double> tail_norm;     // Lie-series truncation beyond K_max per step
  double final_residual = 0.0;
  bool divergence_warning = false;
};

struct SecularResult {
  FourierTaylorSymbol normal_form;
  ReductionReport report;
};

/// Iterated x2-averaging of p + iεq by Lie transforms exp(t ad_G), t = iε^j.
inline SecularResult secular_reduce(const FourierTaylorSymbol& p, const FourierTaylorSymbol& q, double eps, int N,
                                    int lie_order, double floor = 1e-6) {
  require(N >= 1, ErrorKind::DomainError, "secular_reduce needs N >= 1");
  require(lie_order >= N + 1, ErrorKind::DomainError, "lie_order must be at least N + 1");
  FourierTaylorSymbol P = p + cplx(0.0, eps) * q;
  SecularResult out;
  out.report.order = N;
  for (int j = 1; j <= N; ++j) {
    const cplx t(0.0, std::pow(eps, j));
    const auto R = x2_dependent(P - p);
    auto sol = solve_homological(p, (1.0 / t) * R, floor);
    double tail = 0.0;
    FourierTaylorSymbol term = P, acc = P;
    for (int n = 1; n <= lie_order; ++n) {
      term = (t / double(n)) * poisson_bracket(sol.G, term, &tail);
      acc += term;
    }
    P = acc;
    const double res = x2_dependent(P - p).norm();
    if (!out.report.residual.empty() && res > out.report.residual.back()) out.report.divergence_warning = true;
    out.report.residual.push_back(res);
    out.report.dropped_norm.push_back(std::abs(t) * sol.dropped.norm());
    out.report.tail_norm.push_back(tail);
  }
  out.report.final_residual = out.report.residual.back();
  out.normal_form = P;
  return out;
}

/// Ĵ(τ) = (1 - K̂(τ)) / (iτ), Ĵ(0) = 0.
inline cplx j_hat(const Kernel& K, double tau) {
  if (tau == 0.0) return 0.0;
  return (1.0 - K.fourier(tau)) / cplx(0.0, tau);
}

/// Ĝ_T(k, ξ) = T Ĵ(T p'(ξ)·k) q̂(k, ξ); then H_p G_T = q - ⟨q⟩_{T,K}.
inline FourierTaylorSymbol gt_weight(const FourierTaylorSymbol& p, const FourierTaylorSymbol& q, double T,
                                     const Kernel& kernel = {}) {
  require(T >= 1.0, ErrorKind::DomainError, "gt_weight needs T >= 1");
  require(p.grid == q.grid, ErrorKind::GridMismatch, "symbols live on different ξ-grids");
  require(p.xi_only(), ErrorKind::DomainError, "gt_weight needs an x-independent p");
  const auto grad = xi_gradient(p).front();
  FourierTaylorSymbol G(q.grid, q.K_max);
  G.real_valued = q.real_valued;
  for (const auto& [k, c] : q.coeffs) {
    if (k == Mode{0, 0}) continue;
    Coeff g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double w = (grad.first[i] * double(k.first) + grad.second[i] * double(k.second)).real();
      g[i] = T * j_hat(kernel, T * w) * c[i];
    }
    G.coeffs[k] = std::move(g);
  }
  return G;
}

/// ⟨q⟩_{T,K} assembled modewise as K̂(T p'·k) q̂(k).
inline FourierTaylorSymbol smoothed_average(const FourierTaylorSymbol& p, const FourierTaylorSymbol& q, double T,
                                            const Kernel& kernel = {}) {
  const auto grad = xi_gradient(p).front();
  FourierTaylorSymbol out(q.grid, q.K_max);
  for (const auto& [k, c] : q.coeffs) {
    Coeff g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double w = (grad.first[i] * double(k.first) + grad.second[i] * double(k.second)).real();
      g[i] = kernel.fourier(T * w) * c[i];
    }
    out.coeffs[k] = std::move(g);
  }
  return out;
}

/// ‖H_p G - (rhs - dropped - avg)‖ for the solution of the homological equation.
inline double homological_defect(const FourierTaylorSymbol& p, const FourierTaylorSymbol& rhs, double floor = 1e-6) {
  const auto sol = solve_homological(p, rhs, floor);
  FourierTaylorSymbol avg(rhs.grid, rhs.K_max);
  avg.coeffs[{0, 0}] = rhs.coefficient({0, 0});
  return (hamilton_derivative(p, sol.G) - (rhs - sol.dropped - avg)).max_coeff();
}

/// ‖H_p G_T - (q - ⟨q⟩_{T,K})‖
inline double gt_defect(const FourierTaylorSymbol& p, const FourierTaylorSymbol& q, double T, const Kernel& K = {}) {
  return (hamilton_derivative(p, gt_weight(p, q, T, K)) - (q - smoothed_average(p, q, T, K))).max_coeff();
}

/// max over ξ of sup_x |G_T| / (1 + T/(T|ξ1| + 1)), sup_x on an nx × nx angle grid.
inline double gt_bound_constant(const FourierTaylorSymbol& p, const FourierTaylorSymbol& q, double T, int nx = 16,
                                const Kernel& K = {}) {
  const auto G = gt_weight(p, q, T, K);
  double C = 0.0;
  for (int i = 0; i < G.grid.n1; ++i)
    for (int j = 0; j < G.grid.n2; ++j) {
      const double w = 1.0 + T / (T * std::abs(G.grid.xi1(i)) + 1.0);
      C = std::max(C, G.sup_x(G.grid.index(i, j), nx) / w);
    }
  return C;
}

// Builtin test symbols: p = ξ2 + ξ1², and a real q with modes (±1,0), (0,±1), (±1,±1).
namespace test_symbols {

inline FourierTaylorSymbol p_standard(const XiGrid& g, int K) {
  return FourierTaylorSymbol::xi_function(g, K, [](double a, double b) { return b + a * a; });
}

inline FourierTaylorSymbol q_standard(const XiGrid& g, int K) {
  FourierTaylorSymbol q(g, K);
  q.real_valued = true;
  auto c10 = [](double a, double) { return cplx(0.5 * (1.0 + a)); };
  auto c01 = [](double, double) { return cplx(0.5); };
  auto c11 = [](double, double b) { return cplx(0.25 * (1.0 + b)); };
  q.add_mode({1, 0}, c10).add_mode({-1, 0}, c10);
  q.add_mode({0, 1}, c01).add_mode({0, -1}, c01);
  q.add_mode({1, 1}, c11).add_mode({-1, -1}, c11);
  return q;
}

// Same modes with ξ-independent coefficients; used for the G_T bound.
inline FourierTaylorSymbol q_flat(const XiGrid& g, int K) {
  FourierTaylorSymbol q(g, K);
  q.real_valued = true;
  auto half = [](double, double) { return cplx(0.5); };
  auto quarter = [](double, double) { return cplx(0.25); };
  q.add_mode({1, 0}, half).add_mode({-1, 0}, half);
  q.add_mode({0, 1}, half).add_mode({0, -1}, half);
  q.add_mode({1, 1}, quarter).add_mode({-1, -1}, quarter);
  return q;
}

// Trig polynomial with |k|∞ ≤ 2 and coefficients a + b ξ1 ξ2, a, b complex from `next`.
template <class Rng>
FourierTaylorSymbol random_trig(const XiGrid& g, int K, Rng& next) {
  FourierTaylorSymbol r(g, K);
  for (int k1 = -2; k1 <= 2; ++k1)
    for (int k2 = -2; k2 <= 2; ++k2) {
      const cplx a(next(), next()), b(next(), next());
      r.add_mode({k1, k2}, [&](double x, double y) { return a + b * x * y; });
    }
  return r;
}

}  // namespace test_symbols

}  // namespace revspec
