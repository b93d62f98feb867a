#pragma once

// Finite-difference discretizations of P_eps = -h²Δ + i eps q on a surface of
// revolution, and complex eigensolvers for them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"
#include "revspec/observable.hpp"
#include "revspec/parallel.hpp"

namespace revspec {

using cplx = std::complex<double>;

enum class Discretization {
  Weighted,   // cell-centred, flux form with weight u, symmetrized by diag(√u)
  Liouville,  // nodal interior grid, ψ = √u f, potential (m²-1/4)/u² + W
};

inline std::string to_string(Discretization d) { return d == Discretization::Weighted ? "weighted" : "liouville"; }

struct GridSpec {
  int N = 0;
  double dx = 0.0;
  Discretization form = Discretization::Weighted;

  double node(int i) const { return form == Discretization::Weighted ? (i + 0.5) * dx : (i + 1) * dx; }
};

inline GridSpec make_grid(const SurfaceProfile& surface, int N, Discretization form) {
  GridSpec g;
  g.N = N;
  g.form = form;
  g.dx = form == Discretization::Weighted ? surface.length() / N : surface.length() / (N + 1);
  return g;
}

struct OperatorMatrix {
  enum class Storage { Tridiagonal, Dense };
  Storage storage = Storage::Tridiagonal;
  // Tridiagonal complex-symmetric storage: diag[i], off[i] = A(i, i+1) = A(i+1, i).
  std::vector<cplx> diag;
  std::vector<cplx> off;
  Eigen::MatrixXcd dense;

  int n = 0;
  GridSpec grid;
  std::string mode;  // "m=<k>" or "coupled-2d[:cos|:sin]"
  int m = 0;
  int M_theta = 0;
  double h = 0.0;
  double eps = 0.0;
  std::string q_id;

  Eigen::MatrixXcd to_dense() const {
    if (storage == Storage::Dense) return dense;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = off[i];
    return A;
  }

  double norm_inf() const {
    if (storage == Storage::Dense) return dense.cwiseAbs().rowwise().sum().maxCoeff();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = std::abs(diag[i]);
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < n) r += std::abs(off[i]);
      best = std::max(best, r);
    }
    return best;
  }
};

struct ModeOptions {
  Discretization form = Discretization::Weighted;
  double E_top = 1.0;     // top of the energy window, for the resolution check
  double min_ppw = 20.0;  // grid points per wavelength at E_top
  int min_N = 200;
};

inline void check_resolution(const SurfaceProfile& surface, double h, int N, const ModeOptions& opt) {
  require(N >= opt.min_N, ErrorKind::GridTooCoarse, "N must be at least " + std::to_string(opt.min_N));
  const double ppw = 2.0 * std::numbers::pi * h * N / (surface.length() * std::sqrt(std::max(opt.E_top, 1e-300)));
  if (ppw < opt.min_ppw) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.3g points per wavelength at E_top=%.6g (minimum %.3g)", ppw, opt.E_top, opt.min_ppw);
    fail(ErrorKind::GridTooCoarse, buf);
  }
}

namespace detail {

// -(second difference of √s)/√s at s = j dx; its negative replaces
// -1/(4s²) in the m = 0 Liouville potential, so √s stays a discrete zero mode.
inline double pole_kappa(int j, double dx) {
  const double r = (std::sqrt(j + 1.0) + std::sqrt(j - 1.0)) / std::sqrt(double(j));
  return (2.0 - r) / (dx * dx);
}

// Diagonal (without the i eps q term) and off-diagonal of the ε = 0 mode operator.
inline void mode_bands(const SurfaceProfile& surface, double h, int m, const GridSpec& g, std::vector<double>& d,
                       std::vector<double>& e) {
  const int N = g.N;
  const double dx = g.dx, h2 = h * h, idx2 = 1.0 / (dx * dx);
  d.assign(N, 0.0);
  e.assign(std::max(N - 1, 0), 0.0);
  if (g.form == Discretization::Weighted) {
    std::vector<double> uc(N), uf(N + 1);
    for (int i = 0; i < N; ++i) uc[i] = surface.u(g.node(i));
    for (int i = 0; i <= N; ++i) uf[i] = (i == 0 || i == N) ? 0.0 : surface.u(i * dx);
    for (int i = 0; i < N; ++i) {
      d[i] = h2 * ((uf[i] + uf[i + 1]) * idx2 / uc[i] + double(m) * m / (uc[i] * uc[i]));
      if (i + 1 < N) e[i] = -h2 * uf[i + 1] * idx2 / std::sqrt(uc[i] * uc[i + 1]);
    }
    return;
  }
  const double L = surface.length();
  for (int i = 0; i < N; ++i) {
    const double s = g.node(i);
    const auto v = surface.eval(s);
    const double W = v.d2u / (2.0 * v.u) + (1.0 - v.du * v.du) / (4.0 * v.u * v.u);
    double pot;
    if (m == 0) {
      const double sl = s, sr = L - s;
      const double smooth = -0.25 / (v.u * v.u) + 0.25 / (sl * sl) + 0.25 / (sr * sr);
      pot = -pole_kappa(i + 1, dx) - pole_kappa(N - i, dx) + smooth;
    } else {
      pot = (double(m) * m - 0.25) / (v.u * v.u);
    }
    d[i] = h2 * (2.0 * idx2 + pot + W);
    if (i + 1 < N) e[i] = -h2 * idx2;
  }
}

}  // namespace detail

/// Operator on the m-th angular Fourier mode, tridiagonal complex symmetric.
inline OperatorMatrix mode_operator(const SurfaceProfile& surface, double h, int m, double eps, const Observable& q,
                                    int N, const ModeOptions& opt = {}) {
  require(h > 0.0, ErrorKind::DomainError, "h must be positive");
  require(q.rotational(), ErrorKind::DomainError, "mode_operator needs a θ-independent observable");
  check_resolution(surface, h, N, opt);
  OperatorMatrix A;
  A.storage = OperatorMatrix::Storage::Tridiagonal;
  A.grid = make_grid(surface, N, opt.form);
  A.n = N;
  A.m = m;
  A.mode = "m=" + std::to_string(m);
  A.h = h;
  A.eps = eps;
  A.q_id = q.id();
  std::vector<double> d, e;
  detail::mode_bands(surface, h, std::abs(m), A.grid, d, e);
  A.diag.resize(N);
  A.off.assign(e.begin(), e.end());
  for (int i = 0; i < N; ++i) A.diag[i] = cplx(d[i], eps == 0.0 ? 0.0 : eps * q.theta_mean(surface, A.grid.node(i)));
  return A;
}

enum class ParitySector { None, Cos, Sin };

struct Operator2DOptions {
  ModeOptions mode{};
  ParitySector sector = ParitySector::None;
  int size_cap = 6000;
};

/// Coupled operator over angular modes |m| ≤ M_theta (or one parity sector).
inline OperatorMatrix operator_2d(const SurfaceProfile& surface, double h, double eps, const Observable& q, int N_s,
                                  int M_theta, const Operator2DOptions& opt = {}) {
  require(M_theta >= 0, ErrorKind::DomainError, "M_theta must be >= 0");
  require(4 * q.theta_degree() <= std::max(M_theta, 0) || q.rotational(), ErrorKind::DomainError,
          "observable θ-degree exceeds M_theta/4");
  require(opt.sector == ParitySector::None || q.even_in_theta(), ErrorKind::DomainError,
          "parity sectors need q even in θ");
  check_resolution(surface, h, N_s, opt.mode);

  // Angular basis as combinations of normalized exponentials e^{ikθ}.
  struct Basis {
    int m;
    std::vector<std::pair<int, cplx>> comb;
  };
  std::vector<Basis> basis;
  const double r2 = 1.0 / std::sqrt(2.0);
  switch (opt.sector) {
    case ParitySector::None:
      for (int k = -M_theta; k <= M_theta; ++k) basis.push_back({k, {{k, 1.0}}});
      break;
    case ParitySector::Cos:
      basis.push_back({0, {{0, 1.0}}});
      for (int k = 1; k <= M_theta; ++k) basis.push_back({k, {{k, r2}, {-k, r2}}});
      break;
    case ParitySector::Sin:
      for (int k = 1; k <= M_theta; ++k) basis.push_back({k, {{k, cplx(0, -r2)}, {-k, cplx(0, r2)}}});
      break;
  }
  const int B = static_cast<int>(basis.size());
  const long dim = long(B) * N_s;
  if (dim > opt.size_cap)
    fail(ErrorKind::SizeLimit, "coupled dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(opt.size_cap));

  OperatorMatrix A;
  A.storage = OperatorMatrix::Storage::Dense;
  A.grid = make_grid(surface, N_s, opt.mode.form);
  A.n = static_cast<int>(dim);
  A.M_theta = M_theta;
  A.mode = opt.sector == ParitySector::None ? "coupled-2d" : opt.sector == ParitySector::Cos ? "coupled-2d:cos" : "coupled-2d:sin";
  A.h = h;
  A.eps = eps;
  A.q_id = q.id();
  A.dense = Eigen::MatrixXcd::Zero(dim, dim);

  std::vector<double> d, e;
  for (int b = 0; b < B; ++b) {
    detail::mode_bands(surface, h, std::abs(basis[b].m), A.grid, d, e);
    const long o = long(b) * N_s;
    for (int i = 0; i < N_s; ++i) A.dense(o + i, o + i) += d[i];
    for (int i = 0; i + 1 < N_s; ++i) A.dense(o + i, o + i + 1) = A.dense(o + i + 1, o + i) = e[i];
  }
  if (eps != 0.0) {
    for (int i = 0; i < N_s; ++i) {
      const auto qh = q.theta_fourier(surface, A.grid.node(i));
      auto coef = [&](int k) {
        auto it = qh.find(k);
        return it == qh.end() ? cplx(0.0) : it->second;
      };
      for (int b1 = 0; b1 < B; ++b1)
        for (int b2 = 0; b2 < B; ++b2) {
          cplx acc = 0.0;
          for (const auto& [k1, c1] : basis[b1].comb)
            for (const auto& [k2, c2] : basis[b2].comb) acc += std::conj(c1) * c2 * coef(k1 - k2);
          if (acc != 0.0) A.dense(long(b1) * N_s + i, long(b2) * N_s + i) += cplx(0.0, eps) * acc;
        }
    }
  }
  return A;
}

// --- eigensolvers ------------------------------------------------------------

struct Eigenpair {
  cplx value;
  int mode = 0;
  double residual = 0.0;
  bool mirror = false;  // copy of the m > 0 eigenvalue for -m
};

struct SpectrumResult {
  std::vector<Eigenpair> eigen;
  std::string surface_id;
  std::string q_id;
  double h = 0.0;
  double eps = 0.0;
  std::string discretization;
  std::string solver;
  std::string symmetry_note;
};

struct EigenOptions {
  double residual_tol = 1e-8;
  int size_cap = 6000;
};

namespace detail {

// Implicit QL with complex orthogonal rotations for complex-symmetric
// tridiagonal matrices. Returns false on breakdown or non-convergence.
inline bool tridiagonal_ql(std::vector<cplx>& d, std::vector<cplx> e) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0, m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) return false;
        cplx g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        cplx r = std::sqrt(g * g + 1.0);
        if (std::abs(g - r) > std::abs(g + r)) r = -r;
        g = d[m] - d[l] + e[l] / (g + r);
        cplx s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool deflated = false;
        for (i = m - 1; i >= l; --i) {
          cplx f = s * e[i], b = c * e[i];
          r = std::sqrt(f * f + g * g);
          e[i + 1] = r;
          if (std::abs(r) <= 1e-300) {
            d[i + 1] -= p;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          if (std::abs(r) < 1e-8 * (std::abs(f) + std::abs(g))) return false;  // isotropic breakdown
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  for (const auto& x : d)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

// Inverse iteration (LAPACK gttrf/gttrs) near λ; returns ‖(A - λ)v‖ for the unit iterate v.
inline double tridiagonal_residual(const std::vector<cplx>& dg, const std::vector<cplx>& off, cplx lambda, double scale) {
  const int n = static_cast<int>(dg.size());
  const cplx mu = lambda + cplx(1e-13, 1e-13) * scale;
  std::vector<cplx> dl(off), du(off), d(n), du2(std::max(n - 2, 1));
  for (int i = 0; i < n; ++i) d[i] = dg[i] - mu;
  std::vector<lapack_int> ipiv(n);
  if (LAPACKE_zgttrf(n, dl.data(), d.data(), du.data(), du2.data(), ipiv.data()) < 0) return INFINITY;
  std::vector<cplx> v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  for (int it = 0; it < 3; ++it) {
    LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', n, 1, dl.data(), d.data(), du.data(), du2.data(), ipiv.data(), v.data(), n);
    double nv = 0.0;
    for (const auto& x : v) nv += std::norm(x);
    nv = std::sqrt(nv);
    if (!(nv > 0.0) || !std::isfinite(nv)) return INFINITY;
    for (auto& x : v) x /= nv;
  }
  double res = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx r = (dg[i] - lambda) * v[i];
    if (i > 0) r += off[i - 1] * v[i - 1];
    if (i + 1 < n) r += off[i] * v[i + 1];
    res += std::norm(r);
  }
  return std::sqrt(res);
}

inline std::vector<Eigenpair> dense_eigen(const Eigen::MatrixXcd& A, double norm) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXcd work = A;
  std::vector<cplx> w(n);
  Eigen::MatrixXcd vr(n, n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, w.data(), nullptr, 1,
                                        vr.data(), n);
  if (info != 0) fail(ErrorKind::ConvergenceFailure, "zgeev failed with info " + std::to_string(info));
  std::vector<Eigenpair> out(n);
  for (int k = 0; k < n; ++k) {
    const auto v = vr.col(k);
    const double nv = v.norm();
    const double r = (A * v - w[k] * v).norm() / (nv > 0 ? nv : 1.0);
    out[k] = {w[k], 0, r / (norm > 0 ? norm : 1.0), false};
  }
  return out;
}

}  // namespace detail

/// All eigenvalues, sorted by real part, with verified residuals.
inline SpectrumResult eigensolve(const OperatorMatrix& A, const EigenOptions& opt = {}) {
  require(A.n <= opt.size_cap, ErrorKind::SizeLimit, "matrix dimension exceeds the dense cap");
  SpectrumResult out;
  out.h = A.h;
  out.eps = A.eps;
  out.q_id = A.q_id;
  out.discretization = to_string(A.grid.form);
  const double norm = A.norm_inf();
  std::vector<Eigenpair> pairs;
  bool done = false;
  if (A.storage == OperatorMatrix::Storage::Tridiagonal) {
    std::vector<cplx> d = A.diag;
    if (detail::tridiagonal_ql(d, A.off)) {
      cplx tr = 0.0, sum = 0.0;
      for (int i = 0; i < A.n; ++i) tr += A.diag[i];
      for (const auto& x : d) sum += x;
      bool ok = std::abs(tr - sum) <= 1e-9 * norm * A.n;
      pairs.resize(A.n);
      for (int i = 0; i < A.n && ok; ++i) {
        const double r = detail::tridiagonal_residual(A.diag, A.off, d[i], norm) / (norm > 0 ? norm : 1.0);
        pairs[i] = {d[i], A.m, r, false};
        ok = r <= opt.residual_tol;
      }
      done = ok;
      out.solver = "tridiagonal-ql";
    }
  }
  if (!done) {
    pairs = detail::dense_eigen(A.to_dense(), norm);
    for (auto& p : pairs) p.mode = A.m;
    out.solver = "zgeev";
  }
  for (const auto& p : pairs)
    if (!(p.residual <= opt.residual_tol))
      fail(ErrorKind::ConvergenceFailure, "eigenpair residual " + std::to_string(p.residual) + " above tolerance");
  std::sort(pairs.begin(), pairs.end(), [](const Eigenpair& x, const Eigenpair& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });
  out.eigen = std::move(pairs);
  return out;
}

struct Rect {
  double re_lo = -INFINITY, re_hi = INFINITY, im_lo = -INFINITY, im_hi = INFINITY;
  bool contains(cplx z) const { return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi; }
};

struct RotationalOptions {
  ModeOptions mode{};
  int m_min = 0;
  bool richardson = false;  // combine N and N/2 as (4λ_N - λ_{N/2})/3
  std::optional<Rect> rect;
  EigenOptions eigen{};
  int threads = 1;  // modes solved concurrently, merged in m order
};

/// Union of mode spectra for m = m_min..m_max; m > 0 entries are duplicated for -m with mirror = true.
inline SpectrumResult full_spectrum_rotational(const SurfaceProfile& surface, double h, double eps, const Observable& q,
                                               int m_max, int N, const RotationalOptions& opt = {}) {
  SpectrumResult out;
  out.surface_id = surface.id();
  out.q_id = q.id();
  out.h = h;
  out.eps = eps;
  out.discretization = to_string(opt.mode.form) + (opt.richardson ? "+richardson" : "");
  out.symmetry_note = "m>0 eigenvalues reused for -m (mirror flag)";
  require(opt.m_min >= 0 && opt.m_min <= m_max, ErrorKind::DomainError, "need 0 <= m_min <= m_max");
  const int count = m_max - opt.m_min + 1;
  std::vector<std::vector<Eigenpair>> per_mode(count);
  std::vector<std::string> solver(count);
  parallel_for(count, opt.threads, [&](int idx) {
    const int m = opt.m_min + idx;
    auto fine = eigensolve(mode_operator(surface, h, m, eps, q, N, opt.mode), opt.eigen);
    solver[idx] = fine.solver;
    std::vector<Eigenpair> keep;
    for (const auto& p : fine.eigen)
      if (!opt.rect || opt.rect->contains(p.value)) keep.push_back(p);
    if (opt.richardson && !keep.empty()) {
      auto mo = opt.mode;
      mo.min_ppw = 0.5 * opt.mode.min_ppw;
      mo.min_N = std::min(mo.min_N, N / 2);
      const auto coarse = eigensolve(mode_operator(surface, h, m, eps, q, N / 2, mo), opt.eigen);
      for (auto& p : keep) {
        const auto it = std::min_element(coarse.eigen.begin(), coarse.eigen.end(), [&](const auto& x, const auto& y) {
          return std::abs(x.value - p.value) < std::abs(y.value - p.value);
        });
        p.value = (4.0 * p.value - it->value) / 3.0;
      }
    }
    for (auto p : keep) {
      p.mode = m;
      per_mode[idx].push_back(p);
      if (m > 0) {
        p.mode = -m;
        p.mirror = true;
        per_mode[idx].push_back(p);
      }
    }
  });
  for (int idx = 0; idx < count; ++idx) {
    if (!solver[idx].empty()) out.solver = solver[idx];
    out.eigen.insert(out.eigen.end(), per_mode[idx].begin(), per_mode[idx].end());
  }
  std::stable_sort(out.eigen.begin(), out.eigen.end(), [](const Eigenpair& x, const Eigenpair& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });
  return out;
}

/// Full spectrum of a coupled operator, optionally split into parity sectors.
inline SpectrumResult spectrum_2d(const SurfaceProfile& surface, double h, double eps, const Observable& q, int N_s,
                                  int M_theta, const Operator2DOptions& opt = {}, const std::optional<Rect>& rect = {},
                                  const EigenOptions& eo = {}) {
  SpectrumResult out;
  out.surface_id = surface.id();
  out.q_id = q.id();
  out.h = h;
  out.eps = eps;
  out.discretization = to_string(opt.mode.form);
  out.solver = "zgeev";
  std::vector<ParitySector> sectors = {opt.sector};
  if (opt.sector == ParitySector::None && q.even_in_theta()) sectors = {ParitySector::Cos, ParitySector::Sin};
  out.symmetry_note = sectors.size() == 2 ? "cos/sin parity sectors" : "full angular basis";
  for (auto sec : sectors) {
    auto o = opt;
    o.sector = sec;
    const auto A = operator_2d(surface, h, eps, q, N_s, M_theta, o);
    const auto r = eigensolve(A, eo);
    for (auto p : r.eigen) {
      p.mode = sec == ParitySector::Sin ? -1 : (sec == ParitySector::Cos ? 1 : 0);
      if (!rect || rect->contains(p.value)) out.eigen.push_back(p);
    }
  }
  std::stable_sort(out.eigen.begin(), out.eigen.end(), [](const Eigenpair& x, const Eigenpair& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });
  return out;
}

}  // namespace revspec
