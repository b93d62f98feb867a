#pragma once

// Spectral windows, lattice matching, eigenvalue counting, scaling fits and
// good-value verdicts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "revspec/classical.hpp"
#include "revspec/errors.hpp"
#include "revspec/quantization.hpp"
#include "revspec/spectra.hpp"

namespace revspec {

struct WindowSpec {
  double F0 = 0.0;
  double C = 2.0;
  double eps = 0.0;
  double delta = 0.0;
  double E_center = 0.0;
  Rect rect;

  double re_half() const { return eps / C; }
  double im_half() const { return eps * std::pow(eps, delta) / C; }
};

/// [E_c - ε/C, E_c + ε/C] × iε[F0 - ε^δ/C, F0 + ε^δ/C].
inline WindowSpec window(double F0, double C, double eps, double delta, double E_center = 0.0) {
  require(C > 1.0, ErrorKind::DomainError, "window constant C must exceed 1");
  require(eps > 0.0, ErrorKind::DomainError, "window needs eps > 0");
  require(delta >= 0.0, ErrorKind::DomainError, "window needs delta >= 0");
  WindowSpec w{F0, C, eps, delta, E_center, {}};
  const double rh = w.re_half(), ih = w.im_half();
  w.rect = {E_center - rh, E_center + rh, eps * F0 - ih, eps * F0 + ih};
  return w;
}

namespace detail {

// Minimum-cost assignment on a square matrix (shortest augmenting paths).
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

inline Rect grow(const Rect& r, double re, double im) {
  return {r.re_lo - re, r.re_hi + re, r.im_lo - im, r.im_hi + im};
}

}  // namespace detail

struct MatchPair {
  cplx eigenvalue;
  int mode = 0;
  long k1 = 0;
  long k2 = 0;
  cplx z;
  double distance = 0.0;
};

struct MatchReport {
  std::vector<MatchPair> pairs;
  double max_distance = 0.0;
  std::vector<Eigenpair> unmatched_spectrum;
  std::vector<QuasiEigenvalue> unmatched_lattice;
  long boundary_spectrum = 0;  // unmatched but inside the margin band
  long boundary_lattice = 0;
  double margin = 0.0;
  double eps = 0.0;
  std::string metric = "sqrt(dRe^2 + (dIm/eps)^2)";
};

struct MatchOptions {
  // Width of the boundary band, in scaled units. Items are collected in the
  // rectangle grown by the margin; unmatched items are only reported when they
  // lie in the rectangle shrunk by it.
  double margin = 0.0;
  // Pairs farther than this are left unmatched instead.
  double cutoff = 1e6;
};

inline double scaled_distance(cplx a, cplx b, double eps) {
  const double dr = a.real() - b.real(), di = a.imag() - b.imag();
  return eps > 0.0 ? std::hypot(dr, di / eps) : std::hypot(dr, di);
}

/// Optimal one-to-one pairing of eigenvalues and lattice points inside w.
inline MatchReport match_lattice(const SpectrumResult& spectrum, const Lattice& lattice, const WindowSpec& w,
                                 const MatchOptions& opt = {}) {
  MatchReport rep;
  rep.margin = opt.margin;
  rep.eps = w.eps;
  const double sc = w.eps > 0.0 ? w.eps : 1.0;
  const Rect outer = detail::grow(w.rect, opt.margin, opt.margin * sc);
  const Rect inner = detail::grow(w.rect, -opt.margin, -opt.margin * sc);

  std::vector<Eigenpair> S;
  for (const auto& e : spectrum.eigen)
    if (outer.contains(e.value)) S.push_back(e);
  std::vector<QuasiEigenvalue> Lt;
  for (const auto& q : lattice.entries)
    if (outer.contains(q.z)) Lt.push_back(q);
  std::sort(Lt.begin(), Lt.end(), [](const auto& a, const auto& b) { return a.k1 != b.k1 ? a.k1 < b.k1 : a.k2 < b.k2; });

  const int n1 = static_cast<int>(S.size()), n2 = static_cast<int>(Lt.size()), n = n1 + n2;
  if (n == 0) return rep;
  const double c = 0.5 * opt.cutoff;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i < n1 && j < n2) {
        const double d = scaled_distance(S[i].value, Lt[j].z, w.eps);
        cost[i][j] = d < opt.cutoff ? d : 4.0 * c + d;
      } else if (i < n1 || j < n2) {
        cost[i][j] = c;
      }
    }
  const auto asg = detail::hungarian(cost);
  std::vector<char> lat_used(n2, 0);
  for (int i = 0; i < n1; ++i) {
    const int j = asg[i];
    if (j >= 0 && j < n2 && cost[i][j] < 2.0 * c) {
      lat_used[j] = 1;
      if (!inner.contains(S[i].value) && !inner.contains(Lt[j].z)) continue;
      const double d = scaled_distance(S[i].value, Lt[j].z, w.eps);
      rep.pairs.push_back({S[i].value, S[i].mode, Lt[j].k1, Lt[j].k2, Lt[j].z, d});
      rep.max_distance = std::max(rep.max_distance, d);
    } else if (inner.contains(S[i].value)) {
      rep.unmatched_spectrum.push_back(S[i]);
    } else {
      ++rep.boundary_spectrum;
    }
  }
  for (int j = 0; j < n2; ++j) {
    if (lat_used[j]) continue;
    if (inner.contains(Lt[j].z))
      rep.unmatched_lattice.push_back(Lt[j]);
    else
      ++rep.boundary_lattice;
  }
  return rep;
}

/// Eigenvalues in the δ = 0 rectangle centred at (E_center, iεF0).
inline long count_rational_window(const SpectrumResult& spectrum, double F0, double C, double eps, double E_center) {
  const auto w = window(F0, C, eps, 0.0, E_center);
  long n = 0;
  for (const auto& e : spectrum.eigen) n += w.rect.contains(e.value);
  return n;
}

struct ScalingPoint {
  double eps = 0.0;
  double h = 0.0;
  double count = 0.0;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double gamma = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(count h²) against log ε.
inline ScalingFit scaling_fit(const std::vector<ScalingPoint>& pts) {
  require(pts.size() >= 3, ErrorKind::DegenerateFit, "scaling fit needs at least 3 points");
  std::vector<double> x, y;
  for (const auto& p : pts) {
    require(p.eps > 0.0 && p.h > 0.0 && p.count > 0.0, ErrorKind::DegenerateFit,
            "scaling fit needs positive eps, h and count");
    x.push_back(std::log(p.eps));
    y.push_back(std::log(p.count * p.h * p.h));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 1e-24, ErrorKind::DegenerateFit, "all eps values are equal");
  ScalingFit f;
  f.points = pts;
  f.gamma = sxy / sxx;
  f.intercept = my - f.gamma * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// --- good values -------------------------------------------------------------

struct GoodValueVerdict {
  bool good = true;
  int failed_bullet = 0;  // 1..4, 0 on pass
  std::string witness;
  double witness_a = NAN;
  std::vector<double> family;  // torus parameters with F0 in Q_inf
  double height_cap = 0.0;     // 1/α
};

namespace detail {

inline void fail_verdict(GoodValueVerdict& v, int bullet, const std::string& why, double a) {
  if (!v.good) return;
  v.good = false;
  v.failed_bullet = bullet;
  v.witness = why;
  v.witness_a = a;
}

inline double interval_distance(const Interval& I, double x) {
  if (x < I.lo) return I.lo - x;
  if (x > I.hi) return x - I.hi;
  return 0.0;
}

}  // namespace detail

/// Checks the four separation and non-degeneracy conditions on a classical scan.
// Irrational tori carrying F0 are located as roots of ⟨q⟩(a) = F0 between scan
// rows; rational tori are taken from the scan's explicit list (height ≤ cap).
inline GoodValueVerdict good_value_check(const SurfaceProfile& surface, const Observable& q, const ClassicalScan& scan,
                                         double F0, double alpha, double beta, double gamma, double d) {
  require(scan.rows.size() >= 3, ErrorKind::ScanTooCoarse, "scan has fewer than 3 rows");
  require(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && d > 0.0, ErrorKind::DomainError,
          "alpha, beta, gamma, d must be positive");
  double da = 0.0;
  for (std::size_t i = 1; i < scan.rows.size(); ++i) da = std::max(da, scan.rows[i].a - scan.rows[i - 1].a);
  if (da > beta / 4.0) fail(ErrorKind::ScanTooCoarse, "scan spacing exceeds beta/4");

  GoodValueVerdict v;
  v.height_cap = 1.0 / alpha;
  const double um = surface.u_max();
  char buf[200];

  // (1) no tori near the singular leaves a = 0 and a = u_max carry F0.
  for (const auto& r : scan.rows) {
    if (r.a <= scan.rows.front().a + alpha || um - r.a <= alpha) {
      if (r.q_inf.contains(F0)) {
        std::snprintf(buf, sizeof buf, "F0 in Q_inf of torus a=%.6g within alpha of the singular set", r.a);
        detail::fail_verdict(v, 1, buf, r.a);
      }
    }
  }

  // (2) irrational tori with ⟨q⟩ = F0.
  for (std::size_t i = 1; i < scan.rows.size(); ++i) {
    const double g0 = scan.rows[i - 1].q_avg - F0, g1 = scan.rows[i].q_avg - F0;
    if (g0 * g1 > 0.0) continue;
    double a;
    if (g0 == 0.0)
      a = scan.rows[i - 1].a;
    else if (g1 == 0.0)
      a = scan.rows[i].a;
    else
      a = detail::bracketed_root([&](double x) { return torus_average(surface, q, x) - F0; }, scan.rows[i - 1].a,
                                 scan.rows[i].a, 1e-13);
    if (!v.family.empty() && std::abs(v.family.back() - a) < 1e-12) continue;
    v.family.push_back(a);
    const double omega = rotation_number(surface, a);
    const auto cls = classify(omega, scan.options.q_max, alpha, d);
    bool on_rational = false;
    for (const auto& t : scan.rational) on_rational = on_rational || std::abs(t.a - a) < 1e-9;
    if (cls.kind == RotationClass::Rational || on_rational) continue;  // handled in (3)
    if (cls.kind != RotationClass::DiophantineCertified) {
      std::snprintf(buf, sizeof buf, "torus a=%.6g (omega=%.12g) carrying F0 is not (alpha,d)-Diophantine", a, omega);
      detail::fail_verdict(v, 2, buf, a);
      continue;
    }
    const double h = 1e-5 * std::max(1.0, a);
    const double slope = (torus_average(surface, q, a + h) - torus_average(surface, q, a - h)) / (2 * h);
    if (std::abs(slope) < alpha) {
      std::snprintf(buf, sizeof buf, "|d<q>/da| = %.3g < alpha at a=%.6g", std::abs(slope), a);
      detail::fail_verdict(v, 2, buf, a);
    }
  }

  // (3) rational tori with F0 in Q_inf.
  for (const auto& t : scan.rational) {
    if (!t.q_inf.contains(F0, 1e-12)) continue;
    v.family.push_back(t.a);
    if (t.height > v.height_cap) {
      std::snprintf(buf, sizeof buf, "rational torus %ld/%ld carrying F0 has height %ld > 1/alpha", t.m, t.n, t.height);
      detail::fail_verdict(v, 3, buf, t.a);
    } else if (std::abs(t.domega_da) < alpha) {
      std::snprintf(buf, sizeof buf, "isoenergetic condition |domega/da| = %.3g < alpha at %ld/%ld",
                    std::abs(t.domega_da), t.m, t.n);
      detail::fail_verdict(v, 3, buf, t.a);
    } else if (std::abs(F0 - t.q_avg) < alpha) {
      std::snprintf(buf, sizeof buf, "|F0 - <q>| = %.3g < alpha at rational torus %ld/%ld", std::abs(F0 - t.q_avg),
                    t.m, t.n);
      detail::fail_verdict(v, 3, buf, t.a);
    }
  }

  // (4) tori away from the family keep Q_inf at distance gamma from F0.
  auto far = [&](double a) {
    for (double f : v.family)
      if (std::abs(a - f) <= beta) return false;
    return true;
  };
  for (const auto& r : scan.rows) {
    if (!far(r.a)) continue;
    const double dist = detail::interval_distance(r.q_inf, F0);
    if (dist < gamma) {
      std::snprintf(buf, sizeof buf, "torus a=%.6g farther than beta from the family has dist(F0, Q_inf) = %.3g < gamma",
                    r.a, dist);
      detail::fail_verdict(v, 4, buf, r.a);
    }
  }
  for (const auto& t : scan.rational) {
    if (!far(t.a)) continue;
    const double dist = detail::interval_distance(t.q_inf, F0);
    if (dist < gamma) {
      std::snprintf(buf, sizeof buf, "rational torus %ld/%ld has dist(F0, Q_inf) = %.3g < gamma", t.m, t.n, dist);
      detail::fail_verdict(v, 4, buf, t.a);
    }
  }
  std::sort(v.family.begin(), v.family.end());
  return v;
}

}  // namespace revspec
