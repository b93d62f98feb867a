#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "revspec/analysis.hpp"

using namespace revspec;

TEST(Analysis, WindowRectangle) {
  const auto w = window(0.3, 2.0, 0.04, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(w.rect.re_lo, 1.0 - 0.02);
  EXPECT_DOUBLE_EQ(w.rect.re_hi, 1.0 + 0.02);
  EXPECT_NEAR(w.rect.im_lo, 0.04 * (0.3 - 0.2 / 2.0), 1e-16);
  EXPECT_NEAR(w.rect.im_hi, 0.04 * (0.3 + 0.2 / 2.0), 1e-16);
  EXPECT_THROW(window(0.3, 1.0, 0.04, 0.5), Error);
  EXPECT_THROW(window(0.3, 2.0, 0.0, 0.5), Error);
}

TEST(Analysis, HungarianFindsOptimum) {
  const std::vector<std::vector<double>> c = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  const auto a = detail::hungarian(c);
  double cost = 0;
  for (int i = 0; i < 3; ++i) cost += c[i][a[i]];
  EXPECT_DOUBLE_EQ(cost, 5.0);
}

namespace {

Lattice grid_lattice(double eps) {
  Lattice L;
  L.surface_id = "s";
  L.q_id = "q";
  L.eps = eps;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) {
      QuasiEigenvalue q;
      q.k1 = i;
      q.k2 = j;
      q.z = {0.9 + 0.05 * i, eps * (0.2 + 0.1 * j)};
      L.entries.push_back(q);
    }
  return L;
}

}  // namespace

TEST(Analysis, MatchShiftedCopy) {
  const double eps = 0.1;
  const auto L = grid_lattice(eps);
  SpectrumResult sp;
  sp.surface_id = "s";
  sp.q_id = "q";
  for (const auto& q : L.entries) sp.eigen.push_back({q.z + cplx(1e-4, 3e-5), 0, 0.0, false});
  WindowSpec w;
  w.eps = eps;
  w.rect = {0.88, 1.12, 0.0, 0.1};
  const auto rep = match_lattice(sp, L, w);
  EXPECT_EQ(rep.pairs.size(), L.entries.size());
  EXPECT_TRUE(rep.unmatched_spectrum.empty());
  EXPECT_TRUE(rep.unmatched_lattice.empty());
  EXPECT_NEAR(rep.max_distance, std::hypot(1e-4, 3e-5 / eps), 1e-12);
  for (const auto& p : rep.pairs) EXPECT_NEAR(std::abs(p.eigenvalue - p.z), std::hypot(1e-4, 3e-5), 1e-12);
}

TEST(Analysis, MatchReportsExtras) {
  const double eps = 0.1;
  const auto L = grid_lattice(eps);
  SpectrumResult sp;
  for (const auto& q : L.entries) sp.eigen.push_back({q.z, 0, 0.0, false});
  sp.eigen.push_back({cplx(1.0, eps * 0.45), 0, 0.0, false});
  WindowSpec w;
  w.eps = eps;
  w.rect = {0.88, 1.12, 0.0, 0.1};
  const auto rep = match_lattice(sp, L, w);
  EXPECT_EQ(rep.pairs.size(), L.entries.size());
  ASSERT_EQ(rep.unmatched_spectrum.size(), 1u);
  EXPECT_NEAR(rep.unmatched_spectrum[0].value.imag(), eps * 0.45, 1e-15);
  EXPECT_DOUBLE_EQ(rep.max_distance, 0.0);
}

TEST(Analysis, CountInRationalWindow) {
  SpectrumResult sp;
  const double eps = 0.1, F0 = 0.5, C = 2.0;
  // δ = 0: Re in [0.95, 1.05], Im in [εF0 - ε/C, εF0 + ε/C] = [0, 0.1].
  for (double re : {0.94, 0.96, 1.0, 1.04, 1.06})
    for (double im : {-0.01, 0.02, 0.09, 0.11}) sp.eigen.push_back({cplx(re, im), 0, 0.0, false});
  EXPECT_EQ(count_rational_window(sp, F0, C, eps, 1.0), 6);
}

TEST(Analysis, ScalingFitRecoversExponent) {
  std::vector<ScalingPoint> pts;
  for (double h : {0.08, 0.06, 0.05, 0.04}) {
    const double eps = std::pow(h, 0.8);
    pts.push_back({eps, h, 3.0 * std::pow(eps, 1.5) / (h * h)});
  }
  const auto f = scaling_fit(pts);
  EXPECT_NEAR(f.gamma, 1.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  pts.resize(2);
  EXPECT_THROW(scaling_fit(pts), Error);
  std::vector<ScalingPoint> zero = {{0.1, 0.1, 0.0}, {0.2, 0.1, 1.0}, {0.3, 0.1, 1.0}};
  EXPECT_THROW(scaling_fit(zero), Error);
}

TEST(Analysis, GoodValues) {
  const auto S = make_profile("deformed-sphere", {0.2});
  const auto q = observables::sum(observables::cos_ks(2), observables::exp_x(0.5, 2, 0.5));
  ScanOptions o;
  o.n_a = 50;
  o.T = 100.0;
  o.n_starts = 8;
  o.height_cap = 12;
  const auto sc = scan(S, q, o);
  ASSERT_FALSE(sc.rational.empty());
  // Nothing carries a level far outside the range of q.
  const auto out = good_value_check(S, q, sc, 5.0, 0.01, 0.1, 0.001, 0.5);
  EXPECT_TRUE(out.good) << out.witness;
  EXPECT_TRUE(out.family.empty());
  // The innermost scanned torus sits within alpha of the singular leaf.
  const auto& inner = sc.rows.front().q_inf;
  const auto bad = good_value_check(S, q, sc, 0.5 * (inner.lo + inner.hi), 0.01, 0.1, 0.001, 0.5);
  EXPECT_FALSE(bad.good);
  EXPECT_EQ(bad.failed_bullet, 1) << bad.witness;
  // A rational torus above the height cap 1/alpha.
  const auto& t = *std::max_element(sc.rational.begin(), sc.rational.end(),
                                    [](const auto& x, const auto& y) { return x.height < y.height; });
  ASSERT_GT(t.height, 10);
  const auto tall = good_value_check(S, q, sc, t.q_avg, 0.1, 0.1, 0.001, 0.5);
  EXPECT_FALSE(tall.good);
  EXPECT_EQ(tall.failed_bullet, 3) << tall.witness;
  o.n_a = 5;
  EXPECT_THROW(good_value_check(S, q, scan(S, q, o), 0.0, 0.01, 0.1, 0.001, 0.5), Error);
}
