#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "revspec/bargmann.hpp"

using namespace revspec;

TEST(Fock, BasisIsOrthonormal) {
  const double h = 0.1;
  const FockBasis B(h, 30);
  const auto rule = gauss_panels(0.0, 4.0, 40);
  for (int k : {0, 1, 5, 29}) {
    double n = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) n += rule.w[i] * rule.x[i] * std::pow(B.radial(k, rule.x[i]), 2);
    EXPECT_NEAR(2 * std::numbers::pi * n, 1.0, 1e-12) << k;
  }
}

TEST(Fock, ReproducingKernel) {
  const double h = 0.2;
  const FockBasis B(h, 200);
  const cplx x(0.3, -0.2), y(-0.1, 0.4);
  cplx s = 0.0;
  for (int k = 0; k < B.M; ++k) s += B(k, x) * std::conj(B(k, y));
  const cplx K = bergman_kernel(x, y, h);
  EXPECT_NEAR(std::abs(s - K) / std::abs(K), 0.0, 1e-13);
}

// Radial indicator: diagonal with entries P(k+1, R²/h).
TEST(Fock, DiscToeplitzIsIncompleteGamma) {
  const double h = 0.1, R = 1.0;
  const auto T = toeplitz_matrix(symbols::disc(R), FockBasis(h, 40));
  for (int j = 0; j < 40; ++j)
    for (int k = 0; k < 40; ++k) {
      const cplx expect = j == k ? boost::math::gamma_p(k + 1.0, R * R / h) : 0.0;
      EXPECT_NEAR(std::abs(T.entries(j, k) - expect), 0.0, 1e-10) << j << "," << k;
    }
}

TEST(Fock, LobedSymbolCouplesNeighbours) {
  const auto T = toeplitz_matrix(symbols::lobed_bump(1.0, 0.5), FockBasis(0.1, 20));
  EXPECT_LT(T.hermitian_defect, 1e-12);
  for (int j = 0; j < 20; ++j)
    for (int k = 0; k < 20; ++k)
      if (std::abs(j - k) > 1) EXPECT_LT(std::abs(T.entries(j, k)), 1e-12);
  EXPECT_GT(std::abs(T.entries(3, 4)), 1e-4);
}

TEST(Fock, TraceNorm) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = -2.0;
  EXPECT_NEAR(trace_norm(A), 3.0, 1e-14);
}

TEST(Fock, TraceIdentityForDisc) {
  const auto rep = verify_trace_bound(symbols::disc(1.0), {0.2, 0.1});
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) {
    EXPECT_NEAR(r.mass, std::numbers::pi, 1e-12);
    EXPECT_NEAR(r.ratio, 1.0, 1e-6);
    EXPECT_TRUE(r.positivity);
    EXPECT_LE(r.op_norm, 1.0 + 1e-12);
  }
  EXPECT_GE(truncation_size(1.0, 0.05, 1e-8, 2000), truncation_size(1.0, 0.1, 1e-8, 2000));
}

TEST(Legendre, QuadraticIsSelfDual) {
  const auto f = SampledFunction::sample([](double x) { return 0.5 * x * x; }, -2.0, 2.0, 401);
  const auto Lf = legendre_transform(f, -1.5, 1.5, 31);
  for (std::size_t i = 0; i < Lf.size(); ++i) EXPECT_NEAR(Lf.y[i], 0.5 * Lf.x(i) * Lf.x(i), 1e-12);
  EXPECT_NEAR(legendre_at(f, 0.7), 0.245, 1e-12);
}

TEST(Legendre, Involution) {
  const auto f = SampledFunction::sample([](double x) { return std::cosh(x); }, -1.0, 1.0, 201);
  EXPECT_LT(legendre_involution_defect(f), 5 * f.dx * f.dx);
}

TEST(Legendre, RejectsNonConvex) {
  const auto f = SampledFunction::sample([](double x) { return std::sin(3 * x); }, -1.0, 1.0, 51);
  try {
    legendre_transform(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConvex);
  }
}

TEST(Legendre, WeightDuality) {
  const auto d = weight_duality([](double e) { return std::cos(e); }, 0.2, -1.0, 1.0, 201);
  EXPECT_LT(d.defect, 5 * d.grid_spacing * d.grid_spacing);
}

TEST(Parseval, QuadraticWeightIsExact) {
  const auto r = parseval_check(weights::quadratic(), 0.1, 0, 10);
  EXPECT_LT(r.max_discrepancy(), 1e-10);
  for (const auto& row : r.rows) EXPECT_NEAR(row.t_crit, -row.k * 0.1, 1e-12);
}

TEST(Parseval, QuarticDiscrepancyIsOrderH) {
  const double a = parseval_check(weights::quartic(0.1), 0.05, 0, 3).max_discrepancy();
  const double b = parseval_check(weights::quartic(0.1), 0.1, 0, 3).max_discrepancy();
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(b / a, 2.0, 0.5);
}
