#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "revspec/geometry.hpp"
#include "revspec/observable.hpp"

using namespace revspec;

TEST(Geometry, SphereProfileIsSine) {
  const auto S = make_profile("sphere", {});
  for (double s : {0.1, 0.7, 1.3, 2.9}) {
    EXPECT_NEAR(S.u(s), std::sin(s), 1e-15);
    EXPECT_NEAR(S.du(s), std::cos(s), 1e-15);
    EXPECT_NEAR(S.d2u(s), -std::sin(s), 1e-15);
  }
  EXPECT_NEAR(S.s0(), std::numbers::pi / 2, 1e-13);
  EXPECT_NEAR(S.u_max(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(S.length(), std::numbers::pi);
  EXPECT_TRUE(S.embeddable());
}

TEST(Geometry, BetaFamilyClosedForm) {
  const double b = 0.2;
  const auto S = make_profile("deformed-sphere", {b});
  for (double s : {0.3, 1.0, 2.2}) {
    const double sn = std::sin(s), cs = std::cos(s);
    EXPECT_NEAR(S.u(s), sn * (1 + b * sn * sn), 1e-14);
    EXPECT_NEAR(S.du(s), cs * (1 + 3 * b * sn * sn), 1e-14);
  }
  EXPECT_NEAR(S.u_max(), 1 + b, 1e-13);
  EXPECT_NEAR(S.d2u(S.s0()), -(1 + 3 * b), 1e-12);
  // u' reaches 1 + 3β/... above 1 away from the poles, so no embedding in R³.
  EXPECT_FALSE(S.embeddable());
}

TEST(Geometry, RejectsBadProfiles) {
  EXPECT_THROW(make_profile("torus", {}), Error);
  EXPECT_THROW(make_profile("deformed-sphere", {}), Error);
  EXPECT_THROW(make_profile("sphere", {0.3}), Error);
  // β = -0.5 puts a minimum at the equator: three critical points.
  try {
    make_profile("deformed-sphere", {-0.5});
    FAIL() << "expected InvalidProfile";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidProfile);
  }
}

TEST(Geometry, SphereTurningPoints) {
  const auto S = make_profile("sphere", {});
  for (double a : {0.1, 0.5, 0.9}) {
    const auto tp = turning_points(S, a);
    EXPECT_NEAR(tp.s_minus, std::asin(a), 1e-12);
    EXPECT_NEAR(tp.s_plus, std::numbers::pi - std::asin(a), 1e-12);
  }
  EXPECT_THROW(turning_points(S, 1.5), Error);
}

TEST(Geometry, SymbolP) {
  const auto S = make_profile("sphere", {});
  const double s = 0.4;
  EXPECT_NEAR(symbol_p(S, s, 0.3, 0.2), 0.09 + 0.04 / std::pow(std::sin(s), 2), 1e-14);
  EXPECT_DOUBLE_EQ(symbol_p(S, 0.0, 0.5, 0.0), 0.25);
  EXPECT_THROW(symbol_p(S, 0.0, 0.5, 1.0), Error);
}

TEST(Geometry, IdsDistinguishParameters) {
  EXPECT_EQ(make_profile("sphere", {}).id(), make_profile("deformed-sphere", {0.0}).id());
  EXPECT_NE(make_profile("deformed-sphere", {0.2}).id(), make_profile("deformed-sphere", {0.21}).id());
}

TEST(Observable, Builtins) {
  const auto S = make_profile("deformed-sphere", {0.2});
  const double s = 0.8, th = 1.1;
  EXPECT_NEAR(observables::cos_ks(2)(S, s, th), std::cos(2 * s), 1e-14);
  EXPECT_NEAR(observables::constant(0.7)(S, s, th), 0.7, 1e-15);
  EXPECT_NEAR(observables::cos_theta(3)(S, s, th), std::cos(3 * th), 1e-14);
  EXPECT_NEAR(observables::harmonic(2)(S, s, th), std::pow(std::sin(s), 2) * std::cos(2 * th), 1e-14);
  // High-degree truncation of exp(κ u cos θ).
  const double u = S.u(s);
  EXPECT_NEAR(observables::exp_x(0.5, 12)(S, s, th), std::exp(0.5 * u * std::cos(th)), 1e-12);
  EXPECT_NEAR(observables::exp_x(0.5, 12, 0.3)(S, s, th), std::exp(0.5 * u * std::cos(th)) * (1 + 0.3 * std::cos(s)),
              1e-12);
}

TEST(Observable, Structure) {
  const auto S = make_profile("sphere", {});
  const auto q = observables::sum(observables::cos_ks(2), observables::cos_theta(1));
  EXPECT_FALSE(q.rotational());
  EXPECT_TRUE(q.even_in_theta());
  EXPECT_EQ(q.theta_degree(), 1);
  EXPECT_NEAR(q.theta_mean(S, 0.9), std::cos(1.8), 1e-14);
  EXPECT_TRUE(observables::cos_ks(2).rotational());
  const auto f = q.theta_fourier(S, 0.9);
  EXPECT_NEAR(std::abs(f.at(1)), 0.5, 1e-14);
  EXPECT_NE(q.id(), observables::cos_ks(2).id());
}
