#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "cryo/polynomial.hpp"
#include "cryo/series.hpp"
#include "cryo/spectral.hpp"

namespace {

using namespace cryo;

RationalPolynomial rational_poly(std::initializer_list<std::pair<long, long>> terms) {
  std::vector<Rational> c;
  for (auto [num, den] : terms) c.emplace_back(num, den);
  for (auto& v : c) v.canonicalize();
  return RationalPolynomial(std::move(c));
}

std::vector<double> h_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= count; ++k) out.push_back(lo + (hi - lo) * k / count);
  return out;
}

TEST(RationalPolynomial, ExactArithmetic) {
  const RationalPolynomial p = rational_poly({{1, 2}, {-1, 3}});  // 1/2 - x/3
  const RationalPolynomial q = rational_poly({{0, 1}, {0, 1}, {3, 4}});  // 3/4 x^2
  EXPECT_EQ(q.degree(), 2);
  EXPECT_EQ((p * q).degree(), 3);
  EXPECT_EQ((p * q).coefficient(3), Rational(-1, 4));
  EXPECT_EQ((p + q).coefficient(0), Rational(1, 2));
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ((p - p).degree(), -1);
  EXPECT_EQ(q.derivative(), rational_poly({{0, 1}, {3, 2}}));
  EXPECT_EQ(p.evaluate(Rational(3, 2)), Rational(0));
  EXPECT_EQ(rational_poly({{1, 1}, {0, 1}, {0, 1}}).degree(), 0);
  EXPECT_EQ(p.to_string("h"), "1/2 - 1/3*h");
}

TEST(TruncatedSeries, HalfPowersInvertEachOther) {
  const ExactSeries g(8, {RationalPolynomial{Rational(1)}, RationalPolynomial{Rational(-2), Rational(2)},
                          RationalPolynomial{Rational(1)}});
  const ExactSeries root = g.power(1, 2);
  EXPECT_EQ((root * root).coefficients(), g.coefficients());
  const ExactSeries one = g.power(-1, 2) * root;
  EXPECT_EQ(one[0], RationalPolynomial{Rational(1)});
  for (std::size_t k = 1; k <= 8; ++k) EXPECT_TRUE(one[k].is_zero()) << k;
  const ExactSeries five = g.power(-5, 2);
  const ExactSeries three = g.power(-3, 2);
  EXPECT_EQ((five * g).coefficients(), three.coefficients());
}

TEST(TruncatedSeries, DivisionByTNeedsZeroConstant) {
  const ExactSeries s(3, {RationalPolynomial{Rational(1)}});
  EXPECT_THROW(s.divided_by_t(), DomainError);
  EXPECT_THROW(s.power(1, 2).shifted_up(1).power(1, 2), DomainError);
}

TEST(SeriesI, ConstantTermVanishes) { EXPECT_TRUE(series_I(6)[0].is_zero()); }

TEST(SeriesI, VanishesAtZeroWithKnownDerivatives) {
  // Slopes are fixed by lambda_n'(0) = 1/2, curvatures by the h^2 coefficient.
  const ExactSeries s = series_I(30);
  for (std::size_t n = 0; n <= 30; ++n) {
    EXPECT_EQ(s[n].evaluate(Rational(0)), 0) << n;
    const long nn = static_cast<long>(n);
    Rational slope(-nn * (nn + 1), 2);
    slope.canonicalize();
    EXPECT_EQ(s[n].derivative().evaluate(Rational(0)), slope) << n;
    Rational curvature(nn * (nn + 1) * (1 + (nn + 2) * (nn - 1)), 4);
    curvature.canonicalize();
    EXPECT_EQ(s[n].derivative().derivative().evaluate(Rational(0)), curvature) << n;
  }
}

TEST(EigenvalueCurves, FirstFourMatchTheListedPolynomials) {
  const auto p = eigenvalue_polynomials(4);
  EXPECT_EQ(p[0], rational_poly({{0, 1}, {1, 2}, {-1, 8}}));
  EXPECT_EQ(p[1], rational_poly({{0, 1}, {1, 2}, {-5, 8}, {1, 6}}));
  EXPECT_EQ(p[2], rational_poly({{0, 1}, {1, 2}, {-11, 8}, {25, 24}, {-15, 64}}));
  EXPECT_EQ(p[3], rational_poly({{0, 1}, {1, 2}, {-19, 8}, {27, 8}, {-119, 64}, {7, 20}}));
}

TEST(EigenvalueCurves, GapIdentityIsExact) {
  EXPECT_EQ(eigenvalue_polynomial(1) - eigenvalue_polynomial(2), rational_poly({{0, 1}, {0, 1}, {1, 2}, {-1, 6}}));
}

TEST(EigenvalueCurves, LowOrderCoefficientsAndDegree) {
  const auto p = eigenvalue_polynomials(50);
  for (long n = 1; n <= 50; ++n) {
    const auto& l = p[static_cast<std::size_t>(n - 1)];
    EXPECT_EQ(l.coefficient(0), 0) << n;
    EXPECT_EQ(l.coefficient(1), Rational(1, 2)) << n;
    Rational c2(-(1 + (n + 2) * (n - 1)), 8);
    c2.canonicalize();
    EXPECT_EQ(l.coefficient(2), c2) << n;
    EXPECT_EQ(l.degree(), n + 1) << n;
  }
}

TEST(EigenvalueCurves, CapAndDomain) {
  EXPECT_THROW(eigenvalue_polynomial(65), OrderExceeded);
  EXPECT_NO_THROW(eigenvalue_polynomial(65, 65));
  EXPECT_THROW(eigenvalue_polynomial(0), DomainError);
}

TEST(EigenvalueNumeric, SpotValues) {
  EXPECT_NEAR(eigenvalue_numeric(1, 0.3), 0.13875, 1e-15);
  EXPECT_NEAR(eigenvalue_numeric(2, 0.3), 0.09825, 1e-15);
  for (int n : {1, 2, 7, 300, 100000}) EXPECT_EQ(eigenvalue_numeric(n, 0.0), 0.0) << n;
  EXPECT_DOUBLE_EQ(eigenvalue_numeric(1, 2.0), 0.5);
  EXPECT_THROW(eigenvalue_numeric(1, -0.01), DomainError);
  EXPECT_THROW(eigenvalue_numeric(1, 2.01), DomainError);
}

TEST(EigenvalueNumeric, AgreesWithExactPolynomials) {
  const auto polys = eigenvalue_polynomials(64);
  for (double h : h_grid(0.0, 2.0, 0.01)) {
    const auto seq = eigenvalue_sequence(64, h);
    for (int n = 1; n <= 64; ++n) {
      const double exact = polys[static_cast<std::size_t>(n - 1)].evaluate(h);
      // Relative to the curve's scale sqrt(h) / n so sign changes do not blow up the ratio.
      const double scale = std::max(std::abs(exact), std::sqrt(h) / n);
      EXPECT_LE(std::abs(seq[static_cast<std::size_t>(n - 1)] - exact), 1e-10 * scale) << n << " " << h;
    }
  }
}

TEST(QuadraticApprox, ExamplesAndFirstCurve) {
  EXPECT_NEAR(quadratic_approx(2, 0.1), 0.04375, 1e-16);
  EXPECT_EQ(quadratic_approx(5, 0.0), 0.0);
  const RationalPolynomial l1 = eigenvalue_polynomial(1);
  for (double h : h_grid(0.0, 2.0, 0.01)) EXPECT_NEAR(quadratic_approx(1, h), l1.evaluate(h), 1e-15);
}

TEST(QuadraticApprox, ErrorIsCubicForSmallH) {
  for (int n = 1; n <= 6; ++n) {
    const double e1 = std::abs(eigenvalue_numeric(n, 1e-2) - quadratic_approx(n, 1e-2));
    const double e2 = std::abs(eigenvalue_numeric(n, 5e-3) - quadratic_approx(n, 5e-3));
    if (n == 1) {
      EXPECT_LT(e1, 1e-16);
    } else {
      EXPECT_NEAR(e1 / e2, 8.0, 0.5) << n;
    }
  }
}

TEST(SpectralGap, ValuesAndConsistency) {
  EXPECT_EQ(spectral_gap(0.0), 0.0);
  EXPECT_NEAR(spectral_gap(0.5), 0.10416666666666667, 1e-16);
  EXPECT_NEAR(spectral_gap(0.3), 0.0405, 1e-16);
  EXPECT_NEAR(eigenvalue_numeric(1, 0.3) - eigenvalue_numeric(2, 0.3), 0.0405, 1e-15);
  for (double h : h_grid(0.0, 0.5, 0.01)) {
    EXPECT_NEAR(spectral_gap(h), eigenvalue_numeric(1, h) - eigenvalue_numeric(2, h), 1e-12) << h;
  }
  EXPECT_THROW(spectral_gap(0.51), DomainError);
  EXPECT_THROW(spectral_gap(-0.01), DomainError);
}

TEST(TracePartialSum, BoundedMonotoneAndTrivialAtZero) {
  for (double h : h_grid(0.0, 2.0, 0.05)) {
    EXPECT_NEAR(trace_partial_sum(h, 1), 3.0 * std::pow(eigenvalue_numeric(1, h), 2), 1e-15);
    double prev = 0.0;
    for (int n = 1; n <= 200; ++n) {
      const double s = trace_partial_sum(h, n);
      EXPECT_GE(s, prev);
      EXPECT_LE(s, h / 2 + 1e-9);
      prev = s;
    }
  }
  EXPECT_EQ(trace_partial_sum(0.0, 50), 0.0);
}

TEST(TracePartialSum, ConvergesToHalfH) {
  // Sweep for the first n_max with relative deficit below 1e-3 at h = 0.5.
  int first = 0;
  for (int n = 1; n <= 10000; ++n) {
    if ((0.25 - trace_partial_sum(0.5, n)) / 0.25 < 1e-3) {
      first = n;
      break;
    }
  }
  EXPECT_EQ(first, 551);
  // The tail decays like 1/n.
  EXPECT_LT(0.25 - trace_partial_sum(0.5, 10000), 2e-5);
}

TEST(UpperBound, ValuesAndGrid) {
  EXPECT_NEAR(eigenvalue_upper_bound(1, 2.0), std::sqrt(2.0) / std::sqrt(6.0), 1e-16);
  EXPECT_EQ(eigenvalue_upper_bound(9, 0.0), 0.0);
  for (double h : h_grid(0.01, 2.0, 0.01)) {
    const auto seq = eigenvalue_sequence(300, h);
    for (int n = 1; n <= 300; ++n) {
      EXPECT_LE(seq[static_cast<std::size_t>(n - 1)], eigenvalue_upper_bound(n, h) + 1e-12) << n << " " << h;
    }
  }
}

TEST(Dominance, FirstAndSecondCurves) {
  for (double h : h_grid(0.0, 2.0, 0.01)) {
    const auto seq = eigenvalue_sequence(300, h);
    for (int n = 2; n <= 300; ++n) EXPECT_GE(seq[0], seq[static_cast<std::size_t>(n - 1)] - 1e-12) << n << " " << h;
    if (h <= 0.5 + 1e-12) {
      for (int n = 3; n <= 300; ++n) EXPECT_GE(seq[1], seq[static_cast<std::size_t>(n - 1)] - 1e-12) << n << " " << h;
    }
  }
}

TEST(Legendre, LowOrdersAndEndpoint) {
  for (double z : {-1.0, -0.3, 0.0, 0.45, 1.0}) {
    EXPECT_EQ(legendre_Q(0, z), 1.0);
    EXPECT_EQ(legendre_Q(1, z), -z);
    EXPECT_NEAR(legendre_Q(2, z), 0.5 * (3 * z * z - 1), 1e-15);
    EXPECT_NEAR(legendre_Q(3, z), -0.5 * (5 * z * z * z - 3 * z), 1e-15);
  }
  for (int n = 0; n <= 50; ++n) {
    EXPECT_EQ(legendre_Q_exact(n, Rational(-1)), 1) << n;
    EXPECT_EQ(legendre_Q(n, -1.0), 1.0) << n;
  }
  EXPECT_THROW(legendre_Q(-1, 0.0), DomainError);
}

TEST(Legendre, DecayBound) {
  for (int n = 1; n <= 200; ++n) {
    const double bound = std::sqrt(2.0 / (std::numbers::pi * n));
    for (int k = 1; k < 1000; ++k) {
      const double a = std::numbers::pi * k / 1000.0;
      EXPECT_LT(std::sqrt(std::sin(a)) * std::abs(legendre_Q(n, std::cos(a))), bound) << n << " " << a;
    }
  }
}

TEST(JCoefficient, ClosedForms) {
  for (double z : {-1.0, -0.7, 0.0, 0.2, 0.85}) {
    EXPECT_NEAR(J_coefficient(0, z), 1.0 / (2.0 * (1.0 - z)), 1e-14);
    EXPECT_NEAR(J_coefficient(2, z), (1.0 - z) / 4.0, 1e-14);
    EXPECT_NEAR(J_coefficient(3, z), -(1.0 - z) * (2.0 * z + 1.0) / 4.0, 1e-14);
  }
  EXPECT_THROW(J_coefficient(2, 1.0), DomainError);
  EXPECT_THROW(J_coefficient_legendre(1, 0.0), DomainError);
}

TEST(JCoefficient, MatchesLegendreCombinationAndCurveSlopes) {
  const auto polys = eigenvalue_polynomials(99, 100);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pick(-1.0, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    const double z = pick(rng);
    for (int n = 2; n <= 100; ++n) {
      const double j = J_coefficient(n, z);
      EXPECT_NEAR(j, J_coefficient_legendre(n, z), 1e-10) << n << " " << z;
      const double slope = polys[static_cast<std::size_t>(n - 2)].derivative().evaluate(1.0 + z);
      EXPECT_NEAR(j, slope, 1e-10) << n << " " << z;
    }
  }
}

TEST(SphericalU, ValueAtBasePoint) {
  const auto u = spherical_u_polynomials(30);
  for (long n = 1; n <= 30; ++n) EXPECT_EQ(u[static_cast<std::size_t>(n - 1)].evaluate(Rational(1)), -n * (n + 1));
  EXPECT_DOUBLE_EQ(spherical_u(4, 0.0), -20.0);
}

TEST(SphericalU, FirstCoefficient) {
  for (double theta : {0.0, 0.4, 1.3, 2.9, std::numbers::pi}) {
    EXPECT_NEAR(spherical_u(1, theta), -(1.0 + std::cos(theta)), 1e-15);
  }
}

TEST(SphericalU, CapIntegralReproducesSeriesI) {
  // Quadrature oracle independent of the series engine for the integral.
  const auto u = spherical_u_polynomials(20);
  const ExactSeries series = series_I(20);
  for (double a : {0.3, 0.9, 1.7, 2.6}) {
    const double h = 1.0 - std::cos(a);
    for (int n = 1; n <= 20; ++n) {
      const auto& un = u[static_cast<std::size_t>(n - 1)];
      const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double t) { return 0.5 * std::sin(t) * un.evaluate(std::cos(t)); }, 0.0, a, 10, 1e-14);
      EXPECT_NEAR(integral, series[static_cast<std::size_t>(n)].evaluate(h), 1e-8) << n << " " << a;
    }
  }
}

}  // namespace
