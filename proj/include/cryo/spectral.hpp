#pragma once

// Exact and numeric spectrum of the localized parallel transport operator T_h.
//
// The eigenvalue on the (2n+1)-dimensional isotypic block is
//   lambda_n(h) = -I_n(h) / (n (n + 1)),
// where I_n(h) is the t^n coefficient of
//   I(h, t) = 1/2 [ h g^(-1/2) - t h (2 - h) g^(-3/2) - t^(-1) (g^(1/2) - (1 - t)) ],
//   g = 1 + 2 t (h - 1) + t^2.
// g is the Legendre generating kernel at z = 1 - h, so the three powers are
// the Gegenbauer families C^(1/2) = P, C^(3/2) and C^(-1/2) at z.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cryo/errors.hpp"
#include "cryo/polynomial.hpp"
#include "cryo/series.hpp"

namespace cryo {

/// Largest n for which eigenvalue_polynomial builds the exact polynomial by default.
inline constexpr int kDefaultExactOrderCap = 64;

using ExactSeries = TruncatedSeries<RationalPolynomial>;

namespace detail {

inline RationalPolynomial poly(std::initializer_list<long> coefficients) {
  std::vector<Rational> c;
  for (long v : coefficients) c.emplace_back(v);
  return RationalPolynomial(std::move(c));
}

/// 1 + 2t(h - 1) + t^2 as a series in t with polynomial-in-h coefficients.
inline ExactSeries transport_kernel(std::size_t order) {
  return ExactSeries(order, {poly({1}), poly({-2, 2}), poly({1})});
}

}  // namespace detail

/// I(h, t) truncated after t^order; coefficient n is the exact polynomial I_n(h).
inline ExactSeries series_I(std::size_t order) {
  if (order < 1) throw DomainError("series_I: order must be at least 1");
  const std::size_t work = order + 1;
  const ExactSeries g = detail::transport_kernel(work);
  const RationalPolynomial h = RationalPolynomial::identity();

  ExactSeries a = g.power(-1, 2);
  a.scale(h);
  ExactSeries b = g.power(-3, 2).shifted_up(1);
  b.scale(h * detail::poly({2, -1}));
  // g^(1/2) - (1 - t) has a vanishing constant term, so dividing by t is exact.
  ExactSeries c = g.power(1, 2) - ExactSeries(work, {detail::poly({1}), detail::poly({-1})});

  ExactSeries bracket = (a - b).truncated(order) - c.divided_by_t();
  bracket.scale(RationalPolynomial::constant(Rational(1, 2)));
  return bracket;
}

/// Exact eigenvalue polynomials lambda_1 .. lambda_{n_max} from one expansion.
inline std::vector<RationalPolynomial> eigenvalue_polynomials(int n_max, int cap = kDefaultExactOrderCap) {
  if (n_max < 1) throw DomainError("eigenvalue_polynomials: n_max must be at least 1");
  if (n_max > cap) {
    throw OrderExceeded("eigenvalue_polynomials: n = " + std::to_string(n_max) +
                        " exceeds the exact-order cap " + std::to_string(cap));
  }
  const ExactSeries series = series_I(static_cast<std::size_t>(n_max));
  std::vector<RationalPolynomial> out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    out.push_back(series[n] * Rational(-1, static_cast<long>(n) * (n + 1)));
  }
  return out;
}

/// Exact lambda_n(h), a polynomial of degree n + 1 with zero constant term.
inline RationalPolynomial eigenvalue_polynomial(int n, int cap = kDefaultExactOrderCap) {
  if (n < 1) throw DomainError("eigenvalue_polynomial: n must be at least 1");
  return eigenvalue_polynomials(n, cap).back();
}

namespace detail {

inline void check_h(double h, const char* who) {
  if (!(h >= 0.0 && h <= 2.0)) throw DomainError(std::string(who) + ": h must lie in [0, 2]");
}

}  // namespace detail

/// lambda_1(h) .. lambda_{n_max}(h) in floating point, one recurrence pass.
inline std::vector<double> eigenvalue_sequence(int n_max, double h) {
  detail::check_h(h, "eigenvalue_sequence");
  if (n_max < 1) throw DomainError("eigenvalue_sequence: n_max must be at least 1");
  const double z = 1.0 - h;
  const std::size_t top = static_cast<std::size_t>(n_max) + 1;

  // Legendre P_m(z), m = 0..top.
  std::vector<double> legendre(top + 1);
  legendre[0] = 1.0;
  legendre[1] = z;
  for (std::size_t m = 1; m < top; ++m) {
    legendre[m + 1] = ((2.0 * m + 1.0) * z * legendre[m] - static_cast<double>(m) * legendre[m - 1]) /
                      (static_cast<double>(m) + 1.0);
  }
  // Gegenbauer C^(3/2)_m(z): m C_m = (2m + 1) z C_{m-1} - (m + 1) C_{m-2}.
  std::vector<double> g3(top + 1);
  g3[0] = 1.0;
  g3[1] = 3.0 * z;
  for (std::size_t m = 2; m <= top; ++m) {
    g3[m] = ((2.0 * m + 1.0) * z * g3[m - 1] - (static_cast<double>(m) + 1.0) * g3[m - 2]) /
            static_cast<double>(m);
  }
  // Gegenbauer C^(-1/2)_m(z): m C_m = (2m - 3) z C_{m-1} - (m - 3) C_{m-2}.
  std::vector<double> gm(top + 1);
  gm[0] = 1.0;
  gm[1] = -z;
  for (std::size_t m = 2; m <= top; ++m) {
    gm[m] = ((2.0 * m - 3.0) * z * gm[m - 1] - (static_cast<double>(m) - 3.0) * gm[m - 2]) /
            static_cast<double>(m);
  }

  std::vector<double> out(n_max);
  for (int n = 1; n <= n_max; ++n) {
    const double i_n = 0.5 * (h * legendre[n] - h * (2.0 - h) * g3[n - 1] - gm[n + 1]);
    out[n - 1] = -i_n / (static_cast<double>(n) * (n + 1.0));
  }
  return out;
}

/// lambda_n(h) in floating point via three-term recurrences; valid for large n.
inline double eigenvalue_numeric(int n, double h) {
  detail::check_h(h, "eigenvalue_numeric");
  if (n < 1 || n > 1'000'000) throw DomainError("eigenvalue_numeric: n must lie in [1, 1e6]");
  return eigenvalue_sequence(n, h).back();
}

/// Second-order small-h expansion 1/2 h - (1 + (n + 2)(n - 1)) h^2 / 8.
inline double quadratic_approx(int n, double h) {
  if (n < 1) throw DomainError("quadratic_approx: n must be at least 1");
  const double nn = static_cast<double>(n);
  return 0.5 * h - (1.0 + (nn + 2.0) * (nn - 1.0)) * h * h / 8.0;
}

/// G(h) = lambda_1(h) - lambda_2(h) = h^2/2 - h^3/6, defined on [0, 1/2].
inline double spectral_gap(double h) {
  if (!(h >= 0.0 && h <= 0.5)) throw DomainError("spectral_gap: h must lie in [0, 1/2]");
  return 0.5 * h * h - h * h * h / 6.0;
}

/// sum_{n=1..n_max} (2n + 1) lambda_n(h)^2; bounded by tr(T_h^2) = h / 2.
inline double trace_partial_sum(double h, int n_max) {
  detail::check_h(h, "trace_partial_sum");
  if (n_max < 1) throw DomainError("trace_partial_sum: n_max must be at least 1");
  const std::vector<double> lambda = eigenvalue_sequence(n_max, h);
  double sum = 0.0;
  for (int n = 1; n <= n_max; ++n) sum += (2.0 * n + 1.0) * lambda[n - 1] * lambda[n - 1];
  return sum;
}

/// sqrt(h) / sqrt(4n + 2), the bound implied by the trace identity.
inline double eigenvalue_upper_bound(int n, double h) {
  detail::check_h(h, "eigenvalue_upper_bound");
  if (n < 1) throw DomainError("eigenvalue_upper_bound: n must be at least 1");
  return std::sqrt(h) / std::sqrt(4.0 * n + 2.0);
}

/// Q_n(z) = (-1)^n P_n(z).
inline double legendre_Q(int n, double z) {
  if (n < 0) throw DomainError("legendre_Q: n must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = z;
  for (int m = 1; m < n; ++m) {
    const double next = ((2.0 * m + 1.0) * z * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  return (n % 2 == 0) ? cur : -cur;
}

/// Exact Q_n at a rational point.
inline Rational legendre_Q_exact(int n, const Rational& z) {
  if (n < 0) throw DomainError("legendre_Q_exact: n must be non-negative");
  Rational prev(1);
  if (n == 0) return prev;
  Rational cur = z;
  for (int m = 1; m < n; ++m) {
    Rational next = (Rational(2 * m + 1) * z * cur - Rational(m) * prev) / Rational(m + 1);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return (n % 2 == 0) ? cur : Rational(-cur);
}

/// t^n coefficient of J(z, t) = (1 + (1 + z) t + t^2) / (2 (1 - z)) * (1 + 2 z t + t^2)^(-1/2),
/// expanded numerically at the given z.
inline double J_coefficient(int n, double z) {
  if (n < 0) throw DomainError("J_coefficient: n must be non-negative");
  if (!(z >= -1.0 && z < 1.0)) throw DomainError("J_coefficient: z must lie in [-1, 1)");
  using Series = TruncatedSeries<double>;
  const std::size_t order = static_cast<std::size_t>(n);
  const Series kernel(order, {1.0, 2.0 * z, 1.0});
  const Series prefactor(order, {1.0, 1.0 + z, 1.0});
  const Series product = prefactor * kernel.power(-1, 2);
  return product[order] / (2.0 * (1.0 - z));
}

/// [Q_n(z) + (1 + z) Q_{n-1}(z) + Q_{n-2}(z)] / (2 (1 - z)) for n >= 2.
inline double J_coefficient_legendre(int n, double z) {
  if (n < 2) throw DomainError("J_coefficient_legendre: n must be at least 2");
  if (!(z >= -1.0 && z < 1.0)) throw DomainError("J_coefficient_legendre: z must lie in [-1, 1)");
  return (legendre_Q(n, z) + (1.0 + z) * legendre_Q(n - 1, z) + legendre_Q(n - 2, z)) / (2.0 * (1.0 - z));
}

/// Exact u_1 .. u_{n_max} restricted to x0 <| exp(theta A2), as polynomials in
/// c = cos(theta). They are the t^n coefficients of
///   G(theta, t) = 3 s^2 t^2 g^(-5/2) - t c g^(-3/2) - t g^(-3/2),
///   g = 1 - 2 t c + t^2,  s^2 = 1 - c^2.
inline std::vector<RationalPolynomial> spherical_u_polynomials(int n_max) {
  if (n_max < 1) throw DomainError("spherical_u_polynomials: n_max must be at least 1");
  const std::size_t order = static_cast<std::size_t>(n_max);
  const ExactSeries g(order, {detail::poly({1}), detail::poly({0, -2}), detail::poly({1})});
  ExactSeries five = g.power(-5, 2).shifted_up(2);
  five.scale(detail::poly({3, 0, -3}));
  ExactSeries three = g.power(-3, 2).shifted_up(1);
  three.scale(detail::poly({1, 1}));
  const ExactSeries gen = five - three;
  return {gen.coefficients().begin() + 1, gen.coefficients().end()};
}

/// u_n(x0 <| exp(theta A2)): exact polynomial in cos(theta), evaluated once.
inline double spherical_u(int n, double theta) {
  if (n < 1) throw DomainError("spherical_u: n must be at least 1");
  return spherical_u_polynomials(n).back().evaluate(std::cos(theta));
}

}  // namespace cryo
