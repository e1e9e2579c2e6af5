#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cryo/errors.hpp"
#include "cryo/polynomial.hpp"

namespace cryo {

/// Scalar field acting on a coefficient ring.
template <class Coef>
struct SeriesScalar;

template <>
struct SeriesScalar<RationalPolynomial> {
  using type = Rational;
  static RationalPolynomial zero() { return {}; }
  static RationalPolynomial one() { return RationalPolynomial::constant(Rational(1)); }
  static type from_ratio(long num, long den) { return type(num, den); }
};

template <>
struct SeriesScalar<double> {
  using type = double;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static type from_ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Power series in t truncated after t^order. Coefficients live in `Coef`:
/// RationalPolynomial for exact work with a second variable, double for
/// numeric expansions at a fixed value of that variable.
template <class Coef>
class TruncatedSeries {
 public:
  using Traits = SeriesScalar<Coef>;
  using Scalar = typename Traits::type;

  explicit TruncatedSeries(std::size_t order) : c_(order + 1, Traits::zero()) {}

  TruncatedSeries(std::size_t order, std::vector<Coef> leading) : TruncatedSeries(order) {
    for (std::size_t k = 0; k < leading.size() && k <= order; ++k) c_[k] = std::move(leading[k]);
  }

  std::size_t order() const { return c_.size() - 1; }
  const Coef& operator[](std::size_t k) const { return c_[k]; }
  Coef& operator[](std::size_t k) { return c_[k]; }
  const std::vector<Coef>& coefficients() const { return c_; }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    check_order(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }

  TruncatedSeries& operator-=(const TruncatedSeries& o) {
    check_order(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }

  /// Multiplies every coefficient by a ring element (e.g. a polynomial in h).
  TruncatedSeries& scale(const Coef& a) {
    for (auto& c : c_) c = c * a;
    return *this;
  }

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.check_order(b);
    TruncatedSeries out(a.order());
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; i + j < a.c_.size(); ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return out;
  }

  /// Multiplication by t^k, dropping terms beyond the order.
  TruncatedSeries shifted_up(std::size_t k) const {
    TruncatedSeries out(order());
    for (std::size_t i = 0; i + k < c_.size(); ++i) out.c_[i + k] = c_[i];
    return out;
  }

  /// Division by t. Requires a zero constant term; the result has order - 1.
  TruncatedSeries divided_by_t() const {
    if (!(c_[0] == Traits::zero())) {
      throw DomainError("TruncatedSeries: division by t needs a vanishing constant term");
    }
    if (order() == 0) throw DomainError("TruncatedSeries: cannot divide an order-0 series by t");
    TruncatedSeries out(order() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) out.c_[i - 1] = c_[i];
    return out;
  }

  /// Same series truncated to a lower order.
  TruncatedSeries truncated(std::size_t new_order) const {
    if (new_order > order()) throw DomainError("TruncatedSeries: cannot raise the order by truncation");
    TruncatedSeries out(new_order);
    for (std::size_t i = 0; i <= new_order; ++i) out.c_[i] = c_[i];
    return out;
  }

  /// (this)^(num/den) for a series with constant term 1.
  ///
  /// With g = 1 + u and f = g^alpha, differentiating gives g f' = alpha g' f,
  /// whose t^(k-1) coefficient yields
  ///   k f_k = sum_{j=1..k} (alpha j - (k - j)) g_j f_{k-j}.
  /// This reproduces the binomial expansion sum_m binom(alpha, m) u^m
  /// coefficient by coefficient without forming powers of u.
  TruncatedSeries power(long num, long den) const {
    if (!(c_[0] == Traits::one())) {
      throw DomainError("TruncatedSeries: power needs a unit constant term");
    }
    const Scalar alpha = Traits::from_ratio(num, den);
    std::vector<std::size_t> support;
    for (std::size_t j = 1; j < c_.size(); ++j) {
      if (!(c_[j] == Traits::zero())) support.push_back(j);
    }
    TruncatedSeries f(order());
    f.c_[0] = Traits::one();
    for (std::size_t k = 1; k < c_.size(); ++k) {
      Coef acc = Traits::zero();
      for (std::size_t j : support) {
        if (j > k) break;
        const Scalar weight = alpha * Scalar(static_cast<long>(j)) - Scalar(static_cast<long>(k - j));
        acc += c_[j] * f.c_[k - j] * weight;
      }
      const Scalar inv_k = Scalar(1) / Scalar(static_cast<long>(k));
      f.c_[k] = acc * inv_k;
    }
    return f;
  }

 private:
  void check_order(const TruncatedSeries& o) const {
    if (o.c_.size() != c_.size()) throw DomainError("TruncatedSeries: order mismatch");
  }

  std::vector<Coef> c_;
};

}  // namespace cryo
