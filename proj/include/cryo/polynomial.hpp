#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace cryo {

using Rational = mpq_class;

/// Exact rational of a finite double (every double is a dyadic rational).
inline Rational exact_rational(double x) { return Rational(x); }

/// Polynomial in one variable with exact rational coefficients;
/// coefficient k multiplies variable^k. The zero polynomial has no
/// coefficients, otherwise the leading coefficient is nonzero.
class RationalPolynomial {
 public:
  RationalPolynomial() = default;

  explicit RationalPolynomial(std::vector<Rational> coefficients) : c_(std::move(coefficients)) {
    trim();
  }

  RationalPolynomial(std::initializer_list<Rational> coefficients) : c_(coefficients) { trim(); }

  static RationalPolynomial constant(const Rational& a) { return RationalPolynomial({a}); }

  /// The polynomial `variable`.
  static RationalPolynomial identity() { return RationalPolynomial({Rational(0), Rational(1)}); }

  bool is_zero() const { return c_.empty(); }

  /// Degree; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  /// Coefficient of variable^k (zero beyond the degree).
  Rational coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : Rational(0); }

  const std::vector<Rational>& coefficients() const { return c_; }

  RationalPolynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<long>(k);
    return RationalPolynomial(std::move(d));
  }

  /// Exact value at a rational point.
  Rational evaluate(const Rational& x) const {
    Rational acc(0);
    for (std::size_t k = c_.size(); k-- > 0;) {
      acc *= x;
      acc += c_[k];
    }
    return acc;
  }

  /// Value at a double, computed exactly and rounded once. Slower than
  /// Horner in floating point but free of cancellation.
  double evaluate(double x) const { return evaluate(exact_rational(x)).get_d(); }

  RationalPolynomial& operator+=(const RationalPolynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }

  RationalPolynomial& operator-=(const RationalPolynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    trim();
    return *this;
  }

  RationalPolynomial& operator*=(const Rational& a) {
    if (a == 0) {
      c_.clear();
      return *this;
    }
    for (auto& c : c_) c *= a;
    return *this;
  }

  friend RationalPolynomial operator+(RationalPolynomial a, const RationalPolynomial& b) { return a += b; }
  friend RationalPolynomial operator-(RationalPolynomial a, const RationalPolynomial& b) { return a -= b; }
  friend RationalPolynomial operator-(RationalPolynomial a) { return a *= Rational(-1); }
  friend RationalPolynomial operator*(RationalPolynomial a, const Rational& s) { return a *= s; }
  friend RationalPolynomial operator*(const Rational& s, RationalPolynomial a) { return a *= s; }

  friend RationalPolynomial operator*(const RationalPolynomial& a, const RationalPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> out(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return RationalPolynomial(std::move(out));
  }

  RationalPolynomial& operator*=(const RationalPolynomial& o) { return *this = *this * o; }

  friend bool operator==(const RationalPolynomial& a, const RationalPolynomial& b) { return a.c_ == b.c_; }

  /// Human-readable form such as "1/2*h - 1/8*h^2".
  std::string to_string(const std::string& var = "h") const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (c_[k] == 0) continue;
      Rational a = c_[k];
      if (first) {
        if (a < 0) os << "-";
      } else {
        os << (a < 0 ? " - " : " + ");
      }
      a = abs(a);
      if (k == 0) {
        os << a.get_str();
      } else {
        if (a != 1) os << a.get_str() << "*";
        os << var;
        if (k > 1) os << "^" << k;
      }
      first = false;
    }
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const RationalPolynomial& p) { return os << p.to_string(); }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  std::vector<Rational> c_;
};

}  // namespace cryo
