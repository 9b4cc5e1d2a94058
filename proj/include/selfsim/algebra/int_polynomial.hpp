#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::algebra {

/// Dense polynomial with exact integer coefficients, lowest degree first.
/// The leading coefficient is nonzero unless the polynomial is zero.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<mpz_class> coeffs) : c_(std::move(coeffs)) { trim(); }
  IntPolynomial(std::initializer_list<long> coeffs) {
    for (long v : coeffs) c_.emplace_back(v);
    trim();
  }

  static IntPolynomial monomial(const mpz_class& coeff, std::size_t degree) {
    std::vector<mpz_class> c(degree + 1, mpz_class(0));
    c[degree] = coeff;
    return IntPolynomial(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }
  /// Degree; -1 for the zero polynomial.
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<mpz_class>& coeffs() const { return c_; }
  const mpz_class& operator[](std::size_t i) const { return c_[i]; }
  mpz_class coeff(std::size_t i) const { return i < c_.size() ? c_[i] : mpz_class(0); }
  const mpz_class& leading() const { return c_.back(); }

  /// Index of the lowest nonzero coefficient.
  std::size_t valuation() const {
    std::size_t v = 0;
    while (v < c_.size() && c_[v] == 0) ++v;
    return v;
  }

  mpz_class content() const {
    mpz_class g(0);
    for (const auto& a : c_) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), a.get_mpz_t());
    return g;
  }

  /// Divides out the content and makes the leading coefficient positive.
  IntPolynomial primitive_part() const {
    if (is_zero()) return {};
    mpz_class g = content();
    if (leading() < 0) g = -g;
    std::vector<mpz_class> out(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) mpz_divexact(out[i].get_mpz_t(), c_[i].get_mpz_t(), g.get_mpz_t());
    return IntPolynomial(std::move(out));
  }

  bool is_primitive() const { return !is_zero() && content() == 1; }

  IntPolynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<mpz_class> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<unsigned long>(i);
    return IntPolynomial(std::move(d));
  }

  /// Divides by X^k, dropping the k lowest coefficients (caller checks they vanish).
  IntPolynomial shift_down(std::size_t k) const {
    if (k >= c_.size()) return {};
    return IntPolynomial(std::vector<mpz_class>(c_.begin() + static_cast<long>(k), c_.end()));
  }

  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
    std::vector<mpz_class> r(std::max(a.c_.size(), b.c_.size()), mpz_class(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
    return IntPolynomial(std::move(r));
  }
  friend IntPolynomial operator-(const IntPolynomial& a) {
    std::vector<mpz_class> r = a.c_;
    for (auto& x : r) x = -x;
    return IntPolynomial(std::move(r));
  }
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) { return a + (-b); }
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<mpz_class> r(a.c_.size() + b.c_.size() - 1, mpz_class(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return IntPolynomial(std::move(r));
  }
  friend IntPolynomial operator*(const mpz_class& k, const IntPolynomial& a) {
    std::vector<mpz_class> r = a.c_;
    for (auto& x : r) x *= k;
    return IntPolynomial(std::move(r));
  }
  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.c_ == b.c_; }

  /// Exact value at a rational point.
  mpq_class eval(const mpq_class& x) const {
    mpq_class acc(0);
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + mpq_class(c_[i]);
    return acc;
  }

  numerics::ComplexBall eval(const numerics::ComplexBall& x, std::int64_t prec) const {
    using namespace numerics;
    if (is_zero()) return ComplexBall();
    ComplexBall acc{Dyadic(c_.back())};
    for (std::size_t i = c_.size() - 1; i-- > 0;) acc = add(mul(acc, x, prec), ComplexBall(Dyadic(c_[i])), prec);
    return acc;
  }

  numerics::Ball eval(const numerics::Ball& x, std::int64_t prec) const {
    using namespace numerics;
    if (is_zero()) return Ball();
    Ball acc{Dyadic(c_.back())};
    for (std::size_t i = c_.size() - 1; i-- > 0;) acc = add(mul(acc, x, prec), Ball(Dyadic(c_[i])), prec);
    return acc;
  }

  std::vector<numerics::ComplexBall> as_balls() const {
    std::vector<numerics::ComplexBall> out;
    out.reserve(c_.size());
    for (const auto& a : c_) out.emplace_back(numerics::Dyadic(a));
    return out;
  }

  /// Sum of |a_i|.
  mpz_class l1() const {
    mpz_class s(0);
    for (const auto& a : c_) s += abs(a);
    return s;
  }
  mpz_class linf() const {
    mpz_class m(0);
    for (const auto& a : c_) m = std::max(m, mpz_class(abs(a)));
    return m;
  }
  /// Sum of |a_i|^2 (the square of the l2 norm).
  mpz_class l2_squared() const {
    mpz_class s(0);
    for (const auto& a : c_) s += a * a;
    return s;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string s;
    for (std::size_t i = c_.size(); i-- > 0;) {
      if (c_[i] == 0) continue;
      mpz_class a = c_[i];
      if (!s.empty()) s += a < 0 ? " - " : " + ";
      else if (a < 0) s += "-";
      mpz_class m = abs(a);
      if (m != 1 || i == 0) s += m.get_str();
      if (i >= 1) s += "X";
      if (i >= 2) s += "^" + std::to_string(i);
    }
    return s;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  std::vector<mpz_class> c_;
};

namespace detail {

using RatPoly = std::vector<mpq_class>;

inline void rtrim(RatPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline RatPoly to_rat(const IntPolynomial& f) {
  RatPoly r;
  for (const auto& a : f.coeffs()) r.emplace_back(a);
  return r;
}

/// Clears denominators and returns the primitive integer multiple.
inline IntPolynomial to_int_primitive(const RatPoly& p) {
  mpz_class l(1);
  for (const auto& a : p) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a.get_den_mpz_t());
  std::vector<mpz_class> c;
  for (const auto& a : p) {
    mpq_class t = a * l;
    c.push_back(t.get_num());
  }
  return IntPolynomial(std::move(c)).primitive_part();
}

/// Quotient and remainder over Q.
inline std::pair<RatPoly, RatPoly> divmod(RatPoly a, const RatPoly& b) {
  RatPoly q;
  rtrim(a);
  if (b.empty()) throw Error("polynomial division by zero");
  if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, mpq_class(0));
  while (!a.empty() && a.size() >= b.size()) {
    std::size_t shift = a.size() - b.size();
    mpq_class f = a.back() / b.back();
    q[shift] = f;
    for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
    a.pop_back();
    rtrim(a);
  }
  rtrim(q);
  return {q, a};
}

}  // namespace detail

/// Primitive gcd over Z (positive leading coefficient).
inline IntPolynomial gcd(const IntPolynomial& f, const IntPolynomial& g) {
  if (f.is_zero()) return g.primitive_part();
  if (g.is_zero()) return f.primitive_part();
  IntPolynomial a = f.primitive_part(), b = g.primitive_part();
  while (!b.is_zero()) {
    auto [q, r] = detail::divmod(detail::to_rat(a), detail::to_rat(b));
    a = b;
    b = detail::to_int_primitive(r);
  }
  return a.primitive_part();
}

/// Exact quotient f / g over Q, scaled to a primitive integer polynomial.
inline IntPolynomial divide_primitive(const IntPolynomial& f, const IntPolynomial& g) {
  auto [q, r] = detail::divmod(detail::to_rat(f), detail::to_rat(g));
  if (!r.empty()) throw Error("divide_primitive: division is not exact");
  return detail::to_int_primitive(q);
}

/// Whether g divides f in Q[X].
inline bool divides(const IntPolynomial& g, const IntPolynomial& f) {
  auto [q, r] = detail::divmod(detail::to_rat(f), detail::to_rat(g));
  return r.empty();
}

/// A factor of a squarefree decomposition: `factor` is squarefree, and its
/// roots have multiplicity `multiplicity` in the input.
struct SquarefreeFactor {
  IntPolynomial factor;
  int multiplicity;
};

/// Yun's algorithm over Q. Factors are primitive with positive leading
/// coefficient and pairwise coprime; constant factors are omitted.
inline std::vector<SquarefreeFactor> squarefree_decomposition(const IntPolynomial& f) {
  if (f.is_zero()) throw ValidationError("squarefree decomposition of the zero polynomial");
  std::vector<SquarefreeFactor> out;
  if (f.degree() < 1) return out;
  IntPolynomial fp = f.primitive_part();
  IntPolynomial df = fp.derivative();
  IntPolynomial a0 = gcd(fp, df);
  detail::RatPoly b = detail::to_rat(divide_primitive(fp, a0));
  // c = f'/a0 and d = c - b' must be taken with consistent scaling, so work over Q.
  auto rdiv = [](const detail::RatPoly& x, const detail::RatPoly& y) {
    auto [q, r] = detail::divmod(x, y);
    if (!r.empty()) throw Error("squarefree decomposition: inexact division");
    return q;
  };
  auto rderiv = [](const detail::RatPoly& x) {
    detail::RatPoly d;
    for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] * static_cast<unsigned long>(i));
    detail::rtrim(d);
    return d;
  };
  auto rsub = [](detail::RatPoly x, const detail::RatPoly& y) {
    if (x.size() < y.size()) x.resize(y.size(), mpq_class(0));
    for (std::size_t i = 0; i < y.size(); ++i) x[i] -= y[i];
    detail::rtrim(x);
    return x;
  };
  auto rgcd = [](const detail::RatPoly& x, const detail::RatPoly& y) {
    IntPolynomial g = gcd(detail::to_int_primitive(x), detail::to_int_primitive(y));
    return detail::to_rat(g);
  };
  // Normalize b = f / gcd(f, f') over Q and c = f' / gcd(f, f') with matching scale.
  detail::RatPoly fr = detail::to_rat(fp);
  detail::RatPoly a0r = detail::to_rat(a0);
  b = rdiv(fr, a0r);
  detail::RatPoly c = rdiv(rderiv(fr), a0r);
  detail::RatPoly d = rsub(c, rderiv(b));
  int i = 1;
  while (b.size() > 1) {
    detail::RatPoly a = d.empty() ? b : rgcd(b, d);
    if (a.size() > 1) out.push_back({detail::to_int_primitive(a), i});
    detail::RatPoly nb = rdiv(b, a);
    c = rdiv(d, a);
    b = nb;
    d = rsub(c, rderiv(b));
    ++i;
  }
  return out;
}

/// Squarefree part (product of the distinct irreducible factors), primitive.
inline IntPolynomial squarefree_part(const IntPolynomial& f) {
  IntPolynomial r{1};
  for (const auto& sf : squarefree_decomposition(f)) r = r * sf.factor;
  return r.primitive_part();
}

inline bool is_squarefree(const IntPolynomial& f) {
  if (f.degree() < 1) return true;
  return gcd(f, f.derivative()).degree() == 0;
}

}  // namespace selfsim::algebra
