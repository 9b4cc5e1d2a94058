#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "selfsim/algebra/algebraic_number.hpp"
#include "selfsim/algebra/int_polynomial.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::algebra {

/// Q(theta) for a monic irreducible theta_minpoly (irreducibility is trusted).
/// Embeddings are ordered by real part descending, then imaginary part
/// descending, and are numbered from 1.
class NumberField {
 public:
  /// The rational field, represented with minimal polynomial X.
  NumberField() : NumberField(IntPolynomial{0, 1}) {}

  explicit NumberField(IntPolynomial theta_minpoly, std::size_t embedding_index = 1, const PrecisionContext& ctx = {})
      : poly_(std::move(theta_minpoly)) {
    if (poly_.degree() < 1) throw ValidationError("field minimal polynomial must have degree >= 1", "/field_minpoly");
    if (poly_.leading() != 1) throw ValidationError("field minimal polynomial must be monic", "/field_minpoly");
    if (!is_squarefree(poly_)) throw ValidationError("field minimal polynomial must be squarefree", "/field_minpoly");
    auto conj = std::make_shared<std::vector<AlgebraicNumber>>(AlgebraicNumber::conjugates(poly_, ctx));
    std::sort(conj->begin(), conj->end(), [](const AlgebraicNumber& a, const AlgebraicNumber& b) {
      int c = cmp(a.root_ball().re(), b.root_ball().re());
      return c != 0 ? c > 0 : cmp(a.root_ball().im(), b.root_ball().im()) > 0;
    });
    embeddings_ = std::move(conj);
    if (embedding_index < 1 || embedding_index > embeddings_->size())
      throw ValidationError("embedding_index out of range", "/embedding_index");
    index_ = embedding_index;
  }

  static NumberField rationals() { return NumberField(); }

  const IntPolynomial& theta_minpoly() const { return poly_; }
  std::size_t degree() const { return static_cast<std::size_t>(poly_.degree()); }
  bool is_rational() const { return degree() == 1; }
  /// The distinguished embedding used when values are needed as numbers.
  std::size_t embedding_index() const { return index_; }
  /// Conjugate theta_k, k = 1..d.
  const AlgebraicNumber& theta(std::size_t k) const {
    if (k < 1 || k > degree()) throw ValidationError("embedding index out of range");
    return (*embeddings_)[k - 1];
  }
  ComplexBall embedding(std::size_t k) const { return theta(k).root_ball(); }

  friend bool operator==(const NumberField& a, const NumberField& b) { return a.poly_ == b.poly_; }

 private:
  IntPolynomial poly_;
  std::shared_ptr<const std::vector<AlgebraicNumber>> embeddings_;
  std::size_t index_ = 1;
};

/// (sum coords_i theta^i) / denom with denom > 0, kept in lowest terms.
class FieldElement {
 public:
  FieldElement() = default;
  FieldElement(std::vector<mpz_class> coords, mpz_class denom) : c_(std::move(coords)), den_(std::move(denom)) {
    if (den_ == 0) throw ValidationError("field element denominator must be positive");
    if (den_ < 0) {
      den_ = -den_;
      for (auto& x : c_) x = -x;
    }
    normalize();
  }

  static FieldElement rational(const mpq_class& q, std::size_t d) {
    std::vector<mpz_class> c(d, mpz_class(0));
    c[0] = q.get_num();
    return FieldElement(std::move(c), q.get_den());
  }
  static FieldElement theta(std::size_t d) {
    std::vector<mpz_class> c(d, mpz_class(0));
    if (d == 1) throw ValidationError("theta of the rational field is not an element of degree 1 basis");
    c[1] = 1;
    return FieldElement(std::move(c), 1);
  }

  std::size_t dim() const { return c_.size(); }
  const std::vector<mpz_class>& coords() const { return c_; }
  const mpz_class& denom() const { return den_; }
  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const mpz_class& x) { return x == 0; });
  }
  bool is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  mpq_class rational_value() const {
    mpq_class q(c_.empty() ? mpz_class(0) : c_[0], den_);
    q.canonicalize();
    return q;
  }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    check_dims(a, b);
    std::vector<mpz_class> c(a.c_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.c_[i] * b.den_ + b.c_[i] * a.den_;
    return FieldElement(std::move(c), a.den_ * b.den_);
  }
  friend FieldElement operator-(const FieldElement& a) {
    FieldElement r = a;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) { return a + (-b); }
  friend bool operator==(const FieldElement& a, const FieldElement& b) { return a.c_ == b.c_ && a.den_ == b.den_; }
  friend auto operator<=>(const FieldElement& a, const FieldElement& b) {
    if (a.c_.size() != b.c_.size()) return a.c_.size() <=> b.c_.size();
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      int c = cmp(a.c_[i], b.c_[i]);
      if (c != 0) return c <=> 0;
    }
    return cmp(a.den_, b.den_) <=> 0;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < c_.size(); ++i) s += (i ? ", " : "") + c_[i].get_str();
    return s + "]/" + den_.get_str();
  }

 private:
  static void check_dims(const FieldElement& a, const FieldElement& b) {
    if (a.c_.size() != b.c_.size()) throw ValidationError("field elements from fields of different degree");
  }
  void normalize() {
    mpz_class g = den_;
    for (const auto& x : c_) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1) {
      for (auto& x : c_) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
      mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
    }
  }

  std::vector<mpz_class> c_;
  mpz_class den_{1};
};

/// Product in Q(theta), reducing modulo the monic minimal polynomial.
inline FieldElement mul(const FieldElement& a, const FieldElement& b, const NumberField& field) {
  const std::size_t d = field.degree();
  if (a.dim() != d || b.dim() != d) throw ValidationError("field element dimension mismatch");
  std::vector<mpz_class> prod(2 * d - 1, mpz_class(0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) prod[i + j] += a.coords()[i] * b.coords()[j];
  const auto& m = field.theta_minpoly();
  for (std::size_t k = prod.size(); k-- > d;) {
    mpz_class top = prod[k];
    if (top == 0) continue;
    for (std::size_t i = 0; i < d; ++i) prod[k - d + i] -= top * m[i];
    prod[k] = 0;
  }
  prod.resize(d);
  return FieldElement(std::move(prod), a.denom() * b.denom());
}

/// sigma_k(x) as a ball of radius at most about 2^-bits.
inline ComplexBall embed(const FieldElement& x, const NumberField& field, std::size_t k, std::int64_t bits = 128,
                         const PrecisionContext& ctx = {}) {
  if (k < 1 || k > field.degree()) throw ValidationError("embedding index out of range");
  if (x.dim() != field.degree()) throw ValidationError("field element dimension mismatch");
  if (x.is_rational()) return ComplexBall(Ball::from_rational(x.rational_value(), bits + 64));
  std::int64_t extra = 8;
  for (const auto& c : x.coords()) extra = std::max<std::int64_t>(extra, mpz_sizeinbase(c.get_mpz_t(), 2) + 8);
  for (std::int64_t p = bits + extra;; p *= 2) {
    ComplexBall t = field.theta(k).enclosure(p, ctx);
    ComplexBall acc(Dyadic(x.coords().back()));
    for (std::size_t i = x.dim() - 1; i-- > 0;) acc = add(mul(acc, t, p), ComplexBall(Dyadic(x.coords()[i])), p);
    ComplexBall out = div(acc, ComplexBall(Dyadic(x.denom())), p + 32);
    if (cmp(out.rad(), Dyadic::pow2(-bits)) <= 0 || p > 4 * ctx.max_bits) return out;
  }
}

inline ComplexBall embed(const FieldElement& x, const NumberField& field) {
  return embed(x, field, field.embedding_index());
}

/// Polynomial with coefficients in Q(theta), lowest degree first.
class FieldPolynomial {
 public:
  FieldPolynomial() = default;
  explicit FieldPolynomial(std::vector<FieldElement> coeffs) : c_(std::move(coeffs)) {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  static FieldPolynomial from_int(const IntPolynomial& f, std::size_t d) {
    std::vector<FieldElement> c;
    for (const auto& a : f.coeffs()) c.push_back(FieldElement::rational(mpq_class(a), d));
    return FieldPolynomial(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<FieldElement>& coeffs() const { return c_; }

  /// Least common denominator L, so that L f has coefficients in Z[theta].
  mpz_class common_denominator() const {
    mpz_class l(1);
    for (const auto& a : c_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a.denom().get_mpz_t());
    return l;
  }

  /// Coefficient table of L f: row i holds the integer theta-coordinates of the X^i coefficient.
  std::vector<std::vector<mpz_class>> integral_table() const {
    mpz_class l = common_denominator();
    std::vector<std::vector<mpz_class>> t;
    for (const auto& a : c_) {
      mpz_class s = l / a.denom();
      std::vector<mpz_class> row;
      for (const auto& x : a.coords()) row.push_back(x * s);
      t.push_back(std::move(row));
    }
    return t;
  }

  /// sigma_k(f) evaluated at z.
  ComplexBall eval(const NumberField& field, std::size_t k, const ComplexBall& z, std::int64_t prec,
                   const PrecisionContext& ctx = {}) const {
    if (c_.empty()) return ComplexBall();
    ComplexBall acc = embed(c_.back(), field, k, prec, ctx);
    for (std::size_t i = c_.size() - 1; i-- > 0;) acc = add(mul(acc, z, prec), embed(c_[i], field, k, prec, ctx), prec);
    return acc;
  }

 private:
  std::vector<FieldElement> c_;
};

/// F = prod_k sigma_k(L f) in Z[X]: every root of f is a root of F.
/// Coefficients are formed in ball arithmetic and rounded once every radius is below 1/2.
inline IntPolynomial lift_to_int_poly(const FieldPolynomial& f, const NumberField& field, const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("lift_to_int_poly of the zero polynomial");
  const std::size_t d = field.degree();
  const auto table = f.integral_table();
  if (d == 1) {
    std::vector<mpz_class> c;
    for (const auto& row : table) c.push_back(row[0]);
    return IntPolynomial(std::move(c));
  }
  std::int64_t mag = 0;
  for (const auto& row : table)
    for (const auto& x : row) mag = std::max<std::int64_t>(mag, mpz_sizeinbase(x.get_mpz_t(), 2));
  for (std::int64_t p = std::max<std::int64_t>(ctx.working_bits, static_cast<std::int64_t>(d) * (mag + 8) + 64);; p *= 2) {
    std::vector<ComplexBall> prod{ComplexBall(1)};
    for (std::size_t k = 1; k <= d; ++k) {
      ComplexBall t = field.theta(k).enclosure(p, ctx);
      std::vector<ComplexBall> conj;
      for (const auto& row : table) {
        ComplexBall acc(Dyadic(row.back()));
        for (std::size_t i = row.size() - 1; i-- > 0;) acc = add(mul(acc, t, p), ComplexBall(Dyadic(row[i])), p);
        conj.push_back(acc);
      }
      std::vector<ComplexBall> next(prod.size() + conj.size() - 1, ComplexBall());
      for (std::size_t i = 0; i < prod.size(); ++i)
        for (std::size_t j = 0; j < conj.size(); ++j) next[i + j] = add(next[i + j], mul(prod[i], conj[j], p), p);
      prod = std::move(next);
    }
    bool ok = true;
    std::vector<mpz_class> coeffs;
    const Dyadic half = Dyadic::pow2(-1);
    for (const auto& c : prod) {
      if (cmp(c.rad(), half) >= 0 || cmp(c.im().abs() + c.rad(), half) >= 0) {
        ok = false;
        break;
      }
      mpq_class q = (c.re() + half).to_rational();
      mpz_class z;
      mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
      if (!c.real().contains(Dyadic(z))) {
        ok = false;
        break;
      }
      coeffs.push_back(z);
    }
    if (ok) return IntPolynomial(std::move(coeffs));
    if (p > ctx.max_bits) throw NoConvergence("lift_to_int_poly: coefficient rounding not certified within the precision cap");
  }
}

}  // namespace selfsim::algebra
