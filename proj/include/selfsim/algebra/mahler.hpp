#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfsim/algebra/algebraic_number.hpp"
#include "selfsim/algebra/int_polynomial.hpp"
#include "selfsim/algebra/number_field.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"
#include "selfsim/numerics/roots.hpp"

namespace selfsim::algebra {

enum class Norm { L1, L2, Linf };

inline Ball lq_norm(std::span<const Ball> coeffs, Norm q, std::int64_t prec = 128) {
  if (coeffs.empty()) throw ValidationError("lq_norm requires a nonzero polynomial");
  Ball acc;
  switch (q) {
    case Norm::L1:
      for (const auto& a : coeffs) acc = add(acc, numerics::abs(a), prec);
      return acc;
    case Norm::L2:
      for (const auto& a : coeffs) acc = add(acc, mul(a, a, prec), prec);
      return numerics::sqrt(acc, prec);
    case Norm::Linf:
      for (const auto& a : coeffs) acc = numerics::max(acc, numerics::abs(a));
      return acc;
  }
  return acc;
}

inline Ball lq_norm(const IntPolynomial& f, Norm q, std::int64_t prec = 128) {
  if (f.is_zero()) throw ValidationError("lq_norm requires a nonzero polynomial");
  switch (q) {
    case Norm::L1:
      return Ball(Dyadic(f.l1()));
    case Norm::Linf:
      return Ball(Dyadic(f.linf()));
    case Norm::L2:
      return numerics::sqrt(Ball(Dyadic(f.l2_squared())), prec);
  }
  return {};
}

/// |a_n| prod max(1, |alpha_i|) over all roots with multiplicity.
inline Ball mahler_measure(const IntPolynomial& f, const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("mahler_measure requires a nonzero polynomial");
  const std::int64_t prec = ctx.working_bits;
  Ball m(Dyadic(mpz_class(abs(f.leading()))));
  if (f.degree() < 1) return m;
  if (f.degree() == 1) return Ball(Dyadic(abs(f[0]) > abs(f[1]) ? mpz_class(abs(f[0])) : mpz_class(abs(f[1]))));
  for (const auto& r : numerics::isolate_roots(f, Dyadic::pow2(-prec / 2), ctx)) {
    Ball factor = numerics::max(Ball(1), numerics::abs(r.ball, prec));
    m = mul(m, numerics::pow(factor, static_cast<unsigned long>(r.multiplicity), prec), prec);
  }
  return m;
}

inline Ball mahler_measure(const AlgebraicNumber& alpha, const PrecisionContext& ctx = {}) {
  return mahler_measure(alpha.minpoly(), ctx);
}

/// M(alpha)^(1/deg alpha).
inline Ball height(const AlgebraicNumber& alpha, const PrecisionContext& ctx = {}) {
  Ball m = mahler_measure(alpha.minpoly(), ctx);
  return numerics::root(m, static_cast<unsigned long>(alpha.degree()), ctx.working_bits);
}

enum class Verdict { Holds, Violated, Unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds";
    case Verdict::Violated:
      return "violated";
    default:
      return "unknown";
  }
}

/// lhs <= rhs decided from enclosures.
inline Verdict certify_leq(const Ball& lhs, const Ball& rhs) {
  if (cmp(lhs.upper(), rhs.lower()) <= 0) return Verdict::Holds;
  if (cmp(lhs.lower(), rhs.upper()) > 0) return Verdict::Violated;
  return Verdict::Unknown;
}

/// Classical comparisons between M(f) and the coefficient norms, n = deg f.
struct NormBoundsReport {
  Ball mahler;
  Verdict mahler_le_l1 = Verdict::Unknown;           // M <= l1
  Verdict linf_over_binom_le_mahler = Verdict::Unknown;  // linf / C(n, n/2) <= M
  Verdict mahler_le_l2 = Verdict::Unknown;           // M <= l2
  Verdict l2_le_sqrt_n1_linf = Verdict::Unknown;     // l2 <= sqrt(n+1) linf
  Verdict l1_le_2n_mahler = Verdict::Unknown;        // l1 <= 2^n M

  bool any_violation() const {
    for (Verdict v : {mahler_le_l1, linf_over_binom_le_mahler, mahler_le_l2, l2_le_sqrt_n1_linf, l1_le_2n_mahler})
      if (v == Verdict::Violated) return true;
    return false;
  }
  bool all_hold() const {
    for (Verdict v : {mahler_le_l1, linf_over_binom_le_mahler, mahler_le_l2, l2_le_sqrt_n1_linf, l1_le_2n_mahler})
      if (v != Verdict::Holds) return false;
    return true;
  }
};

inline NormBoundsReport check_norm_bounds(const IntPolynomial& f, const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("check_norm_bounds requires a nonzero polynomial");
  const std::int64_t prec = ctx.working_bits;
  const auto n = static_cast<unsigned long>(std::max<long>(f.degree(), 0));
  NormBoundsReport r;
  r.mahler = mahler_measure(f, ctx);
  const Ball& m = r.mahler;
  Ball l1(Dyadic(f.l1()));
  Ball linf(Dyadic(f.linf()));
  Ball l2sq(Dyadic(f.l2_squared()));
  r.mahler_le_l1 = certify_leq(m, l1);
  mpz_class binom;
  mpz_bin_uiui(binom.get_mpz_t(), n, n / 2);
  mpq_class lo(f.linf(), binom);
  lo.canonicalize();
  Ball lo_ball = lo.get_den() == 1 ? Ball(Dyadic(lo.get_num())) : Ball::from_rational(lo, prec);
  r.linf_over_binom_le_mahler = certify_leq(lo_ball, m);
  r.mahler_le_l2 = certify_leq(mul(m, m, prec), l2sq);
  r.l2_le_sqrt_n1_linf = f.l2_squared() <= mpz_class(n + 1) * f.linf() * f.linf() ? Verdict::Holds : Verdict::Violated;
  r.l1_le_2n_mahler = certify_leq(l1, mul_2exp(m, static_cast<std::int64_t>(n)));
  return r;
}

namespace detail {

/// prod 1 / min(1, |z|) over the given root balls; zero-free balls required.
inline Ball inverse_small_product(const std::vector<std::pair<ComplexBall, int>>& roots, std::int64_t prec) {
  Ball acc(1);
  for (const auto& [z, mult] : roots) {
    Ball a = numerics::min(Ball(1), numerics::abs(z, prec));
    acc = mul(acc, numerics::pow(numerics::inv(a, prec), static_cast<unsigned long>(mult), prec), prec);
  }
  return acc;
}

}  // namespace detail

/// Roots of sigma_k(g) for a squarefree g over Q(theta). They are found among the
/// roots of the lifted integer polynomial by discarding those where sigma_k(g)
/// is certified nonzero.
inline std::vector<ComplexBall> field_polynomial_roots(const FieldPolynomial& g, const NumberField& field, std::size_t k,
                                                       const Dyadic& eps, const PrecisionContext& ctx = {}) {
  if (g.degree() < 1) return {};
  const IntPolynomial lifted = lift_to_int_poly(g, field, ctx);
  const auto want = static_cast<std::size_t>(g.degree());
  Dyadic e = eps;
  for (std::int64_t bits = ctx.working_bits;; bits *= 2) {
    std::vector<ComplexBall> kept;
    for (const auto& r : numerics::isolate_roots(lifted, e, ctx)) {
      std::int64_t prec = std::max<std::int64_t>(bits, -r.ball.rad().top() + 64);
      if (g.eval(field, k, r.ball, prec, ctx).contains_zero()) kept.push_back(r.ball);
    }
    if (kept.size() == want) return kept;
    if (kept.size() < want)
      throw ValidationError("defining polynomial over the field is not squarefree");
    if (bits * 2 > ctx.max_bits) throw NoConvergence("could not separate the roots of the embedded polynomial");
    e = e.mul_2exp(-bits);
  }
}

/// prod over conjugates of 1 / min(1, |alpha_i|). Zero roots are skipped.
inline Ball mtilde(const AlgebraicNumber& alpha, const PrecisionContext& ctx = {}, int* skipped_zero_roots = nullptr) {
  const IntPolynomial& f = alpha.minpoly();
  const std::int64_t prec = ctx.working_bits;
  if (skipped_zero_roots) *skipped_zero_roots = static_cast<int>(f.valuation());
  for (std::int64_t bits = prec; bits <= ctx.max_bits; bits *= 2) {
    std::vector<std::pair<ComplexBall, int>> roots;
    bool clear = true;
    for (const auto& r : numerics::isolate_roots(f, Dyadic::pow2(-bits / 2), ctx)) {
      if (r.ball.is_exact() && r.ball.re().is_zero() && r.ball.im().is_zero()) continue;
      if (r.ball.contains_zero()) {
        clear = false;
        break;
      }
      roots.emplace_back(r.ball, r.multiplicity);
    }
    if (clear) return detail::inverse_small_product(roots, prec);
  }
  throw DegenerateRoot("a conjugate could not be certified nonzero");
}

/// M~ over the embedding sigma_k of Q(theta) for the element with defining polynomial g.
inline Ball mtilde_over_field(const FieldPolynomial& g, const NumberField& field, std::size_t k,
                              const PrecisionContext& ctx = {}) {
  const std::int64_t prec = ctx.working_bits;
  for (std::int64_t bits = prec; bits <= ctx.max_bits; bits *= 2) {
    std::vector<std::pair<ComplexBall, int>> roots;
    bool clear = true;
    for (const auto& z : field_polynomial_roots(g, field, k, Dyadic::pow2(-bits / 2), ctx)) {
      if (z.is_exact() && z.re().is_zero() && z.im().is_zero()) continue;
      if (z.contains_zero()) {
        clear = false;
        break;
      }
      roots.emplace_back(z, 1);
    }
    if (clear) return detail::inverse_small_product(roots, prec);
  }
  throw DegenerateRoot("a root of the embedded polynomial could not be certified nonzero");
}

/// The Vieta identity M(alpha) / M~(alpha) = |b_0| for the primitive minimal polynomial.
struct MTildeIdentity {
  Ball mahler;
  Ball mtilde;
  mpz_class constant_coeff;
  Ball ratio;
  bool holds = false;
};

inline MTildeIdentity mtilde_identity(const AlgebraicNumber& alpha, const PrecisionContext& ctx = {}) {
  MTildeIdentity r;
  r.mahler = mahler_measure(alpha, ctx);
  r.mtilde = mtilde(alpha, ctx);
  r.constant_coeff = abs(alpha.minpoly()[0]);
  r.ratio = div(r.mahler, r.mtilde, ctx.working_bits);
  r.holds = r.ratio.contains(Dyadic(r.constant_coeff));
  return r;
}

}  // namespace selfsim::algebra
