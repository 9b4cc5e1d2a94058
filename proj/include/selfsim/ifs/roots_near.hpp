#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/algebra/zero_test.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs/ifs_spec.hpp"
#include "selfsim/numerics/ball.hpp"
#include "selfsim/numerics/roots.hpp"

namespace selfsim::ifs {

using algebra::IntPolynomial;

inline FieldPolynomial derivative(const FieldPolynomial& f, int times = 1) {
  std::vector<FieldElement> c = f.coeffs();
  for (int t = 0; t < times && !c.empty(); ++t) {
    std::vector<FieldElement> next;
    for (std::size_t i = 1; i < c.size(); ++i) {
      std::vector<mpz_class> coords = c[i].coords();
      for (auto& x : coords) x *= static_cast<unsigned long>(i);
      next.emplace_back(std::move(coords), c[i].denom());
    }
    c = std::move(next);
  }
  return FieldPolynomial(std::move(c));
}

/// Multiplicity of eta as a root of sigma_k(f), k the distinguished embedding.
inline int vanishing_order(const FieldPolynomial& f, const NumberField& field, const AlgebraicNumber& eta,
                           const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("vanishing_order requires a nonzero polynomial");
  FieldPolynomial g = f;
  for (int m = 0;; ++m) {
    if (!algebra::certified_is_zero(g, field, eta, ctx)) return m;
    g = derivative(g);
  }
}

inline int vanishing_order(const FamilyPolynomial& p, const DifferenceSet& ds, const AlgebraicNumber& eta,
                           const PrecisionContext& ctx = {}) {
  if (p.is_zero(ds)) throw ValidationError("vanishing_order requires a nonzero polynomial");
  return vanishing_order(p.to_field_polynomial(ds), ds.field(), eta, ctx);
}

struct PolyRoot {
  AlgebraicNumber eta;  // defined by a squarefree factor of the lifted polynomial
  int order = 0;
  bool is_zero() const { return eta.as_rational() && *eta.as_rational() == 0; }
};

/// Distinct roots of sigma_k(f) with their multiplicities.
inline std::vector<PolyRoot> polynomial_roots(const FieldPolynomial& f, const NumberField& field,
                                              const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("polynomial_roots of the zero polynomial");
  std::vector<PolyRoot> out;
  if (f.degree() < 1) return out;
  IntPolynomial lifted = algebra::lift_to_int_poly(f, field, ctx);
  // Zero root split off so it is recognisable as the rational 0.
  if (const std::size_t v = lifted.valuation(); v > 0) {
    AlgebraicNumber zero = AlgebraicNumber::rational(0);
    int order = field.is_rational() ? static_cast<int>(v) : vanishing_order(f, field, zero, ctx);
    if (order > 0) out.push_back({std::move(zero), order});
    lifted = lifted.shift_down(v);
  }
  for (const auto& sf : algebra::squarefree_decomposition(lifted)) {
    for (const auto& r : numerics::isolate_roots(sf.factor, Dyadic::pow2(-64), ctx)) {
      AlgebraicNumber eta = AlgebraicNumber::from_isolated(sf.factor, r);
      int order = field.is_rational() ? sf.multiplicity : vanishing_order(f, field, eta, ctx);
      if (order > 0) out.push_back({std::move(eta), order});
    }
  }
  return out;
}

namespace detail {

/// |eta| <= bound, decided by refinement with an exact fallback on the circle.
inline bool modulus_at_most(const AlgebraicNumber& eta, const Dyadic& bound, const PrecisionContext& ctx) {
  for (std::int64_t bits = 64; bits <= ctx.max_bits; bits *= 2) {
    Ball a = numerics::abs(eta.enclosure(bits, ctx), bits + 16);
    if (cmp(a.upper(), bound) <= 0) return true;
    if (cmp(a.lower(), bound) > 0) return false;
  }
  if (const auto& q = eta.as_rational()) return cmp(abs(*q), bound.to_rational()) <= 0;
  if (eta.is_real()) {
    mpq_class b = bound.to_rational();
    if (eta.minpoly().eval(b) == 0 || eta.minpoly().eval(mpq_class(-b)) == 0) return true;
  }
  throw NoConvergence("could not compare a root modulus with 1 - eps");
}

inline double log2_ratio_spread(const DifferenceSet& ds) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (i == ds.zero_index()) continue;
    double v = std::fabs(ds.value(i, 64).to_double());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi > 0 ? std::log2(hi / lo) : 0.0;
}

}  // namespace detail

/// Least j >= 1 with (j/(j+1)) (rho (j+1))^(-1/j) > 1 - eps/2.
inline int small_root_bound(double eps, double rho, int j_max = 1 << 24) {
  if (!(eps > 0 && eps < 1)) throw ValidationError("eps must lie in (0, 1)", "/params/eps");
  if (!(rho >= 1)) throw ValidationError("rho must be at least 1");
  const double target = std::log(1.0 - eps / 2);
  for (int j = 1; j <= j_max; ++j) {
    double jd = j;
    double la = std::log(jd / (jd + 1)) - std::log(rho * (jd + 1)) / jd;
    if (la > target) return j;
  }
  throw BudgetExceeded("small-root bound exceeds the search range");
}

struct SmallRootCount {
  int count = 0;     // nonzero roots with |z| <= 1 - eps, with multiplicity
  int bound = 0;     // k(eps, D)
  double rho = 1;    // max |D*| / min |D*|
  bool within_bound = true;
};

inline SmallRootCount count_small_roots(const FamilyPolynomial& p, const DifferenceSet& ds, double eps,
                                        const PrecisionContext& ctx = {}) {
  if (!(eps > 0 && eps < 1)) throw ValidationError("eps must lie in (0, 1)", "/params/eps");
  if (p.is_zero(ds)) throw ValidationError("count_small_roots requires a nonzero polynomial");
  SmallRootCount r;
  r.rho = std::exp2(detail::log2_ratio_spread(ds));
  r.bound = small_root_bound(eps, r.rho);
  const Dyadic radius = Dyadic(1) - Dyadic::from_double(eps);
  for (const auto& root : polynomial_roots(p.to_field_polynomial(ds), ds.field(), ctx)) {
    if (root.is_zero()) continue;
    if (detail::modulus_at_most(root.eta, radius, ctx)) r.count += root.order;
  }
  r.within_bound = r.count <= r.bound;
  return r;
}

struct RootNearReport {
  AlgebraicNumber eta;
  ComplexBall root_ball;
  Ball value;               // P(lambda)
  Ball distance;            // |lambda - eta|
  double log2_bound = 0;    // log2 of (2^n eps^-n r)^(1/k)
  int k = 0;
  algebra::Verdict within_bound = algebra::Verdict::Unknown;
};

/// The root of P nearest to lambda when |P(lambda)| is small, with the
/// distance bound from counting roots of modulus <= 1 - eps/2.
inline RootNearReport root_near(const FamilyPolynomial& p, const DifferenceSet& ds, const RealParameter& lam, double eps,
                                const PrecisionContext& ctx = {}) {
  if (!(eps > 0 && eps < 0.5)) throw ValidationError("eps must lie in (0, 1/2)", "/params/eps");
  if (p.is_zero(ds)) throw ValidationError("root_near requires a nonzero polynomial");
  const long n = p.degree_bound();
  if (n < 1) throw ValidationError("root_near requires degree bound n >= 1");
  const std::int64_t prec = ctx.working_bits;
  const Dyadic e = Dyadic::from_double(eps);
  Ball lb = lam.enclosure(prec, ctx);
  Ball al = numerics::abs(lb);
  if (cmp(al.lower(), e) < 0 || cmp(al.upper(), Dyadic(1) - e) > 0)
    throw ValidationError("lambda must satisfy eps <= |lambda| <= 1 - eps", "/params/lambda");

  FieldPolynomial fp = p.to_field_polynomial(ds);
  bool exact_zero = lam.certified() && algebra::certified_is_zero(fp, ds.field(), lam.algebraic(), ctx);
  Ball value = exact_zero ? Ball() : p.eval(ds, lb, prec, ctx);
  Dyadic r = numerics::abs(value).upper();
  // r < eps^n 2^-n
  Dyadic limit = numerics::pow(e, static_cast<unsigned long>(n)).mul_2exp(-n);
  if (cmp(r, limit) >= 0) throw ValidationError("|P(lambda)| must be below eps^n 2^-n", "/params/r");

  auto roots = polynomial_roots(fp, ds.field(), ctx);
  if (roots.empty()) throw ValidationError("P has no roots");
  std::size_t best = 0;
  Ball best_d;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    Ball d = numerics::abs(sub(roots[i].eta.enclosure(prec, ctx), ComplexBall(lb), prec), prec);
    if (i == 0 || cmp(d.mid(), best_d.mid()) < 0) {
      best = i;
      best_d = d;
    }
  }
  RootNearReport rep{roots[best].eta, roots[best].eta.enclosure(prec, ctx), value, exact_zero ? Ball() : best_d};

  const double rho = std::exp2(detail::log2_ratio_spread(ds));
  rep.k = small_root_bound(eps / 2, rho);
  const double nd = static_cast<double>(n);
  rep.log2_bound = r.is_zero() ? -std::numeric_limits<double>::infinity()
                               : (nd - nd * std::log2(eps) + numerics::log2_abs(r)) / rep.k;
  const double tol = 1e-9;
  double up = numerics::log2_abs(rep.distance.upper()), lo = numerics::log2_abs(rep.distance.lower());
  if (rep.distance.upper().is_zero() || up < rep.log2_bound - tol)
    rep.within_bound = algebra::Verdict::Holds;
  else if (lo > rep.log2_bound + tol)
    rep.within_bound = algebra::Verdict::Violated;
  return rep;
}

/// The two-sided window on |lambda - eta| under which a high vanishing order is forced,
/// together with the derivative estimate at the actual order. All values are log2.
struct OrderDiagnostics {
  int order = 0;
  double log2_two_mahler = 0;  // log2 (2 M(eta))
  double log2_lower = 0;       // (d n' / k) log2(2M) + log2|P(lambda)| / k
  double log2_distance = 0;    // log2 |lambda - eta|
  double log2_upper = 0;       // -d n' log2(2M)
  bool in_window = false;
  double log2_derivative = 0;  // log2 |P^(m)(eta) / m!|
  double log2_derivative_bound = 0;  // log2 (n'^(m+2) D |lambda-eta| + |P(lambda)| / |lambda-eta|^m)
};

inline OrderDiagnostics order_diagnostics(const FamilyPolynomial& p, const DifferenceSet& ds, const AlgebraicNumber& eta,
                                          const RealParameter& lam, int k, const PrecisionContext& ctx = {}) {
  if (k < 1) throw ValidationError("k must be positive", "/params/k");
  const std::int64_t prec = ctx.working_bits;
  OrderDiagnostics d;
  FieldPolynomial fp = p.to_field_polynomial(ds);
  d.order = vanishing_order(fp, ds.field(), eta, ctx);
  Ball mahler = algebra::mahler_measure(eta, ctx);
  d.log2_two_mahler = 1.0 + numerics::log2_abs(mahler.mid());
  const double dn = static_cast<double>(ds.field().degree()) * static_cast<double>(p.degree_bound());
  Ball lb = lam.enclosure(prec, ctx);
  Ball v = p.eval(ds, lb, prec, ctx);
  double log2_v = numerics::log2_abs(numerics::abs(v).mid());
  ComplexBall ez = eta.enclosure(prec, ctx);
  double log2_dist = numerics::log2_abs(numerics::abs(sub(ez, ComplexBall(lb), prec), prec).mid());
  d.log2_lower = dn / k * d.log2_two_mahler + log2_v / k;
  d.log2_distance = log2_dist;
  d.log2_upper = -dn * d.log2_two_mahler;
  d.in_window = d.log2_lower <= d.log2_distance && d.log2_distance <= d.log2_upper;

  const int m = d.order;
  FieldPolynomial der = derivative(fp, m);
  ComplexBall dv = der.eval(ds.field(), ds.field().embedding_index(), ez, prec, ctx);
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(m));
  d.log2_derivative = numerics::log2_abs(numerics::abs(dv, prec).mid()) - algebra::log2_upper(fact);
  double big_d = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) big_d = std::max(big_d, std::fabs(ds.value(i, 64).to_double()));
  const double np = static_cast<double>(std::max<long>(p.degree_bound(), 1));
  double t1 = (m + 2) * std::log2(np) + std::log2(big_d) + log2_dist;
  double t2 = log2_v - m * log2_dist;
  double hi = std::max(t1, t2), lo2 = std::min(t1, t2);
  d.log2_derivative_bound = std::isinf(lo2) ? hi : hi + std::log2(1.0 + std::exp2(lo2 - hi));
  return d;
}

struct SeparationReport {
  int n = 0;
  double log2_bound = 0;          // log2 of the separation bound
  std::size_t samples = 0;        // polynomial pairs drawn
  std::size_t root_pairs = 0;     // distinct root pairs examined
  std::size_t shared_roots = 0;   // equal roots skipped
  std::size_t violations = 0;
  std::size_t undecided = 0;
  double min_log2_gap = std::numeric_limits<double>::infinity();
  std::vector<std::string> witnesses;
  bool corroborative_only = true;  // the bound is asymptotic in n
};

namespace detail {

/// Examines root pairs (one root of each polynomial) among the roots of S,
/// which must be squarefree and vanish at every root of both polynomials.
inline void scan_root_pairs(const IntPolynomial& s, const std::function<bool(const AlgebraicNumber&)>& in1,
                            const std::function<bool(const AlgebraicNumber&)>& in2, SeparationReport& rep,
                            const PrecisionContext& ctx) {
  if (s.degree() < 1) return;
  std::vector<AlgebraicNumber> roots;
  for (const auto& r : numerics::isolate_roots(s, Dyadic::pow2(-64), ctx)) roots.push_back(AlgebraicNumber::from_isolated(s, r));
  std::vector<char> a(roots.size()), b(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    a[i] = in1(roots[i]);
    b[i] = in2(roots[i]);
    if (a[i] && b[i]) ++rep.shared_roots;
  }
  const double margin = 1e-9;
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!((a[i] && b[j]) || (a[j] && b[i]))) continue;
      ++rep.root_pairs;
      bool decided = false;
      for (std::int64_t bits = 64; bits <= ctx.max_bits; bits *= 2) {
        Ball g = numerics::abs(sub(roots[i].enclosure(bits, ctx), roots[j].enclosure(bits, ctx), bits + 16), bits + 16);
        double lo = numerics::log2_abs(g.lower());
        if (g.certainly_positive() && lo > rep.log2_bound + margin) {
          rep.min_log2_gap = std::min(rep.min_log2_gap, numerics::log2_abs(g.mid()));
          decided = true;
          break;
        }
        if (numerics::log2_abs(g.upper()) < rep.log2_bound - margin) {
          ++rep.violations;
          rep.min_log2_gap = std::min(rep.min_log2_gap, numerics::log2_abs(g.mid()));
          if (rep.witnesses.size() < 8) rep.witnesses.push_back(s.to_string());
          decided = true;
          break;
        }
      }
      if (!decided) ++rep.undecided;
    }
}

}  // namespace detail

/// Root separation over pairs of random family polynomials of degree <= n,
/// against 2 n^(-M n) with M = 4 d^2 + 4 d + 1.
inline SeparationReport separation_check(const DifferenceSet& ds, int n, std::size_t samples, std::uint64_t seed = 1,
                                         const PrecisionContext& ctx = {}) {
  if (n < 2) throw ValidationError("separation_check requires n >= 2", "/params/n");
  SeparationReport rep;
  rep.n = n;
  const double d = static_cast<double>(ds.field().degree());
  const double big_m = 4 * d * d + 4 * d + 1;
  rep.log2_bound = 1.0 - big_m * n * std::log2(static_cast<double>(n));
  if (ds.size() == 1) return rep;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(ds.size() - 1));
  auto draw = [&]() {
    FamilyPolynomial f;
    do {
      f.coeffs.assign(static_cast<std::size_t>(n) + 1, 0);
      for (auto& c : f.coeffs) c = pick(rng);
    } while (f.is_zero(ds));
    return f;
  };
  for (std::size_t t = 0; t < samples; ++t) {
    FamilyPolynomial f1 = draw(), f2 = draw();
    ++rep.samples;
    FieldPolynomial p1 = f1.to_field_polynomial(ds), p2 = f2.to_field_polynomial(ds);
    if (p1.degree() < 1 && p2.degree() < 1) continue;
    IntPolynomial l1 = p1.degree() >= 1 ? algebra::lift_to_int_poly(p1, ds.field(), ctx) : IntPolynomial{1};
    IntPolynomial l2 = p2.degree() >= 1 ? algebra::lift_to_int_poly(p2, ds.field(), ctx) : IntPolynomial{1};
    IntPolynomial s = algebra::squarefree_part(l1 * l2);
    auto member = [&](const FieldPolynomial& p) {
      return [&](const AlgebraicNumber& eta) {
        return p.degree() >= 1 && algebra::certified_is_zero(p, ds.field(), eta, ctx);
      };
    };
    detail::scan_root_pairs(s, member(p1), member(p2), rep, ctx);
  }
  return rep;
}

/// Root separation over pairs of random integer polynomials with degree <= n and
/// coefficients bounded by a, against 2 n^(-4n) a^(-4n+2).
inline SeparationReport mahler_separation_check(int n, long a, std::size_t samples, std::uint64_t seed = 1,
                                                const PrecisionContext& ctx = {}) {
  if (n < 4) throw ValidationError("the integer separation bound needs n >= 4", "/params/n");
  if (a < 1) throw ValidationError("coefficient bound must be positive", "/params/a");
  SeparationReport rep;
  rep.n = n;
  rep.corroborative_only = false;
  const double nd = n;
  rep.log2_bound = 1.0 - 4 * nd * std::log2(nd) - (4 * nd - 2) * std::log2(static_cast<double>(a));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> pick(-a, a);
  auto draw = [&]() {
    for (;;) {
      std::vector<mpz_class> c(static_cast<std::size_t>(n) + 1);
      for (auto& x : c) x = pick(rng);
      IntPolynomial f(std::move(c));
      if (f.degree() >= 1) return f;
    }
  };
  for (std::size_t t = 0; t < samples; ++t) {
    IntPolynomial f1 = draw(), f2 = draw();
    ++rep.samples;
    IntPolynomial s = algebra::squarefree_part(f1 * f2);
    auto member = [&](const IntPolynomial& f) {
      return [&](const AlgebraicNumber& eta) { return algebra::certified_is_zero(f, eta, ctx); };
    };
    detail::scan_root_pairs(s, member(f1), member(f2), rep, ctx);
  }
  return rep;
}

}  // namespace selfsim::ifs
