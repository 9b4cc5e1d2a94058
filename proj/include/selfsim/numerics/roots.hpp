#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "selfsim/algebra/int_polynomial.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::numerics {

/// One distinct root of an integer polynomial.
struct IsolatedRoot {
  ComplexBall ball;  // contains exactly this root and no other root of f
  int multiplicity = 1;
  bool is_real = false;  // certified real (the ball is real-centred and isolating)
};

namespace detail {

struct CNum {
  Dyadic re, im;
};

inline CNum cround(const CNum& a, std::int64_t p) {
  return {round(a.re, p, Round::Nearest), round(a.im, p, Round::Nearest)};
}
inline CNum cadd(const CNum& a, const CNum& b) { return {a.re + b.re, a.im + b.im}; }
inline CNum csub(const CNum& a, const CNum& b) { return {a.re - b.re, a.im - b.im}; }
inline CNum cmul(const CNum& a, const CNum& b, std::int64_t p) {
  return cround({a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}, p);
}
inline bool cis_zero(const CNum& a) { return a.re.is_zero() && a.im.is_zero(); }
inline CNum cdiv(const CNum& a, const CNum& b, std::int64_t p) {
  Dyadic n2 = round(b.re * b.re + b.im * b.im, p + 8, Round::Nearest);
  if (n2.is_zero()) throw BallContainsZero("complex division by zero");
  CNum num = cround({a.re * b.re + a.im * b.im, a.im * b.re - a.re * b.im}, p + 8);
  return {div(num.re, n2, p, Round::Nearest), div(num.im, n2, p, Round::Nearest)};
}

/// Approximate long double value of an mpz.
inline long double to_ld(const mpz_class& z) {
  long e = 0;
  double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::ldexp(static_cast<long double>(d), static_cast<int>(e));
}

using CLD = std::complex<long double>;

/// Aberth seeds for a squarefree polynomial of degree >= 2.
inline std::vector<CLD> aberth_seed(const algebra::IntPolynomial& g) {
  const auto n = static_cast<std::size_t>(g.degree());
  std::vector<long double> a(n + 1);
  for (std::size_t i = 0; i <= n; ++i) a[i] = to_ld(g[i]);
  long double rho = std::pow(std::fabs(a[0] / a[n]), 1.0L / static_cast<long double>(n));
  if (!(rho > 0) || !std::isfinite(rho)) rho = 1;
  std::vector<CLD> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double ang = 2 * std::numbers::pi_v<long double> * static_cast<long double>(k) / static_cast<long double>(n) + 0.4L;
    z[k] = std::polar(rho * (1 + 0.01L * static_cast<long double>(k % 3)), ang);
  }
  for (int iter = 0; iter < 800; ++iter) {
    long double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CLD pv = a[n], dv = 0;
      for (std::size_t k = n; k-- > 0;) {
        dv = dv * z[i] + pv;
        pv = pv * z[i] + a[k];
      }
      if (pv == CLD(0)) continue;
      CLD ratio = pv / dv;
      CLD s = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && z[i] != z[j]) s += CLD(1) / (z[i] - z[j]);
      CLD w = ratio / (CLD(1) - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
      z[i] -= w;
      worst = std::max(worst, std::abs(w) / std::max<long double>(1, std::abs(z[i])));
    }
    if (worst < 1e-18L) break;
  }
  return z;
}

inline void eval_with_derivative(const algebra::IntPolynomial& g, const CNum& z, std::int64_t p, CNum& val, CNum& der) {
  const auto n = static_cast<std::size_t>(g.degree());
  val = {Dyadic(g[n]), {}};
  der = {};
  for (std::size_t k = n; k-- > 0;) {
    der = cround(cadd(cmul(der, z, p), val), p);
    val = cround(cadd(cmul(val, z, p), {Dyadic(g[k]), {}}), p);
  }
}

/// Aberth iterations at precision p on dyadic centres.
inline void aberth_refine(const algebra::IntPolynomial& g, std::vector<CNum>& z, std::int64_t p) {
  const std::size_t n = z.size();
  int max_iter = 12 + 3 * static_cast<int>(std::log2(static_cast<double>(p)));
  for (int iter = 0; iter < max_iter; ++iter) {
    bool settled = true;
    for (std::size_t i = 0; i < n; ++i) {
      CNum val, der;
      eval_with_derivative(g, z[i], p, val, der);
      if (cis_zero(val)) continue;
      CNum ratio;
      try {
        ratio = cdiv(val, der, p);
      } catch (const BallContainsZero&) {
        z[i].re = z[i].re + Dyadic::pow2(-p / 4);
        settled = false;
        continue;
      }
      CNum s;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        CNum d = csub(z[i], z[j]);
        if (cis_zero(d)) continue;
        s = cadd(s, cdiv({Dyadic(1), {}}, d, p));
      }
      CNum denom = csub({Dyadic(1), {}}, cmul(ratio, s, p));
      CNum w;
      try {
        w = cdiv(ratio, denom, p);
      } catch (const BallContainsZero&) {
        w = ratio;
      }
      z[i] = cround(csub(z[i], w), p);
      // Continue until the correction is below the working precision relative to |z|.
      std::int64_t wt = std::max(w.re.top(), w.im.top());
      std::int64_t zt = std::max<std::int64_t>({z[i].re.top(), z[i].im.top(), 0});
      if (wt > zt - p + 4) settled = false;
    }
    if (settled) break;
  }
}

/// Inclusion radii n|W_i| with W_i = g(z_i) / (a_n prod_{j != i} (z_i - z_j)).
/// Returns false when a radius cannot be formed (coincident centres).
inline bool inclusion_radii(const algebra::IntPolynomial& g, const std::vector<CNum>& z, std::int64_t p,
                            std::vector<Dyadic>& radii) {
  const std::size_t n = z.size();
  radii.assign(n, Dyadic());
  const auto coeffs = g.as_balls();
  for (std::size_t i = 0; i < n; ++i) {
    ComplexBall zi(z[i].re, z[i].im);
    ComplexBall val = ball_eval(coeffs, zi, p);
    ComplexBall den(Dyadic(g.leading()));
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ComplexBall d(z[i].re - z[j].re, z[i].im - z[j].im);
      den = mul(den, d, p);
    }
    try {
      ComplexBall w = div(val, den, p);
      Dyadic mag = abs(w, kRadiusBits).upper();
      radii[i] = round(mag * Dyadic(static_cast<long>(n)), kRadiusBits, Round::Ceil);
    } catch (const BallContainsZero&) {
      return false;
    }
  }
  return true;
}

inline bool disks_disjoint(const std::vector<ComplexBall>& balls) {
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if (balls[i].overlaps(balls[j])) return false;
  return true;
}

struct FactorRoots {
  std::vector<ComplexBall> balls;
  std::vector<bool> real;
};

/// Certified isolation of the roots of a squarefree primitive factor with
/// nonzero constant term. Starts at precision p0 and doubles up to max_bits.
inline FactorRoots isolate_squarefree(const algebra::IntPolynomial& g, const Dyadic& eps, std::int64_t p0,
                                      std::int64_t max_bits) {
  FactorRoots out;
  const auto n = static_cast<std::size_t>(g.degree());
  if (n == 1) {
    mpq_class r(-g[0], g[1]);
    r.canonicalize();
    for (std::int64_t p = p0; p <= max_bits; p *= 2) {
      Ball b = Ball::from_rational(r, p);
      if (cmp(b.rad(), eps) <= 0) {
        out.balls.push_back(ComplexBall(b));
        out.real.push_back(true);
        return out;
      }
    }
    throw NoConvergence("root isolation: precision cap reached for a linear factor");
  }
  std::vector<CNum> z;
  for (const auto& s : aberth_seed(g)) {
    long double re = s.real(), im = s.imag();
    Dyadic dre = std::isfinite(static_cast<double>(re)) ? Dyadic::from_double(static_cast<double>(re)) : Dyadic();
    Dyadic dim = std::isfinite(static_cast<double>(im)) ? Dyadic::from_double(static_cast<double>(im)) : Dyadic();
    z.push_back({dre, dim});
  }
  for (std::int64_t p = p0; p <= max_bits; p *= 2) {
    aberth_refine(g, z, p);
    // Snap near-real approximations onto the axis; a real-centred isolating
    // disk of a real polynomial must then hold a real root.
    std::vector<CNum> snapped = z;
    std::vector<bool> real(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t zt = std::max<std::int64_t>({z[i].re.top(), 0});
      if (z[i].im.is_zero() || z[i].im.top() < zt - p / 2) {
        snapped[i].im = Dyadic();
        real[i] = true;
      }
    }
    std::vector<Dyadic> radii;
    if (!inclusion_radii(g, snapped, p, radii)) continue;
    std::vector<ComplexBall> balls;
    bool small = true;
    for (std::size_t i = 0; i < n; ++i) {
      balls.emplace_back(snapped[i].re, snapped[i].im, radii[i]);
      if (cmp(radii[i], eps) > 0) small = false;
    }
    if (small && disks_disjoint(balls)) {
      out.balls = std::move(balls);
      out.real = std::move(real);
      return out;
    }
  }
  throw NoConvergence("root isolation: precision cap of " + std::to_string(max_bits) + " bits reached for " +
                      g.to_string());
}

}  // namespace detail

/// Certified isolation of every distinct root of f.
///
/// Multiplicities come from an exact squarefree decomposition. Balls are
/// pairwise disjoint, have radius at most eps and are sorted by (re, im).
inline std::vector<IsolatedRoot> isolate_roots(const algebra::IntPolynomial& f, const Dyadic& eps,
                                               const PrecisionContext& ctx = {}) {
  if (f.is_zero()) throw ValidationError("isolate_roots requires a nonzero polynomial");
  if (eps.sign() <= 0) throw ValidationError("isolate_roots requires eps > 0");
  std::vector<IsolatedRoot> out;
  const std::size_t v = f.valuation();
  if (v > 0) out.push_back({ComplexBall(), static_cast<int>(v), true});
  const algebra::IntPolynomial rest = f.shift_down(v);
  if (rest.degree() < 1) return out;

  const auto factors = algebra::squarefree_decomposition(rest);
  std::int64_t need = std::max<std::int64_t>(0, -eps.top()) + 16;
  std::int64_t p0 = std::max(ctx.working_bits, std::min(need, ctx.max_bits));
  Dyadic target = eps;
  for (int attempt = 0;; ++attempt) {
    std::vector<IsolatedRoot> roots = out;
    for (const auto& sf : factors) {
      auto fr = detail::isolate_squarefree(sf.factor, target, p0, ctx.max_bits);
      for (std::size_t i = 0; i < fr.balls.size(); ++i) roots.push_back({fr.balls[i], sf.multiplicity, fr.real[i]});
    }
    bool disjoint = true;
    for (std::size_t i = 0; i < roots.size() && disjoint; ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j)
        if (roots[i].ball.overlaps(roots[j].ball)) {
          disjoint = false;
          break;
        }
    if (disjoint) {
      std::sort(roots.begin(), roots.end(), [](const IsolatedRoot& a, const IsolatedRoot& b) {
        int c = cmp(a.ball.re(), b.ball.re());
        return c != 0 ? c < 0 : cmp(a.ball.im(), b.ball.im()) < 0;
      });
      return roots;
    }
    if (p0 * 2 > ctx.max_bits) throw NoConvergence("root isolation: factors could not be separated within the precision cap");
    p0 *= 2;
    target = target.mul_2exp(-p0 / 2);
  }
}

inline std::vector<IsolatedRoot> isolate_roots(const algebra::IntPolynomial& f, double eps, const PrecisionContext& ctx = {}) {
  if (!(eps > 0) || !std::isfinite(eps)) throw ValidationError("isolate_roots requires eps > 0");
  return isolate_roots(f, Dyadic::from_double(eps), ctx);
}

}  // namespace selfsim::numerics
