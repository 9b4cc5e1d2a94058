#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "selfsim/algebra/int_polynomial.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"
#include "selfsim/numerics/roots.hpp"

namespace selfsim::algebra {

using numerics::Ball;
using numerics::ComplexBall;
using numerics::Dyadic;
using numerics::PrecisionContext;

namespace detail {

/// Rounds the centre of `b` so that it carries about `bits` bits after the
/// binary point, folding the rounding error into the radius.
inline ComplexBall trim_to(const ComplexBall& b, std::int64_t bits) {
  auto trim = [&](const Dyadic& x, Dyadic& err) {
    std::int64_t keep = std::max<std::int64_t>(x.top() + bits + 8, 8);
    return numerics::round(x, keep, numerics::Round::Nearest, &err);
  };
  Dyadic e1, e2;
  Dyadic re = trim(b.re(), e1);
  Dyadic im = trim(b.im(), e2);
  return ComplexBall(re, im, numerics::detail::rad_add(b.rad(), numerics::detail::rad_add(e1, e2)));
}

}  // namespace detail

/// An exact algebraic number: a primitive squarefree defining polynomial
/// (trusted to be the minimal polynomial) and a ball isolating one root.
class AlgebraicNumber {
 public:
  /// Validates primitivity, squarefreeness and that `isolator` holds exactly one root.
  AlgebraicNumber(IntPolynomial minpoly, const ComplexBall& isolator, const PrecisionContext& ctx = {})
      : poly_(std::move(minpoly)), state_(std::make_shared<State>()) {
    if (poly_.degree() < 1) throw ValidationError("minimal polynomial must have degree >= 1", "/minpoly");
    if (!poly_.is_primitive()) throw ValidationError("minimal polynomial must have coprime coefficients", "/minpoly");
    if (poly_.leading() < 0) poly_ = -poly_;
    if (!is_squarefree(poly_)) throw ValidationError("minimal polynomial must be squarefree", "/minpoly");
    Dyadic eps = std::max(isolator.rad(), Dyadic::pow2(-32)).mul_2exp(-4);
    for (std::int64_t bits = ctx.working_bits;; bits *= 2) {
      auto roots = numerics::isolate_roots(poly_, eps, PrecisionContext(std::min(bits, ctx.max_bits), ctx.max_bits));
      int inside = 0, unsure = 0;
      const numerics::IsolatedRoot* hit = nullptr;
      for (const auto& r : roots) {
        if (isolator.contains(r.ball)) {
          ++inside;
          hit = &r;
        } else if (isolator.overlaps(r.ball)) {
          ++unsure;
        }
      }
      if (unsure == 0) {
        if (inside != 1)
          throw ValidationError("isolator must contain exactly one root of the minimal polynomial", "/isolator");
        root_ = hit->ball;
        real_ = hit->is_real;
        break;
      }
      if (bits * 2 > ctx.max_bits) throw NoConvergence("could not decide which roots lie in the isolator");
      eps = eps.mul_2exp(-bits);
    }
    isolator_ = isolator;
    state_->best = root_;
  }

  static AlgebraicNumber rational(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    AlgebraicNumber a;
    a.poly_ = IntPolynomial(std::vector<mpz_class>{-c.get_num(), c.get_den()});
    a.root_ = ComplexBall(Ball::from_rational(c, 128));
    a.isolator_ = a.root_;
    a.real_ = true;
    a.rational_ = c;
    a.state_ = std::make_shared<State>();
    a.state_->best = a.root_;
    return a;
  }

  /// Trusted construction from a certified isolating ball of a root of `minpoly`.
  static AlgebraicNumber from_isolated(IntPolynomial minpoly, const numerics::IsolatedRoot& root) {
    AlgebraicNumber a;
    a.poly_ = minpoly.primitive_part();
    a.root_ = root.ball;
    a.isolator_ = root.ball;
    a.real_ = root.is_real;
    if (a.poly_.degree() == 1) {
      mpq_class c(-a.poly_[0], a.poly_[1]);
      c.canonicalize();
      a.rational_ = c;
    }
    a.state_ = std::make_shared<State>();
    a.state_->best = a.root_;
    return a;
  }

  /// All roots of a squarefree primitive polynomial, in isolate_roots order.
  static std::vector<AlgebraicNumber> conjugates(const IntPolynomial& minpoly, const PrecisionContext& ctx = {}) {
    std::vector<AlgebraicNumber> out;
    IntPolynomial p = minpoly.primitive_part();
    for (const auto& r : numerics::isolate_roots(p, Dyadic::pow2(-64), ctx)) out.push_back(from_isolated(p, r));
    return out;
  }

  const IntPolynomial& minpoly() const { return poly_; }
  int degree() const { return static_cast<int>(poly_.degree()); }
  const ComplexBall& isolator() const { return isolator_; }
  /// Certified isolating ball found at construction.
  const ComplexBall& root_ball() const { return root_; }
  bool is_real() const { return real_; }
  const std::optional<mpq_class>& as_rational() const { return rational_; }

  /// Ball of radius at most 2^-bits containing the number.
  ComplexBall enclosure(std::int64_t bits, const PrecisionContext& ctx = {}) const {
    const Dyadic target = Dyadic::pow2(-bits);
    if (rational_) {
      for (std::int64_t p = bits + 8;; p *= 2) {
        Ball b = Ball::from_rational(*rational_, std::max<std::int64_t>(p + mpz_sizeinbase(rational_->get_num_mpz_t(), 2), 8));
        if (cmp(b.rad(), target) <= 0) return ComplexBall(b);
      }
    }
    {
      std::lock_guard lock(state_->mu);
      if (cmp(state_->best.rad(), target) <= 0) return trim_fitting(state_->best, bits);
    }
    ComplexBall fresh = refine(bits, ctx);
    std::lock_guard lock(state_->mu);
    if (cmp(fresh.rad(), state_->best.rad()) < 0) state_->best = fresh;
    return trim_fitting(fresh, bits);
  }

  /// Real enclosure; requires is_real().
  Ball real_enclosure(std::int64_t bits, const PrecisionContext& ctx = {}) const {
    if (!real_) throw Error("real_enclosure of a non-real algebraic number");
    ComplexBall c = enclosure(bits, ctx);
    return Ball(c.re(), c.rad());
  }

 private:
  AlgebraicNumber() = default;

  struct State {
    std::mutex mu;
    ComplexBall best;
  };

  static ComplexBall trim_fitting(const ComplexBall& b, std::int64_t bits) {
    ComplexBall t = detail::trim_to(b, bits);
    return cmp(t.rad(), Dyadic::pow2(-bits)) <= 0 ? t : b;
  }

  /// Newton from the current centre, certified by the disk D(z, n|f/f'|),
  /// which always holds a root and, inside the isolating ball, must hold ours.
  ComplexBall refine(std::int64_t bits, const PrecisionContext& ctx) const {
    using numerics::detail::CNum;
    const Dyadic target = Dyadic::pow2(-bits);
    const auto n = static_cast<long>(poly_.degree());
    const IntPolynomial deriv = poly_.derivative();
    ComplexBall start;
    {
      std::lock_guard lock(state_->mu);
      start = state_->best;
    }
    CNum z{start.re(), start.im()};
    std::int64_t mag = std::max<std::int64_t>({z.re.top(), z.im.top(), 0});
    for (std::int64_t p = std::max<std::int64_t>(64, bits + mag + 32); p <= 4 * ctx.max_bits + bits; p *= 2) {
      for (int it = 0; it < 200; ++it) {
        CNum val, der;
        numerics::detail::eval_with_derivative(poly_, z, p, val, der);
        if (numerics::detail::cis_zero(val)) break;
        CNum step;
        try {
          step = numerics::detail::cdiv(val, der, p);
        } catch (const BallContainsZero&) {
          break;
        }
        if (real_) step.im = Dyadic();
        z = numerics::detail::cround(numerics::detail::csub(z, step), p);
        std::int64_t st = std::max(step.re.top(), step.im.top());
        if (st < -p + mag + 8) break;
      }
      if (real_) z.im = Dyadic();
      ComplexBall zc(z.re, z.im);
      try {
        ComplexBall q = numerics::div(poly_.eval(zc, p), deriv.eval(zc, p), p);
        Dyadic r = numerics::round(numerics::abs(q, numerics::kRadiusBits).upper() * Dyadic(n), numerics::kRadiusBits,
                                   numerics::Round::Ceil);
        ComplexBall disk(z.re, z.im, r);
        if (root_.contains(disk) && cmp(r, target) <= 0) return disk;
      } catch (const BallContainsZero&) {
      }
    }
    // Fall back to a fresh isolation at the requested accuracy.
    for (std::int64_t e = bits;; e *= 2) {
      auto roots = numerics::isolate_roots(poly_, Dyadic::pow2(-e), ctx);
      const numerics::IsolatedRoot* pick = nullptr;
      int overlapping = 0;
      for (const auto& r : roots)
        if (root_.overlaps(r.ball)) {
          ++overlapping;
          pick = &r;
        }
      if (overlapping == 1) return pick->ball;
      if (e * 2 > ctx.max_bits) throw NoConvergence("algebraic number refinement did not converge");
    }
  }

  IntPolynomial poly_;
  ComplexBall isolator_;
  ComplexBall root_;
  bool real_ = false;
  std::optional<mpq_class> rational_;
  std::shared_ptr<State> state_;
};

}  // namespace selfsim::algebra
