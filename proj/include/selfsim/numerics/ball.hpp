#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/numerics/dyadic.hpp"

namespace selfsim::numerics {

/// Mantissa bits kept for radii; radii are always rounded upward.
inline constexpr std::int64_t kRadiusBits = 32;

/// Working precision and the cap for escalation by doubling.
struct PrecisionContext {
  std::int64_t working_bits = 128;
  std::int64_t max_bits = 8192;

  PrecisionContext() = default;
  PrecisionContext(std::int64_t working, std::int64_t max) : working_bits(working), max_bits(max) {
    if (working <= 0 || max <= 0 || working > max)
      throw ValidationError("precision context requires 0 < working_bits <= max_bits");
  }
};

namespace detail {
inline Dyadic rad_add(const Dyadic& a, const Dyadic& b) { return round(a + b, kRadiusBits, Round::Ceil); }
inline Dyadic rad_mul(const Dyadic& a, const Dyadic& b) { return round(a * b, kRadiusBits, Round::Ceil); }
}  // namespace detail

/// Real midpoint-radius ball [mid - rad, mid + rad].
class Ball {
 public:
  Ball() = default;
  Ball(long v) : mid_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Ball(Dyadic mid, Dyadic rad = {}) : mid_(std::move(mid)), rad_(std::move(rad)) {
    if (rad_.sign() < 0) throw Error("negative radius");
    rad_ = round(rad_, kRadiusBits, Round::Ceil);
  }

  static Ball from_rational(const mpq_class& q, std::int64_t prec) {
    Dyadic err;
    Dyadic m = numerics::from_rational(q, prec, Round::Nearest, &err);
    return Ball(std::move(m), std::move(err));
  }

  /// Smallest ball (up to radius rounding) containing [lo, hi].
  static Ball from_interval(const Dyadic& lo, const Dyadic& hi) {
    Dyadic mid = (lo + hi).mul_2exp(-1);
    return Ball(mid, (hi - lo).mul_2exp(-1).abs());
  }

  const Dyadic& mid() const { return mid_; }
  const Dyadic& rad() const { return rad_; }
  Dyadic lower() const { return mid_ - rad_; }
  Dyadic upper() const { return mid_ + rad_; }
  bool is_exact() const { return rad_.is_zero(); }

  bool contains(const Dyadic& x) const { return cmp((x - mid_).abs(), rad_) <= 0; }
  bool contains_zero() const { return contains(Dyadic()); }
  bool contains(const Ball& other) const { return cmp((other.mid_ - mid_).abs() + other.rad_, rad_) <= 0; }
  bool overlaps(const Ball& other) const { return cmp((other.mid_ - mid_).abs(), rad_ + other.rad_) <= 0; }
  bool certainly_positive() const { return cmp(mid_, rad_) > 0; }
  bool certainly_negative() const { return cmp(-mid_, rad_) > 0; }

  double to_double() const { return mid_.to_double(); }

 private:
  Dyadic mid_;
  Dyadic rad_;
};

inline Ball neg(const Ball& a) { return Ball(-a.mid(), a.rad()); }

inline Ball add(const Ball& a, const Ball& b, std::int64_t prec) {
  Dyadic e;
  Dyadic m = round(a.mid() + b.mid(), prec, Round::Nearest, &e);
  return Ball(std::move(m), detail::rad_add(detail::rad_add(a.rad(), b.rad()), e));
}
inline Ball sub(const Ball& a, const Ball& b, std::int64_t prec) { return add(a, neg(b), prec); }

inline Ball mul(const Ball& a, const Ball& b, std::int64_t prec) {
  Dyadic e;
  Dyadic m = round(a.mid() * b.mid(), prec, Round::Nearest, &e);
  Dyadic r = detail::rad_add(detail::rad_mul(mag_up(a.mid()), b.rad()), detail::rad_mul(mag_up(b.mid()), a.rad()));
  r = detail::rad_add(r, detail::rad_mul(a.rad(), b.rad()));
  return Ball(std::move(m), detail::rad_add(r, e));
}

inline Ball mul_2exp(const Ball& a, std::int64_t k) { return Ball(a.mid().mul_2exp(k), a.rad().mul_2exp(k)); }

/// 1 / a. Throws BallContainsZero if the ball meets zero.
inline Ball inv(const Ball& a, std::int64_t prec) {
  Dyadic lo = a.mid().abs() - a.rad();
  if (lo.sign() <= 0) throw BallContainsZero("inverting a real ball that contains zero");
  Dyadic e;
  Dyadic m = div(Dyadic(1), a.mid(), prec, Round::Nearest, &e);
  Dyadic den = round(mag_down(a.mid()) * lo, kRadiusBits, Round::Floor);
  if (den.sign() <= 0) throw BallContainsZero("inverting a real ball that is too wide");
  Dyadic r = div(a.rad(), den, kRadiusBits, Round::Ceil);
  return Ball(std::move(m), detail::rad_add(r, e));
}

inline Ball div(const Ball& a, const Ball& b, std::int64_t prec) { return mul(a, inv(b, prec), prec); }

inline Ball abs(const Ball& a) {
  Dyadic lo = a.lower(), hi = a.upper();
  if (lo.sign() >= 0) return a;
  if (hi.sign() <= 0) return neg(a);
  return Ball::from_interval(Dyadic(), max(-lo, hi));
}

inline Ball sqrt(const Ball& a, std::int64_t prec) {
  Dyadic lo = a.lower(), hi = a.upper();
  if (hi.sign() < 0) throw Error("sqrt of a negative ball");
  Dyadic slo = lo.sign() <= 0 ? Dyadic() : numerics::sqrt(lo, prec, Round::Floor);
  Dyadic shi = numerics::sqrt(hi, prec, Round::Ceil);
  return Ball::from_interval(slo, shi);
}

/// Positive k-th root of a nonnegative ball.
inline Ball root(const Ball& a, unsigned long k, std::int64_t prec) {
  Dyadic lo = a.lower(), hi = a.upper();
  if (hi.sign() < 0) throw Error("root of a negative ball");
  Dyadic rlo = lo.sign() <= 0 ? Dyadic() : numerics::root(lo, k, prec, Round::Floor);
  Dyadic rhi = numerics::root(hi, k, prec, Round::Ceil);
  return Ball::from_interval(rlo, rhi);
}

inline Ball max(const Ball& a, const Ball& b) {
  return Ball::from_interval(numerics::max(a.lower(), b.lower()), numerics::max(a.upper(), b.upper()));
}
inline Ball min(const Ball& a, const Ball& b) {
  return Ball::from_interval(numerics::min(a.lower(), b.lower()), numerics::min(a.upper(), b.upper()));
}

inline Ball pow(const Ball& a, unsigned long k, std::int64_t prec) {
  Ball r(1);
  Ball base = a;
  while (k > 0) {
    if (k & 1UL) r = mul(r, base, prec);
    k >>= 1;
    if (k > 0) base = mul(base, base, prec);
  }
  return r;
}

/// Complex disk ball: center (re, im) with a single radius.
class ComplexBall {
 public:
  ComplexBall() = default;
  ComplexBall(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
  explicit ComplexBall(Dyadic re, Dyadic im = {}, Dyadic rad = {})
      : re_(std::move(re)), im_(std::move(im)), rad_(std::move(rad)) {
    if (rad_.sign() < 0) throw Error("negative radius");
    rad_ = round(rad_, kRadiusBits, Round::Ceil);
  }
  explicit ComplexBall(const Ball& real) : ComplexBall(real.mid(), Dyadic(), real.rad()) {}

  const Dyadic& re() const { return re_; }
  const Dyadic& im() const { return im_; }
  const Dyadic& rad() const { return rad_; }
  bool is_exact() const { return rad_.is_zero(); }
  bool center_is_real() const { return im_.is_zero(); }

  ComplexBall center() const { return ComplexBall(re_, im_); }

  /// Real-part enclosure.
  Ball real() const { return Ball(re_, rad_); }
  Ball imag() const { return Ball(im_, rad_); }

  /// |center|^2 exactly.
  Dyadic center_norm2() const { return re_ * re_ + im_ * im_; }

  /// Upper bound of |center|.
  Dyadic center_abs_up(std::int64_t prec = kRadiusBits) const {
    Dyadic s = round(mag_up(re_, prec + 2) * mag_up(re_, prec + 2) + mag_up(im_, prec + 2) * mag_up(im_, prec + 2),
                     prec + 2, Round::Ceil);
    return numerics::sqrt(s, prec, Round::Ceil);
  }
  Dyadic center_abs_down(std::int64_t prec = kRadiusBits) const {
    Dyadic s = round(mag_down(re_, prec + 2) * mag_down(re_, prec + 2) + mag_down(im_, prec + 2) * mag_down(im_, prec + 2),
                     prec + 2, Round::Floor);
    return numerics::sqrt(s, prec, Round::Floor);
  }

  bool contains(const ComplexBall& o) const {
    // |c_o - c| + r_o <= r  <=>  r - r_o >= 0 and |c_o - c|^2 <= (r - r_o)^2
    Dyadic slack = rad_ - o.rad_;
    if (slack.sign() < 0) return false;
    Dyadic dr = o.re_ - re_, di = o.im_ - im_;
    return cmp(dr * dr + di * di, slack * slack) <= 0;
  }
  bool contains_point(const Dyadic& re, const Dyadic& im) const { return contains(ComplexBall(re, im)); }
  bool contains_zero() const { return cmp(center_norm2(), rad_ * rad_) <= 0; }

  /// True when the closed disks intersect.
  bool overlaps(const ComplexBall& o) const {
    Dyadic dr = o.re_ - re_, di = o.im_ - im_;
    Dyadic s = rad_ + o.rad_;
    return cmp(dr * dr + di * di, s * s) <= 0;
  }

 private:
  Dyadic re_;
  Dyadic im_;
  Dyadic rad_;
};

inline ComplexBall neg(const ComplexBall& a) { return ComplexBall(-a.re(), -a.im(), a.rad()); }
inline ComplexBall conj(const ComplexBall& a) { return ComplexBall(a.re(), -a.im(), a.rad()); }

inline ComplexBall add(const ComplexBall& a, const ComplexBall& b, std::int64_t prec) {
  Dyadic e1, e2;
  Dyadic re = round(a.re() + b.re(), prec, Round::Nearest, &e1);
  Dyadic im = round(a.im() + b.im(), prec, Round::Nearest, &e2);
  Dyadic r = detail::rad_add(detail::rad_add(a.rad(), b.rad()), detail::rad_add(e1, e2));
  return ComplexBall(std::move(re), std::move(im), std::move(r));
}
inline ComplexBall sub(const ComplexBall& a, const ComplexBall& b, std::int64_t prec) { return add(a, neg(b), prec); }

inline ComplexBall mul(const ComplexBall& a, const ComplexBall& b, std::int64_t prec) {
  Dyadic e1, e2;
  Dyadic re, im;
  if (a.center_is_real() && b.center_is_real()) {
    re = round(a.re() * b.re(), prec, Round::Nearest, &e1);
  } else {
    re = round(a.re() * b.re() - a.im() * b.im(), prec, Round::Nearest, &e1);
    im = round(a.re() * b.im() + a.im() * b.re(), prec, Round::Nearest, &e2);
  }
  Dyadic r;
  if (!a.rad().is_zero() || !b.rad().is_zero()) {
    r = detail::rad_add(detail::rad_mul(a.center_abs_up(), b.rad()), detail::rad_mul(b.center_abs_up(), a.rad()));
    r = detail::rad_add(r, detail::rad_mul(a.rad(), b.rad()));
  }
  r = detail::rad_add(r, detail::rad_add(e1, e2));
  return ComplexBall(std::move(re), std::move(im), std::move(r));
}

inline ComplexBall mul(const ComplexBall& a, const Ball& b, std::int64_t prec) { return mul(a, ComplexBall(b), prec); }

/// Multiplication by an exact integer.
inline ComplexBall mul(const ComplexBall& a, const mpz_class& k, std::int64_t prec) {
  Dyadic kd(k);
  Dyadic e1, e2;
  Dyadic re = round(a.re() * kd, prec, Round::Nearest, &e1);
  Dyadic im = round(a.im() * kd, prec, Round::Nearest, &e2);
  Dyadic r = detail::rad_add(detail::rad_mul(a.rad(), mag_up(kd)), detail::rad_add(e1, e2));
  return ComplexBall(std::move(re), std::move(im), std::move(r));
}

inline ComplexBall mul_2exp(const ComplexBall& a, std::int64_t k) {
  return ComplexBall(a.re().mul_2exp(k), a.im().mul_2exp(k), a.rad().mul_2exp(k));
}

/// 1 / a. Throws BallContainsZero if the disk meets zero.
inline ComplexBall inv(const ComplexBall& a, std::int64_t prec) {
  Dyadic clo = a.center_abs_down();
  Dyadic gap = clo - a.rad();
  if (gap.sign() <= 0) throw BallContainsZero("inverting a complex ball that contains zero");
  Dyadic n2 = a.center_norm2();
  Dyadic e1, e2;
  Dyadic re = div(a.re(), n2, prec, Round::Nearest, &e1);
  Dyadic im = div(-a.im(), n2, prec, Round::Nearest, &e2);
  Dyadic r;
  if (!a.rad().is_zero()) {
    Dyadic den = round(clo * gap, kRadiusBits, Round::Floor);
    r = div(a.rad(), den, kRadiusBits, Round::Ceil);
  }
  r = detail::rad_add(r, detail::rad_add(e1, e2));
  return ComplexBall(std::move(re), std::move(im), std::move(r));
}

inline ComplexBall div(const ComplexBall& a, const ComplexBall& b, std::int64_t prec) {
  return mul(a, inv(b, prec), prec);
}

/// Enclosure of |a|.
inline Ball abs(const ComplexBall& a, std::int64_t prec) {
  Dyadic n2 = a.center_norm2();
  Dyadic lo = numerics::sqrt(n2, prec, Round::Floor) - a.rad();
  Dyadic hi = numerics::sqrt(n2, prec, Round::Ceil) + a.rad();
  if (lo.sign() < 0) lo = Dyadic();
  return Ball::from_interval(lo, hi);
}

/// Drops the radius. Used inside iterations whose output is certified separately.
inline ComplexBall midpoint(const ComplexBall& a) { return a.center(); }

/// Outcome of comparing a ball modulus against a positive threshold.
enum class Certainty { CertainlyBelow, CertainlyAbove, Unknown };

inline const char* to_string(Certainty c) {
  switch (c) {
    case Certainty::CertainlyBelow:
      return "CertainlyBelow";
    case Certainty::CertainlyAbove:
      return "CertainlyAbove";
    default:
      return "Unknown";
  }
}

/// CertainlyBelow iff |center| + radius < threshold; CertainlyAbove iff
/// |center| - radius > threshold. Both tests are exact.
inline Certainty certify_below(const ComplexBall& x, const Dyadic& threshold) {
  if (threshold.sign() <= 0) throw ValidationError("certify_below requires a positive threshold");
  Dyadic n2 = x.center_norm2();
  Dyadic below = threshold - x.rad();
  if (below.sign() > 0 && cmp(n2, below * below) < 0) return Certainty::CertainlyBelow;
  Dyadic above = threshold + x.rad();
  if (cmp(n2, above * above) > 0) return Certainty::CertainlyAbove;
  return Certainty::Unknown;
}

inline Certainty certify_below(const ComplexBall& x, double threshold) {
  if (!(threshold > 0)) throw ValidationError("certify_below requires a positive threshold");
  return certify_below(x, Dyadic::from_double(threshold));
}

/// Horner evaluation with rounding absorbed into the radius.
inline ComplexBall ball_eval(std::span<const ComplexBall> coeffs, const ComplexBall& x, std::int64_t prec) {
  if (coeffs.empty()) throw ValidationError("ball_eval requires a nonempty coefficient list");
  ComplexBall acc = coeffs.back();
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = add(mul(acc, x, prec), coeffs[i], prec);
  return acc;
}

inline Ball ball_eval(std::span<const Ball> coeffs, const Ball& x, std::int64_t prec) {
  if (coeffs.empty()) throw ValidationError("ball_eval requires a nonempty coefficient list");
  Ball acc = coeffs.back();
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = add(mul(acc, x, prec), coeffs[i], prec);
  return acc;
}

}  // namespace selfsim::numerics
