#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "selfsim/errors.hpp"

namespace selfsim::numerics {

/// Rounding direction for inexact dyadic operations.
enum class Round { Nearest, Floor, Ceil };

/// Exact dyadic rational m * 2^e with an arbitrary-precision mantissa.
///
/// Values are kept normalized (odd mantissa, or zero with exponent 0), so
/// equal values have equal representations.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : man_(v) { normalize(); }  // NOLINT(google-explicit-constructor)
  explicit Dyadic(mpz_class m, std::int64_t e = 0) : man_(std::move(m)), exp_(e) { normalize(); }

  static Dyadic pow2(std::int64_t e) { return Dyadic(mpz_class(1), e); }

  /// Exact conversion; throws on non-finite input.
  static Dyadic from_double(double d) {
    if (!std::isfinite(d)) throw ValidationError("non-finite value cannot be represented exactly");
    if (d == 0.0) return {};
    int e = 0;
    double m = std::frexp(d, &e);  // d = m * 2^e, 0.5 <= |m| < 1
    auto scaled = static_cast<std::int64_t>(std::ldexp(m, 53));
    return Dyadic(mpz_class(static_cast<long>(scaled)), static_cast<std::int64_t>(e) - 53);
  }

  const mpz_class& mantissa() const { return man_; }
  std::int64_t exponent() const { return exp_; }

  int sign() const { return sgn(man_); }
  bool is_zero() const { return man_ == 0; }

  /// Bit length of the mantissa (0 for zero).
  std::int64_t bits() const {
    return is_zero() ? 0 : static_cast<std::int64_t>(mpz_sizeinbase(man_.get_mpz_t(), 2));
  }

  /// For x != 0: 2^(top-1) <= |x| < 2^top.
  std::int64_t top() const {
    return is_zero() ? std::numeric_limits<std::int64_t>::min() / 4 : bits() + exp_;
  }

  /// Nearest double (ties to even; subnormal results may round twice).
  double to_double() const {
    if (is_zero()) return 0.0;
    mpz_class m = man_ < 0 ? mpz_class(-man_) : man_;
    std::int64_t e = exp_;
    const auto nb = static_cast<std::int64_t>(mpz_sizeinbase(m.get_mpz_t(), 2));
    if (nb > 53) {
      const auto shift = static_cast<mp_bitcnt_t>(nb - 53);
      mpz_class q, r;
      mpz_fdiv_q_2exp(q.get_mpz_t(), m.get_mpz_t(), shift);
      mpz_fdiv_r_2exp(r.get_mpz_t(), m.get_mpz_t(), shift);
      mpz_class half = mpz_class(1) << (shift - 1);
      if (r > half || (r == half && mpz_odd_p(q.get_mpz_t()))) ++q;
      m = q;
      e += static_cast<std::int64_t>(shift);
    }
    double d = m.get_d();
    if (man_ < 0) d = -d;
    if (e + nb > 4096) return d > 0 ? HUGE_VAL : -HUGE_VAL;
    if (e + nb < -4096) return 0.0;
    return std::ldexp(d, static_cast<int>(e));
  }

  mpq_class to_rational() const {
    if (exp_ >= 0) {
      mpz_class num = man_ << static_cast<mp_bitcnt_t>(exp_);
      return mpq_class(num);
    }
    mpz_class den = mpz_class(1) << static_cast<mp_bitcnt_t>(-exp_);
    mpq_class q(man_, den);
    q.canonicalize();
    return q;
  }

  /// Decimal rendering with `digits` significant digits.
  std::string to_string(int digits = 20) const {
    if (is_zero()) return "0";
    mp_bitcnt_t prec = static_cast<mp_bitcnt_t>(std::max<std::int64_t>(bits(), 64) + 4 * digits);
    mpf_class f(man_, prec);
    if (exp_ >= 0)
      mpf_mul_2exp(f.get_mpf_t(), f.get_mpf_t(), static_cast<mp_bitcnt_t>(exp_));
    else
      mpf_div_2exp(f.get_mpf_t(), f.get_mpf_t(), static_cast<mp_bitcnt_t>(-exp_));
    mp_exp_t e10 = 0;
    char* raw = mpf_get_str(nullptr, &e10, 10, static_cast<size_t>(digits), f.get_mpf_t());
    std::string s(raw);
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(raw, std::char_traits<char>::length(raw) + 1);
    bool neg = !s.empty() && s[0] == '-';
    if (neg) s.erase(0, 1);
    std::string out = neg ? "-" : "";
    out += s.substr(0, 1);
    if (s.size() > 1) out += "." + s.substr(1);
    out += "e" + std::to_string(static_cast<long>(e10) - 1);
    return out;
  }

  Dyadic operator-() const {
    Dyadic r = *this;
    r.man_ = -r.man_;
    return r;
  }

  Dyadic abs() const {
    Dyadic r = *this;
    if (r.man_ < 0) r.man_ = -r.man_;
    return r;
  }

  Dyadic mul_2exp(std::int64_t k) const {
    Dyadic r = *this;
    if (!r.is_zero()) r.exp_ += k;
    return r;
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.exp_ >= b.exp_) {
      mpz_class m = a.man_ << static_cast<mp_bitcnt_t>(a.exp_ - b.exp_);
      m += b.man_;
      return Dyadic(std::move(m), b.exp_);
    }
    mpz_class m = b.man_ << static_cast<mp_bitcnt_t>(b.exp_ - a.exp_);
    m += a.man_;
    return Dyadic(std::move(m), a.exp_);
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return Dyadic(a.man_ * b.man_, a.exp_ + b.exp_);
  }

  friend int cmp(const Dyadic& a, const Dyadic& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    std::int64_t ta = a.top(), tb = b.top();
    if (ta != tb) return (ta > tb ? 1 : -1) * sa;
    if (a.exp_ >= b.exp_) {
      mpz_class m = a.man_ << static_cast<mp_bitcnt_t>(a.exp_ - b.exp_);
      int c = ::cmp(m, b.man_);
      return c > 0 ? 1 : (c < 0 ? -1 : 0);
    }
    mpz_class m = b.man_ << static_cast<mp_bitcnt_t>(b.exp_ - a.exp_);
    int c = ::cmp(a.man_, m);
    return c > 0 ? 1 : (c < 0 ? -1 : 0);
  }

  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.exp_ == b.exp_ && a.man_ == b.man_; }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    int c = cmp(a, b);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  void normalize() {
    if (man_ == 0) {
      exp_ = 0;
      return;
    }
    mp_bitcnt_t tz = mpz_scan1(man_.get_mpz_t(), 0);
    if (tz > 0) {
      mpz_tdiv_q_2exp(man_.get_mpz_t(), man_.get_mpz_t(), tz);
      exp_ += static_cast<std::int64_t>(tz);
    }
  }

  mpz_class man_{0};
  std::int64_t exp_ = 0;
};

/// log2 |x| as a double; -inf for zero.
inline double log2_abs(const Dyadic& x) {
  if (x.is_zero()) return -std::numeric_limits<double>::infinity();
  long e = 0;
  double m = mpz_get_d_2exp(&e, x.mantissa().get_mpz_t());
  return std::log2(std::fabs(m)) + static_cast<double>(e) + static_cast<double>(x.exponent());
}

inline const Dyadic& min(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0 ? a : b; }
inline const Dyadic& max(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0 ? a : b; }

/// Rounds `x` to at most `prec` significant bits. When `err` is given it
/// receives an upper bound on |x - result|.
inline Dyadic round(const Dyadic& x, std::int64_t prec, Round mode, Dyadic* err = nullptr) {
  std::int64_t b = x.bits();
  if (b <= prec) {
    if (err) *err = Dyadic();
    return x;
  }
  auto shift = static_cast<mp_bitcnt_t>(b - prec);
  mpz_class q;
  switch (mode) {
    case Round::Floor:
      mpz_fdiv_q_2exp(q.get_mpz_t(), x.mantissa().get_mpz_t(), shift);
      break;
    case Round::Ceil:
      mpz_cdiv_q_2exp(q.get_mpz_t(), x.mantissa().get_mpz_t(), shift);
      break;
    case Round::Nearest: {
      mpz_class t = x.mantissa() + (mpz_class(1) << (shift - 1));
      mpz_fdiv_q_2exp(q.get_mpz_t(), t.get_mpz_t(), shift);
      break;
    }
  }
  std::int64_t e = x.exponent() + static_cast<std::int64_t>(shift);
  if (err) *err = Dyadic::pow2(mode == Round::Nearest ? e - 1 : e);
  return Dyadic(std::move(q), e);
}

/// Upper bound of |x| with few bits; used for radius bookkeeping.
inline Dyadic mag_up(const Dyadic& x, std::int64_t prec = 32) { return round(x.abs(), prec, Round::Ceil); }
inline Dyadic mag_down(const Dyadic& x, std::int64_t prec = 32) { return round(x.abs(), prec, Round::Floor); }

/// Quotient a / b rounded to `prec` bits. For directed modes the result is a
/// one-sided bound; `err` receives an upper bound on the absolute error.
inline Dyadic div(const Dyadic& a, const Dyadic& b, std::int64_t prec, Round mode, Dyadic* err = nullptr) {
  if (b.is_zero()) throw BallContainsZero("division by exact zero");
  if (a.is_zero()) {
    if (err) *err = Dyadic();
    return {};
  }
  std::int64_t s = std::max<std::int64_t>(0, prec + 2 + b.bits() - a.bits());
  mpz_class num = a.mantissa() << static_cast<mp_bitcnt_t>(s);
  mpz_class q;
  switch (mode) {
    case Round::Floor:
      mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), b.mantissa().get_mpz_t());
      break;
    case Round::Ceil:
      mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), b.mantissa().get_mpz_t());
      break;
    case Round::Nearest:
      mpz_tdiv_q(q.get_mpz_t(), num.get_mpz_t(), b.mantissa().get_mpz_t());
      break;
  }
  std::int64_t e = a.exponent() - s - b.exponent();
  Dyadic unit = Dyadic::pow2(e);
  Dyadic raw(std::move(q), e);
  Dyadic rerr;
  Dyadic out = round(raw, prec, mode, &rerr);
  if (err) *err = unit + rerr;
  return out;
}

/// Square root of a nonnegative dyadic, rounded Floor or Ceil to `prec` bits.
inline Dyadic sqrt(const Dyadic& a, std::int64_t prec, Round mode) {
  if (a.sign() < 0) throw Error("sqrt of negative dyadic");
  if (a.is_zero()) return {};
  std::int64_t s = std::max<std::int64_t>(0, 2 * prec + 4 - a.bits());
  if (((a.exponent() - s) & 1) != 0) ++s;
  mpz_class m = a.mantissa() << static_cast<mp_bitcnt_t>(s);
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), m.get_mpz_t());
  if (mode == Round::Ceil && r * r != m) r += 1;
  Dyadic raw(std::move(r), (a.exponent() - s) / 2);
  return round(raw, prec, mode == Round::Nearest ? Round::Floor : mode);
}

/// k-th root of a nonnegative dyadic, rounded Floor or Ceil to `prec` bits.
inline Dyadic root(const Dyadic& a, unsigned long k, std::int64_t prec, Round mode) {
  if (k == 0) throw Error("zeroth root");
  if (k == 1) return round(a, prec, mode);
  if (a.sign() < 0) throw Error("root of negative dyadic");
  if (a.is_zero()) return {};
  auto kk = static_cast<std::int64_t>(k);
  std::int64_t s = std::max<std::int64_t>(0, kk * (prec + 4) - a.bits());
  std::int64_t rem = ((a.exponent() - s) % kk + kk) % kk;
  s += rem;
  mpz_class m = a.mantissa() << static_cast<mp_bitcnt_t>(s);
  mpz_class r;
  int exact = mpz_root(r.get_mpz_t(), m.get_mpz_t(), k);
  if (mode == Round::Ceil && !exact) r += 1;
  Dyadic raw(std::move(r), (a.exponent() - s) / kk);
  return round(raw, prec, mode == Round::Nearest ? Round::Floor : mode);
}

/// a^k exactly.
inline Dyadic pow(const Dyadic& a, unsigned long k) {
  mpz_class m;
  mpz_pow_ui(m.get_mpz_t(), a.mantissa().get_mpz_t(), k);
  return Dyadic(std::move(m), a.exponent() * static_cast<std::int64_t>(k));
}

/// Rational -> dyadic, rounded to `prec` bits.
inline Dyadic from_rational(const mpq_class& q, std::int64_t prec, Round mode, Dyadic* err = nullptr) {
  return div(Dyadic(q.get_num()), Dyadic(q.get_den()), prec, mode, err);
}

/// Parses "3", "-0.25", "1.5e-3", "2/3" into an exact rational.
inline mpq_class parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '_') s += c;
  if (s.empty()) throw ValidationError("empty number");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      mpq_class n = parse_rational(s.substr(0, slash));
      mpq_class d = parse_rational(s.substr(slash + 1));
      if (d == 0) throw ValidationError("zero denominator in '" + text + "'");
      mpq_class r = n / d;
      r.canonicalize();
      return r;
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool seen_dot = false, any = false;
    for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
      if (s[i] == '.') {
        if (seen_dot) throw ValidationError("malformed number '" + text + "'");
        seen_dot = true;
      } else if (s[i] >= '0' && s[i] <= '9') {
        digits += s[i];
        any = true;
        if (seen_dot) ++frac_digits;
      } else {
        throw ValidationError("malformed number '" + text + "'");
      }
    }
    if (!any) throw ValidationError("malformed number '" + text + "'");
    long exp10 = 0;
    if (i < s.size()) {
      std::string es = s.substr(i + 1);
      if (es.empty()) throw ValidationError("malformed exponent in '" + text + "'");
      std::size_t used = 0;
      exp10 = std::stol(es, &used);
      if (used != es.size()) throw ValidationError("malformed exponent in '" + text + "'");
    }
    exp10 -= frac_digits;
    mpz_class num(digits, 10);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    mpq_class r = exp10 >= 0 ? mpq_class(num * p10) : mpq_class(num, p10);
    r.canonicalize();
    return neg ? mpq_class(-r) : r;
  } catch (const std::invalid_argument&) {
    throw ValidationError("malformed number '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ValidationError("number out of range '" + text + "'");
  }
}

}  // namespace selfsim::numerics
