#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::entropy {

using numerics::Ball;
using numerics::ComplexBall;
using numerics::Dyadic;

/// A value and an absolute error estimate.
struct Estimate {
  double value = 0;
  double error = 0;
};

/// sum -p log p over a probability vector (natural log).
inline double shannon(std::span<const double> p) {
  long double s = 0;
  for (double x : p) {
    if (x < 0) throw ValidationError("probabilities must be nonnegative");
    if (x > 0) s -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
  }
  return static_cast<double>(s);
}

/// Exact real of the form sum c_b log b with rational c_b and integers b >= 2.
/// Bases are split into primes below 2^20; a larger cofactor stays as one base.
class LogCombination {
 public:
  void add_log(mpz_class b, const mpq_class& c) {
    if (b <= 0) throw Error("log of a nonpositive integer");
    if (c == 0 || b == 1) return;
    for (unsigned long q = 2; q < (1ul << 20) && mpz_class(q) * q <= b; q += (q == 2 ? 1 : 2)) {
      while (mpz_divisible_ui_p(b.get_mpz_t(), q)) {
        add_term(mpz_class(q), c);
        mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), q);
      }
    }
    if (b > 1) add_term(b, c);
  }

  const std::map<mpz_class, mpq_class>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }

  double value() const {
    long double s = 0;
    for (const auto& [b, c] : t_) s += static_cast<long double>(c.get_d()) * log_of(b);
    return static_cast<double>(s);
  }

  /// Bound on the rounding error of value().
  double error() const {
    long double s = 0;
    for (const auto& [b, c] : t_) s += std::fabs(static_cast<long double>(c.get_d()) * log_of(b));
    return static_cast<double>(s) * 1e-15;
  }

  std::string to_string() const {
    if (t_.empty()) return "0";
    std::string s;
    for (const auto& [b, c] : t_) {
      if (!s.empty()) s += c > 0 ? " + " : " - ";
      else if (c < 0) s += "-";
      mpq_class a = abs(c);
      if (a != 1) s += a.get_str() + "*";
      s += "log(" + b.get_str() + ")";
    }
    return s;
  }

  LogCombination& operator+=(const LogCombination& o) {
    for (const auto& [b, c] : o.t_) add_term(b, c);
    return *this;
  }
  friend LogCombination operator*(const mpq_class& k, LogCombination x) {
    for (auto it = x.t_.begin(); it != x.t_.end();) {
      it->second *= k;
      it = it->second == 0 ? x.t_.erase(it) : std::next(it);
    }
    return x;
  }
  friend bool operator==(const LogCombination&, const LogCombination&) = default;

 private:
  static long double log_of(const mpz_class& b) {
    long e = 0;
    double m = mpz_get_d_2exp(&e, b.get_mpz_t());
    return std::log(static_cast<long double>(m)) + static_cast<long double>(e) * std::log(2.0L);
  }
  void add_term(const mpz_class& b, const mpq_class& c) {
    auto& v = t_[b];
    v += c;
    if (v == 0) t_.erase(b);
  }

  std::map<mpz_class, mpq_class> t_;
};

/// Exact Shannon entropy of rational weights summing to 1.
inline LogCombination shannon_exact(std::vector<mpq_class> w) {
  mpq_class sum(0);
  for (const auto& x : w) {
    if (x <= 0) throw ValidationError("weights must be positive");
    sum += x;
  }
  if (sum != 1) throw ValidationError("weights must sum to 1");
  std::sort(w.begin(), w.end());
  LogCombination h;
  for (std::size_t i = 0; i < w.size();) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    mpq_class c = w[i] * static_cast<unsigned long>(j - i);
    // -c log(a/b) = c log b - c log a
    h.add_log(w[i].get_den(), c);
    h.add_log(w[i].get_num(), -c);
    i = j;
  }
  return h;
}

/// Finitely many atoms in C with positive rational weights summing to 1.
struct AtomicDistribution {
  std::vector<ComplexBall> positions;
  std::vector<mpq_class> weights;

  static AtomicDistribution real(const std::vector<double>& x, const std::vector<mpq_class>& w) {
    AtomicDistribution d;
    for (double v : x) d.positions.emplace_back(Ball(Dyadic::from_double(v)));
    d.weights = w;
    d.validate();
    return d;
  }

  void validate() const {
    if (positions.empty()) throw ValidationError("distribution needs at least one atom");
    if (positions.size() != weights.size()) throw ValidationError("positions and weights differ in length");
    mpq_class s(0);
    for (const auto& w : weights) {
      if (w <= 0) throw ValidationError("weights must be positive");
      s += w;
    }
    if (s != 1) throw ValidationError("weights must sum to 1");
  }

  std::size_t size() const { return positions.size(); }
  bool is_real() const {
    return std::all_of(positions.begin(), positions.end(), [](const ComplexBall& z) { return z.im().is_zero(); });
  }
  std::vector<double> weights_double() const {
    std::vector<double> p;
    for (const auto& w : weights) p.push_back(w.get_d());
    return p;
  }
};

inline LogCombination shannon_exact(const AtomicDistribution& d) { return shannon_exact(d.weights); }
inline double shannon(const AtomicDistribution& d) { return shannon_exact(d.weights).value(); }

}  // namespace selfsim::entropy
