#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/algebra/zero_test.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs/ifs_spec.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::ifs {

struct SearchOptions {
  std::size_t memory_cap = std::size_t{1} << 26;  // half-sums per table
  double numeric_tol = 1e-12;                     // numeric mode: values this close count as equal
  std::size_t max_witnesses = 16;
};

namespace detail {

/// Sums sum_{i<count} d_{digit_i} lambda^(offset+i) grouped into classes of equal value.
struct HalfClass {
  Ball value;
  std::vector<std::uint64_t> members;  // digit codes, digit i is coefficient offset+i
};

struct HalfTable {
  std::vector<HalfClass> classes;  // sorted by centre
  std::uint64_t zero_code = 0;     // code of the all-zero coefficient vector
};

inline std::uint64_t checked_pow(std::size_t base, int e, std::size_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > cap / base + 1) throw BudgetExceeded("half-sum table exceeds the memory cap");
    r *= base;
  }
  if (r > cap) throw BudgetExceeded("half-sum table of " + std::to_string(r) + " entries exceeds the memory cap of " +
                                    std::to_string(cap));
  return r;
}

/// Precision context for one search: either exact (certified decisions against
/// a separation threshold) or numeric (tolerance based).
struct Setting {
  const DifferenceSet& ds;
  const RealParameter& lam;
  PrecisionContext ctx;
  bool certified = false;
  std::int64_t sep_bits = 0;  // nonzero family values exceed 2^-sep_bits
  Dyadic threshold;           // 2^-(sep_bits+1) or the numeric tolerance
  std::int64_t prec = 128;
};

inline Setting make_setting(const DifferenceSet& ds, const RealParameter& lam, int coeff_count, const SearchOptions& opts,
                            const PrecisionContext& ctx) {
  Setting s{ds, lam, ctx};
  s.certified = lam.certified();
  if (s.certified) {
    double log2_l1 = algebra::log2_upper(ds.max_scaled_l1()) + 1.0 + std::log2(static_cast<double>(coeff_count));
    s.sep_bits = algebra::nonzero_bits(log2_l1, coeff_count - 1, ds.field(), lam.algebraic()) +
                 static_cast<std::int64_t>(algebra::log2_upper(ds.denominator())) + 1;
    s.threshold = Dyadic::pow2(-s.sep_bits - 1);
    s.prec = std::max<std::int64_t>(ctx.working_bits, s.sep_bits + 48 + 2 * static_cast<std::int64_t>(std::log2(coeff_count + 1.0)));
  } else {
    s.threshold = Dyadic::from_double(opts.numeric_tol);
    s.prec = ctx.working_bits;
  }
  return s;
}

enum class Cmp { Zero, Nonzero, Undecided };

inline Cmp classify(const Ball& v, const Setting& s) {
  Dyadic a = v.mid().abs();
  if (cmp(a + v.rad(), s.threshold) < 0) return Cmp::Zero;
  if (s.certified) return cmp(a, v.rad()) > 0 ? Cmp::Nonzero : Cmp::Undecided;
  return cmp(a - v.rad(), s.threshold) > 0 ? Cmp::Nonzero : Cmp::Undecided;
}

inline HalfTable build_half(const Setting& s, int offset, int count, std::size_t cap) {
  const std::size_t D = s.ds.size();
  checked_pow(D, count, cap);
  HalfTable t;
  std::uint64_t place = 1;
  for (int i = 0; i < count; ++i) {
    t.zero_code += place * s.ds.zero_index();
    place *= D;
  }
  std::int64_t p = s.prec;
  for (;;) {
    Ball lam = s.lam.enclosure(p, s.ctx);
    std::vector<Ball> dv;
    for (std::size_t k = 0; k < D; ++k) dv.push_back(s.ds.value(k, p, s.ctx));
    std::vector<Ball> vals{Ball()};
    std::vector<std::uint64_t> codes{0};
    Ball power = numerics::pow(lam, static_cast<unsigned long>(offset), p);
    std::uint64_t pl = 1;
    for (int i = 0; i < count; ++i) {
      std::vector<Ball> term(D);
      for (std::size_t k = 0; k < D; ++k) term[k] = mul(dv[k], power, p);
      std::vector<Ball> nv;
      std::vector<std::uint64_t> nc;
      nv.reserve(vals.size() * D);
      nc.reserve(vals.size() * D);
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t j = 0; j < vals.size(); ++j) {
          nv.push_back(add(vals[j], term[k], p));
          nc.push_back(codes[j] + pl * k);
        }
      vals = std::move(nv);
      codes = std::move(nc);
      power = mul(power, lam, p);
      pl *= D;
    }
    Dyadic max_rad = s.threshold.mul_2exp(-3);
    bool tight = !s.certified || std::all_of(vals.begin(), vals.end(), [&](const Ball& b) { return cmp(b.rad(), max_rad) <= 0; });
    if (!tight) {
      if (p > 4 * s.ctx.max_bits) throw NoConvergence("half-sum enclosures too wide");
      p *= 2;
      continue;
    }
    std::vector<std::size_t> order(vals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      int c = cmp(vals[a].mid(), vals[b].mid());
      return c != 0 ? c < 0 : codes[a] < codes[b];
    });
    for (std::size_t idx : order) {
      if (!t.classes.empty()) {
        Ball diff = sub(vals[idx], t.classes.back().value, p);
        Cmp c = classify(diff, s);
        if (c == Cmp::Undecided && s.certified) throw NoConvergence("half-sums neither certified equal nor distinct");
        if (c == Cmp::Zero) {
          t.classes.back().members.push_back(codes[idx]);
          continue;
        }
      }
      t.classes.push_back({vals[idx], {codes[idx]}});
    }
    return t;
  }
}

inline void append_digits(std::vector<std::uint32_t>& out, std::uint64_t code, int count, std::size_t D) {
  for (int i = 0; i < count; ++i) {
    out.push_back(static_cast<std::uint32_t>(code % D));
    code /= D;
  }
}

inline FamilyPolynomial combine(std::uint64_t low, int low_count, std::uint64_t high, int high_count, std::size_t D) {
  FamilyPolynomial f;
  append_digits(f.coeffs, low, low_count, D);
  append_digits(f.coeffs, high, high_count, D);
  return f;
}

/// Member pair of two zero-summing classes forming a nonzero polynomial, if any.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> nonzero_member_pair(const HalfClass& a, std::uint64_t a_zero,
                                                                                 const HalfClass& b, std::uint64_t b_zero) {
  for (auto x : a.members)
    for (auto y : b.members)
      if (x != a_zero || y != b_zero) return std::make_pair(x, y);
  return std::nullopt;
}

}  // namespace detail

struct DeltaResult {
  int n = 0;
  bool has_nonzero = false;
  Ball delta;                 // min over nonzero differences
  FamilyPolynomial minimizer; // P with |P(lambda)| = delta
  bool overlap = false;       // some nonzero P has P(lambda) = 0
  std::vector<FamilyPolynomial> zero_witnesses;
  std::size_t low_classes = 0, high_classes = 0;
  std::int64_t precision_bits = 0;
  bool certified = false;
};

/// Minimum over distinct words of length n of the distance between their
/// translations, excluding exact coincidences (reported separately).
inline DeltaResult delta_n(const IFSSpec& ifs, int n, const SearchOptions& opts = {}) {
  if (n < 1) throw ValidationError("delta_n requires n >= 1", "/params/n");
  DifferenceSet ds = difference_set(ifs);
  DeltaResult r;
  r.n = n;
  r.certified = ifs.certified();
  const std::size_t D = ds.size();
  if (D == 1) {
    r.overlap = ifs.m() > 1;
    return r;
  }
  const int low = (n + 1) / 2, high = n - low;
  auto s = detail::make_setting(ds, ifs.lambda(), n, opts, ifs.precision());
  auto lt = detail::build_half(s, 0, low, opts.memory_cap);
  auto ht = detail::build_half(s, low, high, opts.memory_cap);
  r.low_classes = lt.classes.size();
  r.high_classes = ht.classes.size();
  r.precision_bits = s.prec;
  std::optional<Ball> best;
  for (const auto& b : ht.classes) {
    Dyadic target = -b.value.mid();
    auto it = std::lower_bound(lt.classes.begin(), lt.classes.end(), target,
                               [](const detail::HalfClass& c, const Dyadic& x) { return cmp(c.value.mid(), x) < 0; });
    auto base = static_cast<std::ptrdiff_t>(it - lt.classes.begin());
    for (std::ptrdiff_t i = base - 2; i <= base + 1; ++i) {
      if (i < 0 || i >= static_cast<std::ptrdiff_t>(lt.classes.size())) continue;
      const auto& a = lt.classes[static_cast<std::size_t>(i)];
      Ball v = add(a.value, b.value, s.prec + 8);
      detail::Cmp c = detail::classify(v, s);
      if (c == detail::Cmp::Undecided) {
        if (s.certified) throw NoConvergence("difference value neither certified zero nor nonzero");
        continue;
      }
      if (c == detail::Cmp::Zero) {
        if (auto pair = detail::nonzero_member_pair(a, lt.zero_code, b, ht.zero_code)) {
          r.overlap = true;
          if (r.zero_witnesses.size() < opts.max_witnesses)
            r.zero_witnesses.push_back(detail::combine(pair->first, low, pair->second, high, D));
        }
        continue;
      }
      Ball av = numerics::abs(v);
      if (!best || cmp(av.mid(), best->mid()) < 0) {
        best = av;
        r.minimizer = detail::combine(a.members.front(), low, b.members.front(), high, D);
      }
    }
  }
  if (best) {
    r.has_nonzero = true;
    r.delta = *best;
  }
  std::sort(r.zero_witnesses.begin(), r.zero_witnesses.end());
  return r;
}

struct ProbeEntry {
  int n = 0;
  DeltaResult delta;
  Ball bound;  // c^n
  algebra::Verdict verdict = algebra::Verdict::Unknown;  // delta_n >= c^n
};

/// For n = 1..N, whether delta_n >= c^n (certified comparison per n).
inline std::vector<ProbeEntry> exp_separation_probe(const IFSSpec& ifs, double c, int N, const SearchOptions& opts = {}) {
  if (!(c > 0 && c < 1)) throw ValidationError("c must lie in (0, 1)", "/params/c");
  std::vector<ProbeEntry> out;
  Dyadic cd = Dyadic::from_double(c);
  for (int n = 1; n <= N; ++n) {
    ProbeEntry e;
    e.n = n;
    e.delta = delta_n(ifs, n, opts);
    e.bound = Ball(numerics::pow(cd, static_cast<unsigned long>(n)));
    if (e.delta.has_nonzero) e.verdict = algebra::certify_leq(e.bound, e.delta.delta);
    out.push_back(std::move(e));
  }
  return out;
}

struct NearHit {
  FamilyPolynomial poly;
  Ball value;  // P(lambda)
  bool exact_zero = false;
};

struct NearOverlapResult {
  std::vector<NearHit> hits;            // sorted by |value|, then coefficients
  std::optional<std::size_t> minimizer; // index into hits
  std::vector<FamilyPolynomial> uncertain;
  std::int64_t precision_bits = 0;
  bool certified = false;
};

/// All nonzero P in the family of degree <= n with |P(lambda)| <= r. With r = 0
/// and an exact lambda, exactly the family polynomials vanishing at lambda.
inline NearOverlapResult near_overlap_search(const RealParameter& lam, const DifferenceSet& ds, int n, const Dyadic& r,
                                             const SearchOptions& opts = {}, const PrecisionContext& ctx = {}) {
  if (n < 0) throw ValidationError("n must be nonnegative", "/params/n");
  if (r.sign() < 0 || (r.is_zero() && !lam.certified()))
    throw ValidationError("r must be positive (r = 0 needs an exact lambda)", "/params/r");
  NearOverlapResult res;
  res.certified = lam.certified();
  const std::size_t D = ds.size();
  const int coeffs = n + 1;
  const int low = (coeffs + 1) / 2, high = coeffs - low;
  auto s = detail::make_setting(ds, lam, coeffs, opts, ctx);
  res.precision_bits = s.prec;
  if (D == 1) return res;
  auto lt = detail::build_half(s, 0, low, opts.memory_cap);
  auto ht = detail::build_half(s, low, high, opts.memory_cap);
  Dyadic widest;
  for (const auto& c : lt.classes) widest = numerics::max(widest, c.value.rad());
  for (const auto& c : ht.classes) widest = numerics::max(widest, c.value.rad());
  const Dyadic slack = widest.mul_2exp(3) + s.threshold;
  auto emit = [&](const detail::HalfClass& a, const detail::HalfClass& b, const Ball& v, bool zero) {
    for (auto x : a.members)
      for (auto y : b.members) {
        if (x == lt.zero_code && y == ht.zero_code) continue;
        if (res.hits.size() >= opts.memory_cap) throw BudgetExceeded("near-overlap result exceeds the memory cap");
        res.hits.push_back({detail::combine(x, low, y, high, D), v, zero});
      }
  };
  for (const auto& b : ht.classes) {
    Dyadic lo = -b.value.mid() - r - slack;
    Dyadic hi = -b.value.mid() + r + slack;
    auto it = std::lower_bound(lt.classes.begin(), lt.classes.end(), lo,
                               [](const detail::HalfClass& c, const Dyadic& x) { return cmp(c.value.mid(), x) < 0; });
    for (; it != lt.classes.end() && cmp(it->value.mid(), hi) <= 0; ++it) {
      Ball v = add(it->value, b.value, s.prec + 8);
      detail::Cmp zc = detail::classify(v, s);
      if (zc == detail::Cmp::Zero && s.certified) {
        emit(*it, b, v, true);
        continue;
      }
      if (r.is_zero()) continue;
      Ball av = numerics::abs(v);
      if (cmp(av.upper(), r) <= 0) {
        emit(*it, b, v, false);
      } else if (cmp(av.lower(), r) <= 0) {
        // Near the threshold: re-evaluate each member polynomial on its own.
        for (auto x : it->members)
          for (auto y : b.members) {
            if (x == lt.zero_code && y == ht.zero_code) continue;
            FamilyPolynomial f = detail::combine(x, low, y, high, D);
            bool decided = false;
            for (std::int64_t p = s.prec * 2; lam.certified() && p <= 4 * ctx.max_bits; p *= 2) {
              Ball fv = f.eval(ds, lam.enclosure(p, ctx), p, ctx);
              Ball fa = numerics::abs(fv);
              if (cmp(fa.upper(), r) <= 0) {
                res.hits.push_back({f, fv, false});
                decided = true;
                break;
              }
              if (cmp(fa.lower(), r) > 0) {
                decided = true;
                break;
              }
            }
            if (!decided) res.uncertain.push_back(f);
          }
      }
    }
  }
  std::sort(res.hits.begin(), res.hits.end(), [](const NearHit& a, const NearHit& b) {
    if (a.exact_zero != b.exact_zero) return a.exact_zero;
    int c = cmp(a.value.mid().abs(), b.value.mid().abs());
    return c != 0 ? c < 0 : a.poly < b.poly;
  });
  if (!res.hits.empty()) res.minimizer = 0;
  return res;
}

}  // namespace selfsim::ifs
