#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "selfsim/entropy/shannon.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs/levels.hpp"

namespace selfsim::entropy {

using ifs::CollapseOptions;
using ifs::IFSSpec;
using ifs::Level;

/// Law of sum_{k<n} xi_k lambda^k with xi_k i.i.d. over the translations.
struct LevelNMeasure {
  int n = 0;
  Level level;
  bool certified = false;

  AtomicDistribution distribution() const {
    AtomicDistribution d;
    for (const auto& a : level.atoms) {
      d.positions.emplace_back(a.value);
      d.weights.push_back(a.weight);
    }
    return d;
  }
  LogCombination entropy() const {
    std::vector<mpq_class> w;
    w.reserve(level.atoms.size());
    for (const auto& a : level.atoms) w.push_back(a.weight);
    return shannon_exact(std::move(w));
  }
};

inline LevelNMeasure level_n_atoms(const IFSSpec& ifs, int n, const CollapseOptions& opts) {
  if (n < 1) throw ValidationError("n must be at least 1", "/params/n");
  CollapseOptions o = opts;
  o.track_weights = true;
  ifs::LevelBuilder b(ifs, o);
  b.advance_to(n);
  return {n, b.current(), o.mode == ifs::Collapse::Certified};
}

inline LevelNMeasure level_n_atoms(const IFSSpec& ifs, int n) { return level_n_atoms(ifs, n, ifs::default_collapse(ifs)); }

struct GarsiaRow {
  int n = 0;
  LogCombination exact;  // H_n
  double h = 0;          // H_n
  double h_per_n = 0;    // H_n / n
  std::size_t atoms = 0;
};

struct GarsiaBracket {
  std::vector<GarsiaRow> rows;
  double upper = std::numeric_limits<double>::infinity();  // min H_n / n
  int argmin = 0;
  bool certified = false;
  std::size_t ambiguous = 0;  // numeric mode only
  /// First level with two distinct words giving one map (certified mode).
  std::optional<ifs::OverlapWitness> first_overlap;
};

/// H_n and H_n / n for each requested n. The Garsia entropy is at most every H_n / n.
inline GarsiaBracket garsia_entropy_bracket(const IFSSpec& ifs, std::vector<int> ns, const CollapseOptions& opts) {
  if (ns.empty()) throw ValidationError("at least one n is required", "/params/n");
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw ValidationError("n must be at least 1", "/params/n");
  CollapseOptions o = opts;
  o.track_weights = true;
  ifs::LevelBuilder b(ifs, o);
  GarsiaBracket out;
  out.certified = o.mode == ifs::Collapse::Certified;
  auto note_overlap = [&]() {
    const auto& cur = b.current();
    if (!out.certified || out.first_overlap || !cur.witness) return;
    ifs::OverlapWitness w{cur.n, ifs::decode_word(cur.witness->first, ifs.m(), cur.n),
                          ifs::decode_word(cur.witness->second, ifs.m(), cur.n)};
    if (!ifs::same_map(ifs, w.word1, w.word2)) throw Error("overlap witness failed the exact check");
    out.first_overlap = std::move(w);
  };
  for (int n : ns) {
    while (b.current().n < n) {
      b.advance();
      note_overlap();
    }
    LevelNMeasure lv{n, b.current(), out.certified};
    GarsiaRow row;
    row.n = n;
    row.exact = lv.entropy();
    row.h = row.exact.value();
    row.h_per_n = row.h / n;
    row.atoms = lv.level.atoms.size();
    out.ambiguous += lv.level.ambiguous;
    if (row.h_per_n < out.upper) {
      out.upper = row.h_per_n;
      out.argmin = n;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline GarsiaBracket garsia_entropy_bracket(const IFSSpec& ifs, std::vector<int> ns) {
  return garsia_entropy_bracket(ifs, std::move(ns), ifs::default_collapse(ifs));
}

/// H(floor(X / r + t)) averaged over t in [0, 1), by sweeping the breakpoints.
/// Positions must be real balls; each radius has to be small against r.
inline Estimate entropy_at_scale(const std::vector<Ball>& x, const std::vector<double>& p, double r) {
  if (!(r > 0)) throw ValidationError("scale must be positive", "/params/r");
  if (x.empty() || x.size() != p.size()) throw ValidationError("positions and weights differ in length");
  const std::size_t n = x.size();
  struct Pt {
    std::int64_t base;
    long double frac;
    long double w;
  };
  std::vector<Pt> pts(n);
  long double width = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double y = static_cast<long double>(x[i].mid().to_double()) / r;
    long double rel = static_cast<long double>(x[i].rad().to_double()) / r;
    if (rel > 1e-9L) throw AmbiguousBreakpoint("atom enclosure too wide for scale r");
    width += rel;
    long double b = std::floor(y);
    if (std::fabs(b) > 9e15L) throw ValidationError("positions too large for the scale");
    pts[i] = {static_cast<std::int64_t>(b), y - b, p[i]};
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (pts[i].frac > 0) order.push_back(i);
  // Atom i moves up one bucket at t = 1 - frac_i.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].frac != pts[b].frac ? pts[a].frac > pts[b].frac : a < b;
  });
  std::unordered_map<std::int64_t, long double> mass;
  for (const auto& q : pts) mass[q.base] += q.w;
  auto term = [](long double w) { return w > 0 ? -w * std::log(w) : 0.0L; };
  long double s = 0;
  for (const auto& [k, w] : mass) s += term(w);
  long double acc = 0, prev = 0;
  for (std::size_t i : order) {
    long double t = 1 - pts[i].frac;
    acc += (t - prev) * s;
    prev = t;
    long double& from = mass[pts[i].base];
    long double& to = mass[pts[i].base + 1];
    s -= term(from) + term(to);
    from -= pts[i].w;
    to += pts[i].w;
    if (from < 1e-300L) from = 0;
    s += term(from) + term(to);
  }
  acc += (1 - prev) * s;
  const long double log_n = std::log(static_cast<long double>(n) + 1);
  double err = static_cast<double>(2 * width * log_n + 1e-15L * static_cast<long double>(n) * (1 + log_n));
  return {static_cast<double>(acc), err};
}

inline Estimate entropy_at_scale(const AtomicDistribution& d, double r) {
  d.validate();
  if (!d.is_real()) throw ValidationError("entropy at scale needs real atoms");
  std::vector<Ball> x;
  for (const auto& z : d.positions) x.push_back(z.real());
  return entropy_at_scale(x, d.weights_double(), r);
}

inline Estimate level_entropy_at_scale(const IFSSpec& ifs, int n, double r, const CollapseOptions& opts) {
  LevelNMeasure lv = level_n_atoms(ifs, n, opts);
  std::vector<Ball> x;
  std::vector<double> p;
  for (const auto& a : lv.level.atoms) {
    x.push_back(a.value);
    p.push_back(a.weight.get_d());
  }
  return entropy_at_scale(x, p, r);
}

inline Estimate level_entropy_at_scale(const IFSSpec& ifs, int n, double r) {
  return level_entropy_at_scale(ifs, n, r, ifs::default_collapse(ifs));
}

struct DimensionBracket {
  double upper_dim = 1;      // min(1, min_n (H_n/n) / -log|lambda|)
  double natural_upper = 1;  // min(1, H(p) / -log|lambda|)
  double lyapunov = 0;       // -log|lambda|
  double garsia_upper = 0;   // min_n H_n / n
  int n_max = 0;
  bool overlap = false;
  std::optional<ifs::OverlapWitness> witness;
  /// upper_dim < 1 certified from the exact entropy and an enclosure of log|lambda|.
  bool certified_below_one = false;
  GarsiaBracket garsia;
};

inline DimensionBracket dimension_bracket(const IFSSpec& ifs, int n_max = 20) {
  if (!ifs.certified()) throw ValidationError("dimension bracket needs an exact contraction ratio", "/lambda");
  if (n_max < 1) throw ValidationError("n_max must be at least 1", "/params/n");
  DimensionBracket d;
  d.n_max = n_max;
  Ball lam = numerics::abs(ifs.lambda().enclosure(96, ifs.precision()));
  const long double lo = static_cast<long double>(lam.lower().to_double());
  const long double hi = static_cast<long double>(lam.upper().to_double());
  d.lyapunov = -std::log(lam.mid().to_double());
  std::vector<int> ns;
  for (int n = 1; n <= n_max; ++n) ns.push_back(n);
  d.garsia = garsia_entropy_bracket(ifs, ns);
  d.garsia_upper = d.garsia.upper;
  std::vector<mpq_class> probs = ifs.probs();
  double hp = shannon_exact(probs).value();
  d.natural_upper = std::min(1.0, hp / d.lyapunov);
  d.upper_dim = std::min(1.0, d.garsia_upper / d.lyapunov);
  d.witness = d.garsia.first_overlap;
  d.overlap = d.witness.has_value();
  // H_n/n < -log|lambda| with margins covering both roundings.
  const auto& row = d.garsia.rows[static_cast<std::size_t>(d.garsia.argmin - 1)];
  long double h_hi = (static_cast<long double>(row.h) + row.exact.error()) / row.n * (1 + 1e-15L);
  long double chi_lo = -std::log(hi) * (1 - 1e-15L);
  d.certified_below_one = h_hi < chi_lo && lo > 0;
  return d;
}

}  // namespace selfsim::entropy
