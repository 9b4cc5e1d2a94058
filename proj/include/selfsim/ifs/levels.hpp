#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/algebra/zero_test.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs/ifs_spec.hpp"
#include "selfsim/numerics/ball.hpp"

namespace selfsim::ifs {

enum class Collapse { Certified, Numeric };

struct CollapseOptions {
  Collapse mode = Collapse::Certified;
  double tol = 1e-12;          // numeric mode: merge atoms closer than this
  bool track_weights = true;   // keep exact rational weights
  bool strict = false;         // numeric mode: throw AmbiguousCollapse instead of counting
  std::size_t max_atoms = std::size_t{1} << 26;
};

/// Default policy: certified for an exact ratio, numeric otherwise.
inline CollapseOptions default_collapse(const IFSSpec& ifs) {
  CollapseOptions o;
  o.mode = ifs.certified() ? Collapse::Certified : Collapse::Numeric;
  return o;
}

/// One atom of the level-n distribution. `word` is the lexicographically least
/// word reaching it, coded in base m with j_1 most significant (letters 0-based).
struct Atom {
  Ball value;
  std::uint64_t word = 0;
  mpq_class weight;
};

struct Level {
  int n = 0;
  std::vector<Atom> atoms;  // sorted by value
  std::size_t raw_count = 0;
  std::size_t merges = 0;     // raw atoms absorbed at this level
  std::size_t ambiguous = 0;  // numeric mode: unresolved neighbour pairs
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ambiguous_pairs;
  /// Least colliding word pair at this level, if any.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> witness;
  std::int64_t precision = 0;
};

/// Decodes a word code into 1-based letters.
inline std::vector<int> decode_word(std::uint64_t code, std::size_t m, int n) {
  std::vector<int> w(static_cast<std::size_t>(n));
  for (int i = n; i-- > 0;) {
    w[static_cast<std::size_t>(i)] = static_cast<int>(code % m) + 1;
    code /= m;
  }
  return w;
}

inline std::string word_to_string(const std::vector<int>& w) {
  std::string s;
  for (int j : w) s += (s.empty() ? "" : ",") + std::to_string(j);
  return "(" + s + ")";
}

/// Builds level n+1 from level n by t_j + lambda * atom, collapsing equal atoms.
class LevelBuilder {
 public:
  LevelBuilder(const IFSSpec& ifs, CollapseOptions opts = {})
      : ifs_(ifs), opts_(opts), ds_(difference_set(ifs)), l1_(ds_.max_scaled_l1()) {
    if (opts_.mode == Collapse::Certified && !ifs_.certified())
      throw ValidationError("certified collapse needs an exact contraction ratio", "/lambda");
    level_.n = 0;
    level_.atoms.push_back({Ball(), 0, mpq_class(1)});
  }

  const Level& current() const { return level_; }
  const IFSSpec& ifs() const { return ifs_; }

  /// Any nonzero difference of two level-n atoms exceeds 2^-bits.
  std::int64_t separation_bits(int n) const {
    if (l1_ == 0) return 0;
    double log2_l1 = algebra::log2_upper(l1_) + std::log2(static_cast<double>(n));
    std::int64_t b = algebra::nonzero_bits(log2_l1, n - 1, ifs_.field(), ifs_.lambda().algebraic());
    return b + static_cast<std::int64_t>(algebra::log2_upper(ds_.denominator())) + 1;
  }

  void advance() {
    const int n = level_.n + 1;
    const std::size_t m = ifs_.m();
    double code_bits = static_cast<double>(n) * std::log2(static_cast<double>(m));
    if (code_bits >= 63.0) throw BudgetExceeded("word codes exceed 64 bits at level " + std::to_string(n));
    const std::size_t raw = level_.atoms.size() * m;
    if (raw > opts_.max_atoms)
      throw BudgetExceeded("level " + std::to_string(n) + " needs " + std::to_string(raw) + " atoms (cap " +
                           std::to_string(opts_.max_atoms) + ")");
    std::uint64_t place = 1;
    for (int i = 1; i < n; ++i) place *= m;

    Level next;
    next.n = n;
    next.raw_count = raw;
    std::int64_t sep_bits = opts_.mode == Collapse::Certified ? separation_bits(n) : 0;
    Dyadic threshold = Dyadic::pow2(-sep_bits - 1);
    Dyadic max_rad = threshold.mul_2exp(-2);
    std::int64_t p = opts_.mode == Collapse::Certified ? sep_bits + 48 + 2 * static_cast<std::int64_t>(std::log2(n + 1.0))
                                                       : ifs_.precision().working_bits;
    p = std::max(p, level_.precision);
    bool fresh = false;
    bool reversed = false;

    for (;;) {
      next.atoms.clear();
      next.atoms.reserve(raw);
      Ball lam = ifs_.lambda().enclosure(p, ifs_.precision());
      reversed = lam.mid().sign() < 0;
      std::vector<Ball> tv;
      for (std::size_t j = 0; j < m; ++j) tv.push_back(ifs_.translation_value(j, p));
      for (std::size_t j = 0; j < m; ++j) {
        for (const auto& a : level_.atoms) {
          Atom b;
          b.word = j * place + a.word;
          b.value = fresh ? value_of(b.word, n, lam, tv, p) : add(tv[j], mul(lam, a.value, p), p);
          if (opts_.track_weights) b.weight = ifs_.probs()[j] * a.weight;
          next.atoms.push_back(std::move(b));
        }
      }
      if (opts_.mode == Collapse::Numeric) break;
      bool tight = std::all_of(next.atoms.begin(), next.atoms.end(),
                               [&](const Atom& x) { return cmp(x.value.rad(), max_rad) <= 0; });
      if (tight) break;
      if (p > 4 * ifs_.precision().max_bits) throw NoConvergence("atom enclosures too wide at level " + std::to_string(n));
      // Recompute from the words with headroom so later levels can extend incrementally.
      p *= 2;
      fresh = level_.n > 0;
    }
    next.precision = p;
    sort_blocks(next.atoms, m, reversed);
    collapse(next, threshold);
    level_ = std::move(next);
  }

  void advance_to(int n) {
    while (level_.n < n) advance();
  }

 private:
  Ball value_of(std::uint64_t code, int n, const Ball& lam, const std::vector<Ball>& tv, std::int64_t p) const {
    const std::size_t m = ifs_.m();
    std::vector<std::size_t> letters(static_cast<std::size_t>(n));
    for (int i = n; i-- > 0;) {
      letters[static_cast<std::size_t>(i)] = static_cast<std::size_t>(code % m);
      code /= m;
    }
    Ball acc = tv[letters.back()];
    for (std::size_t i = letters.size() - 1; i-- > 0;) acc = add(tv[letters[i]], mul(lam, acc, p), p);
    return acc;
  }

  static bool atom_less(const Atom& a, const Atom& b) {
    int c = cmp(a.value.mid(), b.value.mid());
    return c != 0 ? c < 0 : a.word < b.word;
  }

  /// Each of the m blocks is an affine image of the sorted previous level, so
  /// it is sorted (reversed for negative ratio) and a merge suffices.
  static void sort_blocks(std::vector<Atom>& atoms, std::size_t m, bool reversed) {
    const std::size_t len = atoms.size() / m;
    bool ok = true;
    for (std::size_t j = 0; j < m && ok; ++j) {
      auto first = atoms.begin() + static_cast<std::ptrdiff_t>(j * len);
      auto last = first + static_cast<std::ptrdiff_t>(len);
      if (reversed) std::reverse(first, last);
      ok = std::is_sorted(first, last, atom_less);
    }
    if (!ok) {
      std::sort(atoms.begin(), atoms.end(), atom_less);
      return;
    }
    for (std::size_t width = len; width < atoms.size(); width *= 2)
      for (std::size_t lo = 0; lo + width < atoms.size(); lo += 2 * width) {
        auto mid = atoms.begin() + static_cast<std::ptrdiff_t>(lo + width);
        auto hi = atoms.begin() + static_cast<std::ptrdiff_t>(std::min(lo + 2 * width, atoms.size()));
        std::inplace_merge(atoms.begin() + static_cast<std::ptrdiff_t>(lo), mid, hi, atom_less);
      }
  }

  /// Merges runs of equal atoms in a sorted vector.
  void collapse(Level& lv, const Dyadic& threshold) const {
    std::vector<Atom> out;
    out.reserve(lv.atoms.size());
    std::optional<std::pair<std::uint64_t, std::uint64_t>> best;
    const Dyadic tol = opts_.mode == Collapse::Numeric ? Dyadic::from_double(opts_.tol) : Dyadic();
    std::uint64_t run_min = 0, run_second = 0;
    bool run_has_second = false;
    auto close_run = [&]() {
      if (run_has_second) {
        std::pair<std::uint64_t, std::uint64_t> w{run_min, run_second};
        if (!best || w < *best) best = w;
      }
    };
    for (auto& a : lv.atoms) {
      if (!out.empty()) {
        Atom& last = out.back();
        Dyadic gap = (a.value.mid() - last.value.mid()).abs();
        Dyadic rads = a.value.rad() + last.value.rad();
        bool equal = false;
        if (opts_.mode == Collapse::Certified) {
          if (cmp(gap + rads, threshold) < 0) {
            equal = true;
          } else if (cmp(gap, rads) <= 0) {
            throw NoConvergence("atoms neither certified equal nor distinct");
          }
        } else {
          if (cmp(gap + rads, tol) <= 0) {
            equal = true;
          } else if (cmp(gap - rads, tol) <= 0) {
            ++lv.ambiguous;
            if (lv.ambiguous_pairs.size() < 64) lv.ambiguous_pairs.emplace_back(last.word, a.word);
            if (opts_.strict) throw AmbiguousCollapse("atoms within tolerance band at level " + std::to_string(lv.n));
          }
        }
        if (equal) {
          ++lv.merges;
          if (a.word < last.word) {
            run_second = run_has_second ? std::min(run_second, last.word) : last.word;
            run_min = a.word;
            last.word = a.word;
          } else {
            run_second = run_has_second ? std::min(run_second, a.word) : a.word;
          }
          run_has_second = true;
          if (opts_.track_weights) last.weight += a.weight;
          continue;
        }
      }
      close_run();
      run_min = a.word;
      run_has_second = false;
      out.push_back(std::move(a));
    }
    close_run();
    lv.atoms = std::move(out);
    lv.witness = best;
  }

  const IFSSpec& ifs_;
  CollapseOptions opts_;
  DifferenceSet ds_;
  mpz_class l1_;
  Level level_;
};

struct OverlapWitness {
  int n = 0;
  std::vector<int> word1;
  std::vector<int> word2;
};

/// The least n <= n_max with two distinct words of length n giving the same
/// map, together with the lexicographically least such pair.
inline std::optional<OverlapWitness> detect_exact_overlaps(const IFSSpec& ifs, int n_max,
                                                           std::size_t max_atoms = std::size_t{1} << 26) {
  if (!ifs.certified()) throw ValidationError("overlap detection needs an exact contraction ratio", "/lambda");
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  if (ifs.m() == 1) return std::nullopt;
  CollapseOptions opts;
  opts.track_weights = false;
  opts.max_atoms = max_atoms;
  LevelBuilder b(ifs, opts);
  for (int n = 1; n <= n_max; ++n) {
    b.advance();
    const auto& lv = b.current();
    if (lv.witness) {
      OverlapWitness w{n, decode_word(lv.witness->first, ifs.m(), n), decode_word(lv.witness->second, ifs.m(), n)};
      if (!same_map(ifs, w.word1, w.word2)) throw Error("overlap witness failed the exact check");
      return w;
    }
  }
  return std::nullopt;
}

}  // namespace selfsim::ifs
