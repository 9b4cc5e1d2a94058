// Acceptance driver: `acceptance [--criterion N]` prints one PASS/FAIL line per criterion.

#include <Eigen/QR>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/algebra/zero_test.hpp"
#include "selfsim/entropy/garsia.hpp"
#include "selfsim/entropy/lb_phi.hpp"
#include "selfsim/entropy/smoothed.hpp"
#include "selfsim/ifs/levels.hpp"
#include "selfsim/ifs/roots_near.hpp"
#include "selfsim/ifs/separation.hpp"

using namespace selfsim;
using algebra::AlgebraicNumber;
using algebra::FieldElement;
using algebra::IntPolynomial;
using algebra::NumberField;
using algebra::Verdict;
using entropy::PointMasses;
using entropy::SmoothingOptions;
using ifs::IFSSpec;
using ifs::RealParameter;
using numerics::Ball;
using numerics::ComplexBall;
using numerics::Dyadic;

namespace {

const double kLog2 = std::numbers::ln2;

struct Result {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

AlgebraicNumber golden() {
  return AlgebraicNumber(IntPolynomial{-1, 1, 1}, ComplexBall(Dyadic::from_double(0.618), {}, Dyadic::from_double(0.01)));
}

IFSSpec make_ifs(RealParameter lam, const std::vector<mpq_class>& t) {
  std::vector<FieldElement> tr;
  for (const auto& q : t) tr.push_back(FieldElement::rational(q, 1));
  std::vector<mpq_class> p(t.size(), mpq_class(1, static_cast<long>(t.size())));
  return IFSSpec(NumberField(), std::move(lam), tr, p);
}

IntPolynomial random_poly(std::mt19937_64& g, int deg_max, long c_max) {
  std::uniform_int_distribution<int> dd(1, deg_max);
  std::uniform_int_distribution<long> cc(-c_max, c_max);
  int d = dd(g);
  std::vector<mpz_class> c;
  for (int i = 0; i < d; ++i) c.emplace_back(cc(g));
  long lead = 0;
  while (lead == 0) lead = cc(g);
  c.emplace_back(lead);
  return IntPolynomial(c);
}

// ---------------------------------------------------------------------------

Result golden_collision() {
  Result r;
  Stopwatch sw;
  auto ifs = make_ifs(RealParameter::exact(golden()), {0, 1});
  auto w = ifs::detect_exact_overlaps(ifs, 10);
  r.require(w && w->n == 3, "overlap level is not 3");
  if (w) {
    for (const auto* word : {&w->word1, &w->word2}) {
      // sum_k lambda^k t_{w_k} - 1 must vanish at lambda.
      std::vector<mpz_class> c{-1};
      for (std::size_t k = 0; k < word->size(); ++k) {
        mpq_class t = ifs.translations()[static_cast<std::size_t>((*word)[k] - 1)].rational_value();
        if (k == 0) c[0] += t.get_num();
        else c.push_back(t.get_num());
      }
      IntPolynomial diff(c);
      r.require(diff.is_zero() || algebra::certified_is_zero(diff, ifs.lambda().algebraic()), "witness translation is not 1");
    }
  }
  auto lv = entropy::level_n_atoms(ifs, 3);
  r.require(lv.level.atoms.size() == 7, "level 3 does not have 7 atoms");
  auto h = lv.entropy();
  r.require(h.terms().size() == 1 && h.terms().count(2) && h.terms().at(2) == mpq_class(11, 4), "H_3 != 11/4 log 2");
  r.require(h.error() == 0 || std::fabs(h.value() - 2.75 * kLog2) < 1e-15, "H_3 value");
  r.require(sw.seconds() < 5, "runtime exceeds 5 s");
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(sw.seconds()) + " s";
  return r;
}

Result dyadic_no_overlap() {
  Result r;
  Stopwatch sw;
  auto ifs = make_ifs(RealParameter::rational(mpq_class(1, 2)), {0, 1});
  r.require(!ifs::detect_exact_overlaps(ifs, 20), "overlap found up to n = 20");
  std::vector<int> ns;
  for (int n = 1; n <= 16; ++n) ns.push_back(n);
  auto br = entropy::garsia_entropy_bracket(ifs, ns);
  for (const auto& row : br.rows) {
    bool ok = row.exact.terms().size() == 1 && row.exact.terms().count(2) && row.exact.terms().at(2) == row.n;
    r.require(ok, "H_" + std::to_string(row.n) + " != n log 2");
  }
  for (int n = 1; n <= 12; ++n) {
    auto d = ifs::delta_n(ifs, n);
    r.require(d.certified && d.delta.contains(Dyadic::pow2(1 - n)), "Delta_" + std::to_string(n) + " misses 2^(1-n)");
    r.require(d.delta.rad().to_double() * 2 < 1e-12, "Delta_" + std::to_string(n) + " ball too wide");
    if (n <= 10) {
      // Exhaustive: every pair of words, exact rationals.
      std::vector<mpq_class> v{0};
      mpq_class pw(1);
      for (int k = 0; k < n; ++k, pw /= 2) {
        std::vector<mpq_class> next;
        for (const auto& x : v) next.insert(next.end(), {x, x + pw});
        v = std::move(next);
      }
      std::optional<mpq_class> best;
      bool coincide = false;
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          mpq_class gap = abs(v[i] - v[j]);
          if (gap == 0) coincide = true;
          else if (!best || gap < *best) best = gap;
        }
      bool match = best && d.overlap == coincide && abs(d.delta.mid().to_rational() - *best) <= d.delta.rad().to_rational();
      r.require(match, "meet-in-the-middle differs from exhaustive at n = " + std::to_string(n));
    }
  }
  r.require(sw.seconds() < 60, "runtime exceeds 60 s");
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(sw.seconds()) + " s";
  return r;
}

Result mahler_suite() {
  Result r;
  Stopwatch sw;
  Ball m = algebra::mahler_measure(IntPolynomial{-1, -1, 1});
  r.require(cmp(m.lower(), Dyadic::from_double(1.618033)) >= 0 && cmp(m.upper(), Dyadic::from_double(1.618035)) <= 0,
            "M(X^2 - X - 1) outside [1.618033, 1.618035]");
  std::mt19937_64 g(2024);
  std::size_t unknown = 0;
  for (int t = 0; t < 1000; ++t) {
    auto rep = algebra::check_norm_bounds(random_poly(g, 20, 100));
    r.require(!rep.any_violation(), "norm bound violated");
    if (!rep.all_hold()) ++unknown;
  }
  for (int t = 0; t < 200; ++t) {
    IntPolynomial f = random_poly(g, 10, 100), h = random_poly(g, 10, 100);
    Ball prod = mul(algebra::mahler_measure(f), algebra::mahler_measure(h), 128);
    r.require(prod.overlaps(algebra::mahler_measure(f * h)), "M(fg) != M(f) M(g)");
  }
  r.require(sw.seconds() < 120, "runtime exceeds 120 s");
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(unknown) + " undecided norm checks, " + std::to_string(sw.seconds()) + " s";
  return r;
}

Result root_separation() {
  Result r;
  std::size_t pairs = 0;
  for (int n = 4; n <= 8; ++n)
    for (long a : {1L, 5L, 10L}) {
      auto rep = ifs::mahler_separation_check(n, a, 200, static_cast<std::uint64_t>(100 * n + a));
      r.require(rep.root_pairs >= 200, "fewer than 200 root pairs for n = " + std::to_string(n));
      r.require(rep.violations == 0 && rep.undecided == 0,
                "integer bound fails for n = " + std::to_string(n) + ", a = " + std::to_string(a));
      pairs += rep.root_pairs;
    }
  auto ds = ifs::difference_set(make_ifs(RealParameter::rational(mpq_class(1, 2)), {0, 1}));
  auto fam = ifs::separation_check(ds, 8, 200, 8);
  r.require(fam.violations == 0, "family bound violated");
  r.require(fam.root_pairs > 0, "no family root pairs examined");
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(pairs) + " integer root pairs, " + std::to_string(fam.root_pairs) +
            " family root pairs";
  return r;
}

Result zero_totality() {
  Result r;
  std::vector<AlgebraicNumber> alphas{golden(), AlgebraicNumber::rational(mpq_class(2, 3))};
  for (const auto& p : {IntPolynomial{-2, 0, 0, 1}, IntPolynomial{-1, -1, 0, 0, 1}, IntPolynomial{1, 1, 1}})
    for (auto& a : AlgebraicNumber::conjugates(p)) alphas.push_back(a);
  std::mt19937_64 g(77);
  std::uniform_int_distribution<int> sign(0, 1);
  int cases = 0, wrong = 0;
  for (int t = 0; cases < 500; ++t) {
    const auto& alpha = alphas[static_cast<std::size_t>(t) % alphas.size()];
    IntPolynomial f = alpha.minpoly() * random_poly(g, 6, 20);
    bool perturb = t % 2 == 1;
    if (perturb) {
      auto c = f.coeffs();
      std::uniform_int_distribution<std::size_t> pos(0, c.size() - 1);
      c[pos(g)] += sign(g) ? 1 : -1;
      f = IntPolynomial(c);
      if (f.is_zero()) continue;
    }
    const bool truth = algebra::divides(alpha.minpoly(), f);
    try {
      if (algebra::certified_is_zero(f, alpha) != truth) ++wrong;
    } catch (const Error&) {
      ++wrong;
    }
    ++cases;
  }
  r.require(wrong == 0, std::to_string(wrong) + " wrong or undecided answers");
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(cases) + " cases";
  return r;
}

Result hat_algebra() {
  Result r;
  std::mt19937_64 g(5);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> dim(1, 4);
  auto random_c = [&](int d) {
    Eigen::MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = {n01(g), n01(g)};
    return m;
  };
  const double tol = 1e-12;
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = dim(g);
    Eigen::MatrixXcd a = random_c(d), b = random_c(d);
    const double alpha = n01(g);
    const std::complex<double> z(n01(g), n01(g));
    Eigen::MatrixXd zh = entropy::hat(z * Eigen::MatrixXcd::Identity(d, d));
    const double scale = 1 + a.norm() * b.norm();
    double errs[] = {
        (entropy::hat(a * b) - entropy::hat(a) * entropy::hat(b)).norm() / scale,
        (entropy::hat(alpha * a + b) - alpha * entropy::hat(a) - entropy::hat(b)).norm() / scale,
        (zh * entropy::hat(b) - entropy::hat(z * b)).norm() / scale,
        (entropy::hat(b) * zh - entropy::hat(z * b)).norm() / scale,
        std::fabs(entropy::operator_norm(entropy::hat(a)) - entropy::operator_norm(a)) / (1 + a.norm()),
    };
    for (double e : errs) worst = std::max(worst, e);
  }
  r.require(worst <= tol, "homomorphism identities off by " + std::to_string(worst));
  double worst_u = 0;
  for (int t = 0; t < 50; ++t) {
    const int d = dim(g);
    Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_c(d)).householderQ();
    Eigen::MatrixXd h = entropy::hat(u);
    worst_u = std::max(worst_u, (h.transpose() * h - Eigen::MatrixXd::Identity(2 * d, 2 * d)).cwiseAbs().maxCoeff());
  }
  r.require(worst_u <= tol, "hat of a unitary is not orthogonal");
  std::ostringstream s;
  s << "max relative error " << worst << ", orthogonality " << worst_u;
  r.note += (r.note.empty() ? "" : "; ") + s.str();
  return r;
}

PointMasses random_masses(std::mt19937_64& g, int n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread), w(0.05, 1);
  PointMasses m;
  m.points.resize(2, n);
  m.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    m.points.col(j) << u(g), u(g);
    m.weights(j) = w(g);
  }
  m.weights /= m.weights.sum();
  return m;
}

PointMasses convolve(const PointMasses& x, const PointMasses& y) {
  PointMasses s;
  s.points.resize(2, x.size() * y.size());
  s.weights.resize(x.size() * y.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j, ++k) {
      s.points.col(k) = x.points.col(i) + y.points.col(j);
      s.weights(k) = x.weights(i) * y.weights(j);
    }
  return s;
}

Eigen::MatrixXd random_kernel(std::mt19937_64& g, double smin, double smax) {
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), sv(smin, smax);
  auto rot = [](double th) {
    Eigen::Matrix2d m;
    m << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return m;
  };
  Eigen::Matrix2d s = Eigen::Vector2d(sv(g), sv(g)).asDiagonal();
  return rot(ang(g)) * s * rot(ang(g));
}

Result smoothed_inequalities() {
  Result r;
  std::mt19937_64 g(99);
  std::uniform_int_distribution<int> nx(1, 4), ny(1, 2), kk(0, 3);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  const SmoothingOptions o;
  const double budget = 1e-4;
  double worst_err = 0;
  auto est = [&](const PointMasses& x, const Eigen::MatrixXd& b) {
    auto e = entropy::smoothed_entropy(x, b, o);
    worst_err = std::max(worst_err, e.error);
    return e;
  };
  int fails[4] = {0, 0, 0, 0};
  for (int t = 0; t < 50; ++t) {
    // Subadditivity.
    auto x = random_masses(g, nx(g), 3), y = random_masses(g, ny(g), 3);
    Eigen::MatrixXd b = random_kernel(g, 0.3, 2);
    auto sxy = est(convolve(x, y), b), sx = est(x, b), sy = est(y, b);
    if (sxy.value > sx.value + sy.value + sxy.error + sx.error + sy.error) ++fails[0];
  }
  for (int t = 0; t < 50; ++t) {
    // Rotation invariance.
    auto x = random_masses(g, 2 + t % 7, 3);
    Eigen::MatrixXd b = random_kernel(g, 0.3, 2);
    Eigen::Matrix2d o2;
    const double th = ang(g);
    o2 << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    if (t % 2) o2.col(1) *= -1;  // reflections too
    auto e1 = est(x, b), e2 = est(x, b * o2);
    if (std::fabs(e1.value - e2.value) > e1.error + e2.error) ++fails[1];
  }
  for (int t = 0; t < 50; ++t) {
    // Conditional entropy grows under convolution, ||B|| <= 1.
    auto x = random_masses(g, nx(g), 3), y = random_masses(g, ny(g), 3);
    Eigen::MatrixXd b = random_kernel(g, 0.5, 1);
    const int k = kk(g);
    Eigen::MatrixXd bk = Eigen::MatrixXd::Identity(2, 2);
    for (int i = 0; i < k; ++i) bk = bk * b;
    Eigen::MatrixXd bk1 = bk * b;
    auto xy = convolve(x, y);
    auto a1 = est(xy, bk1), a2 = est(xy, bk), c1 = est(x, bk1), c2 = est(x, bk);
    double lhs = a1.value - a2.value, rhs = c1.value - c2.value;
    if (lhs < rhs - (a1.error + a2.error + c1.error + c2.error)) ++fails[2];
  }
  for (int t = 0; t < 50; ++t) {
    // Shannon entropy dominates.
    auto x = random_masses(g, 1 + t % 8, 3);
    auto e = est(x, random_kernel(g, 0.1, 3));
    std::vector<double> w(x.weights.data(), x.weights.data() + x.weights.size());
    if (entropy::shannon(w) < e.value - e.error) ++fails[3];
  }
  const char* names[] = {"subadditivity", "rotation invariance", "conditional monotonicity", "Shannon bound"};
  for (int i = 0; i < 4; ++i) r.require(fails[i] == 0, std::string(names[i]) + " fails on " + std::to_string(fails[i]) + " instances");
  r.require(worst_err <= budget, "error estimate above 1e-4");
  std::ostringstream s;
  s << "largest term error " << worst_err;
  r.note += (r.note.empty() ? "" : "; ") + s.str();
  return r;
}

Result phi_behaviour() {
  Result r;
  Stopwatch sw;
  auto nu = entropy::AtomicDistribution::real({0, 1}, {mpq_class(1, 2), mpq_class(1, 2)});
  std::vector<entropy::PhiEstimate> e;
  for (int j = 0; j <= 10; ++j) e.push_back(entropy::phi_nu(nu, std::ldexp(1.0, j)));
  r.require(e[0].value == 0.0, "Phi(1) is not exactly 0");
  for (std::size_t j = 1; j < e.size(); ++j)
    r.require(e[j].value >= e[j - 1].value - e[j].error - e[j - 1].error, "Phi decreases at j = " + std::to_string(j));
  r.require(e[10].value >= 0.9 * kLog2, "Phi(2^10) below 0.9 log 2");
  r.require(sw.seconds() < 600, "runtime exceeds 10 min");
  std::ostringstream s;
  s << "Phi(2^10) = " << e[10].value << ", " << sw.seconds() << " s";
  r.note += (r.note.empty() ? "" : "; ") + s.str();
  return r;
}

Result lb_phi_consistency() {
  Result r;
  std::vector<std::pair<std::string, AlgebraicNumber>> etas{{"1/2", AlgebraicNumber::rational(mpq_class(1, 2))},
                                                            {"2/3", AlgebraicNumber::rational(mpq_class(2, 3))},
                                                            {"golden", golden()}};
  std::ostringstream s;
  for (const auto& [name, eta] : etas) {
    auto rep = entropy::lb_phi_check(eta, {0, 1}, {mpq_class(1, 2), mpq_class(1, 2)});
    r.require(rep.consistent, "inconsistent for " + name);
    s << name << ": " << rep.upper << " vs " << rep.phi.value << "  ";
  }
  r.note += (r.note.empty() ? "" : "; ") + s.str();
  return r;
}

Result dimension_checks() {
  Result r;
  auto half = entropy::dimension_bracket(make_ifs(RealParameter::rational(mpq_class(1, 2)), {0, 1}), 20);
  r.require(half.upper_dim == 1.0, "lambda = 1/2 does not give 1");
  auto third = entropy::dimension_bracket(make_ifs(RealParameter::rational(mpq_class(1, 3)), {0, 1}), 20);
  r.require(std::fabs(third.upper_dim - std::log(2.0) / std::log(3.0)) <= 1e-9, "lambda = 1/3 misses log 2 / log 3");
  auto gold = entropy::dimension_bracket(make_ifs(RealParameter::exact(golden()), {0, 1}), 20);
  r.require(gold.overlap, "golden overlap not flagged");
  std::ostringstream s;
  s << "golden: H_n/n min " << gold.garsia_upper << " at n = " << gold.garsia.argmin << ", -log lambda " << gold.lyapunov;
  r.require(gold.upper_dim < 1.0 && gold.certified_below_one, "golden upper_dim not certified below 1 (" + s.str() + ")");
  return r;
}

Result entropy_at_scale_exactness() {
  Result r;
  std::mt19937_64 g(314);
  std::uniform_real_distribution<double> pos(-3, 3), scale(0.02, 2);
  std::uniform_int_distribution<int> count(1, 12);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = count(g);
    std::vector<double> x(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    std::vector<Ball> xb;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = pos(g);
      xb.emplace_back(Dyadic::from_double(x[static_cast<std::size_t>(i)]));
      sum += (p[static_cast<std::size_t>(i)] = 0.05 + pos(g) + 3);
    }
    for (auto& v : p) v /= sum;
    const double rr = scale(g);
    double fast = entropy::entropy_at_scale(xb, p, rr).value;
    const int samples = 100000;
    long double acc = 0;
    for (int s = 0; s < samples; ++s) {
      const double tt = (s + 0.5) / samples;
      std::map<long long, double> mass;
      for (int i = 0; i < n; ++i)
        mass[static_cast<long long>(std::floor(x[static_cast<std::size_t>(i)] / rr + tt))] += p[static_cast<std::size_t>(i)];
      std::vector<double> w;
      for (const auto& [k, v] : mass) w.push_back(v);
      acc += entropy::shannon(w);
    }
    worst = std::max(worst, std::fabs(fast - static_cast<double>(acc / samples)));
  }
  r.require(worst <= 1e-4, "sweep differs from the Riemann estimate by " + std::to_string(worst));
  r.require(entropy::entropy_at_scale({Ball(Dyadic::from_double(0.77))}, {1.0}, 0.1).value == 0.0, "single atom not 0");
  std::ostringstream s;
  s << "max deviation " << worst;
  r.note += (r.note.empty() ? "" : "; ") + s.str();
  return r;
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return out;
  std::array<char, 4096> buf{};
  std::size_t k;
  while ((k = std::fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), k);
  pclose(f);
  return out;
}

std::string strip_timestamp(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

Result cli_determinism() {
  Result r;
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("selfsim_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string exe = SELFSIM_EXE;
  const std::string samples = SELFSIM_SAMPLES_DIR;
  const std::string half = R"("ifs": {"lambda": {"rational": "1/2"}, "translations": ["0", "1"]})";
  std::map<std::string, std::string> configs{
      {"phi_mc", R"({"command": "phi", )" + half +
                     R"(, "params": {"a": ["2", "8"], "method": "montecarlo", "samples": 20000}, "seed": 17})"},
      {"scale", R"({"command": "scale-entropy", )" + half + R"(, "params": {"n": 6, "r": "1/10"}})"},
      {"near", R"({"command": "near-overlap", "ifs": {"lambda": {"decimal": "0.61"}, "translations": ["0", "1"]},)"
               R"( "params": {"n": 8, "r": "0.001"}})"},
  };
  std::vector<std::string> runs;
  for (const auto& [name, text] : configs) {
    std::ofstream(dir / (name + ".json")) << text;
    runs.push_back(exe + " " + (name == "phi_mc" ? "phi" : name == "scale" ? "scale-entropy" : "near-overlap") +
                   " --config " + (dir / (name + ".json")).string());
  }
  runs.push_back(exe + " sweep --config " + samples + "/sweep_delta8.json --threads 8");
  runs.push_back(exe + " overlap --config " + samples + "/golden.json");
  runs.push_back(exe + " garsia --config " + samples + "/third.json --format csv");
  runs.push_back(exe + " dim --config " + samples + "/dyadic.json --seed 3");
  for (const auto& cmd : runs) {
    std::string a = strip_timestamp(capture(cmd + " 2>&1")), b = strip_timestamp(capture(cmd + " 2>&1"));
    r.require(!a.empty() && a == b, "outputs differ: " + cmd);
    r.require(a.find("\"error\": {") == std::string::npos, "run failed: " + cmd);
  }
  // --output writes the same bytes as stdout.
  const std::string file = (dir / "out.json").string();
  capture(runs[0] + " --output " + file);
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.require(strip_timestamp(ss.str()) == strip_timestamp(capture(runs[0])), "--output differs from stdout");
  fs::remove_all(dir);
  r.note += (r.note.empty() ? "" : "; ") + std::to_string(runs.size()) + " commands run twice";
  return r;
}

const std::vector<std::pair<std::string, std::function<Result()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Result()>>> all{
      {"golden-ratio collision", golden_collision},
      {"dyadic no-overlap", dyadic_no_overlap},
      {"Mahler measure suite", mahler_suite},
      {"root separation", root_separation},
      {"certified-zero totality", zero_totality},
      {"hat-operator algebra", hat_algebra},
      {"smoothed-entropy inequalities", smoothed_inequalities},
      {"Phi_nu behaviour", phi_behaviour},
      {"LB_Phi consistency", lb_phi_consistency},
      {"dimension desk checks", dimension_checks},
      {"entropy-at-scale exactness", entropy_at_scale_exactness},
      {"CLI determinism", cli_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      which.push_back(std::stoul(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (which.empty())
    for (std::size_t i = 1; i <= criteria().size(); ++i) which.push_back(i);
  int failed = 0;
  for (std::size_t id : which) {
    if (id < 1 || id > criteria().size()) {
      std::cerr << "no criterion " << id << "\n";
      return 2;
    }
    const auto& [name, fn] = criteria()[id - 1];
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.note = std::string("exception: ") + e.what();
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << id << " " << name << (r.note.empty() ? "" : " (" + r.note + ")")
              << std::endl;
    if (!r.pass) ++failed;
  }
  return failed ? 1 : 0;
}
