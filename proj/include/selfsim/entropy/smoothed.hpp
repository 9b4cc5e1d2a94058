#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "selfsim/entropy/shannon.hpp"
#include "selfsim/errors.hpp"

namespace selfsim::entropy {

enum class Method { Quadrature, MonteCarlo };

struct SmoothingOptions {
  Method method = Method::Quadrature;
  double tol = 1e-10;         // relative quadrature tolerance
  double truncation = 8;      // integrate over [-T, T]^k in whitened coordinates
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  std::size_t max_evaluations = 200'000'000;
};

/// Points in R^k (one per column) with probability weights.
struct PointMasses {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  int dim() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }

  void validate() const {
    if (points.cols() == 0) throw ValidationError("distribution needs at least one atom");
    if (weights.size() != points.cols()) throw ValidationError("points and weights differ in length");
    if ((weights.array() <= 0).any()) throw ValidationError("weights must be positive");
    if (std::fabs(weights.sum() - 1) > 1e-12) throw ValidationError("weights must sum to 1");
  }

  /// Complex atoms as points of R^2.
  static PointMasses plane(const AtomicDistribution& d) {
    d.validate();
    PointMasses m;
    m.points.resize(2, static_cast<Eigen::Index>(d.size()));
    m.weights.resize(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto j = static_cast<Eigen::Index>(i);
      m.points(0, j) = d.positions[i].re().to_double();
      m.points(1, j) = d.positions[i].im().to_double();
      m.weights(j) = d.weights[i].get_d();
    }
    return m;
  }

  /// Law of X + Y for independent X, Y.
  static PointMasses sum(const PointMasses& x, const PointMasses& y) {
    if (x.dim() != y.dim()) throw ValidationError("dimension mismatch");
    PointMasses s;
    s.points.resize(x.dim(), x.size() * y.size());
    s.weights.resize(x.size() * y.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      for (Eigen::Index j = 0; j < y.size(); ++j, ++k) {
        s.points.col(k) = x.points.col(i) + y.points.col(j);
        s.weights(k) = x.weights(i) * y.weights(j);
      }
    return s;
  }
};

namespace detail {

/// Differential entropy gain E_i [ -log sum_j p_j exp(-z.d_ij - |d_ij|^2/2) ] of
/// whitened atoms u over standard Gaussian noise, with z ~ N(0, I).
class WhitenedMixture {
 public:
  WhitenedMixture(Eigen::MatrixXd u, Eigen::VectorXd p, double reach) : u_(std::move(u)), p_(std::move(p)) {
    const Eigen::Index n = u_.cols();
    log_p_ = p_.array().log();
    nb_.resize(static_cast<std::size_t>(n));
    // Terms smaller than e^-50 relative to the i-th one anywhere in the box are dropped.
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double dn = (u_.col(i) - u_.col(j)).norm();
        if (log_p_(j) - log_p_(i) + reach * dn - dn * dn / 2 >= -50) nb_[static_cast<std::size_t>(i)].push_back(j);
        else dropped_ += p_(i) * std::exp(log_p_(j) - log_p_(i) + reach * dn - dn * dn / 2);
      }
  }

  /// log sum_j p_j exp(-z.d - |d|^2/2) for atom i.
  double g(Eigen::Index i, const double* z) const {
    const auto& nb = nb_[static_cast<std::size_t>(i)];
    const Eigen::Index k = u_.rows();
    double best = -std::numeric_limits<double>::infinity();
    tmp_.resize(nb.size());
    for (std::size_t s = 0; s < nb.size(); ++s) {
      Eigen::Index j = nb[s];
      double dot = 0, dd = 0;
      for (Eigen::Index r = 0; r < k; ++r) {
        double d = u_(r, i) - u_(r, j);
        dot += z[r] * d;
        dd += d * d;
      }
      tmp_[s] = log_p_(j) - dot - dd / 2;
      best = std::max(best, tmp_[s]);
    }
    double acc = 0;
    for (double v : tmp_) acc += std::exp(v - best);
    ++evals_;
    return best + std::log(acc);
  }

  Eigen::Index size() const { return u_.cols(); }
  Eigen::Index dim() const { return u_.rows(); }
  double weight(Eigen::Index i) const { return p_(i); }
  double dropped() const { return dropped_; }
  std::size_t evaluations() const { return evals_; }
  double max_spread() const {
    double m = 0;
    for (Eigen::Index i = 0; i < u_.cols(); ++i)
      for (Eigen::Index j = 0; j < u_.cols(); ++j) m = std::max(m, (u_.col(i) - u_.col(j)).norm());
    return m;
  }

 private:
  Eigen::MatrixXd u_;
  Eigen::VectorXd p_;
  Eigen::ArrayXd log_p_;
  std::vector<std::vector<Eigen::Index>> nb_;
  double dropped_ = 0;
  mutable std::vector<double> tmp_;
  mutable std::size_t evals_ = 0;
};

inline double normal_pdf(double z) { return std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi); }

/// Collinear planar atoms reduce to their coordinate along the line.
inline Eigen::MatrixXd reduce_dimension(const Eigen::MatrixXd& u) {
  if (u.rows() == 1) return u;
  if (u.cols() < 2) return Eigen::MatrixXd::Zero(1, u.cols());
  Eigen::Vector2d c = u.rowwise().mean();
  Eigen::MatrixXd centred = u.colwise() - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s(0) == 0) return Eigen::MatrixXd::Zero(1, u.cols());
  if (s(1) > 1e-13 * s(0)) return u;
  Eigen::RowVectorXd proj = svd.matrixU().col(0).transpose() * centred;
  return proj;
}

inline Estimate quadrature(const WhitenedMixture& w, const SmoothingOptions& o) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double t = o.truncation;
  const unsigned depth = 18;
  double total = 0, err = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double e = 0, v = 0;
    if (w.dim() == 1) {
      v = GK::integrate([&](double z) { return normal_pdf(z) * w.g(i, &z); }, -t, t, depth, o.tol, &e);
    } else {
      double inner_err = 0;
      v = GK::integrate(
          [&](double z1) {
            double ie = 0;
            double r = GK::integrate(
                [&](double z2) {
                  double z[2] = {z1, z2};
                  return normal_pdf(z2) * w.g(i, z);
                },
                -t, t, depth, o.tol, &ie);
            inner_err = std::max(inner_err, ie);
            return normal_pdf(z1) * r;
          },
          -t, t, depth, o.tol, &e);
      e += inner_err;
    }
    if (w.evaluations() > o.max_evaluations) throw BudgetExceeded("smoothed entropy quadrature exceeds its evaluation budget");
    total -= w.weight(i) * v;
    err += w.weight(i) * e;
  }
  // Gaussian mass outside the box times a bound on |g| there.
  const double k = static_cast<double>(w.dim());
  const double tail_mass = k * std::erfc(t / std::numbers::sqrt2);
  double log_pmin = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) log_pmin = std::min(log_pmin, std::log(w.weight(i)));
  const double tail = tail_mass * (-log_pmin + (t + 2) * std::sqrt(k) * w.max_spread());
  return {total, err + tail + w.dropped() + 1e-14 * (1 + std::fabs(total))};
}

/// -int f log f - (k/2) log(2 pi e) over the bounding box of the atoms widened by T,
/// with f the mixture density. Preferred for many atoms at moderate spread.
inline Estimate quadrature_direct(const Eigen::MatrixXd& u, const Eigen::VectorXd& p, const SmoothingOptions& o) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double t = o.truncation;
  const unsigned depth = 18;
  const Eigen::Index k = u.rows(), n = u.cols();
  const double norm = std::pow(2 * std::numbers::pi, -static_cast<double>(k) / 2);
  std::size_t evals = 0;
  auto flogf = [&](const double* y) {
    double f = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double d2 = 0;
      for (Eigen::Index r = 0; r < k; ++r) {
        double d = y[r] - u(r, j);
        d2 += d * d;
      }
      f += p(j) * std::exp(-d2 / 2);
    }
    f *= norm;
    ++evals;
    return f > 0 ? -f * std::log(f) : 0.0;
  };
  Eigen::VectorXd lo = u.rowwise().minCoeff().array() - t, hi = u.rowwise().maxCoeff().array() + t;
  double e = 0, v = 0;
  if (k == 1) {
    v = GK::integrate([&](double y) { return flogf(&y); }, lo(0), hi(0), depth, o.tol, &e);
  } else {
    double inner_err = 0;
    v = GK::integrate(
        [&](double y1) {
          double ie = 0;
          double r = GK::integrate(
              [&](double y2) {
                double y[2] = {y1, y2};
                return flogf(y);
              },
              lo(1), hi(1), depth, o.tol, &ie);
          inner_err = std::max(inner_err, ie);
          return r;
        },
        lo(0), hi(0), depth, o.tol, &e);
    e += inner_err * (hi(0) - lo(0));
  }
  if (evals > o.max_evaluations) throw BudgetExceeded("smoothed entropy quadrature exceeds its evaluation budget");
  const double kd = static_cast<double>(k);
  // Outside the box f <= tail-sized Gaussian pieces; -f log f there is bounded by
  // the mass times the log of the smallest density reached.
  const double tail_mass = kd * std::erfc(t / std::numbers::sqrt2);
  const double tail = tail_mass * (t * t + kd * std::log(2 * std::numbers::pi) + 1);
  double value = v - kd / 2 * std::log(2 * std::numbers::pi * std::numbers::e);
  return {value, e + tail + 1e-14 * (1 + std::fabs(v))};
}

inline Estimate monte_carlo(const WhitenedMixture& w, const SmoothingOptions& o) {
  if (o.samples < 2) throw ValidationError("Monte Carlo needs at least two samples", "/params/samples");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  std::vector<double> cdf;
  double c = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) cdf.push_back(c += w.weight(i));
  std::uniform_real_distribution<double> unif(0, c);
  double mean = 0, m2 = 0;
  double z[2];
  for (std::size_t s = 0; s < o.samples; ++s) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), unif(rng));
    auto i = static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - cdf.begin(), w.size() - 1));
    for (Eigen::Index r = 0; r < w.dim(); ++r) z[r] = gauss(rng);
    double x = -w.g(i, z);
    double delta = x - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (x - mean);
  }
  double var = m2 / static_cast<double>(o.samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(o.samples))};
}

}  // namespace detail

/// H(X + G_B) - H(G_B) for G_B centred Gaussian with covariance B B^t, k in {1, 2}.
inline Estimate smoothed_entropy(const PointMasses& x, const Eigen::MatrixXd& b, const SmoothingOptions& o = {}) {
  x.validate();
  const int k = x.dim();
  if (k != 1 && k != 2) throw ValidationError("smoothed entropy supports dimensions 1 and 2");
  if (b.rows() != k || b.cols() != k) throw ValidationError("kernel matrix has the wrong shape");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  if (!lu.isInvertible()) throw ValidationError("kernel matrix must be invertible");
  if (x.size() == 1) return {0, 0};
  // H(X; B) = H(B^-1 X; I).
  Eigen::MatrixXd u = detail::reduce_dimension(lu.solve(x.points));
  if (o.method == Method::Quadrature && u.cols() > 8) {
    // Direct integration wins once the atoms crowd a box a few noise widths across.
    double area = 1;
    for (Eigen::Index r = 0; r < u.rows(); ++r) area *= (u.row(r).maxCoeff() - u.row(r).minCoeff()) / (2 * o.truncation) + 1;
    if (area < static_cast<double>(u.cols()) / 2) return detail::quadrature_direct(u, x.weights, o);
  }
  detail::WhitenedMixture w(std::move(u), x.weights, o.truncation * std::sqrt(static_cast<double>(k)));
  return o.method == Method::Quadrature ? detail::quadrature(w, o) : detail::monte_carlo(w, o);
}

inline Estimate smoothed_entropy(const AtomicDistribution& d, const Eigen::MatrixXd& b, const SmoothingOptions& o = {}) {
  PointMasses pm = PointMasses::plane(d);
  if (b.rows() == 1) {
    if (!d.is_real()) throw ValidationError("a 1x1 kernel needs real atoms");
    pm.points = pm.points.topRows(1).eval();
  }
  return smoothed_entropy(pm, b, o);
}

/// H(X; B1 | B2) = H(X; B1) - H(X; B2).
inline Estimate conditional_gap(const PointMasses& x, const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2,
                                const SmoothingOptions& o = {}) {
  if (b1 == b2) {
    x.validate();
    return {0, 0};
  }
  Estimate a = smoothed_entropy(x, b1, o), c = smoothed_entropy(x, b2, o);
  return {a.value - c.value, a.error + c.error};
}

/// 2^(j/2) for j = -40..40.
inline std::vector<double> default_phi_grid() {
  std::vector<double> g;
  for (int j = -40; j <= 40; ++j) g.push_back(std::exp2(j / 2.0));
  return g;
}

struct PhiEstimate {
  double value = 0;  // max over the grid
  double error = 0;  // error of the maximising term
  double t_star = 0;
};

/// Grid lower estimate of sup_t { H(t a xi + G) - H(t xi + G) }, G standard in R^2.
inline PhiEstimate phi_nu(const PointMasses& nu, double a, std::vector<double> grid = default_phi_grid(),
                          const SmoothingOptions& o = {}) {
  nu.validate();
  if (!(a >= 1)) throw ValidationError("a must be at least 1", "/params/a");
  if (a == 1 || nu.size() == 1) return {0, 0, 1};
  grid.push_back(1 / std::sqrt(a));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nu.dim(), nu.dim());
  PhiEstimate best{-std::numeric_limits<double>::infinity(), 0, 0};
  for (double t : grid) {
    if (!(t > 0)) throw ValidationError("grid points must be positive", "/params/grid");
    PointMasses hi{nu.points * (t * a), nu.weights}, lo{nu.points * t, nu.weights};
    Estimate eh = smoothed_entropy(hi, id, o), el = smoothed_entropy(lo, id, o);
    double v = eh.value - el.value;
    if (v > best.value) best = {v, eh.error + el.error, t};
  }
  return best;
}

inline PhiEstimate phi_nu(const AtomicDistribution& nu, double a, std::vector<double> grid = default_phi_grid(),
                          const SmoothingOptions& o = {}) {
  return phi_nu(PointMasses::plane(nu), a, std::move(grid), o);
}

/// Real 2d x 2d matrix replacing each entry a + bi by [[a, -b], [b, a]].
inline Eigen::MatrixXd hat(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXd r(2 * m.rows(), 2 * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::complex<double> z = m(i, j);
      r(2 * i, 2 * j) = z.real();
      r(2 * i, 2 * j + 1) = -z.imag();
      r(2 * i + 1, 2 * j) = z.imag();
      r(2 * i + 1, 2 * j + 1) = z.real();
    }
  return r;
}

inline double operator_norm(const Eigen::MatrixXcd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}
inline double operator_norm(const Eigen::MatrixXd& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0); }

}  // namespace selfsim::entropy
