#pragma once

#include <gmpxx.h>

#include <cmath>
#include <vector>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/entropy/garsia.hpp"
#include "selfsim/entropy/smoothed.hpp"

namespace selfsim::entropy {

using algebra::AlgebraicNumber;
using algebra::FieldElement;
using algebra::NumberField;
using numerics::PrecisionContext;

struct LbPhiReport {
  double upper = 0;  // min_n H_n / n
  int n_max = 0;
  Ball mtilde;       // a
  PhiEstimate phi;   // grid estimate at a
  bool consistent = false;  // upper >= phi - error
};

/// Checks min_n H_n/n >= Phi_nu(M~(eta)) for an IFS with ratio eta and rational atoms nu.
inline LbPhiReport lb_phi_check(const AlgebraicNumber& eta, const std::vector<mpq_class>& atoms,
                                const std::vector<mpq_class>& probs, int n_max = 12,
                                std::vector<double> grid = default_phi_grid(), const SmoothingOptions& o = {},
                                const PrecisionContext& ctx = {}) {
  if (atoms.size() != probs.size()) throw ValidationError("atoms and probs differ in length", "/probs");
  std::vector<FieldElement> t;
  for (const auto& a : atoms) t.push_back(FieldElement::rational(a, 1));
  IFSSpec ifs(NumberField(), ifs::RealParameter::exact(eta), t, probs, ctx);
  LbPhiReport r;
  r.n_max = n_max;
  std::vector<int> ns;
  for (int n = 1; n <= n_max; ++n) ns.push_back(n);
  r.upper = garsia_entropy_bracket(ifs, ns).upper;
  r.mtilde = algebra::mtilde(eta, ctx);
  std::vector<double> x;
  for (const auto& a : atoms) x.push_back(a.get_d());
  r.phi = phi_nu(PointMasses::plane(AtomicDistribution::real(x, probs)), r.mtilde.mid().to_double(), std::move(grid), o);
  r.consistent = r.upper >= r.phi.value - r.phi.error;
  return r;
}

}  // namespace selfsim::entropy
