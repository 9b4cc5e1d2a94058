#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "selfsim/algebra/mahler.hpp"
#include "selfsim/algebra/zero_test.hpp"

using namespace selfsim;
using namespace selfsim::algebra;
using numerics::Ball;
using numerics::ComplexBall;
using numerics::Dyadic;

namespace {

IntPolynomial random_poly(std::mt19937_64& g, int max_deg, long max_coeff) {
  std::uniform_int_distribution<int> dd(1, max_deg);
  std::uniform_int_distribution<long> cc(-max_coeff, max_coeff);
  int d = dd(g);
  std::vector<mpz_class> c;
  for (int i = 0; i < d; ++i) c.emplace_back(cc(g));
  long lead = 0;
  while (lead == 0) lead = cc(g);
  c.emplace_back(lead);
  return IntPolynomial(c);
}

// Graeffe root squaring on exact integers: after k steps the roots are z^(2^k)
// and M is raised to 2^k. Brackets M(f) with
// (linf / C(n, n/2))^(1/2^k) <= M(f) <= l2^(1/2^k).
std::pair<double, double> graeffe_bracket(IntPolynomial f, int k) {
  const long n = f.degree();
  for (int s = 0; s < k; ++s) {
    std::vector<mpz_class> even, odd;
    for (long i = 0; i <= f.degree(); ++i) (i % 2 ? odd : even).push_back(f.coeff(static_cast<std::size_t>(i)));
    IntPolynomial g(even), h(odd);
    IntPolynomial hh = h * h;
    IntPolynomial shifted = IntPolynomial::monomial(1, 1) * hh;
    f = g * g - shifted;
  }
  auto log2z = [](const mpz_class& z) {
    long e = 0;
    double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log2(std::fabs(m)) + static_cast<double>(e);
  };
  mpz_class binom;
  mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(n / 2));
  const double scale = std::ldexp(1.0, -k);
  double lo = (log2z(f.linf()) - log2z(binom)) * scale;
  double hi = 0.5 * log2z(f.l2_squared()) * scale;
  return {std::exp2(lo), std::exp2(hi)};
}

AlgebraicNumber golden() { return AlgebraicNumber(IntPolynomial{-1, 1, 1}, ComplexBall(Dyadic::from_double(0.618), {}, Dyadic::from_double(0.01))); }

}  // namespace

TEST(IntPolynomial, ArithmeticAndGcd) {
  IntPolynomial a{-1, 1}, b{1, 1};
  EXPECT_EQ(a * b, (IntPolynomial{-1, 0, 1}));
  EXPECT_EQ(gcd(a * a * b, a * b * b).degree(), 2);
  EXPECT_TRUE(divides(a, a * b));
  EXPECT_FALSE(divides(a, b * b));
  EXPECT_EQ((IntPolynomial{4, 6, 2}).content(), 2);
  EXPECT_EQ((IntPolynomial{0, 0, 3, 1}).valuation(), 2u);
}

TEST(IntPolynomial, SquarefreeDecompositionReconstructs) {
  std::mt19937_64 g(4);
  for (int t = 0; t < 30; ++t) {
    IntPolynomial p = random_poly(g, 3, 5), q = random_poly(g, 3, 5);
    IntPolynomial f = p * p * q;
    auto dec = squarefree_decomposition(f);
    IntPolynomial prod{1};
    for (const auto& sf : dec) {
      EXPECT_TRUE(is_squarefree(sf.factor));
      for (int i = 0; i < sf.multiplicity; ++i) prod = prod * sf.factor;
    }
    EXPECT_EQ(prod.primitive_part(), f.primitive_part()) << f.to_string();
  }
}

TEST(AlgebraicNumber, GoldenConstructionAndRefinement) {
  auto a = golden();
  EXPECT_TRUE(a.is_real());
  EXPECT_EQ(a.degree(), 2);
  ComplexBall e = a.enclosure(200);
  EXPECT_LE(cmp(e.rad(), Dyadic::pow2(-200)), 0);
  EXPECT_NEAR(e.re().to_double(), (std::sqrt(5.0) - 1) / 2, 1e-16);
}

TEST(AlgebraicNumber, IsolatorMustHoldExactlyOneRoot) {
  EXPECT_THROW(AlgebraicNumber(IntPolynomial{-1, 1, 1}, ComplexBall(Dyadic(0), {}, Dyadic(3))), ValidationError);
  EXPECT_THROW(AlgebraicNumber(IntPolynomial{-1, 1, 1}, ComplexBall(Dyadic(5), {}, Dyadic(1))), ValidationError);
  EXPECT_THROW(AlgebraicNumber(IntPolynomial{2, 4}, ComplexBall(Dyadic(0), {}, Dyadic(1))), ValidationError);
  EXPECT_THROW(AlgebraicNumber(IntPolynomial{1, 2, 1}, ComplexBall(Dyadic(-1), {}, Dyadic(1))), ValidationError);
}

TEST(NumberField, EmbeddingsAndArithmetic) {
  NumberField q2(IntPolynomial{-2, 0, 1});
  EXPECT_EQ(q2.degree(), 2u);
  // Embeddings sorted by decreasing real part: the first is +sqrt 2.
  EXPECT_NEAR(q2.embedding(1).re().to_double(), std::sqrt(2.0), 1e-15);
  FieldElement t = FieldElement::theta(2);
  FieldElement tt = mul(t, t, q2);
  EXPECT_TRUE(tt.is_rational());
  EXPECT_EQ(tt.rational_value(), 2);
  ComplexBall v = embed(t + FieldElement::rational(mpq_class(1, 2), 2), q2, 1, 100);
  EXPECT_NEAR(v.re().to_double(), std::sqrt(2.0) + 0.5, 1e-15);
  EXPECT_THROW(NumberField(IntPolynomial{-2, 0, 2}), ValidationError);
}

TEST(NumberField, LiftToIntegerPolynomial) {
  NumberField q2(IntPolynomial{-2, 0, 1});
  // X - theta lifts to (X - sqrt2)(X + sqrt2) = X^2 - 2.
  FieldPolynomial f({-FieldElement::theta(2), FieldElement::rational(1, 2)});
  IntPolynomial lift = lift_to_int_poly(f, q2);
  EXPECT_EQ(lift.primitive_part(), (IntPolynomial{-2, 0, 1}));
}

TEST(Mahler, GoldenPolynomial) {
  Ball m = mahler_measure(IntPolynomial{-1, -1, 1});
  EXPECT_GE(m.lower().to_double(), 1.618033);
  EXPECT_LE(m.upper().to_double(), 1.618035);
}

TEST(Mahler, ClosedForms) {
  // Cyclotomic polynomials have measure 1; a X - b has measure max(|a|, |b|).
  for (int n : {3, 5, 8, 12}) {
    std::vector<mpz_class> c(static_cast<std::size_t>(n + 1), 0);
    c[0] = -1;
    c[static_cast<std::size_t>(n)] = 1;
    EXPECT_TRUE(mahler_measure(IntPolynomial(c)).contains(Dyadic(1))) << n;
  }
  EXPECT_TRUE(mahler_measure(IntPolynomial{-1, 2}).contains(Dyadic(2)));
  EXPECT_TRUE(mahler_measure(IntPolynomial{-7, 3}).contains(Dyadic(7)));
  // Lehmer's polynomial.
  Ball lehmer = mahler_measure(IntPolynomial{1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1});
  EXPECT_NEAR(lehmer.to_double(), 1.17628081825991750654, 1e-15);
}

TEST(Mahler, AgreesWithGraeffeOracle) {
  std::mt19937_64 g(8);
  for (int t = 0; t < 40; ++t) {
    IntPolynomial f = random_poly(g, 12, 30);
    Ball m = mahler_measure(f);
    auto [lo, hi] = graeffe_bracket(f, 14);
    EXPECT_GE(m.upper().to_double() * (1 + 1e-12), lo) << f.to_string();
    EXPECT_LE(m.lower().to_double() * (1 - 1e-12), hi) << f.to_string();
  }
}

TEST(Mahler, MultiplicativeOnRandomPairs) {
  std::mt19937_64 g(12);
  for (int t = 0; t < 40; ++t) {
    IntPolynomial f = random_poly(g, 8, 20), h = random_poly(g, 8, 20);
    Ball prod = mul(mahler_measure(f), mahler_measure(h), 128);
    Ball whole = mahler_measure(f * h);
    EXPECT_TRUE(prod.overlaps(whole)) << f.to_string() << " ; " << h.to_string();
  }
}

TEST(Mahler, NormBoundsHold) {
  std::mt19937_64 g(13);
  for (int t = 0; t < 100; ++t) {
    auto r = check_norm_bounds(random_poly(g, 20, 100));
    EXPECT_FALSE(r.any_violation());
  }
}

TEST(Mahler, HeightAndMtilde) {
  auto a = golden();
  EXPECT_NEAR(height(a).to_double(), std::sqrt((1 + std::sqrt(5.0)) / 2), 1e-15);
  // Roots of X^2 + X - 1 are g and -1/g; only g is inside the unit disc.
  EXPECT_NEAR(mtilde(a).to_double(), (1 + std::sqrt(5.0)) / 2, 1e-15);
  auto half = AlgebraicNumber::rational(mpq_class(1, 2));
  EXPECT_TRUE(mtilde(half).contains(Dyadic(2)));
  auto two_thirds = AlgebraicNumber::rational(mpq_class(2, 3));
  EXPECT_TRUE(mahler_measure(two_thirds).contains(Dyadic(3)));
  EXPECT_NEAR(mtilde(two_thirds).to_double(), 1.5, 1e-15);
  for (const auto* x : {&a, &half, &two_thirds}) EXPECT_TRUE(mtilde_identity(*x).holds);
}

TEST(ZeroTest, MultiplesVanishPerturbationsDoNot) {
  std::vector<AlgebraicNumber> alphas{golden(), AlgebraicNumber::rational(mpq_class(2, 3))};
  for (const auto& r : AlgebraicNumber::conjugates(IntPolynomial{-2, 0, 0, 1})) alphas.push_back(r);
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> bit(0, 1);
  for (const auto& alpha : alphas) {
    for (int t = 0; t < 10; ++t) {
      IntPolynomial f = alpha.minpoly() * random_poly(g, 5, 9);
      ASSERT_TRUE(divides(alpha.minpoly(), f));
      EXPECT_TRUE(certified_is_zero(f, alpha));
      std::vector<mpz_class> c = f.coeffs();
      std::uniform_int_distribution<std::size_t> pos(0, c.size() - 1);
      c[pos(g)] += bit(g) ? 1 : -1;
      IntPolynomial p(c);
      bool truth = !p.is_zero() && divides(alpha.minpoly(), p);
      EXPECT_EQ(certified_is_zero(p, alpha), truth);
    }
  }
}

TEST(ZeroTest, OverANumberField) {
  NumberField q2(IntPolynomial{-2, 0, 1});
  // lambda = sqrt2 / 2, the positive root of 2 X^2 - 1.
  AlgebraicNumber lam(IntPolynomial{-1, 0, 2}, ComplexBall(Dyadic::from_double(0.7), {}, Dyadic::from_double(0.05)));
  FieldElement one = FieldElement::rational(1, 2), theta = FieldElement::theta(2);
  EXPECT_TRUE(certified_is_zero(FieldPolynomial({-one, theta}), q2, lam));
  EXPECT_FALSE(certified_is_zero(FieldPolynomial({-one - one, theta}), q2, lam));
  EXPECT_FALSE(certified_is_zero(FieldPolynomial({one, theta}), q2, lam));
}
