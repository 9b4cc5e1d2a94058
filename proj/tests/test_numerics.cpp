#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "selfsim/numerics/ball.hpp"
#include "selfsim/numerics/roots.hpp"

using namespace selfsim;
using namespace selfsim::numerics;
using algebra::IntPolynomial;

namespace {

mpq_class random_rational(std::mt19937_64& g) {
  std::uniform_int_distribution<long> num(-100000, 100000), den(1, 997);
  mpq_class q(num(g), den(g));
  q.canonicalize();
  return q;
}

bool ball_holds(const Ball& b, const mpq_class& x) {
  mpq_class d = x - b.mid().to_rational();
  return abs(d) <= b.rad().to_rational();
}

}  // namespace

TEST(Dyadic, ExactArithmeticAgainstRationals) {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<long> m(-1000000, 1000000), e(-60, 60);
  for (int i = 0; i < 500; ++i) {
    Dyadic a(mpz_class(m(g)), e(g)), b(mpz_class(m(g)), e(g));
    mpq_class qa = a.to_rational(), qb = b.to_rational();
    EXPECT_EQ((a + b).to_rational(), qa + qb);
    EXPECT_EQ((a - b).to_rational(), qa - qb);
    EXPECT_EQ((a * b).to_rational(), qa * qb);
    EXPECT_EQ(cmp(a, b), qa < qb ? -1 : (qa > qb ? 1 : 0));
  }
}

TEST(Dyadic, ToDoubleRoundsToNearest) {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> bits(54, 200);
  for (int i = 0; i < 300; ++i) {
    mpz_class m;
    m = 1;
    m <<= bits(g);
    m += static_cast<unsigned long>(g());
    Dyadic x(m, -static_cast<std::int64_t>(bits(g)));
    double d = x.to_double();
    mpq_class exact = x.to_rational();
    mpq_class err = abs(mpq_class(d) - exact);
    EXPECT_LE(err, abs(mpq_class(std::nextafter(d, INFINITY)) - exact));
    EXPECT_LE(err, abs(mpq_class(std::nextafter(d, -INFINITY)) - exact));
  }
  EXPECT_EQ(Dyadic(3).to_double(), 3.0);
  EXPECT_EQ(Dyadic::from_double(0.1).to_double(), 0.1);
}

TEST(Dyadic, RoundingModesBracketTheValue) {
  Dyadic x(mpz_class("123456789123456789"), -40);
  Dyadic err;
  Dyadic lo = round(x, 20, Round::Floor), hi = round(x, 20, Round::Ceil), mid = round(x, 20, Round::Nearest, &err);
  EXPECT_LE(cmp(lo, x), 0);
  EXPECT_GE(cmp(hi, x), 0);
  EXPECT_LE(cmp((mid - x).abs(), err), 0);
}

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("2/3"), mpq_class(2, 3));
  EXPECT_EQ(parse_rational("-0.25"), mpq_class(-1, 4));
  EXPECT_EQ(parse_rational("1.5e-3"), mpq_class(3, 2000));
  EXPECT_EQ(parse_rational("7"), mpq_class(7));
  EXPECT_THROW(parse_rational("1/0"), ValidationError);
  EXPECT_THROW(parse_rational("abc"), ValidationError);
  EXPECT_THROW(parse_rational(""), ValidationError);
}

TEST(Ball, OperationsContainExactResults) {
  std::mt19937_64 g(5);
  for (int i = 0; i < 400; ++i) {
    mpq_class x = random_rational(g), y = random_rational(g);
    const std::int64_t p = 40;
    Ball bx = Ball::from_rational(x, p), by = Ball::from_rational(y, p);
    ASSERT_TRUE(ball_holds(bx, x));
    EXPECT_TRUE(ball_holds(add(bx, by, p), x + y));
    EXPECT_TRUE(ball_holds(sub(bx, by, p), x - y));
    EXPECT_TRUE(ball_holds(mul(bx, by, p), x * y));
    if (y != 0 && !by.contains_zero()) EXPECT_TRUE(ball_holds(div(bx, by, p), x / y));
    EXPECT_TRUE(ball_holds(numerics::pow(bx, 3, p), x * x * x));
  }
}

TEST(Ball, SqrtAndRootEnclose) {
  for (long v : {2L, 3L, 10L, 12345L}) {
    Ball s = numerics::sqrt(Ball(v), 100);
    EXPECT_TRUE(mul(s, s, 200).contains(Dyadic(v)));
    Ball c = numerics::root(Ball(v), 3, 100);
    EXPECT_TRUE(numerics::pow(c, 3, 300).contains(Dyadic(v)));
    EXPECT_NEAR(c.to_double(), std::cbrt(static_cast<double>(v)), 1e-12 * v);
  }
}

TEST(Ball, InverseOfBallWithZeroThrows) {
  EXPECT_THROW(inv(Ball(Dyadic(0), Dyadic(1)), 64), BallContainsZero);
}

TEST(ComplexBall, MultiplicationEnclosesProduct) {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 200; ++i) {
    std::complex<double> a(u(g), u(g)), b(u(g), u(g));
    ComplexBall ba(Dyadic::from_double(a.real()), Dyadic::from_double(a.imag()));
    ComplexBall bb(Dyadic::from_double(b.real()), Dyadic::from_double(b.imag()));
    ComplexBall p = mul(ba, bb, 80);
    // exact product of the two double inputs
    mpq_class re = mpq_class(a.real()) * mpq_class(b.real()) - mpq_class(a.imag()) * mpq_class(b.imag());
    mpq_class im = mpq_class(a.real()) * mpq_class(b.imag()) + mpq_class(a.imag()) * mpq_class(b.real());
    mpq_class dr = re - p.re().to_rational(), di = im - p.im().to_rational();
    mpq_class r = p.rad().to_rational();
    EXPECT_LE(dr * dr + di * di, r * r);
  }
}

TEST(Roots, QuadraticRootsAreIsolatedAndCertifiedReal) {
  IntPolynomial f{-1, -1, 1};  // X^2 - X - 1
  auto r = isolate_roots(f, Dyadic::pow2(-80));
  ASSERT_EQ(r.size(), 2u);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  EXPECT_TRUE(r[0].is_real);
  EXPECT_TRUE(r[1].is_real);
  EXPECT_NEAR(r[0].ball.re().to_double(), 1 - phi, 1e-15);
  EXPECT_NEAR(r[1].ball.re().to_double(), phi, 1e-15);
  EXPECT_LE(cmp(r[0].ball.rad(), Dyadic::pow2(-80)), 0);
}

TEST(Roots, MultiplicitiesAndZeroRoot) {
  // X^2 (X - 1)^3 (X^2 + 1)
  IntPolynomial f = IntPolynomial{0, 0, 1} * IntPolynomial{-1, 1} * IntPolynomial{-1, 1} * IntPolynomial{-1, 1} *
                    IntPolynomial{1, 0, 1};
  auto r = isolate_roots(f, Dyadic::pow2(-40));
  ASSERT_EQ(r.size(), 4u);
  int total = 0;
  for (const auto& x : r) total += x.multiplicity;
  EXPECT_EQ(total, 7);
  bool saw_zero = false, saw_one = false;
  for (const auto& x : r) {
    if (x.ball.contains_zero()) {
      saw_zero = true;
      EXPECT_EQ(x.multiplicity, 2);
    }
    if (x.ball.contains_point(Dyadic(1), Dyadic())) {
      saw_one = true;
      EXPECT_EQ(x.multiplicity, 3);
    }
  }
  EXPECT_TRUE(saw_zero && saw_one);
}

TEST(Roots, RandomPolynomialsMatchVieta) {
  std::mt19937_64 g(21);
  std::uniform_int_distribution<long> c(-20, 20);
  for (int t = 0; t < 40; ++t) {
    std::vector<mpz_class> co;
    int deg = 2 + t % 9;
    for (int i = 0; i < deg; ++i) co.emplace_back(c(g));
    co.emplace_back(c(g) == 0 ? 1 : 3);
    IntPolynomial f(co);
    auto roots = isolate_roots(f, Dyadic::pow2(-60));
    // Sum of roots with multiplicity = -a_{n-1}/a_n.
    std::complex<long double> s = 0;
    int count = 0;
    for (const auto& r : roots) {
      s += static_cast<long double>(r.multiplicity) *
           std::complex<long double>(r.ball.re().to_double(), r.ball.im().to_double());
      count += r.multiplicity;
    }
    EXPECT_EQ(count, f.degree());
    long double expect = -mpq_class(f.coeff(static_cast<std::size_t>(f.degree() - 1)), f.leading()).get_d();
    EXPECT_NEAR(static_cast<double>(s.real()), static_cast<double>(expect), 1e-9);
    EXPECT_NEAR(static_cast<double>(s.imag()), 0.0, 1e-9);
    for (std::size_t i = 0; i < roots.size(); ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j) EXPECT_FALSE(roots[i].ball.overlaps(roots[j].ball));
  }
}
