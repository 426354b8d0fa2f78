#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "phaseret/poly.hpp"
#include "phaseret/rng.hpp"

using phaseret::Complex;
using phaseret::Polynomial;
using phaseret::SplitMix64;

namespace {

Polynomial make_poly(std::vector<Complex> coeffs) { return Polynomial(std::move(coeffs)); }

// Direct power-sum evaluation, the independent oracle for Horner.
Complex eval_direct(const Polynomial& p, Complex z) {
  Complex s = 0.0, pw = 1.0;
  for (std::size_t k = 0; k < p.n(); ++k) {
    s += p[k] * pw;
    pw *= z;
  }
  return s;
}

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

TEST_CASE("evaluate: zero polynomial and direct-sum oracle") {
  CHECK(std::abs(make_poly({Complex(0, 0)}).evaluate(Complex(3.7, -1.2))) == 0.0);

  const Polynomial p = make_poly({Complex(1, 0), Complex(2, 0)});
  CHECK(std::abs(p.evaluate(Complex(1, 0)) - Complex(3, 0)) < 1e-15);

  // |1 + 2 e^{2 pi i/3}| = |i sqrt(3)| = sqrt(3)
  const Complex w = std::polar(1.0, 2.0 * kPi / 3.0);
  CHECK(std::abs(p.evaluate(w)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(std::abs(p.evaluate(w) - eval_direct(p, w)) < 1e-14);

  SplitMix64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial q = phaseret::random_polynomial(12, gen.next_u64());
    const Complex z = std::polar(1.0, 2.0 * kPi * gen.next_double());
    CHECK(std::abs(q.evaluate(z) - eval_direct(q, z)) < 1e-12 * (1.0 + q.norm()));
  }
}

TEST_CASE("derivative: termwise differentiation") {
  const Polynomial c = make_poly({Complex(5, -2)});
  REQUIRE(c.derivative().n() == 1);
  CHECK(std::abs(c.derivative()[0]) == 0.0);

  const Polynomial lin = make_poly({Complex(1, 0), Complex(2, 0)});
  REQUIRE(lin.derivative().n() == 1);
  CHECK(std::abs(lin.derivative()[0] - Complex(2, 0)) == 0.0);

  // z + z^3 -> 1 + 3z^2
  const Polynomial p = make_poly({Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(1, 0)});
  const Polynomial d = p.derivative();
  REQUIRE(d.n() == 3);
  CHECK(std::abs(d[0] - Complex(1, 0)) == 0.0);
  CHECK(std::abs(d[1]) == 0.0);
  CHECK(std::abs(d[2] - Complex(3, 0)) == 0.0);
}

TEST_CASE("derivative is linear, exactly on integer coefficients") {
  SplitMix64 gen(17);
  auto small_int = [&gen]() {
    return Complex(static_cast<double>(gen.next_u64() % 17) - 8.0,
                   static_cast<double>(gen.next_u64() % 17) - 8.0);
  };
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Complex> pc(6), qc(6);
    for (auto& v : pc) v = small_int();
    for (auto& v : qc) v = small_int();
    const Complex a = small_int(), b = small_int();
    const Polynomial p(pc), q(qc);
    const Polynomial lhs = (a * p + b * q).derivative();
    const Polynomial rhs = a * p.derivative() + b * q.derivative();
    REQUIRE(lhs.n() == rhs.n());
    for (std::size_t k = 0; k < lhs.n(); ++k) CHECK(lhs[k] == rhs[k]);
  }
}

TEST_CASE("derivative matches central finite differences on the circle") {
  // d/dt p(z e^{it}) at t=0 equals i z p'(z); h = 1e-5 gives O(h^2) error.
  SplitMix64 gen(23);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = phaseret::random_polynomial(9, gen.next_u64());
    const Complex z = std::polar(1.0, 2.0 * kPi * gen.next_double());
    const Complex fd =
        (p.evaluate(z * std::polar(1.0, h)) - p.evaluate(z * std::polar(1.0, -h))) / (2.0 * h);
    const Complex expected = p.derivative().evaluate(z);
    const Complex got = fd / (Complex(0, 1) * z);
    CHECK(std::abs(got - expected) <= 1e-7 * (1.0 + std::abs(expected)));
  }
}

TEST_CASE("global_phase_distance: closed form and grid oracle") {
  const Polynomial p = make_poly({Complex(1, 0), Complex(2, 0)});
  CHECK(phaseret::global_phase_distance(p, p) == 0.0);
  CHECK(phaseret::global_phase_distance(p, Complex(0, 1) * p) < 1e-15);

  const Polynomial q = make_poly({Complex(1, 0), Complex(-2, 0)});
  CHECK(phaseret::global_phase_distance(p, q) == doctest::Approx(2.0).epsilon(1e-14));

  // Independent oracle: minimize over a fine phase grid.
  double best = 1e300;
  for (int i = 0; i < 200000; ++i) {
    const double phi = 2.0 * kPi * i / 200000.0;
    double s = 0.0;
    for (std::size_t k = 0; k < p.n(); ++k) s += std::norm(p[k] - std::polar(1.0, phi) * q[k]);
    best = std::min(best, std::sqrt(s));
  }
  CHECK(phaseret::global_phase_distance(p, q) == doctest::Approx(best).epsilon(1e-6));

  CHECK_THROWS_AS(phaseret::global_phase_distance(p, phaseret::Polynomial::zero(3)),
                  std::invalid_argument);
}

TEST_CASE("global_phase_distance: invariance, symmetry, triangle inequality") {
  SplitMix64 gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Polynomial p = phaseret::random_polynomial(8, gen.next_u64());
    const Polynomial q = phaseret::random_polynomial(8, gen.next_u64());
    const Polynomial r = phaseret::random_polynomial(8, gen.next_u64());
    const double phi = 2.0 * kPi * gen.next_double();

    CHECK(phaseret::global_phase_distance(p, std::polar(1.0, phi) * p) <= 1e-12 * p.norm());
    CHECK(std::abs(phaseret::global_phase_distance(p, q) -
                   phaseret::global_phase_distance(q, p)) <= 1e-10);
    CHECK(phaseret::global_phase_distance(p, r) <=
          phaseret::global_phase_distance(p, q) + phaseret::global_phase_distance(q, r) + 1e-10);
  }
}

TEST_CASE("canonical_phase: deterministic representative") {
  const Polynomial a = phaseret::canonical_phase(make_poly({Complex(0, 3)}));
  CHECK(a[0].real() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(a[0].imag()) < 1e-15);

  const Polynomial z = phaseret::canonical_phase(phaseret::Polynomial::zero(2));
  CHECK(std::abs(z[0]) == 0.0);
  CHECK(std::abs(z[1]) == 0.0);

  const Polynomial b = phaseret::canonical_phase(make_poly({Complex(1, 1), Complex(2, 0)}));
  const double s = std::sqrt(2.0);
  CHECK(std::abs(b[0] - Complex(s, 0)) < 1e-14);
  CHECK(std::abs(b[1] - Complex(s, -s)) < 1e-14);

  SplitMix64 gen(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial p = phaseret::random_polynomial(6, gen.next_u64());
    const Polynomial c = phaseret::canonical_phase(p);
    CHECK(phaseret::global_phase_distance(c, p) <= 1e-12 * (1.0 + p.norm()));
    const int j = c.lowest_index();
    REQUIRE(j >= 0);
    CHECK(c[static_cast<std::size_t>(j)].real() > 0.0);
    CHECK(std::abs(c[static_cast<std::size_t>(j)].imag()) <=
          1e-12 * std::abs(c[static_cast<std::size_t>(j)]));
    for (std::size_t k = 0; k < p.n(); ++k)
      CHECK(std::abs(c[k]) == doctest::Approx(std::abs(p[k])).epsilon(1e-12));
  }
}

TEST_CASE("random_polynomial: support mask and determinism") {
  const Polynomial mono = phaseret::random_polynomial(4, 99, phaseret::IndexRange{2, 2});
  CHECK(std::abs(mono[0]) == 0.0);
  CHECK(std::abs(mono[1]) == 0.0);
  CHECK(std::abs(mono[2]) > 0.0);
  CHECK(std::abs(mono[3]) == 0.0);

  const Polynomial a = phaseret::random_polynomial(8, 42);
  const Polynomial b = phaseret::random_polynomial(8, 42);
  for (std::size_t k = 0; k < 8; ++k) CHECK(a[k] == b[k]);

  const Polynomial c = phaseret::random_polynomial(8, 43);
  bool differs = false;
  for (std::size_t k = 0; k < 8; ++k) differs = differs || (a[k] != c[k]);
  CHECK(differs);

  CHECK_THROWS_AS(phaseret::random_polynomial(4, 1, phaseret::IndexRange{3, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(phaseret::random_polynomial(4, 1, phaseret::IndexRange{2, 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(phaseret::random_polynomial(0, 1), std::invalid_argument);
}

TEST_CASE("Polynomial: validation and degree policy") {
  CHECK_THROWS_AS(Polynomial(std::vector<Complex>{}), std::invalid_argument);
  CHECK_THROWS_AS(make_poly({Complex(std::nan(""), 0)}), std::invalid_argument);
  CHECK_THROWS_AS(make_poly({Complex(0, std::numeric_limits<double>::infinity())}),
                  std::invalid_argument);

  CHECK(phaseret::Polynomial::zero(5).degree() == -1);
  CHECK(make_poly({Complex(1, 0), Complex(1e-20, 0)}).degree() == 0);
  CHECK(make_poly({Complex(1e-20, 0)}).degree() == 0);
  CHECK(make_poly({Complex(0, 0), Complex(0, 2)}).degree() == 1);
  CHECK(make_poly({Complex(0, 0), Complex(0, 2)}).lowest_index() == 1);
}

TEST_CASE("SplitMix64: published sequence and reproducibility") {
  // Reference outputs of the Steele/Lea/Flood generator for seed 0.
  SplitMix64 gen(0);
  CHECK(gen.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(gen.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(gen.next_u64() == 0x06c45d188009454fULL);

  SplitMix64 a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  SplitMix64 parent(7);
  SplitMix64 child = parent.split();
  CHECK(child.next_u64() != parent.next_u64());
}

TEST_CASE("SplitMix64: complex normal moments") {
  SplitMix64 gen(2024);
  const int count = 20000;
  Complex mean = 0.0;
  double second = 0.0;
  for (int i = 0; i < count; ++i) {
    const Complex z = gen.next_complex_normal();
    mean += z;
    second += std::norm(z);
  }
  mean /= static_cast<double>(count);
  second /= static_cast<double>(count);
  CHECK(std::abs(mean) < 0.05);
  CHECK(second == doctest::Approx(1.0).epsilon(0.05));
}
