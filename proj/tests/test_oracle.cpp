#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "phaseret/measurement.hpp"
#include "phaseret/oracle.hpp"
#include "phaseret/poly.hpp"
#include "phaseret/reconstruct.hpp"
#include "phaseret/rng.hpp"

using phaseret::Complex;
using phaseret::MeasurementSet;
using phaseret::Polynomial;
using phaseret::SplitMix64;

namespace {

Polynomial make_poly(std::vector<Complex> coeffs) { return Polynomial(std::move(coeffs)); }

}  // namespace

TEST_CASE("brute force recovers p = 1 + 2z") {
  const Polynomial p = make_poly({Complex(1, 0), Complex(2, 0)});
  const MeasurementSet ms = phaseret::measure(p);
  const phaseret::BruteForceResult r = phaseret::brute_force_reconstruct(ms, 32, 7);
  CHECK(r.converged);
  CHECK(r.residual <= 1e-8);
  CHECK(phaseret::measurement_residual(r.q, ms) == doctest::Approx(r.residual).epsilon(1e-9));
  CHECK(phaseret::global_phase_distance(r.q, p) <= 1e-4);
}

TEST_CASE("brute force recovers a constant up to phase") {
  const Polynomial c = make_poly({Complex(-1.2, 2.1), Complex(0, 0)});
  const phaseret::BruteForceResult r =
      phaseret::brute_force_reconstruct(phaseret::measure(c), 16, 11);
  CHECK(r.converged);
  CHECK(phaseret::global_phase_distance(r.q, c) <= 1e-4);
}

TEST_CASE("perturbed measurements leave a residual floor") {
  const Polynomial p = make_poly({Complex(1, 0), Complex(2, 0)});
  MeasurementSet ms = phaseret::measure(p);
  ms.intensities_p[1] += 1.0;
  const phaseret::BruteForceResult r = phaseret::brute_force_reconstruct(ms, 24, 3);
  CHECK(r.residual > 0.1);
  CHECK_FALSE(r.converged);
}

TEST_CASE("brute force rejects out-of-scale and degenerate arguments") {
  const MeasurementSet big = phaseret::measure(phaseret::random_polynomial(5, 1));
  CHECK_THROWS_AS(phaseret::brute_force_reconstruct(big, 4, 1), std::invalid_argument);
  const MeasurementSet ok = phaseret::measure(phaseret::random_polynomial(3, 1));
  CHECK_THROWS_AS(phaseret::brute_force_reconstruct(ok, 0, 1), std::invalid_argument);
}

TEST_CASE("injectivity probe: equivalent and separated pairs") {
  SplitMix64 gen(101);
  const Polynomial p = phaseret::random_polynomial(6, gen.next_u64());
  CHECK(phaseret::injectivity_probe(p, std::polar(1.0, 2.2) * p) <= 1e-13);

  CHECK(phaseret::injectivity_probe(make_poly({Complex(1, 0), Complex(2, 0)}),
                                    make_poly({Complex(1, 0), Complex(-2, 0)})) > 1e-6);

  // |p| == |q| == 1 on the circle, but the derivative block separates them
  const Polynomial one = make_poly({Complex(1, 0), Complex(0, 0)});
  const Polynomial z = make_poly({Complex(0, 0), Complex(1, 0)});
  const MeasurementSet mone = phaseret::measure(one);
  const MeasurementSet mz = phaseret::measure(z);
  for (std::size_t j = 0; j < mone.intensities_p.size(); ++j)
    CHECK(std::abs(mone.intensities_p[j] - mz.intensities_p[j]) <= 1e-15);
  CHECK(phaseret::injectivity_probe(one, z) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(phaseret::injectivity_probe(one, phaseret::random_polynomial(3, 1)),
                  std::invalid_argument);
}

TEST_CASE("probe at zero implies phase equivalence on seeded pairs") {
  SplitMix64 gen(103);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + gen.next_u64() % 5;
    const Polynomial p = phaseret::random_polynomial(n, gen.next_u64());
    const Polynomial q = std::polar(1.0, 2.0 * 3.14159265358979 * gen.next_double()) * p;
    if (phaseret::injectivity_probe(p, q) <= 1e-12)
      CHECK(phaseret::global_phase_distance(p, q) <= 1e-6);
  }
}

TEST_CASE("oracle agrees with the algebraic pipeline") {
  SplitMix64 gen(107);
  for (std::size_t n : {2u, 3u, 4u}) {
    for (int rep = 0; rep < 4; ++rep) {
      const Polynomial p = phaseret::random_polynomial(n, gen.next_u64());
      const MeasurementSet ms = phaseret::measure(p);
      const Polynomial alg = phaseret::reconstruct(ms);
      const phaseret::BruteForceResult bf =
          phaseret::brute_force_reconstruct(ms, 16, gen.next_u64());
      CHECK(phaseret::global_phase_distance(alg, bf.q) <= 1e-4 * (1.0 + p.norm()));
    }
  }
}

TEST_CASE("brute force is deterministic for fixed seed") {
  const MeasurementSet ms = phaseret::measure(phaseret::random_polynomial(3, 77));
  const auto a = phaseret::brute_force_reconstruct(ms, 8, 5);
  const auto b = phaseret::brute_force_reconstruct(ms, 8, 5);
  REQUIRE(a.q.n() == b.q.n());
  for (std::size_t i = 0; i < a.q.n(); ++i) CHECK(a.q[i] == b.q[i]);
  CHECK(a.residual == b.residual);
  CHECK(a.best_restart == b.best_restart);
}
