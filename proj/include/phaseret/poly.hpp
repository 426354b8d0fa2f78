#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "phaseret/rng.hpp"

namespace phaseret {

using Complex = std::complex<double>;

// A coefficient or spectrum entry counts as zero when its magnitude is at
// most kZeroTolRel times the largest magnitude in the same vector. The same
// constant is the default data-consistency tolerance of the reconstruction
// pipeline, so all thresholding decisions stay mutually consistent.
inline constexpr double kZeroTolRel = 1e-8;

inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Element of P_N: complex coefficients in ascending powers, coeffs[k] is the
// coefficient of z^k. The ambient dimension n() is the stored length, not
// the degree; trailing zeros are meaningful for dimension-stable round trips.
class Polynomial {
 public:
  Polynomial() : coeffs_(1) {}

  explicit Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
      throw std::invalid_argument("Polynomial: coefficient list must be nonempty");
    for (const Complex& c : coeffs_)
      if (!is_finite(c))
        throw std::invalid_argument("Polynomial: coefficients must be finite");
  }

  static Polynomial zero(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Polynomial::zero: n must be positive");
    return Polynomial(std::vector<Complex>(n));
  }

  std::size_t n() const { return coeffs_.size(); }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  const Complex& operator[](std::size_t k) const { return coeffs_[k]; }

  double max_coeff_magnitude() const {
    double m = 0.0;
    for (const Complex& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  // Largest index holding a nonzero coefficient under the relative zero
  // threshold; -1 for the zero polynomial.
  int degree(double tol_rel = kZeroTolRel) const {
    const double thresh = tol_rel * max_coeff_magnitude();
    for (std::size_t k = coeffs_.size(); k-- > 0;)
      if (std::abs(coeffs_[k]) > thresh) return static_cast<int>(k);
    return -1;
  }

  // Smallest index holding a nonzero coefficient, or -1 for zero.
  int lowest_index(double tol_rel = kZeroTolRel) const {
    const double thresh = tol_rel * max_coeff_magnitude();
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
      if (std::abs(coeffs_[k]) > thresh) return static_cast<int>(k);
    return -1;
  }

  double norm() const {
    double s = 0.0;
    for (const Complex& c : coeffs_) s += std::norm(c);
    return std::sqrt(s);
  }

  // Horner evaluation, highest coefficient first.
  Complex evaluate(Complex z) const {
    Complex acc = coeffs_.back();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * z + coeffs_[k];
    return acc;
  }

  // Termwise d/dz; the ambient dimension shrinks by one but never below 1,
  // so constants differentiate to the zero polynomial in P_1.
  Polynomial derivative() const {
    const std::size_t nd = std::max<std::size_t>(coeffs_.size() - 1, 1);
    std::vector<Complex> d(nd);
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
      d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

 private:
  std::vector<Complex> coeffs_;
};

inline Polynomial operator*(Complex a, const Polynomial& p) {
  std::vector<Complex> c(p.coeffs());
  for (Complex& x : c) x *= a;
  return Polynomial(std::move(c));
}

inline Polynomial operator+(const Polynomial& p, const Polynomial& q) {
  if (p.n() != q.n())
    throw std::invalid_argument("Polynomial: dimension mismatch in +");
  std::vector<Complex> c(p.coeffs());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += q[k];
  return Polynomial(std::move(c));
}

inline Polynomial operator-(const Polynomial& p, const Polynomial& q) {
  return p + (Complex(-1.0, 0.0) * q);
}

// <p, q> = sum conj(p_k) q_k, conjugate-linear in the first slot. This is
// the conjugation pattern of the autocorrelation sums.
inline Complex inner_product(const Polynomial& p, const Polynomial& q) {
  if (p.n() != q.n())
    throw std::invalid_argument("inner_product: dimension mismatch");
  Complex s = 0.0;
  for (std::size_t k = 0; k < p.n(); ++k) s += std::conj(p[k]) * q[k];
  return s;
}

// min over phases phi of ||p - e^{i phi} q||_2. The closed-form value is
// sqrt(||p||^2 + ||q||^2 - 2 |<p, q>|); it is evaluated through the
// minimizing phase e^{i phi*} = conj(<p, q>) / |<p, q>| as a direct sum of
// squared differences, because the subtractive form loses half the digits
// near zero and cannot meet the 1e-12 equivalence bound in doubles.
inline double global_phase_distance(const Polynomial& p, const Polynomial& q) {
  if (p.n() != q.n())
    throw std::invalid_argument("global_phase_distance: dimension mismatch");
  const Complex w = inner_product(p, q);
  const Complex rot = std::abs(w) > 0.0 ? std::conj(w) / std::abs(w) : Complex(1.0, 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < p.n(); ++k) s += std::norm(p[k] - rot * q[k]);
  return std::sqrt(s);
}

// Deterministic representative of the equivalence class [p]: rotate so the
// first nonzero coefficient is real and positive. The zero polynomial is a
// fixed point.
inline Polynomial canonical_phase(const Polynomial& p) {
  const int j = p.lowest_index();
  if (j < 0) return p;
  const Complex pivot = p[static_cast<std::size_t>(j)];
  const Complex rot = std::conj(pivot) / std::abs(pivot);
  return rot * p;
}

// Inclusive index range [lo, hi].
struct IndexRange {
  std::size_t lo;
  std::size_t hi;
};

// Seeded i.i.d. complex standard normal coefficients on the support window,
// exact zeros outside. Identical (n, seed, support) always reproduces the
// same polynomial.
inline Polynomial random_polynomial(std::size_t n, std::uint64_t seed,
                                    std::optional<IndexRange> support = {}) {
  if (n == 0)
    throw std::invalid_argument("random_polynomial: n must be positive");
  const IndexRange range = support.value_or(IndexRange{0, n - 1});
  if (range.lo > range.hi)
    throw std::invalid_argument("random_polynomial: empty support");
  if (range.hi >= n)
    throw std::invalid_argument("random_polynomial: support exceeds [0, n-1]");
  SplitMix64 gen(seed);
  std::vector<Complex> c(n);
  for (std::size_t k = range.lo; k <= range.hi; ++k)
    c[k] = gen.next_complex_normal();
  return Polynomial(std::move(c));
}

}  // namespace phaseret
