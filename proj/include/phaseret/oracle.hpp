#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseret/log.hpp"
#include "phaseret/measurement.hpp"
#include "phaseret/poly.hpp"
#include "phaseret/rng.hpp"

namespace phaseret {

struct BruteForceResult {
  Polynomial q;
  double residual = 0.0;       // squared intensity mismatch at the returned point
  std::size_t best_restart = 0;
  bool converged = false;      // residual at or below the consistency threshold
};

// Sum of squared mismatches between the intensities of q and the recorded
// measurements, over the uniform measurement nodes.
inline double measurement_residual(const Polynomial& q, const MeasurementSet& ms) {
  if (q.n() != ms.n)
    throw std::invalid_argument("measurement_residual: dimension mismatch");
  const auto vp = detail::magnitudes_at(q, roots_of_unity(2 * ms.n - 1));
  const auto vdp = detail::magnitudes_at(q.derivative(), roots_of_unity(2 * ms.n - 3));
  double r = 0.0;
  for (std::size_t j = 0; j < vp.size(); ++j) {
    const double e = vp[j] - ms.intensities_p[j];
    r += e * e;
  }
  for (std::size_t j = 0; j < vdp.size(); ++j) {
    const double e = vdp[j] - ms.intensities_dp[j];
    r += e * e;
  }
  return r;
}

namespace detail {

// Residual as a function of the 2N real parameters (re, im interleaved),
// with the measurement nodes precomputed.
class ResidualLandscape {
 public:
  explicit ResidualLandscape(const MeasurementSet& ms)
      : ms_(ms),
        nodes_w_(evaluate_points(roots_of_unity(2 * ms.n - 1))),
        nodes_z_(evaluate_points(roots_of_unity(2 * ms.n - 3))) {}

  std::size_t dim() const { return 2 * ms_.n; }

  double operator()(const std::vector<double>& x) const {
    double r = 0.0;
    for (std::size_t j = 0; j < nodes_w_.size(); ++j) {
      const double e = std::abs(horner(x, nodes_w_[j])) - ms_.intensities_p[j];
      r += e * e;
    }
    for (std::size_t j = 0; j < nodes_z_.size(); ++j) {
      const double e = std::abs(horner_derivative(x, nodes_z_[j])) - ms_.intensities_dp[j];
      r += e * e;
    }
    return r;
  }

  Polynomial to_polynomial(const std::vector<double>& x) const {
    std::vector<Complex> c(ms_.n);
    for (std::size_t i = 0; i < ms_.n; ++i) c[i] = Complex(x[2 * i], x[2 * i + 1]);
    return Polynomial(std::move(c));
  }

 private:
  static std::vector<Complex> evaluate_points(const NodeSet& nodes) {
    std::vector<Complex> pts(nodes.size());
    for (std::size_t j = 0; j < pts.size(); ++j) pts[j] = std::polar(1.0, nodes.angles[j]);
    return pts;
  }

  Complex horner(const std::vector<double>& x, Complex z) const {
    const std::size_t n = ms_.n;
    Complex acc(x[2 * (n - 1)], x[2 * (n - 1) + 1]);
    for (std::size_t i = n - 1; i-- > 0;) acc = acc * z + Complex(x[2 * i], x[2 * i + 1]);
    return acc;
  }

  Complex horner_derivative(const std::vector<double>& x, Complex z) const {
    const std::size_t n = ms_.n;
    Complex acc = static_cast<double>(n - 1) * Complex(x[2 * (n - 1)], x[2 * (n - 1) + 1]);
    for (std::size_t i = n - 1; i-- > 1;)
      acc = acc * z + static_cast<double>(i) * Complex(x[2 * i], x[2 * i + 1]);
    return n >= 2 ? acc : Complex(0.0, 0.0);
  }

  const MeasurementSet& ms_;
  std::vector<Complex> nodes_w_;
  std::vector<Complex> nodes_z_;
};

}  // namespace detail

// Multi-start local descent on the measurement residual: forward-difference
// gradients on the 2N real parameters (relative step 1e-6), steepest-descent
// direction with a backtracking (Armijo) line search, stopping at gradient
// norm 1e-10 or 5000 iterations. Restart starting points come from the
// seeded generator, scaled to the energy the measurements imply. The best
// residual wins; ties keep the earliest restart. Shares nothing with the
// algebraic pipeline beyond polynomial evaluation, so agreement between the
// two is evidence rather than tautology.
inline BruteForceResult brute_force_reconstruct(const MeasurementSet& ms, std::size_t restarts,
                                                std::uint64_t seed) {
  if (ms.n > 4)
    throw std::invalid_argument("brute_force_reconstruct: desk scale only (n <= 4)");
  if (restarts == 0)
    throw std::invalid_argument("brute_force_reconstruct: need at least one restart");

  const detail::ResidualLandscape landscape(ms);
  const std::size_t dim = landscape.dim();

  double data_scale_sq = 0.0;
  for (double v : ms.intensities_p) data_scale_sq += v * v;
  const double energy = data_scale_sq / static_cast<double>(ms.intensities_p.size());
  for (double v : ms.intensities_dp) data_scale_sq += v * v;

  // A consistent measurement set has global minimum exactly 0; residuals at
  // this level mean the minimum was found and further restarts are moot.
  const double found_threshold = 1e-16 * (1.0 + data_scale_sq);
  constexpr double kFdStep = 1e-6;
  constexpr double kGradTol = 1e-10;
  constexpr std::size_t kMaxIterations = 5000;
  constexpr double kArmijo = 1e-4;

  SplitMix64 gen(seed);
  std::vector<double> best_x;
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t best_restart = 0;

  for (std::size_t restart = 0; restart < restarts; ++restart) {
    if (best_residual <= found_threshold) break;
    SplitMix64 sub = gen.split();

    std::vector<double> x(dim);
    const double coeff_scale = std::sqrt(std::max(energy, 1e-30) / static_cast<double>(ms.n));
    for (std::size_t i = 0; i < ms.n; ++i) {
      const Complex c = coeff_scale * sub.next_complex_normal();
      x[2 * i] = c.real();
      x[2 * i + 1] = c.imag();
    }

    double fx = landscape(x);
    std::vector<double> grad(dim), trial(dim);
    double step_hint = 1.0;

    for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
      double grad_norm_sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double h = kFdStep * (1.0 + std::abs(x[i]));
        const double saved = x[i];
        x[i] = saved + h;
        grad[i] = (landscape(x) - fx) / h;
        x[i] = saved;
        grad_norm_sq += grad[i] * grad[i];
      }
      if (std::sqrt(grad_norm_sq) <= kGradTol) break;

      // Backtracking from an adaptive initial step.
      double t = step_hint;
      bool accepted = false;
      while (t > 1e-18) {
        for (std::size_t i = 0; i < dim; ++i) trial[i] = x[i] - t * grad[i];
        const double ft = landscape(trial);
        if (ft <= fx - kArmijo * t * grad_norm_sq) {
          x.swap(trial);
          fx = ft;
          step_hint = std::min(t * 2.0, 1e6);
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
    }

    if (fx < best_residual) {
      best_residual = fx;
      best_x = x;
      best_restart = restart;
    }
  }

  BruteForceResult result{landscape.to_polynomial(best_x), best_residual, best_restart,
                          best_residual <= 1e-6 * (1.0 + data_scale_sq)};
  if (!result.converged)
    log_info("brute_force_reconstruct: budget exhausted, residual " +
             std::to_string(best_residual));
  return result;
}

// Sup-norm separation of the two measurement vectors. Zero exactly when
// p ~ q in exact arithmetic; the probe is behavioral evidence for that.
inline double injectivity_probe(const Polynomial& p, const Polynomial& q) {
  if (p.n() != q.n())
    throw std::invalid_argument("injectivity_probe: dimension mismatch");
  const MeasurementSet mp = measure(p);
  const MeasurementSet mq = measure(q);
  double sup = 0.0;
  for (std::size_t j = 0; j < mp.intensities_p.size(); ++j)
    sup = std::max(sup, std::abs(mp.intensities_p[j] - mq.intensities_p[j]));
  for (std::size_t j = 0; j < mp.intensities_dp.size(); ++j)
    sup = std::max(sup, std::abs(mp.intensities_dp[j] - mq.intensities_dp[j]));
  return sup;
}

}  // namespace phaseret
