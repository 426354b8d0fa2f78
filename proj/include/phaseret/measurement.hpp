#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phaseret/linalg.hpp"
#include "phaseret/log.hpp"
#include "phaseret/poly.hpp"

namespace phaseret {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angular separation below which two unit-circle nodes are treated as one
// and the interpolation system is numerically singular at double precision.
inline constexpr double kNodeSepTol = 1e-12;

// Condition estimates beyond this only warn; uniqueness is guaranteed for
// any distinct nodes, conditioning is the caller's responsibility.
inline constexpr double kConditionWarnThreshold = 1e12;

// Unit-circle evaluation points, stored as angles in [0, 2pi);
// node j is e^{i angle_j}.
struct NodeSet {
  std::vector<double> angles;

  NodeSet() = default;
  explicit NodeSet(std::vector<double> a) : angles(std::move(a)) {
    for (double& t : angles) {
      if (!std::isfinite(t))
        throw std::invalid_argument("NodeSet: angles must be finite");
      t = std::fmod(t, kTwoPi);
      if (t < 0.0) t += kTwoPi;
    }
  }

  std::size_t size() const { return angles.size(); }

  double min_circular_gap() const {
    if (angles.size() < 2) return kTwoPi;
    std::vector<double> sorted(angles);
    std::sort(sorted.begin(), sorted.end());
    double gap = kTwoPi - sorted.back() + sorted.front();
    for (std::size_t i = 1; i < sorted.size(); ++i)
      gap = std::min(gap, sorted[i] - sorted[i - 1]);
    return gap;
  }

  void require_distinct() const {
    if (min_circular_gap() <= kNodeSepTol)
      throw std::invalid_argument("NodeSet: nodes are not mutually distinct");
  }
};

inline NodeSet roots_of_unity(std::size_t m) {
  if (m == 0) throw std::invalid_argument("roots_of_unity: m must be positive");
  std::vector<double> angles(m);
  for (std::size_t j = 0; j < m; ++j)
    angles[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
  return NodeSet(std::move(angles));
}

// The 4N-4 intensity measurements: |p| at the (2N-1)-st roots of unity and
// |p'| at the (2N-3)-rd roots of unity, j ascending. Magnitudes are stored
// as measured; squaring happens only inside the spectrum computation.
struct MeasurementSet {
  std::size_t n = 2;
  std::vector<double> intensities_p;
  std::vector<double> intensities_dp;

  MeasurementSet() = default;
  MeasurementSet(std::size_t n_, std::vector<double> ip, std::vector<double> idp)
      : n(n_), intensities_p(std::move(ip)), intensities_dp(std::move(idp)) {
    if (n < 2) throw std::invalid_argument("MeasurementSet: n must be at least 2");
    if (intensities_p.size() != 2 * n - 1 || intensities_dp.size() != 2 * n - 3)
      throw std::invalid_argument("MeasurementSet: intensity counts must be 2n-1 and 2n-3");
    for (double v : intensities_p)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("MeasurementSet: intensities must be finite and nonnegative");
    for (double v : intensities_dp)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("MeasurementSet: intensities must be finite and nonnegative");
  }
};

// Same intensities taken at caller-chosen distinct unit-circle nodes.
struct GeneralizedMeasurementSet {
  std::size_t n = 2;
  NodeSet nodes_w;
  NodeSet nodes_z;
  std::vector<double> intensities_p;
  std::vector<double> intensities_dp;
};

// Autocorrelation spectra of p and p': f[n] and fprime[n] for n = 0..N-1,
// where fprime[N-1] is the stored convention entry 0.
struct AutocorrelationSpectrum {
  std::size_t n = 1;
  std::vector<Complex> f;
  std::vector<Complex> fprime;

  double max_f_magnitude() const {
    double m = 0.0;
    for (const Complex& v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double max_fprime_magnitude() const {
    double m = 0.0;
    for (const Complex& v : fprime) m = std::max(m, std::abs(v));
    return m;
  }
};

// Two-sided exponential sum sum_{n=-m}^{m} a_n e^{int}; a is indexed by
// n + m.
struct TrigPolynomial {
  std::size_t m = 0;
  std::vector<Complex> a;

  Complex coeff(int n) const {
    const int idx = n + static_cast<int>(m);
    if (idx < 0 || idx >= static_cast<int>(a.size()))
      throw std::out_of_range("TrigPolynomial::coeff: index outside [-m, m]");
    return a[static_cast<std::size_t>(idx)];
  }

  Complex evaluate(double t) const {
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double nn = static_cast<double>(static_cast<int>(i) - static_cast<int>(m));
      s += a[i] * std::polar(1.0, nn * t);
    }
    return s;
  }

  // Real-valuedness on the circle is equivalent to a_{-n} == conj(a_n).
  bool is_real(double tol = 1e-10) const {
    double amax = 0.0;
    for (const Complex& v : a) amax = std::max(amax, std::abs(v));
    for (int nn = 0; nn <= static_cast<int>(m); ++nn)
      if (std::abs(coeff(-nn) - std::conj(coeff(nn))) > tol * std::max(amax, 1.0))
        return false;
    return true;
  }
};

namespace detail {

inline std::vector<Complex> evaluate_at(const Polynomial& p, const NodeSet& nodes) {
  std::vector<Complex> out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out[j] = p.evaluate(std::polar(1.0, nodes.angles[j]));
  return out;
}

inline std::vector<double> magnitudes_at(const Polynomial& p, const NodeSet& nodes) {
  std::vector<double> out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out[j] = std::abs(p.evaluate(std::polar(1.0, nodes.angles[j])));
  return out;
}

// (1/L) sum_j values[j] e^{-2 pi i j n / L}. The twiddle argument is
// reduced modulo L before the trig call to keep it small.
inline Complex dft_coefficient(const std::vector<double>& values, std::size_t order) {
  const std::size_t len = values.size();
  Complex s = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t r = (j * order) % len;
    s += values[j] * std::polar(1.0, -kTwoPi * static_cast<double>(r) / static_cast<double>(len));
  }
  return s / static_cast<double>(len);
}

}  // namespace detail

// The standard measurement set: |p| at the (2N-1)-st and |p'| at the
// (2N-3)-rd roots of unity, 4N-4 numbers in total.
inline MeasurementSet measure(const Polynomial& p) {
  const std::size_t n = p.n();
  if (n < 2) throw std::invalid_argument("measure: ambient dimension must be at least 2");
  return MeasurementSet(n, detail::magnitudes_at(p, roots_of_unity(2 * n - 1)),
                        detail::magnitudes_at(p.derivative(), roots_of_unity(2 * n - 3)));
}

// The generalized model: any 2N-1 and 2N-3 mutually distinct unit-circle
// nodes work.
inline GeneralizedMeasurementSet measure_at_nodes(const Polynomial& p, const NodeSet& nodes_w,
                                                  const NodeSet& nodes_z) {
  const std::size_t n = p.n();
  if (n < 2) throw std::invalid_argument("measure_at_nodes: ambient dimension must be at least 2");
  if (nodes_w.size() != 2 * n - 1 || nodes_z.size() != 2 * n - 3)
    throw std::invalid_argument("measure_at_nodes: node counts must be 2N-1 and 2N-3");
  nodes_w.require_distinct();
  nodes_z.require_distinct();
  GeneralizedMeasurementSet gm;
  gm.n = n;
  gm.nodes_w = nodes_w;
  gm.nodes_z = nodes_z;
  gm.intensities_p = detail::magnitudes_at(p, nodes_w);
  gm.intensities_dp = detail::magnitudes_at(p.derivative(), nodes_z);
  return gm;
}

// Unique degree <= m trig polynomial through 2m+1 distinct samples. The
// interpolation reduces to an algebraic problem: with g_k = e^{im t_k} f(t_k)
// the polynomial P(z) = sum_c x_c z^c of degree <= 2m satisfies
// P(e^{it_k}) = g_k, and a_n is the coefficient x_{n+m}. The Vandermonde-type
// system is solved by pivoted dense LU.
inline TrigPolynomial trig_interpolate(const std::vector<Complex>& values, const NodeSet& nodes,
                                       std::size_t m) {
  const std::size_t count = 2 * m + 1;
  if (values.size() != count || nodes.size() != count)
    throw std::invalid_argument("trig_interpolate: need exactly 2m+1 values and nodes");
  nodes.require_distinct();

  std::vector<Complex> a(count * count);
  std::vector<Complex> rhs(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Complex z = std::polar(1.0, nodes.angles[k]);
    Complex pw = 1.0;
    for (std::size_t c = 0; c < count; ++c) {
      a[k * count + c] = pw;
      pw *= z;
    }
    rhs[k] = std::polar(1.0, static_cast<double>(m) * nodes.angles[k]) * values[k];
  }

  auto lu = detail::lu_solve(std::move(a), std::move(rhs));
  if (lu.condition_estimate > kConditionWarnThreshold)
    log_info("trig_interpolate: interpolation system nearly singular, condition estimate " +
             std::to_string(lu.condition_estimate));
  return TrigPolynomial{m, std::move(lu.solution)};
}

inline TrigPolynomial trig_interpolate(const std::vector<double>& values, const NodeSet& nodes,
                                       std::size_t m) {
  return trig_interpolate(std::vector<Complex>(values.begin(), values.end()), nodes, m);
}

// Spectra from the uniform-node data:
//   f_n  = 1/(2N-1) sum_j |p(w^j)|^2  e^{-2 pi i j n/(2N-1)},  n = 0..N-1
//   f'_n = 1/(2N-3) sum_j |p'(w^j)|^2 e^{-2 pi i j n/(2N-3)},  n = 0..N-2
// with the convention entry f'_{N-1} = 0. Direct O(N^2) summation; the odd
// lengths make a power-of-two FFT useless here and the sizes are desk scale.
inline AutocorrelationSpectrum autocorrelation_from_measurements(const MeasurementSet& ms) {
  const std::size_t n = ms.n;
  std::vector<double> sq_p(ms.intensities_p.size());
  for (std::size_t j = 0; j < sq_p.size(); ++j)
    sq_p[j] = ms.intensities_p[j] * ms.intensities_p[j];
  std::vector<double> sq_dp(ms.intensities_dp.size());
  for (std::size_t j = 0; j < sq_dp.size(); ++j)
    sq_dp[j] = ms.intensities_dp[j] * ms.intensities_dp[j];

  AutocorrelationSpectrum spec;
  spec.n = n;
  spec.f.resize(n);
  spec.fprime.assign(n, Complex(0.0, 0.0));
  for (std::size_t order = 0; order < n; ++order)
    spec.f[order] = detail::dft_coefficient(sq_p, order);
  for (std::size_t order = 0; order + 1 < n; ++order)
    spec.fprime[order] = detail::dft_coefficient(sq_dp, order);
  return spec;
}

// The same spectra straight from the coefficients:
//   f_n  = sum_l conj(a_l) a_{l+n},            f'_n = sum_l l(l+n) conj(a_l) a_{l+n}.
// Serves as the independent oracle for autocorrelation_from_measurements.
inline AutocorrelationSpectrum autocorrelation_from_coefficients(const Polynomial& p) {
  const std::size_t n = p.n();
  AutocorrelationSpectrum spec;
  spec.n = n;
  spec.f.resize(n);
  spec.fprime.assign(n, Complex(0.0, 0.0));
  for (std::size_t lag = 0; lag < n; ++lag) {
    Complex s = 0.0;
    for (std::size_t l = 0; l + lag < n; ++l) s += std::conj(p[l]) * p[l + lag];
    spec.f[lag] = s;
  }
  for (std::size_t lag = 0; lag + 1 < n; ++lag) {
    Complex s = 0.0;
    for (std::size_t l = 1; l + lag < n; ++l)
      s += static_cast<double>(l) * static_cast<double>(l + lag) * std::conj(p[l]) * p[l + lag];
    spec.fprime[lag] = s;
  }
  return spec;
}

// Bridge from arbitrary-node data to the uniform-node pipeline: |p|^2 and
// |p'|^2 are trig polynomials of degrees <= N-1 and <= N-2, so 2N-1 and 2N-3
// distinct samples pin them down; resampling at the roots of unity reduces
// to the measurement set the reconstruction expects. Resampled squares are real up
// to conditioning error; the imaginary part is dropped and small negatives
// clamp to zero before the square root.
inline MeasurementSet resample_to_uniform(const GeneralizedMeasurementSet& gm) {
  const std::size_t n = gm.n;
  if (n < 2) throw std::invalid_argument("resample_to_uniform: n must be at least 2");
  if (gm.intensities_p.size() != 2 * n - 1 || gm.intensities_dp.size() != 2 * n - 3)
    throw std::invalid_argument("resample_to_uniform: intensity counts must be 2N-1 and 2N-3");

  auto resample = [](const std::vector<double>& intensities, const NodeSet& nodes,
                     std::size_t deg) {
    std::vector<Complex> squares(intensities.size());
    for (std::size_t j = 0; j < intensities.size(); ++j)
      squares[j] = intensities[j] * intensities[j];
    const TrigPolynomial tp = trig_interpolate(squares, nodes, deg);
    const NodeSet uniform = roots_of_unity(2 * deg + 1);
    std::vector<double> out(uniform.size());
    for (std::size_t j = 0; j < uniform.size(); ++j)
      out[j] = std::sqrt(std::max(tp.evaluate(uniform.angles[j]).real(), 0.0));
    return out;
  };

  return MeasurementSet(n, resample(gm.intensities_p, gm.nodes_w, n - 1),
                        resample(gm.intensities_dp, gm.nodes_z, n - 2));
}

}  // namespace phaseret
