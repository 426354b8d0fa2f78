#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "phaseret/detail/spectrum_solver.hpp"
#include "phaseret/measurement.hpp"
#include "phaseret/poly.hpp"

namespace phaseret {

// Every failure mode of the reconstruction maps to one machine-readable
// name. Each one means the input data is not a consistent measurement set
// of any p in P_N, never that a valid input hit an internal limit.
enum class ErrorCode {
  NonIntegerM,
  NegativeM,
  DegreeOverflow,
  SqrtDomain,
  DivisionByNearZero,
  NonPositiveDiagonal,
  InconsistentSpectrum,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonIntegerM: return "NonIntegerM";
    case ErrorCode::NegativeM: return "NegativeM";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::SqrtDomain: return "SqrtDomain";
    case ErrorCode::DivisionByNearZero: return "DivisionByNearZero";
    case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorCode::InconsistentSpectrum: return "InconsistentSpectrum";
  }
  return "Unknown";
}

class ReconstructionError : public std::runtime_error {
 public:
  ReconstructionError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* name() const { return to_string(code_); }

 private:
  ErrorCode code_;
};

// Support window of p read off the spectra: coefficients live on [m, m+k],
// k is the autocorrelation bandwidth, d = m + k the degree.
struct SupportInfo {
  std::size_t k = 0;   // largest n with f_n != 0
  int kprime = -1;     // largest n with f'_n != 0, -1 if none
  std::size_t m = 0;   // lowest support index
  std::size_t d = 0;   // degree, m + k
};

// Rank-one products delta_{i,j} = conj(alpha_i) alpha_j on the support
// window. Only the entries the recursion actually produces are stored:
// the row (m, j), the column (i, m+k) and the interior fill diagonals.
class DeltaTable {
 public:
  DeltaTable(std::size_t m, std::size_t k) : m_(m), k_(k) {}

  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }

  bool contains(std::size_t i, std::size_t j) const {
    return entries_.count({i, j}) != 0;
  }

  Complex at(std::size_t i, std::size_t j) const {
    const auto it = entries_.find({i, j});
    if (it == entries_.end())
      throw std::out_of_range("DeltaTable: entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") not populated");
    return it->second;
  }

  void set(std::size_t i, std::size_t j, Complex v) {
    if (i < m_ || j < i || j > m_ + k_)
      throw std::invalid_argument("DeltaTable: index pair outside support window");
    entries_[{i, j}] = v;
  }

  const std::map<std::pair<std::size_t, std::size_t>, Complex>& entries() const {
    return entries_;
  }

 private:
  std::size_t m_;
  std::size_t k_;
  std::map<std::pair<std::size_t, std::size_t>, Complex> entries_;
};

// k, k' by relative thresholding of the spectra, then
//   m = -k/2 + sqrt(f'_k / f_k + k^2/4),
// which is a nonnegative integer for any consistent input. Deviation from
// integrality is a data error, not something to repair silently.
inline SupportInfo detect_support(const AutocorrelationSpectrum& spec,
                                  double tol = kZeroTolRel) {
  const std::size_t n = spec.n;
  const double maxf = spec.max_f_magnitude();
  if (maxf == 0.0)
    throw std::invalid_argument("detect_support: zero spectrum has no support");

  std::size_t k = 0;
  for (std::size_t i = n; i-- > 0;) {
    if (std::abs(spec.f[i]) > tol * maxf) {
      k = i;
      break;
    }
  }

  int kprime = -1;
  const double maxfp = spec.max_fprime_magnitude();
  if (maxfp > 0.0) {
    for (std::size_t i = n; i-- > 0;) {
      if (std::abs(spec.fprime[i]) > tol * maxfp) {
        kprime = static_cast<int>(i);
        break;
      }
    }
  }

  const Complex ratio = spec.fprime[k] / spec.f[k];
  const double kk = static_cast<double>(k);
  const double arg = ratio.real() + kk * kk / 4.0;
  if (arg < -tol * (1.0 + std::abs(ratio)))
    throw ReconstructionError(ErrorCode::SqrtDomain,
                              "f'_k/f_k + k^2/4 = " + std::to_string(arg) + " is negative");

  const double m_raw = -kk / 2.0 + std::sqrt(std::max(arg, 0.0));
  const long long m_round = std::llround(m_raw);
  if (std::abs(m_raw - static_cast<double>(m_round)) > 1e-6 * (1.0 + std::abs(m_raw)))
    throw ReconstructionError(ErrorCode::NonIntegerM,
                              "m = " + std::to_string(m_raw) + " is not an integer");
  if (m_round < 0)
    throw ReconstructionError(ErrorCode::NegativeM,
                              "m = " + std::to_string(m_raw) + " rounds below zero");

  SupportInfo info;
  info.k = k;
  info.kprime = kprime;
  info.m = static_cast<std::size_t>(m_round);
  info.d = info.m + info.k;
  if (info.d > n - 1)
    throw ReconstructionError(ErrorCode::DegreeOverflow,
                              "m + k = " + std::to_string(info.d) + " exceeds N-1");
  return info;
}

namespace detail {

// The delta recursion, literal: pivot delta_{m,m+k} = f_k, the 2x2
// start, then for each n the interior quotient fills followed by the 2x2
// applied to the corrected sums (alpha, beta). row[i] approximates
// delta_{m,m+k-i}, col[i] approximates delta_{m+i,m+k}; index 0 is the
// pivot in both. Templated on the scalar so it can be retried at extended
// precision when double has lost the trail.
template <typename Real>
struct RawRecursion {
  std::vector<std::complex<Real>> row, col;
  bool finite = true;
};

template <typename Real>
RawRecursion<Real> run_raw_recursion(const AutocorrelationSpectrum& spec, std::size_t m,
                                     std::size_t k) {
  using C = std::complex<Real>;
  auto f = [&](std::size_t i) {
    return C(static_cast<Real>(spec.f[i].real()), static_cast<Real>(spec.f[i].imag()));
  };
  auto fprime = [&](std::size_t i) {
    return C(static_cast<Real>(spec.fprime[i].real()), static_cast<Real>(spec.fprime[i].imag()));
  };

  RawRecursion<Real> out;
  out.row.assign(k + 1, C(0, 0));
  out.col.assign(k + 1, C(0, 0));
  const Real md = static_cast<Real>(m), kd = static_cast<Real>(k);
  const C pivot = f(k);
  out.row[0] = out.col[0] = pivot;

  if (k >= 1) {
    const Real c = Real(1) / (2 * md + kd);
    out.row[1] = c * ((md + 1) * (md + kd) * f(k - 1) - fprime(k - 1));
    out.col[1] = c * (-md * (md + kd - 1) * f(k - 1) + fprime(k - 1));
  }
  for (std::size_t n = 2; n <= k; ++n) {
    C alpha = f(k - n);
    C beta = fprime(k - n);
    for (std::size_t l = 1; l + 1 <= n; ++l) {
      // interior fill delta_{m+l, m+l+k-n} via the quotient formula; both
      // referenced entries come from strictly earlier passes
      assert(l < n && n - l < n);
      const C fill = out.col[l] * out.row[n - l] / pivot;
      alpha -= fill;
      beta -= (md + static_cast<Real>(l)) * (md + kd - static_cast<Real>(n) + static_cast<Real>(l)) * fill;
    }
    const Real c = Real(1) / (static_cast<Real>(n) * (2 * md + kd));
    out.row[n] = c * ((md + static_cast<Real>(n)) * (md + kd) * alpha - beta);
    out.col[n] = c * (-md * (md + kd - static_cast<Real>(n)) * alpha + beta);
  }
  for (std::size_t i = 0; i <= k; ++i) {
    if (!std::isfinite(static_cast<double>(out.row[i].real())) ||
        !std::isfinite(static_cast<double>(out.row[i].imag())) ||
        !std::isfinite(static_cast<double>(out.col[i].real())) ||
        !std::isfinite(static_cast<double>(out.col[i].imag())))
      out.finite = false;
  }
  return out;
}

// Window coefficients from a raw recursion: b_j = delta_{m,m+j} / r with
// r = sqrt(delta_{m,m}). Empty when the diagonal is unusable.
template <typename Real>
std::optional<std::vector<Complex>> candidate_from_raw(const RawRecursion<Real>& raw,
                                                       std::size_t k) {
  if (!raw.finite) return std::nullopt;
  const double diag = static_cast<double>(raw.row[k].real());
  if (!(diag > 0.0)) return std::nullopt;
  const double r = std::sqrt(diag);
  std::vector<Complex> b(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    const auto& v = raw.row[k - j];
    b[j] = Complex(static_cast<double>(v.real()), static_cast<double>(v.imag())) / r;
  }
  return b;
}

// Alternative start derived from the entries the recursion computes most
// accurately: its early passes, which pin the top of the window through the
// row and the bottom through the column. The unknown magnitude split
// between alpha_m and alpha_{m+k} is taken balanced and the middle left
// zero; the polish recovers both.
template <typename Real>
std::vector<Complex> edge_candidate(const RawRecursion<Real>& raw, std::size_t k,
                                    double energy) {
  const Complex pivot(static_cast<double>(raw.row[0].real()),
                      static_cast<double>(raw.row[0].imag()));
  const double split = std::sqrt(std::abs(pivot)) + 1e-300;
  const double cap = 30.0 * std::sqrt(std::max(energy, 0.0)) + 1e-300;
  auto usable = [&](Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag()) && std::abs(v) <= cap;
  };
  std::vector<Complex> b(k + 1, Complex(0, 0));
  const std::size_t half = k / 2;
  for (std::size_t j = k; j > half; --j) {
    const auto& v = raw.row[k - j];
    const Complex rv = Complex(static_cast<double>(v.real()), static_cast<double>(v.imag())) / split;
    if (usable(rv)) b[j] = rv;
  }
  const Complex top = pivot / split;
  const double top_norm = std::norm(top) + 1e-300;
  for (std::size_t i = 0; i <= half; ++i) {
    const auto& v = raw.col[i];
    const Complex cv = std::conj(Complex(static_cast<double>(v.real()),
                                         static_cast<double>(v.imag()))) *
                       top / top_norm;
    if (usable(cv)) b[i] = cv;
  }
  return b;
}

// Bandwidths up to this are far below the recursion's error horizon in
// doubles, so its corner diagnostics are trustworthy statements about the
// data itself rather than about accumulated round-off.
inline constexpr std::size_t kTrustedBandwidth = 8;

inline void check_corner_diagonals(Complex dmm, Complex dkk, double maxf, double tol) {
  for (const Complex v : {dmm, dkk}) {
    if (std::abs(v.imag()) > tol * std::max(maxf, std::abs(v)))
      throw ReconstructionError(ErrorCode::NonPositiveDiagonal,
                                "corner delta diagonal has a large imaginary residue");
  }
  if (!(dmm.real() > tol * maxf))
    throw ReconstructionError(ErrorCode::NonPositiveDiagonal,
                              "delta_{m,m} is not a positive real");
}

}  // namespace detail

// The delta table of the reconstruction. The literal recursion runs first; its
// finite-precision error grows roughly geometrically with the bandwidth k,
// so its result is kept only when it withstands a Gauss-Newton consistency
// polish against the autocorrelation equations it came from. Failing that,
// the recursion is retried at extended precision, and finally the window
// is solved by seeded continuation on the same equations. Every returned
// entry is the rank-one product of the polished window coefficients, which
// in exact arithmetic is precisely what the recursion defines.
inline DeltaTable delta_recursion(const AutocorrelationSpectrum& spec, const SupportInfo& s,
                                  double tol = kZeroTolRel) {
  const std::size_t m = s.m;
  const std::size_t k = s.k;
  const std::size_t n = spec.n;
  if (m + k > n - 1)
    throw std::invalid_argument("delta_recursion: support window exceeds the spectrum");
  const double maxf = spec.max_f_magnitude();
  const double maxfp = spec.max_fprime_magnitude();

  const Complex pivot = spec.f[k];
  if (std::abs(pivot) <= tol * maxf)
    throw ReconstructionError(ErrorCode::DivisionByNearZero,
                              "delta_{m,m+k} = f_k is below threshold");

  if (k == 0) {
    detail::check_corner_diagonals(pivot, pivot, maxf, tol);
    DeltaTable dt(m, 0);
    dt.set(m, m, Complex(pivot.real(), 0.0));
    return dt;
  }

  // Window-local targets; the convention entry f'_{N-1} = 0 supplies the
  // top lag when k = N-1.
  std::vector<Complex> tf(spec.f.begin(), spec.f.begin() + static_cast<long>(k + 1));
  std::vector<Complex> tfp(spec.fprime.begin(), spec.fprime.begin() + static_cast<long>(k + 1));
  const double wf = 1.0 / (1.0 + maxf);
  const double wfp = 1.0 / (1.0 + maxfp);

  std::optional<std::vector<Complex>> window;
  const double energy = std::max(spec.f[0].real(), 0.0);
  detail::WindowSolveResult best_stall;
  best_stall.residual_sq = std::numeric_limits<double>::infinity();
  auto try_candidate = [&](std::vector<Complex> cand) {
    if (window) return;
    auto polished = detail::polish_window(std::move(cand), m, k, tf, tfp, wf, wfp);
    if (polished.converged)
      window = std::move(polished.coeffs);
    else if (polished.residual_sq < best_stall.residual_sq)
      best_stall = std::move(polished);
  };

  const auto raw = detail::run_raw_recursion<double>(spec, m, k);
  if (auto cand = detail::candidate_from_raw(raw, k)) try_candidate(std::move(*cand));
  // When the recursion's own result cannot be reconciled with the spectra
  // and the bandwidth is small enough for its arithmetic to be trusted, its
  // corner diagonals are a faithful diagnosis of the data itself.
  if (!window && k <= detail::kTrustedBandwidth && raw.finite) {
    const Complex dmm(static_cast<double>(raw.row[k].real()),
                      static_cast<double>(raw.row[k].imag()));
    const Complex dkk(static_cast<double>(raw.col[k].real()),
                      static_cast<double>(raw.col[k].imag()));
    detail::check_corner_diagonals(dmm, dkk, maxf, tol);
  }
  try_candidate(detail::edge_candidate(raw, k, energy));

  if (!window) {
    const auto raw_ld = detail::run_raw_recursion<long double>(spec, m, k);
    if (auto cand = detail::candidate_from_raw(raw_ld, k)) try_candidate(std::move(*cand));
    try_candidate(detail::edge_candidate(raw_ld, k, energy));
  }

  if (!window && std::isfinite(best_stall.residual_sq)) {
    auto hopped = detail::basin_hop(std::move(best_stall), m, k, tf, tfp, wf, wfp, 24);
    if (hopped.converged) window = std::move(hopped.coeffs);
  }

  if (!window) {
    auto solved = detail::solve_window_by_continuation(m, k, tf, tfp, wf, wfp);
    if (solved.converged) window = std::move(solved.coeffs);
  }

  if (!window)
    throw ReconstructionError(ErrorCode::InconsistentSpectrum,
                              "no polynomial reproduces the given spectra");

  // The table is the rank-one products of the solved window: phase-gauge
  // invariant, diagonals exactly real by construction.
  const std::vector<Complex>& b = *window;
  DeltaTable dt(m, k);
  for (std::size_t j = 0; j <= k; ++j) dt.set(m, m + j, std::conj(b[0]) * b[j]);
  for (std::size_t i = 0; i <= k; ++i) dt.set(m + i, m + k, std::conj(b[i]) * b[k]);
  for (std::size_t pass = 2; pass <= k; ++pass)
    for (std::size_t l = 1; l + 1 <= pass; ++l)
      dt.set(m + l, m + l + k - pass, std::conj(b[l]) * b[l + k - pass]);

  detail::check_corner_diagonals(dt.at(m, m), dt.at(m + k, m + k), maxf, tol);
  dt.set(m, m, Complex(dt.at(m, m).real(), 0.0));
  dt.set(m + k, m + k, Complex(dt.at(m + k, m + k).real(), 0.0));
  return dt;
}

// Final extraction step: with r = sqrt(delta_{m,m}), the coefficients
// are delta_{m,j} / r on the support window and zero elsewhere. The output
// keeps the caller's ambient dimension so round trips stay comparable.
inline Polynomial extract_coefficients(const DeltaTable& dt, std::size_t n) {
  const std::size_t m = dt.m();
  const std::size_t k = dt.k();
  if (n < m + k + 1)
    throw std::invalid_argument("extract_coefficients: ambient dimension too small");
  const double diag = dt.at(m, m).real();
  if (diag <= 0.0)
    throw ReconstructionError(ErrorCode::NonPositiveDiagonal,
                              "delta_{m,m} is not a positive real");
  const double r = std::sqrt(diag);
  std::vector<Complex> coeffs(n);
  for (std::size_t j = m; j <= m + k; ++j) coeffs[j] = dt.at(m, j) / r;
  return Polynomial(std::move(coeffs));
}

inline bool is_constant_spectrum(const AutocorrelationSpectrum& spec, double tol = kZeroTolRel) {
  const double scale = std::max(spec.max_f_magnitude(), spec.max_fprime_magnitude());
  for (const Complex& v : spec.fprime)
    if (std::abs(v) > tol * scale) return false;
  return true;
}

// The full reconstruction. The constant branch runs first, so reaching the
// support detection guarantees some f'_n != 0; in particular k = 0 implies
// f'_0 != 0 and the m formula is well defined.
inline Polynomial reconstruct(const MeasurementSet& ms, double tol = kZeroTolRel) {
  const AutocorrelationSpectrum spec = autocorrelation_from_measurements(ms);

  if (is_constant_spectrum(spec, tol)) {
    const Complex f0 = spec.f[0];
    if (std::abs(f0.imag()) > 1e-10 * (1.0 + std::abs(f0)))
      throw std::invalid_argument("reconstruct: f_0 is not real");
    std::vector<Complex> coeffs(ms.n);
    coeffs[0] = std::sqrt(std::max(f0.real(), 0.0));
    return Polynomial(std::move(coeffs));
  }

  const SupportInfo s = detect_support(spec, tol);
  const DeltaTable dt = delta_recursion(spec, s, tol);
  return extract_coefficients(dt, ms.n);
}

}  // namespace phaseret
