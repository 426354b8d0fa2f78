#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "phaseret/linalg.hpp"
#include "phaseret/poly.hpp"
#include "phaseret/rng.hpp"

namespace phaseret::detail {

// Least-squares view of the autocorrelation equations restricted to a
// support window [m, m+k]. Unknowns are the window coefficients
// b_i = alpha_{m+i}; the residuals are the complex mismatches of
//   f_lag  = sum_i            conj(b_i) b_{i+lag}
//   f'_lag = sum_i (m+i)(m+i+lag) conj(b_i) b_{i+lag}   (absolute index >= 1)
// for lag = 0..k, each block scaled by its own weight so both contribute
// comparably. Instances are cheap, single-threaded scratch holders; use one
// per solve.
class SpectrumSystem {
 public:
  SpectrumSystem(std::size_t m, std::size_t k, std::vector<Complex> f_target,
                 std::vector<Complex> fp_target, double wf, double wfp)
      : m_(m),
        k_(k),
        tf_(std::move(f_target)),
        tfp_(std::move(fp_target)),
        wf_(wf),
        wfp_(wfp),
        fp_lags_(m == 0 ? k : k + 1) {}

  std::size_t window_size() const { return k_ + 1; }
  std::size_t residual_count() const { return 2 * ((k_ + 1) + fp_lags_); }

  void set_target(std::vector<Complex> f_target, std::vector<Complex> fp_target) {
    tf_ = std::move(f_target);
    tfp_ = std::move(fp_target);
  }

  // Forward model over the window.
  void model(const std::vector<Complex>& b, std::vector<Complex>& f,
             std::vector<Complex>& fp) const {
    const std::size_t w = k_ + 1;
    f.assign(w, Complex(0, 0));
    fp.assign(w, Complex(0, 0));
    for (std::size_t lag = 0; lag < w; ++lag) {
      Complex sf(0, 0), sfp(0, 0);
      for (std::size_t i = 0; i + lag < w; ++i) {
        const Complex term = std::conj(b[i]) * b[i + lag];
        sf += term;
        const double lo = static_cast<double>(m_ + i);
        if (lo > 0.0) sfp += lo * static_cast<double>(m_ + i + lag) * term;
      }
      f[lag] = sf;
      fp[lag] = sfp;
    }
  }

  double weighted_residual_sq(const std::vector<Complex>& b) const {
    std::vector<Complex> f, fp;
    model(b, f, fp);
    double s = 0.0;
    for (std::size_t lag = 0; lag <= k_; ++lag) s += std::norm(wf_ * (f[lag] - tf_[lag]));
    for (std::size_t lag = 0; lag < fp_lags_; ++lag) s += std::norm(wfp_ * (fp[lag] - tfp_[lag]));
    return s;
  }

  // Levenberg-damped Gauss-Newton. Returns the final squared residual;
  // stops when the step shrinks below rel_step_tol * (1 + ||b||), or when
  // give_up_above is set and progress has stalled far from that level.
  // After each accepted full step, a few chord iterations reuse the stale
  // Jacobian and its factorization; they cost a model evaluation instead of
  // a refactorization and usually finish the local convergence.
  double solve(std::vector<Complex>& b, int max_iters, double rel_step_tol,
               double give_up_above = 0.0) {
    double res_checkpoint = std::numeric_limits<double>::infinity();
    const std::size_t w = k_ + 1;
    const std::size_t params = 2 * w;
    const std::size_t rows = residual_count();
    jac_.assign(rows * params, 0.0);
    res_.assign(rows, 0.0);
    double lambda_seed = 1e-10;

    auto step_small = [&](double step_norm) {
      double bscale = 0.0;
      for (const Complex& v : b) bscale += std::norm(v);
      return std::sqrt(step_norm) <= rel_step_tol * (1.0 + std::sqrt(bscale));
    };

    for (int iter = 0; iter < max_iters; ++iter) {
      fill_residuals(b);
      fill_jacobian(b);

      jtj_.assign(params * params, 0.0);
      jtr_.assign(params, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* jrow = &jac_[r * params];
        const double rv = res_[r];
        for (std::size_t a = 0; a < params; ++a) {
          const double ja = jrow[a];
          jtr_[a] += ja * rv;
          double* out = &jtj_[a * params];
          for (std::size_t c = a; c < params; ++c) out[c] += ja * jrow[c];
        }
      }
      for (std::size_t a = 0; a < params; ++a)
        for (std::size_t c = 0; c < a; ++c) jtj_[a * params + c] = jtj_[c * params + a];

      double base = 0.0;
      for (double v : res_) base += v * v;

      double lambda = lambda_seed;
      bool accepted = false;
      double step_norm = 0.0;
      LuFactorsT<double> factors;
      for (int attempt = 0; attempt < 12 && !accepted; ++attempt, lambda *= 10.0) {
        std::vector<double> a_mat(jtj_);
        std::vector<double> rhs(params);
        for (std::size_t i = 0; i < params; ++i) {
          a_mat[i * params + i] += lambda * (jtj_[i * params + i] + 1e-300);
          rhs[i] = -jtr_[i];
        }
        try {
          factors = LuFactorsT<double>(std::move(a_mat));
        } catch (const std::invalid_argument&) {
          continue;
        }
        const std::vector<double> dx = factors.solve(rhs);
        std::vector<Complex> trial(b);
        step_norm = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
          trial[i] += Complex(dx[2 * i], dx[2 * i + 1]);
          step_norm += dx[2 * i] * dx[2 * i] + dx[2 * i + 1] * dx[2 * i + 1];
        }
        const double trial_res = weighted_residual_sq(trial);
        if (trial_res < base) {
          b.swap(trial);
          base = trial_res;
          accepted = true;
          lambda_seed = std::max(lambda / 10.0, 1e-14);
        }
      }
      if (!accepted) break;
      if (step_small(step_norm)) break;

      // chord refinements on the frozen factorization
      bool chord_converged = false;
      for (int chord = 0; chord < 6; ++chord) {
        fill_residuals(b);
        std::vector<double> rhs(params, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          const double rv = res_[r];
          if (rv == 0.0) continue;
          const double* jrow = &jac_[r * params];
          for (std::size_t a = 0; a < params; ++a) rhs[a] -= jrow[a] * rv;
        }
        const std::vector<double> dx = factors.solve(rhs);
        std::vector<Complex> trial(b);
        double chord_step = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
          trial[i] += Complex(dx[2 * i], dx[2 * i + 1]);
          chord_step += dx[2 * i] * dx[2 * i] + dx[2 * i + 1] * dx[2 * i + 1];
        }
        const double trial_res = weighted_residual_sq(trial);
        if (trial_res >= base) break;
        b.swap(trial);
        base = trial_res;
        if (step_small(chord_step)) {
          chord_converged = true;
          break;
        }
      }
      if (chord_converged) break;

      // Hopelessness is declared only after sustained stagnation well above
      // the target level; slow-but-steady convergence must never be cut off.
      if (give_up_above > 0.0) {
        if (iter == 4) res_checkpoint = base;
        if (iter >= 10 && base > give_up_above && base > 0.1 * res_checkpoint) break;
      }
    }
    return weighted_residual_sq(b);
  }

 private:
  void fill_residuals(const std::vector<Complex>& b) {
    std::vector<Complex> f, fp;
    model(b, f, fp);
    std::size_t row = 0;
    for (std::size_t lag = 0; lag <= k_; ++lag, row += 2) {
      const Complex rv = wf_ * (f[lag] - tf_[lag]);
      res_[row] = rv.real();
      res_[row + 1] = rv.imag();
    }
    for (std::size_t lag = 0; lag < fp_lags_; ++lag, row += 2) {
      const Complex rv = wfp_ * (fp[lag] - tfp_[lag]);
      res_[row] = rv.real();
      res_[row + 1] = rv.imag();
    }
  }

  void fill_jacobian(const std::vector<Complex>& b) {
    const std::size_t w = k_ + 1;
    const std::size_t params = 2 * w;
    std::fill(jac_.begin(), jac_.end(), 0.0);

    std::size_t row = 0;
    for (std::size_t lag = 0; lag <= k_; ++lag, row += 2) {
      double* jre = &jac_[row * params];
      double* jim = &jac_[(row + 1) * params];
      for (std::size_t i = 0; i + lag < w; ++i) {
        const std::size_t hi = i + lag;
        // d(conj(b_i) b_hi): wrt Re b_i -> b_hi, Im b_i -> -i b_hi,
        //                    wrt Re b_hi -> conj(b_i), Im b_hi -> i conj(b_i)
        const Complex dl = wf_ * b[hi];
        const Complex dh = wf_ * std::conj(b[i]);
        jre[2 * i] += dl.real();
        jim[2 * i] += dl.imag();
        jre[2 * i + 1] += dl.imag();
        jim[2 * i + 1] += -dl.real();
        jre[2 * hi] += dh.real();
        jim[2 * hi] += dh.imag();
        jre[2 * hi + 1] += -dh.imag();
        jim[2 * hi + 1] += dh.real();
      }
    }
    for (std::size_t lag = 0; lag < fp_lags_; ++lag, row += 2) {
      double* jre = &jac_[row * params];
      double* jim = &jac_[(row + 1) * params];
      for (std::size_t i = 0; i + lag < w; ++i) {
        const double lo = static_cast<double>(m_ + i);
        if (lo == 0.0) continue;
        const std::size_t hi = i + lag;
        const double wgt = wfp_ * lo * static_cast<double>(m_ + i + lag);
        const Complex dl = wgt * b[hi];
        const Complex dh = wgt * std::conj(b[i]);
        jre[2 * i] += dl.real();
        jim[2 * i] += dl.imag();
        jre[2 * i + 1] += dl.imag();
        jim[2 * i + 1] += -dl.real();
        jre[2 * hi] += dh.real();
        jim[2 * hi] += dh.imag();
        jre[2 * hi + 1] += -dh.imag();
        jim[2 * hi + 1] += dh.real();
      }
    }
  }

  std::size_t m_;
  std::size_t k_;
  std::vector<Complex> tf_, tfp_;
  double wf_, wfp_;
  std::size_t fp_lags_;
  std::vector<double> jac_, res_, jtj_, jtr_;
};

struct WindowSolveResult {
  std::vector<Complex> coeffs;
  double residual_sq = 0.0;
  bool converged = false;
};

// A solution is accepted when the weighted residual reaches the floor set
// by double-rounded inputs; inconsistent data plateaus many orders above.
inline double residual_gate(std::size_t residual_count) {
  return 1e-20 * static_cast<double>(residual_count);
}

inline WindowSolveResult polish_window(std::vector<Complex> b, std::size_t m, std::size_t k,
                                       const std::vector<Complex>& tf,
                                       const std::vector<Complex>& tfp, double wf, double wfp) {
  SpectrumSystem sys(m, k, tf, tfp, wf, wfp);
  WindowSolveResult out;
  const double gate = residual_gate(sys.residual_count());
  // Small windows are too cheap to be worth abandoning early.
  const double give_up = k <= 12 ? 0.0 : 1e8 * gate;
  out.residual_sq = sys.solve(b, 40, 1e-15, give_up);
  out.converged = out.residual_sq <= gate;
  out.coeffs = std::move(b);
  return out;
}

// Globalization for bandwidths where the recursion has lost all accuracy:
// numerical continuation from a seeded random window polynomial. The target
// spectra are interpolated linearly from the anchor's own (exactly
// consistent) spectra to the measured ones while a Gauss-Newton corrector
// tracks the least-squares solution; a secant predictor extrapolates
// between accepted steps. When the tracked branch folds and the step
// collapses, the corrector's jump is accepted and tracking resumes, which
// in practice carries the path over the fold. Attempts restart from fresh
// deterministic seeds; consistency of the final residual decides success,
// so a wrong branch can never be returned silently.
// Basin hopping around a stalled least-squares endpoint: seeded kicks of
// escalating size, each re-polished; any improvement becomes the new home
// base. Stalled endpoints routinely sit on the lip of the true basin, so
// the first small kicks usually finish the job.
inline WindowSolveResult basin_hop(WindowSolveResult base, std::size_t m, std::size_t k,
                                   const std::vector<Complex>& tf,
                                   const std::vector<Complex>& tfp, double wf, double wfp,
                                   std::size_t hops) {
  const double scale =
      std::sqrt(std::max(tf[0].real(), 0.0) / static_cast<double>(k + 1)) + 1e-300;
  for (std::size_t hop = 0; hop < hops && !base.converged; ++hop) {
    SplitMix64 gen(0xB4511B0BULL + 977 * hop);
    std::vector<Complex> b = base.coeffs;
    const double kick = (0.02 + 0.05 * static_cast<double>(hop)) * scale;
    for (Complex& v : b) v += kick * gen.next_complex_normal();
    auto r = polish_window(std::move(b), m, k, tf, tfp, wf, wfp);
    if (r.residual_sq < base.residual_sq) base = std::move(r);
  }
  return base;
}

struct ContinuationOptions {
  std::size_t max_attempts = 24;
  int max_steps = 250;
  int max_jumps = 40;
  int corrector_iters = 12;
  double corrector_tol = 1e-6;
  double dt_max = 0.2;
  double jump_accept = 0.16;  // squared relative jump accepted as tracking
};

inline WindowSolveResult solve_window_by_continuation(std::size_t m, std::size_t k,
                                                      const std::vector<Complex>& tf,
                                                      const std::vector<Complex>& tfp, double wf,
                                                      double wfp,
                                                      const ContinuationOptions& opt = {}) {
  const std::size_t w = k + 1;
  const double energy =
      std::sqrt(std::max(tf[0].real(), 0.0) / static_cast<double>(w));
  WindowSolveResult best;
  best.residual_sq = std::numeric_limits<double>::infinity();

  for (std::size_t attempt = 0; attempt < opt.max_attempts; ++attempt) {
    // later attempts get more patience: paths that fold a lot need longer
    // budgets, and the cheap early attempts already caught the easy cases
    const int max_steps = opt.max_steps + 30 * static_cast<int>(attempt);
    const int max_jumps = opt.max_jumps + 8 * static_cast<int>(attempt);
    const int corrector_iters =
        std::min(opt.corrector_iters + static_cast<int>(attempt), 25);

    SplitMix64 gen(0xC011714710ULL + 0x9E37ULL * attempt);
    std::vector<Complex> b(w);
    for (Complex& v : b) v = energy * gen.next_complex_normal();

    SpectrumSystem sys(m, k, tf, tfp, wf, wfp);
    std::vector<Complex> anchor_f, anchor_fp;
    sys.model(b, anchor_f, anchor_fp);

    auto blend = [&](double t) {
      std::vector<Complex> f(w), fp(w);
      for (std::size_t i = 0; i < w; ++i) {
        f[i] = (1.0 - t) * anchor_f[i] + t * tf[i];
        fp[i] = (1.0 - t) * anchor_fp[i] + t * tfp[i];
      }
      sys.set_target(std::move(f), std::move(fp));
    };

    double t = 0.0, dt = opt.dt_max, t_prev = 0.0;
    std::vector<Complex> b_prev(b);
    int steps = 0, jumps = 0;
    bool aborted = false;
    while (t < 1.0 && !aborted) {
      if (++steps > max_steps) {
        aborted = true;
        break;
      }
      const double tn = std::min(1.0, t + dt);
      blend(tn);
      std::vector<Complex> trial(b);
      if (t > t_prev) {
        const double ratio = (tn - t) / (t - t_prev);
        for (std::size_t i = 0; i < w; ++i) trial[i] = b[i] + ratio * (b[i] - b_prev[i]);
      }
      sys.solve(trial, corrector_iters, opt.corrector_tol);
      double jump = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        jump += std::norm(trial[i] - b[i]);
        scale += std::norm(b[i]);
      }
      const bool small_jump = jump <= opt.jump_accept * (scale + 1e-12);
      if (small_jump || dt < 2e-4) {
        if (!small_jump) {
          if (++jumps > max_jumps) {
            aborted = true;
            break;
          }
          dt = 0.05;
        }
        b_prev = b;
        t_prev = t;
        b = std::move(trial);
        t = tn;
        dt = std::min(dt * 1.6, opt.dt_max);
      } else {
        dt *= 0.35;
      }
    }
    if (aborted) continue;

    sys.set_target(tf, tfp);
    const double res = sys.solve(b, 80, 1e-15);
    if (res <= residual_gate(sys.residual_count())) {
      return {std::move(b), res, true};
    }
    if (res < best.residual_sq) {
      best.residual_sq = res;
      best.coeffs = b;
    }
  }
  best.converged = false;
  return best;
}

}  // namespace phaseret::detail
