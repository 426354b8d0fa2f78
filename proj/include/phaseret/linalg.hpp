#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "phaseret/poly.hpp"

namespace phaseret::detail {

// Dense square solve, row-major storage, in-place LU with partial pivoting.
// Sizes here are tiny (at most a few hundred), so no blocking is needed.
template <typename Scalar>
struct LuResultT {
  std::vector<Scalar> solution;
  // max|U_ii| / min|U_ii|: a cheap lower bound on the condition number,
  // good enough to flag a nearly singular interpolation system.
  double condition_estimate = 0.0;
};

// Factored form, reusable across right-hand sides.
template <typename Scalar>
class LuFactorsT {
 public:
  LuFactorsT() = default;

  // Factors in place; throws on an exactly singular pivot.
  explicit LuFactorsT(std::vector<Scalar> a) : a_(std::move(a)) {
    double size_check = std::sqrt(static_cast<double>(a_.size()));
    n_ = static_cast<std::size_t>(size_check + 0.5);
    if (n_ * n_ != a_.size())
      throw std::invalid_argument("lu: matrix is not square");
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;

    for (std::size_t col = 0; col < n_; ++col) {
      std::size_t piv = col;
      double best = std::abs(a_[perm_[col] * n_ + col]);
      for (std::size_t r = col + 1; r < n_; ++r) {
        const double mag = std::abs(a_[perm_[r] * n_ + col]);
        if (mag > best) {
          best = mag;
          piv = r;
        }
      }
      if (best == 0.0)
        throw std::invalid_argument("lu: singular system");
      std::swap(perm_[col], perm_[piv]);

      const Scalar diag = a_[perm_[col] * n_ + col];
      for (std::size_t r = col + 1; r < n_; ++r) {
        const Scalar factor = a_[perm_[r] * n_ + col] / diag;
        a_[perm_[r] * n_ + col] = factor;
        for (std::size_t c = col + 1; c < n_; ++c)
          a_[perm_[r] * n_ + c] -= factor * a_[perm_[col] * n_ + c];
      }
    }

    double umax = 0.0, umin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = std::abs(a_[perm_[i] * n_ + i]);
      umax = std::max(umax, d);
      umin = std::min(umin, d);
    }
    condition_estimate_ =
        umin > 0.0 ? umax / umin : std::numeric_limits<double>::infinity();
  }

  std::vector<Scalar> solve(const std::vector<Scalar>& b) const {
    if (b.size() != n_) throw std::invalid_argument("lu: rhs size mismatch");
    std::vector<Scalar> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      Scalar s = b[perm_[i]];
      for (std::size_t c = 0; c < i; ++c) s -= a_[perm_[i] * n_ + c] * y[c];
      y[i] = s;
    }
    std::vector<Scalar> x(n_);
    for (std::size_t i = n_; i-- > 0;) {
      Scalar s = y[i];
      for (std::size_t c = i + 1; c < n_; ++c) s -= a_[perm_[i] * n_ + c] * x[c];
      x[i] = s / a_[perm_[i] * n_ + i];
    }
    return x;
  }

  double condition_estimate() const { return condition_estimate_; }

 private:
  std::vector<Scalar> a_;
  std::vector<std::size_t> perm_;
  std::size_t n_ = 0;
  double condition_estimate_ = 0.0;
};

template <typename Scalar>
LuResultT<Scalar> lu_solve_t(std::vector<Scalar> a, std::vector<Scalar> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n)
    throw std::invalid_argument("lu_solve: matrix/vector size mismatch");
  const LuFactorsT<Scalar> lu(std::move(a));
  return {lu.solve(b), lu.condition_estimate()};
}

using LuResult = LuResultT<Complex>;

inline LuResult lu_solve(std::vector<Complex> a, std::vector<Complex> b) {
  return lu_solve_t<Complex>(std::move(a), std::move(b));
}

}  // namespace phaseret::detail
