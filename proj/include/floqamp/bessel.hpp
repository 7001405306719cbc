#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

// Bessel functions of the first kind at integer order, evaluated with the
// backward-recurrence (Miller) scheme normalized through the completeness
// identity J_0(x) + 2*sum_m J_{2m}(x) = 1. Absolute accuracy is better than
// 1e-12 for |x| <= 50 and |order| <= 60, which covers every modulation index
// and sideband order the response formulas need.

namespace floqamp {

// Sequence J_0(x), J_1(x), ..., J_{n_max}(x) for x >= 0.
template <typename Scalar>
std::vector<Scalar> bessel_j_sequence(int n_max, Scalar x) {
  if (n_max < 0) throw std::invalid_argument("bessel: n_max must be >= 0");
  if (!std::isfinite(static_cast<double>(x)) || x < Scalar(0)) {
    throw std::invalid_argument("bessel: argument must be finite and >= 0");
  }
  std::vector<Scalar> out(static_cast<size_t>(n_max) + 1, Scalar(0));
  if (x == Scalar(0)) {
    out[0] = Scalar(1);
    return out;
  }

  // Start far enough above max(n_max, x) that the contamination from the
  // irregular solution has decayed below double precision when the
  // recurrence reaches the requested orders.
  const int top = std::max(n_max, static_cast<int>(std::ceil(double(x))));
  int start = top + 22 + static_cast<int>(2.0 * std::sqrt(42.0 * (top + 1)));
  if (start % 2 != 0) ++start;

  std::vector<Scalar> seq(static_cast<size_t>(start) + 1, Scalar(0));
  const Scalar rescale_limit = std::numeric_limits<Scalar>::max() * Scalar(1e-30);
  Scalar jp = Scalar(0);                  // J_{k+1} (unnormalized)
  Scalar j = std::numeric_limits<Scalar>::min() * Scalar(1e10);  // J_k seed
  seq[static_cast<size_t>(start)] = j;
  for (int k = start; k >= 1; --k) {
    Scalar jm = (Scalar(2 * k) / x) * j - jp;
    jp = j;
    j = jm;
    if (std::abs(j) > rescale_limit) {
      const Scalar shrink = Scalar(1) / rescale_limit;
      j *= shrink;
      jp *= shrink;
      for (int m = k - 1; m <= start; ++m) {
        seq[static_cast<size_t>(m)] *= shrink;  // tiny tails may flush to 0
      }
    }
    seq[static_cast<size_t>(k - 1)] = j;
  }

  Scalar norm = seq[0];
  for (int k = 2; k <= start; k += 2) norm += Scalar(2) * seq[static_cast<size_t>(k)];
  const Scalar inv = Scalar(1) / norm;
  for (int k = 0; k <= n_max; ++k) out[static_cast<size_t>(k)] = seq[static_cast<size_t>(k)] * inv;
  return out;
}

// J_k(x) for any integer k and finite x. Negative orders and arguments are
// resolved through the exact parity identities J_{-k}(x) = (-1)^k J_k(x) and
// J_k(-x) = (-1)^k J_k(x).
template <typename Scalar = double>
Scalar bessel_j(int k, Scalar x) {
  if (!std::isfinite(static_cast<double>(x))) {
    throw std::invalid_argument("bessel: argument must be finite");
  }
  Scalar sign = Scalar(1);
  if (k < 0) {
    k = -k;
    if (k % 2 != 0) sign = -sign;
  }
  if (x < Scalar(0)) {
    x = -x;
    if (k % 2 != 0) sign = -sign;
  }
  return sign * bessel_j_sequence<Scalar>(k, x)[static_cast<size_t>(k)];
}

// Default series truncation: orders beyond the argument decay
// super-exponentially, so ceil(|u|) plus a fixed pad is always enough.
inline int default_bessel_k_max(double u) {
  return std::max(20, static_cast<int>(std::ceil(std::abs(u))) + 20);
}

// Coefficients J_k(u) of exp(i u sin(w t)) = sum_k J_k(u) exp(i k w t),
// returned for k in [-k_max, k_max]; index i holds order k = i - k_max.
inline Eigen::ArrayXd jacobi_anger_coeffs(double u, int k_max) {
  if (k_max < 0) throw std::invalid_argument("jacobi_anger: k_max must be >= 0");
  const double x = std::abs(u);
  const auto seq = bessel_j_sequence<double>(k_max, x);
  Eigen::ArrayXd coeffs(2 * k_max + 1);
  for (int k = -k_max; k <= k_max; ++k) {
    const int a = std::abs(k);
    double value = seq[static_cast<size_t>(a)];
    if (k < 0 && a % 2 != 0) value = -value;
    if (u < 0.0 && a % 2 != 0) value = -value;
    coeffs[k + k_max] = value;
  }
  return coeffs;
}

}  // namespace floqamp
