#include "floqamp/floquet.hpp"

#include <cmath>
#include <stdexcept>

#include "floqamp/bessel.hpp"

namespace floqamp {

double floquet_energy(int epsilon, int n, const SpinParams& spin,
                      const DriveConfig& drive) {
  if (epsilon != 1 && epsilon != -1) {
    throw std::invalid_argument("floquet_energy: epsilon must be +1 or -1");
  }
  return epsilon * drive.larmor(spin) / 2.0 + n * drive.nu_ac;
}

double FloquetState::coeff(int offset) const {
  if (offset < -k_max || offset > k_max) return 0.0;
  return coeffs[offset + k_max];
}

FloquetState floquet_state_coefficients(int epsilon, int n,
                                        const SpinParams& spin,
                                        const DriveConfig& drive, int k_max) {
  if (epsilon != 1 && epsilon != -1) {
    throw std::invalid_argument(
        "floquet_state_coefficients: epsilon must be +1 or -1");
  }
  if (k_max < 0) {
    throw std::invalid_argument(
        "floquet_state_coefficients: k_max must be >= 0");
  }
  const double u = drive.modulation_index(spin);
  FloquetState state;
  state.epsilon = epsilon;
  state.n = n;
  state.k_max = k_max;
  state.coeffs = jacobi_anger_coeffs(epsilon * u / 2.0, k_max);
  return state;
}

double transition_amplitude(int k, int l, double u) {
  return bessel_j(k + l, u);
}

double transition_amplitude_convolution(int k, int l, double u, int trunc) {
  if (trunc < 0) trunc = default_bessel_k_max(u / 2.0) + std::abs(k + l);
  const Eigen::ArrayXd pos = jacobi_anger_coeffs(u / 2.0, trunc + std::abs(k + l));
  const Eigen::ArrayXd neg = jacobi_anger_coeffs(-u / 2.0, trunc + std::abs(k + l));
  const int mid = trunc + std::abs(k + l);
  double sum = 0.0;
  for (int j = -trunc; j <= trunc; ++j) {
    sum += pos[j + mid] * neg[(j - k - l) + mid];
  }
  return sum;
}

ResonanceComb resonance_comb(const SpinParams& spin, const DriveConfig& drive,
                             int k_lo, int k_hi) {
  if (k_lo > k_hi) {
    throw std::invalid_argument("resonance_comb: empty order interval");
  }
  ResonanceComb comb;
  comb.nu0 = drive.larmor(spin);
  comb.nu_ac = drive.nu_ac;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double frequency = comb.nu0 + k * comb.nu_ac;
    if (frequency > 0.0) {
      comb.lines.push_back({k, frequency});
    } else {
      comb.dropped_orders.push_back(k);
    }
  }
  return comb;
}

}  // namespace floqamp
