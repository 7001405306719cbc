#pragma once

#include <vector>

#include <Eigen/Core>

#include "floqamp/domain.hpp"

// Dressed-spin picture of the periodically driven two-level system: ladder
// energies spaced by the drive frequency, Bessel-weighted state coefficients,
// and the comb of transition frequencies nu0 + k*nu_ac.

namespace floqamp {

// Quasi-energy of the dressed state |epsilon>_n in Hz:
// epsilon*nu0/2 + n*nu_ac, epsilon = +1/-1.
double floquet_energy(int epsilon, int n, const SpinParams& spin,
                      const DriveConfig& drive);

struct FloquetState {
  int epsilon = 1;  // spin branch, +1 or -1
  int n = 0;        // ladder index
  int k_max = 0;    // coefficients kept for offsets |n - n'| <= k_max
  // coeffs[offset + k_max] is the amplitude on |epsilon, n - offset>,
  // equal to J_offset(epsilon * u / 2).
  Eigen::ArrayXd coeffs;

  double coeff(int offset) const;
  double norm_squared() const { return (coeffs * coeffs).sum(); }
};

FloquetState floquet_state_coefficients(int epsilon, int n,
                                        const SpinParams& spin,
                                        const DriveConfig& drive, int k_max);

// Amplitude of the spin transition that absorbs at sideband k and emits at
// sideband k + l: J_{k+l}(u).
double transition_amplitude(int k, int l, double u);

// The same amplitude assembled the long way, as the truncated convolution
// sum_j J_j(u/2) * J_{j-k-l}(-u/2) over |j| <= trunc. Kept as an independent
// route for oracle tests; trunc < 0 selects the default truncation.
double transition_amplitude_convolution(int k, int l, double u,
                                        int trunc = -1);

struct ResonanceComb {
  double nu0 = 0.0;    // Hz
  double nu_ac = 0.0;  // Hz
  struct Line {
    int k;
    double frequency;  // nu0 + k*nu_ac, Hz, > 0
  };
  std::vector<Line> lines;           // ascending in k, positive frequencies
  std::vector<int> dropped_orders;   // k values whose line was <= 0 Hz

  bool folded() const { return !dropped_orders.empty(); }
};

// Comb of amplification frequencies for k in [k_lo, k_hi]. Lines at
// non-positive frequency are dropped and recorded in dropped_orders; the
// steady-state response formulas remain valid at every positive test
// frequency, including ones that alias a dropped line.
ResonanceComb resonance_comb(const SpinParams& spin, const DriveConfig& drive,
                             int k_lo, int k_hi);

}  // namespace floqamp
