#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "floqamp/bloch.hpp"
#include "floqamp/floquet.hpp"

// Discrete spectral analysis mirroring the measurement procedure: amplitude
// spectrum of a simulated channel, sideband peak extraction on the resonance
// comb, and amplification measured against an off-resonance reference tone.

namespace floqamp {

// Single-sided amplitude spectrum on a rectangular window, normalized so a
// unit-amplitude sinusoid spanning an integer number of periods lands in one
// bin with amplitude 1.
struct Spectrum {
  double df = 0.0;          // bin width, Hz
  Eigen::ArrayXd amplitude; // bins i = 0 .. floor(N/2), frequency i*df

  Eigen::Index size() const { return amplitude.size(); }
  double frequency(Eigen::Index i) const { return df * static_cast<double>(i); }
  // Mean square of the time series reconstructed from the bins; equals the
  // actual mean square of the samples (Parseval).
  double mean_square() const;
};

Spectrum amplitude_spectrum(const TimeSeries& series,
                            const std::string& channel);

struct SidebandPeak {
  int k = 0;
  double frequency = 0.0;  // frequency of the maximum bin, Hz
  double amplitude = 0.0;
  bool present = false;    // false when no bin in the window clears the floor
};

// For each comb line, the maximum-amplitude bin within +-tol. Lines whose
// window holds nothing above noise_floor_factor * median(bin amplitude) are
// flagged absent. Requires tol >= df and non-overlapping windows
// (nu_ac >= 2*tol).
std::vector<SidebandPeak> sideband_peaks(const Spectrum& spec,
                                         const ResonanceComb& comb, double tol,
                                         double noise_floor_factor = 5.0);

struct MeasuredAmplification {
  int k = 0;
  double frequency = 0.0;
  double eta = 0.0;
  bool present = false;
};

// Amplification per sideband: peak amplitude in `signal` divided by the
// amplitude of the test tone at `test_nu` in `reference`. Throws when the
// reference tone does not clear the reference noise floor.
std::vector<MeasuredAmplification> measure_amplification(
    const Spectrum& signal, const Spectrum& reference,
    const ResonanceComb& comb, double test_nu, double tol,
    double noise_floor_factor = 5.0);

// Smallest window >= min_window that spans an integer number of drive
// periods and an integer number of test periods within tol_cycles. Every
// tone of the steady-state comb (test_nu + l*nu_ac) then lands within
// tol_cycles of a whole cycle count, which bounds rectangular-window leakage.
double integer_period_window(double test_nu, double nu_ac, double min_window,
                             double tol_cycles = 0.02);

}  // namespace floqamp
