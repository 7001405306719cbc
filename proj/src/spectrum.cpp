#include "floqamp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace floqamp {

double Spectrum::mean_square() const {
  const Eigen::Index n = amplitude.size();
  if (n == 0) return 0.0;
  double total = amplitude[0] * amplitude[0];  // DC enters once
  for (Eigen::Index i = 1; i < n; ++i) {
    total += amplitude[i] * amplitude[i] / 2.0;
  }
  return total;
}

Spectrum amplitude_spectrum(const TimeSeries& series,
                            const std::string& channel) {
  const Eigen::ArrayXd& data = series.channel(channel);
  const auto n = static_cast<size_t>(data.size());
  if (n < 2) {
    throw std::invalid_argument("amplitude_spectrum: need at least 2 samples");
  }
  if (!(series.dt > 0.0)) {
    throw std::invalid_argument("amplitude_spectrum: sampling step must be positive");
  }

  std::vector<std::complex<double>> in(n), out(n);
  for (size_t i = 0; i < n; ++i) in[i] = data[static_cast<Eigen::Index>(i)];
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  Spectrum spec;
  spec.df = 1.0 / (series.dt * static_cast<double>(n));
  const size_t n_half = n / 2;  // Nyquist bin included for even n
  spec.amplitude.resize(static_cast<Eigen::Index>(n_half) + 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i <= n_half; ++i) {
    double a = std::abs(out[i]) * inv_n;
    const bool unique_bin = (i == 0) || (2 * i == n);
    if (!unique_bin) a *= 2.0;  // fold the conjugate half into one amplitude
    spec.amplitude[static_cast<Eigen::Index>(i)] = a;
  }
  return spec;
}

namespace {

double median_amplitude(const Spectrum& spec) {
  if (spec.size() == 0) return 0.0;
  std::vector<double> values(spec.amplitude.data(),
                             spec.amplitude.data() + spec.size());
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

// Maximum bin within +-tol of nu; returns false when the window is empty.
bool max_bin_near(const Spectrum& spec, double nu, double tol,
                  Eigen::Index& best) {
  const auto lo = static_cast<Eigen::Index>(std::ceil((nu - tol) / spec.df - 1e-9));
  const auto hi = static_cast<Eigen::Index>(std::floor((nu + tol) / spec.df + 1e-9));
  const Eigen::Index first = std::max<Eigen::Index>(lo, 0);
  const Eigen::Index last = std::min<Eigen::Index>(hi, spec.size() - 1);
  if (first > last) return false;
  best = first;
  for (Eigen::Index i = first + 1; i <= last; ++i) {
    if (spec.amplitude[i] > spec.amplitude[best]) best = i;
  }
  return true;
}

}  // namespace

std::vector<SidebandPeak> sideband_peaks(const Spectrum& spec,
                                         const ResonanceComb& comb, double tol,
                                         double noise_floor_factor) {
  if (tol < spec.df) {
    throw std::invalid_argument("sideband_peaks: tol must be >= bin width");
  }
  if (comb.nu_ac < 2.0 * tol) {
    throw std::invalid_argument(
        "sideband_peaks: windows overlap (nu_ac < 2*tol)");
  }
  // Median-based floor, clamped away from pure round-off so that noiseless
  // synthetic spectra still report empty bands as absent.
  const double floor =
      std::max(noise_floor_factor * median_amplitude(spec),
               1e-12 * spec.amplitude.maxCoeff());

  std::vector<SidebandPeak> peaks;
  peaks.reserve(comb.lines.size());
  for (const auto& line : comb.lines) {
    SidebandPeak peak;
    peak.k = line.k;
    peak.frequency = line.frequency;
    Eigen::Index best = 0;
    if (max_bin_near(spec, line.frequency, tol, best) &&
        spec.amplitude[best] > floor) {
      peak.present = true;
      peak.frequency = spec.frequency(best);
      peak.amplitude = spec.amplitude[best];
    }
    peaks.push_back(peak);
  }
  return peaks;
}

double integer_period_window(double test_nu, double nu_ac, double min_window,
                             double tol_cycles) {
  if (!(nu_ac > 0.0) || !(min_window > 0.0)) {
    throw std::invalid_argument(
        "integer_period_window: nu_ac and min_window must be positive");
  }
  const auto m0 = static_cast<long>(std::ceil(min_window * nu_ac - 1e-9));
  if (!(test_nu > 0.0)) return static_cast<double>(std::max(m0, 1L)) / nu_ac;

  double best_window = static_cast<double>(std::max(m0, 1L)) / nu_ac;
  double best_frac = std::numeric_limits<double>::infinity();
  for (long m = std::max(m0, 1L); m < std::max(m0, 1L) + 200000; ++m) {
    const double window = static_cast<double>(m) / nu_ac;
    const double cycles = window * test_nu;
    const double frac = std::abs(cycles - std::round(cycles));
    if (frac < best_frac) {
      best_frac = frac;
      best_window = window;
    }
    if (frac <= tol_cycles) return window;
  }
  return best_window;
}

std::vector<MeasuredAmplification> measure_amplification(
    const Spectrum& signal, const Spectrum& reference,
    const ResonanceComb& comb, double test_nu, double tol,
    double noise_floor_factor) {
  Eigen::Index ref_bin = 0;
  if (!max_bin_near(reference, test_nu, tol, ref_bin)) {
    throw std::invalid_argument(
        "measure_amplification: reference lacks the test-frequency bin");
  }
  const double ref_floor = noise_floor_factor * median_amplitude(reference);
  const double ref_amp = reference.amplitude[ref_bin];
  if (!(ref_amp > ref_floor) || !(ref_amp > 0.0)) {
    throw std::runtime_error(
        "measure_amplification: reference tone below the noise floor");
  }

  std::vector<MeasuredAmplification> out;
  for (const SidebandPeak& peak :
       sideband_peaks(signal, comb, tol, noise_floor_factor)) {
    MeasuredAmplification m;
    m.k = peak.k;
    m.frequency = peak.frequency;
    m.present = peak.present;
    m.eta = peak.present ? peak.amplitude / ref_amp : 0.0;
    out.push_back(m);
  }
  return out;
}

}  // namespace floqamp
