#include "floqamp/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "floqamp/bessel.hpp"
#include "floqamp/floquet.hpp"

namespace floqamp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Polarization response prefactor per nT of test field: pi*gamma_n*p0n*t2n.
double response_prefactor(const SpinParams& spin) {
  return std::numbers::pi * spin.gamma_n * spin.p0n * spin.t2n;
}

int resolve_k_max(double u, int k_max) {
  return k_max >= 0 ? k_max : default_bessel_k_max(u);
}

}  // namespace

double baseline_amplification(const SpinParams& spin) {
  return spin.lambda() * spin.m_n * response_prefactor(spin);
}

SpinParams calibrated_to_baseline(SpinParams spin, double target_eta00) {
  const double per_mn = spin.lambda() * response_prefactor(spin);
  if (per_mn == 0.0 || !std::isfinite(per_mn)) {
    throw std::invalid_argument(
        "calibrated_to_baseline: p0n, t2n and kappa0 must be nonzero");
  }
  const double m_n = target_eta00 / per_mn;
  if (m_n < 0.0) {
    throw std::invalid_argument(
        "calibrated_to_baseline: target sign incompatible with sign of p0n");
  }
  spin.m_n = m_n;
  return spin;
}

ResponseCoeffs response_coeffs(int k, int l, double u, double nu,
                               const SpinParams& spin,
                               const DriveConfig& drive) {
  const double detuning =
      kTwoPi * (drive.larmor(spin) - nu + k * drive.nu_ac) * spin.t2n;
  const double weight = response_prefactor(spin) * bessel_j(k + l, u) *
                        bessel_j(k, u) / (1.0 + detuning * detuning);
  return {k, l, weight, weight * detuning};
}

double coeff_a(int k, int l, double u, double nu, const SpinParams& spin,
               const DriveConfig& drive) {
  return response_coeffs(k, l, u, nu, spin, drive).a;
}

double coeff_b(int k, int l, double u, double nu, const SpinParams& spin,
               const DriveConfig& drive) {
  return response_coeffs(k, l, u, nu, spin, drive).b;
}

double Tone::amplitude_x() const { return std::hypot(x_cos, x_sin); }
double Tone::amplitude_y() const { return std::hypot(y_cos, y_sin); }

std::vector<Tone> polarization_tones(const SpinParams& spin,
                                     const DriveConfig& drive,
                                     const TestField& test, int l_max,
                                     int k_max, RotatingTerms terms) {
  const double u = drive.modulation_index(spin);
  l_max = resolve_k_max(u, l_max);
  k_max = resolve_k_max(u, k_max);
  const int order_max = l_max + k_max;
  const Eigen::ArrayXd j = jacobi_anger_coeffs(u, order_max);
  const double nu0 = drive.larmor(spin);
  const double pref = response_prefactor(spin) * test.b_y;

  std::map<double, Tone> tones;
  const int n_branches = (terms == RotatingTerms::full) ? 2 : 1;
  for (int branch = 0; branch < n_branches; ++branch) {
    const double sigma = (branch == 0) ? 1.0 : -1.0;
    // Lorentzian factors (1 + i x_k)/(1 + x_k^2) for this branch.
    Eigen::ArrayXd re(2 * k_max + 1), im(2 * k_max + 1);
    for (int k = -k_max; k <= k_max; ++k) {
      const double x = kTwoPi * (nu0 - sigma * test.nu + k * drive.nu_ac) * spin.t2n;
      const double denom = 1.0 + x * x;
      re[k + k_max] = 1.0 / denom;
      im[k + k_max] = x / denom;
    }
    for (int l = -l_max; l <= l_max; ++l) {
      std::complex<double> c(0.0, 0.0);
      for (int k = -k_max; k <= k_max; ++k) {
        const double jj = j[k + l + order_max] * j[k + order_max];
        c += jj * std::complex<double>(re[k + k_max], im[k + k_max]);
      }
      c *= pref;
      const double omega = sigma * test.nu + l * drive.nu_ac;  // signed, Hz
      const double f = std::abs(omega);
      const double s = (omega >= 0.0) ? 1.0 : -1.0;
      Tone& tone = tones[f];
      tone.frequency = f;
      tone.x_cos += c.real();
      tone.y_cos += c.imag();
      if (f > 0.0) {
        tone.x_sin -= s * c.imag();
        tone.y_sin += s * c.real();
      }
    }
  }

  std::vector<Tone> out;
  out.reserve(tones.size());
  for (const auto& [f, tone] : tones) out.push_back(tone);
  return out;
}

std::pair<double, double> transverse_polarization(
    double t, const SpinParams& spin, const DriveConfig& drive,
    const TestField& test, int l_max, int k_max, RotatingTerms terms) {
  const auto tones = polarization_tones(spin, drive, test, l_max, k_max, terms);
  double px = 0.0;
  double py = 0.0;
  for (const Tone& tone : tones) {
    const double phase = kTwoPi * tone.frequency * t;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    px += tone.x_cos * c + tone.x_sin * s;
    py += tone.y_cos * c + tone.y_sin * s;
  }
  return {px, py};
}

std::pair<double, double> effective_field(double px, double py,
                                          const SpinParams& spin) {
  const double scale = spin.lambda() * spin.m_n;
  return {scale * px, scale * py};
}

double amplification_on_resonance(int k, int l, double u,
                                  const SpinParams& spin,
                                  const DriveConfig& drive) {
  (void)drive;  // the on-resonance factor depends on the drive through u only
  return baseline_amplification(spin) * bessel_j(k + l, u) * bessel_j(k, u);
}

namespace {

const Tone* find_tone(const std::vector<Tone>& tones, double target) {
  const double tol = 1e-9 * std::max(1.0, std::abs(target));
  const Tone* best = nullptr;
  double best_gap = tol;
  for (const Tone& tone : tones) {
    const double gap = std::abs(tone.frequency - target);
    if (gap <= best_gap) {
      best_gap = gap;
      best = &tone;
    }
  }
  return best;
}

}  // namespace

double amplification_spectrum(double u, double nu, int l,
                              const SpinParams& spin, const DriveConfig& drive,
                              int l_max, int k_max, RotatingTerms terms) {
  l_max = std::max(resolve_k_max(u, l_max), std::abs(l));
  DriveConfig d = drive;
  d.b_ac = u * drive.nu_ac / spin.gamma_n;  // Bessel weights follow the given u
  const auto tones =
      polarization_tones(spin, d, TestField{1.0, nu}, l_max, k_max, terms);
  const Tone* tone = find_tone(tones, std::abs(nu + l * drive.nu_ac));
  if (tone == nullptr) return 0.0;
  return spin.lambda() * spin.m_n * tone->amplitude_y();
}

double amplification_envelope(double nu, double u, const SpinParams& spin,
                              const DriveConfig& drive, int k_max) {
  k_max = resolve_k_max(u, k_max);
  const Eigen::ArrayXd j = jacobi_anger_coeffs(u, k_max);
  const double nu0 = drive.larmor(spin);
  const double peak = std::abs(baseline_amplification(spin));
  double eta = 0.0;
  for (int k = -k_max; k <= k_max; ++k) {
    const double x = kTwoPi * (nu0 - nu + k * drive.nu_ac) * spin.t2n;
    const double jk = j[k + k_max];
    eta += peak * jk * jk / std::sqrt(1.0 + x * x);
  }
  return eta;
}

double total_response_with_direct_term(double u, double nu,
                                       const SpinParams& spin,
                                       const DriveConfig& drive, int k_max) {
  DriveConfig d = drive;
  d.b_ac = u * drive.nu_ac / spin.gamma_n;
  const auto tones = polarization_tones(spin, d, TestField{1.0, nu}, -1, k_max,
                                        RotatingTerms::full);
  const Tone* tone = find_tone(tones, nu);
  const double scale = spin.lambda() * spin.m_n;
  const double y_cos = tone != nullptr ? tone->y_cos : 0.0;
  const double y_sin = tone != nullptr ? tone->y_sin : 0.0;
  return std::hypot(1.0 + scale * y_cos, scale * y_sin);
}

double profile_fwhm(const SpinParams& spin) {
  if (!(spin.t2n > 0.0)) {
    throw std::invalid_argument("profile_fwhm: t2n must be positive");
  }
  return std::sqrt(3.0) / (std::numbers::pi * spin.t2n);
}

SumRuleCheck power_sum_rule(int k, double u, const SpinParams& spin,
                            const DriveConfig& drive, int l_max) {
  const int required = static_cast<int>(std::ceil(std::abs(u))) + 20;
  if (l_max < 0) l_max = std::max(50, required);
  if (l_max < required) {
    throw std::invalid_argument(
        "power_sum_rule: l_max below the ceil(u)+20 truncation floor");
  }
  const double base = baseline_amplification(spin);
  const Eigen::ArrayXd j = jacobi_anger_coeffs(u, l_max + std::abs(k));
  const int mid = l_max + std::abs(k);
  const double jk = j[k + mid];
  double lhs = 0.0;
  for (int l = -l_max; l <= l_max; ++l) {
    const double eta = base * j[k + l + mid] * jk;
    lhs += eta * eta;
  }
  const double rhs = base * (base * jk * jk);
  (void)drive;
  return {lhs, rhs};
}

Eigen::ArrayXd make_profile_grid(const SpinParams& spin,
                                 const DriveConfig& drive, int k_lo, int k_hi,
                                 double window_linewidths,
                                 int points_per_linewidth,
                                 double step_override) {
  const double fwhm = profile_fwhm(spin);
  const double half = window_linewidths * fwhm;
  const double step =
      step_override > 0.0 ? step_override : fwhm / points_per_linewidth;
  const ResonanceComb comb = resonance_comb(spin, drive, k_lo, k_hi);

  // Merge overlapping windows around the comb lines, then sample each merged
  // interval on a uniform grid.
  std::vector<std::pair<double, double>> windows;
  for (const auto& line : comb.lines) {
    windows.emplace_back(std::max(step, line.frequency - half),
                         line.frequency + half);
  }
  std::sort(windows.begin(), windows.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& w : windows) {
    if (!merged.empty() && w.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, w.second);
    } else {
      merged.push_back(w);
    }
  }

  std::vector<double> points;
  for (const auto& w : merged) {
    const int n = static_cast<int>(std::floor((w.second - w.first) / step)) + 1;
    for (int i = 0; i < n; ++i) points.push_back(w.first + i * step);
  }
  return Eigen::Map<const Eigen::ArrayXd>(points.data(),
                                          static_cast<Eigen::Index>(points.size()));
}

AmplificationProfile response_profile(const Eigen::ArrayXd& grid, double u,
                                      const SpinParams& spin,
                                      const DriveConfig& drive,
                                      bool with_direct_term, int jobs) {
  AmplificationProfile profile;
  profile.nu_grid = grid;
  profile.eta.resize(grid.size());
  profile.includes_direct_term = with_direct_term;

  const auto eval = [&](Eigen::Index i) {
    const double nu = grid[i];
    profile.eta[i] = with_direct_term
                         ? total_response_with_direct_term(u, nu, spin, drive)
                         : amplification_spectrum(u, nu, 0, spin, drive);
  };

  if (jobs <= 1 || grid.size() < 2) {
    for (Eigen::Index i = 0; i < grid.size(); ++i) eval(i);
  } else {
    const int n_threads = std::min<int>(jobs, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (Eigen::Index i = t; i < grid.size(); i += n_threads) eval(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return profile;
}

}  // namespace floqamp
