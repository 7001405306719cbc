#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

// Physical parameters of the two-species spin system and of the applied
// fields. Unit convention used throughout the library: frequencies are cyclic
// (Hz), gyromagnetic ratios are cyclic (Hz/nT), fields are nT, times are
// seconds. Angular factors of 2*pi are written explicitly wherever an
// equation needs them.

namespace floqamp {

struct SpinParams {
  double gamma_n = 0.01178;  // noble-gas gyromagnetic ratio, Hz/nT
  double gamma_e = 28.0;     // alkali electron gyromagnetic ratio, Hz/nT
  double t1n = 34.0;         // noble-gas longitudinal relaxation, s
  double t2n = 34.0;         // noble-gas transverse relaxation, s
  double t1e = 1.0e-3;       // alkali relaxation, s (T1e ~ T2e)
  double t2e = 1.0e-3;
  double p0n = -0.3;  // equilibrium noble-gas polarization, signed, |p| <= 1
  double p0e = 0.2;   // equilibrium alkali polarization
  // Magnetization at unity polarization, expressed as the nT-equivalent field
  // scale that multiplies the Fermi-contact coupling. The default m_n is
  // calibrated so that the undriven on-resonance amplification of the default
  // parameter set is -110 (see steady_state: baseline_amplification).
  double m_n = 0.06441469955179306;  // nT
  double m_e = 1.0e-3;               // nT
  double kappa0 = 540.0;             // Fermi-contact enhancement factor
  double q_slowing = 5.0;            // alkali slowing-down factor, >= 1

  // Effective-field coupling lambda = 8*pi*kappa0/3; derived, never stored.
  double lambda() const { return 8.0 * std::numbers::pi * kappa0 / 3.0; }
};

struct DriveConfig {
  double b0 = 853.0;    // bias field along z, nT
  double b_ac = 397.0;  // drive amplitude along z, nT
  double nu_ac = 1.5;   // drive frequency, Hz, > 0

  // Larmor frequency nu0 = gamma_n * b0, Hz. Derived, never stored.
  double larmor(const SpinParams& spin) const { return spin.gamma_n * b0; }

  // Modulation index u = gamma_n * b_ac / nu_ac, dimensionless.
  double modulation_index(const SpinParams& spin) const {
    return spin.gamma_n * b_ac / nu_ac;
  }

  // Convenience constructors that pin the derived quantities exactly.
  static DriveConfig from_larmor(const SpinParams& spin, double nu0,
                                 double b_ac, double nu_ac) {
    return DriveConfig{nu0 / spin.gamma_n, b_ac, nu_ac};
  }
  static DriveConfig from_modulation_index(const SpinParams& spin, double nu0,
                                           double u, double nu_ac) {
    return DriveConfig{nu0 / spin.gamma_n, u * nu_ac / spin.gamma_n, nu_ac};
  }
};

struct TestField {
  double b_y = 0.01;  // transverse field amplitude, nT, >= 0
  double nu = 10.039; // test frequency, Hz, >= 0
};

struct OpticsParams {
  double path_length = 0.8;       // optical path length, cm
  double r_e = 2.8e-13;           // classical electron radius, cm
  double c = 2.99792458e10;       // speed of light, cm/s
  double oscillator_f = 2.0 / 3.0;  // oscillator strength (D2)
  double n_density = 1.0e14;      // alkali number density, cm^-3
  double nu_d2 = 384.2304844685e12;  // D2 transition frequency, Hz
  double nu_pr = 384.2304844685e12 + 110.0e9;  // probe frequency, Hz
  double gamma_opt = 2.0e9;       // optical FWHM of the D2 line, Hz

  // Dispersive detuning factor D(nu_pr), 1/Hz.
  double detuning_factor() const {
    const double d = nu_pr - nu_d2;
    const double hw = gamma_opt / 2.0;
    return d / (d * d + hw * hw);
  }
};

struct ValidationIssue {
  enum class Severity { error, warning };
  Severity severity;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const;           // no errors and no warnings
  bool has_errors() const;   // at least one error-severity issue
  std::string str() const;   // one line per issue, deterministic order
};

// Checks every domain invariant and returns a report; never throws.
// Small-signal warning threshold: 2*pi*gamma_n*b_y*t1n > 0.1.
ValidationReport validate(const SpinParams& spin, const DriveConfig& drive,
                          const TestField& test);
ValidationReport validate(const SpinParams& spin, const DriveConfig& drive,
                          const TestField& test, const OpticsParams& optics);

}  // namespace floqamp
