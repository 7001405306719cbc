#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "floqamp/domain.hpp"

// Closed-form steady-state response of the driven noble-gas spins to a small
// transverse test field, and the amplification factors derived from it.
//
// All formulas are written in cyclic units (Hz, Hz/nT); the angular-units
// combination "gamma * T2" of the source derivation therefore appears here as
// 2*pi*gamma_n*t2n. That conversion lives in exactly one place,
// baseline_amplification(), and everything else is expressed through it.

namespace floqamp {

// Undriven on-resonance amplification eta_00(0), signed:
//   (lambda/2) * m_n * p0n * (2*pi*gamma_n) * t2n,  lambda = 8*pi*kappa0/3.
// This is the baseline every eta_{k,l} is proportional to.
double baseline_amplification(const SpinParams& spin);

// Copy of `spin` with m_n solved so that baseline_amplification == target.
// Only the product lambda*m_n*p0n*gamma_n*t2n is observable, so pinning the
// baseline fixes every amplification factor.
SpinParams calibrated_to_baseline(SpinParams spin, double target_eta00);

// Which rotating components of the test drive to keep. The co-rotating term
// alone reproduces the textbook rotating-wave solution; `full` adds the
// counter-rotating image (the response evaluated at -nu), which carries the
// resonances that fold through zero frequency when nu_ac > nu0.
enum class RotatingTerms { corotating, full };

// In-phase (a) and quadrature (b) polarization response per nT of test field
// for absorption sideband k and emission offset l, units 1/nT. `a` is even
// and `b` odd in the detuning nu0 - nu + k*nu_ac.
struct ResponseCoeffs {
  int k = 0;
  int l = 0;
  double a = 0.0;
  double b = 0.0;
};

ResponseCoeffs response_coeffs(int k, int l, double u, double nu,
                               const SpinParams& spin,
                               const DriveConfig& drive);
double coeff_a(int k, int l, double u, double nu, const SpinParams& spin,
               const DriveConfig& drive);
double coeff_b(int k, int l, double u, double nu, const SpinParams& spin,
               const DriveConfig& drive);

// One spectral line of the steady-state transverse polarization,
//   P_x(t) += x_cos*cos(2*pi*f*t) + x_sin*sin(2*pi*f*t)   (same for y),
// with f >= 0. Amplitudes are in polarization units (test field included).
struct Tone {
  double frequency = 0.0;  // Hz
  double x_cos = 0.0;
  double x_sin = 0.0;
  double y_cos = 0.0;
  double y_sin = 0.0;

  double amplitude_x() const;
  double amplitude_y() const;
};

// Complete tone decomposition of the steady-state response, sorted by
// frequency. Truncations < 0 select the default ceil(u)+20 rule.
std::vector<Tone> polarization_tones(const SpinParams& spin,
                                     const DriveConfig& drive,
                                     const TestField& test, int l_max = -1,
                                     int k_max = -1,
                                     RotatingTerms terms = RotatingTerms::full);

// Steady-state (P_x, P_y) at time t, evaluated from the tone decomposition.
std::pair<double, double> transverse_polarization(
    double t, const SpinParams& spin, const DriveConfig& drive,
    const TestField& test, int l_max = -1, int k_max = -1,
    RotatingTerms terms = RotatingTerms::full);

// Effective field (nT) produced on the alkali species by the noble-gas
// transverse polarization: componentwise lambda * m_n * P.
std::pair<double, double> effective_field(double px, double py,
                                          const SpinParams& spin);

// Signed on-resonance amplification eta_{k,l}(u) = eta_00(0)*J_{k+l}(u)*J_k(u)
// for a test field at nu0 + k*nu_ac observed at nu0 + (k+l)*nu_ac.
double amplification_on_resonance(int k, int l, double u,
                                  const SpinParams& spin,
                                  const DriveConfig& drive);

// |B_eff,y / B_y| at the output line |nu + l*nu_ac| for a test field at nu,
// with the full cross-talk sum over absorption sidebands.
double amplification_spectrum(double u, double nu, int l,
                              const SpinParams& spin, const DriveConfig& drive,
                              int l_max = -1, int k_max = -1,
                              RotatingTerms terms = RotatingTerms::full);

// Multi-resonance amplitude envelope: sum over k of Bessel-weighted resonance
// line shapes |eta_00(0)| J_k^2(u) / sqrt(1 + [2*pi*(nu0-nu+k*nu_ac)*t2n]^2).
double amplification_envelope(double nu, double u, const SpinParams& spin,
                              const DriveConfig& drive, int k_max = -1);

// Observed response at the test tone including the unit direct term of the
// alkali magnetometer: |(1 + sum B) + i sum A| with both rotating branches.
double total_response_with_direct_term(double u, double nu,
                                       const SpinParams& spin,
                                       const DriveConfig& drive,
                                       int k_max = -1);

// Full width at half maximum of one amplification resonance:
// sqrt(3)/(pi*t2n), Hz.
double profile_fwhm(const SpinParams& spin);

// Power sum rule: lhs = sum_{|l|<=l_max} eta_{k,l}^2,
// rhs = eta_00(0) * eta_{k,0}(u). Equal in the untruncated limit.
struct SumRuleCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};
SumRuleCheck power_sum_rule(int k, double u, const SpinParams& spin,
                            const DriveConfig& drive, int l_max = -1);

// Response profile sampled on a frequency grid.
struct AmplificationProfile {
  Eigen::ArrayXd nu_grid;  // strictly increasing, Hz
  Eigen::ArrayXd eta;      // magnitude
  bool includes_direct_term = false;
};

// Default profile grid: a window of +-window_linewidths FWHM around every
// comb line in [k_lo, k_hi], sampled at FWHM/points_per_linewidth, or at
// exactly step_override when it is positive.
Eigen::ArrayXd make_profile_grid(const SpinParams& spin,
                                 const DriveConfig& drive, int k_lo, int k_hi,
                                 double window_linewidths = 10.0,
                                 int points_per_linewidth = 20,
                                 double step_override = 0.0);

// Evaluates the l = 0 response on `grid`, with or without the direct term.
// Grid points are independent; `jobs` > 1 evaluates them in parallel with
// grid-ordered assembly.
AmplificationProfile response_profile(const Eigen::ArrayXd& grid, double u,
                                      const SpinParams& spin,
                                      const DriveConfig& drive,
                                      bool with_direct_term, int jobs = 1);

}  // namespace floqamp
