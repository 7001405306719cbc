#pragma once

#include <vector>

#include <Eigen/Core>

#include "floqamp/domain.hpp"

// Fano line-shape theory for the squared response and the multi-resonance
// nonlinear fit that extracts per-line amplifications, line centers, and the
// shared transverse relaxation time.

namespace floqamp {

struct FanoParams {
  double q = 0.0;        // asymmetry parameter
  double e_r = 0.0;      // resonance position (Hz here)
  double gamma = 1.0;    // full line width, > 0
  double sigma_a = 1.0;  // scale of the interfering channel, >= 0
  double sigma_b = 0.0;  // scale of the background channel, >= 0
};

// sigma_a*(q + eps)^2/(1 + eps^2) + sigma_b with eps = (e - e_r)/(gamma/2).
double fano_profile(double e, const FanoParams& p);

// Squared response of one amplification line interfering with the unit
// direct term: [(-eta_k0 + x)^2 + 1]/(1 + x^2), x = 2*pi*(nu - nu_k)*t2n.
// This is the Fano shape with q = -eta_k0 and gamma = 1/(pi*t2n).
double eta_squared_profile(double nu, double eta_k0, double nu_k, double t2n);

// Fano asymmetry parameter of an amplification line: q = -eta_k0.
double fano_parameter(double eta_k0);

struct FanoLine {
  int k = 0;
  double eta_k0 = 0.0;  // signed
  double nu_k = 0.0;    // Hz
};

struct FanoFitResult {
  std::vector<FanoLine> lines;  // ascending in k
  double t2n = 0.0;             // shared, s
  double offset = 0.0;          // optional additive constant
  bool fit_offset = false;      // whether `offset` was a free parameter
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Sum of eta_squared_profile over the lines (+ offset): the multi-line model
// the fit minimizes against.
double multiline_model(double nu, const FanoFitResult& params);

struct CurveData {
  Eigen::ArrayXd nu;        // Hz
  Eigen::ArrayXd response;  // squared response (power)
};

// Data-driven starting point: line centers from the tallest bin near each
// candidate, |eta| from sqrt(peak - n_lines), sign from the side the
// antiresonance dip falls on, t2n from the measured half-power width.
FanoFitResult fano_initial_guess(const CurveData& data,
                                 const std::vector<double>& nu_k_candidates);

struct FitOptions {
  bool fit_offset = false;       // free additive constant, off by default
  int max_iterations = 200;
  double parameter_tolerance = 1e-8;  // relative step size for convergence
  double gradient_tolerance = 1e-8;   // infinity norm of the SSE gradient
  Eigen::ArrayXd weights;        // optional per-point weights, default 1
};

// Weighted least squares over {eta_k0, nu_k} per line plus shared t2n,
// Levenberg-Marquardt with the analytic Jacobian. Returns best-so-far with
// converged=false when the iteration cap is reached; throws on rank-deficient
// or non-decreasing steps that damping cannot rescue.
FanoFitResult fit_multiline(const CurveData& data, const FanoFitResult& init,
                            const FitOptions& options = {});

}  // namespace floqamp
