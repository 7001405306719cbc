#include "floqamp/fano.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace floqamp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double fano_profile(double e, const FanoParams& p) {
  if (!(p.gamma > 0.0)) {
    throw std::invalid_argument("fano_profile: gamma must be positive");
  }
  const double eps = (e - p.e_r) / (p.gamma / 2.0);
  const double q_eps = p.q + eps;
  return p.sigma_a * q_eps * q_eps / (1.0 + eps * eps) + p.sigma_b;
}

double eta_squared_profile(double nu, double eta_k0, double nu_k, double t2n) {
  if (!(t2n > 0.0)) {
    throw std::invalid_argument("eta_squared_profile: t2n must be positive");
  }
  const double x = kTwoPi * (nu - nu_k) * t2n;
  const double num = (-eta_k0 + x) * (-eta_k0 + x) + 1.0;
  return num / (1.0 + x * x);
}

double fano_parameter(double eta_k0) { return -eta_k0; }

double multiline_model(double nu, const FanoFitResult& params) {
  double f = params.fit_offset ? params.offset : 0.0;
  for (const FanoLine& line : params.lines) {
    f += eta_squared_profile(nu, line.eta_k0, line.nu_k, params.t2n);
  }
  return f;
}

FanoFitResult fano_initial_guess(const CurveData& data,
                                 const std::vector<double>& nu_k_candidates) {
  if (data.nu.size() != data.response.size() || data.nu.size() < 3) {
    throw std::invalid_argument("fano_initial_guess: malformed data");
  }
  if (nu_k_candidates.empty()) {
    throw std::invalid_argument("fano_initial_guess: no candidate lines");
  }
  const auto n_lines = static_cast<double>(nu_k_candidates.size());

  // Half the smallest candidate spacing bounds each line's search window.
  double window = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < nu_k_candidates.size(); ++i) {
    window = std::min(window,
                      (nu_k_candidates[i] - nu_k_candidates[i - 1]) / 2.0);
  }
  if (!std::isfinite(window)) {
    window = (data.nu.maxCoeff() - data.nu.minCoeff()) / 2.0;
  }

  FanoFitResult guess;
  std::vector<double> width_estimates;
  int k = -static_cast<int>(nu_k_candidates.size()) / 2;
  for (const double nu_k : nu_k_candidates) {
    // Tallest sample near the candidate center.
    Eigen::Index peak = -1;
    for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
      if (std::abs(data.nu[i] - nu_k) <= window &&
          (peak < 0 || data.response[i] > data.response[peak])) {
        peak = i;
      }
    }
    if (peak < 0) {
      throw std::invalid_argument(
          "fano_initial_guess: no data near a candidate line");
    }
    const double peak_value = data.response[peak];
    // Far from every line each term contributes ~1, so the multi-line
    // baseline under a peak is about the line count.
    const double magnitude =
        std::sqrt(std::max(peak_value - n_lines, 0.25));

    // The antiresonance dip sits below the center for negative eta.
    double min_left = peak_value, min_right = peak_value;
    for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
      if (std::abs(data.nu[i] - nu_k) > window) continue;
      if (data.nu[i] < data.nu[peak]) {
        min_left = std::min(min_left, data.response[i]);
      } else if (data.nu[i] > data.nu[peak]) {
        min_right = std::min(min_right, data.response[i]);
      }
    }
    const double sign = (min_left <= min_right) ? -1.0 : 1.0;

    // Half-power width read off by walking down both flanks.
    const double half_level = (peak_value + n_lines) / 2.0;
    double lo = data.nu[peak], hi = data.nu[peak];
    for (Eigen::Index i = peak; i >= 0 && std::abs(data.nu[i] - nu_k) <= window;
         --i) {
      lo = data.nu[i];
      if (data.response[i] < half_level) break;
    }
    for (Eigen::Index i = peak;
         i < data.nu.size() && std::abs(data.nu[i] - nu_k) <= window; ++i) {
      hi = data.nu[i];
      if (data.response[i] < half_level) break;
    }
    if (hi > lo) width_estimates.push_back(hi - lo);

    guess.lines.push_back({k, sign * magnitude, data.nu[peak]});
    ++k;
  }

  double width = 0.0;
  if (!width_estimates.empty()) {
    std::nth_element(width_estimates.begin(),
                     width_estimates.begin() + width_estimates.size() / 2,
                     width_estimates.end());
    width = width_estimates[width_estimates.size() / 2];
  }
  // Half-power full width of the squared line shape is 1/(pi*t2n).
  guess.t2n = width > 0.0 ? 1.0 / (std::numbers::pi * width) : 1.0;
  guess.offset = 0.0;
  return guess;
}

namespace {

struct ModelEval {
  double value = 0.0;
  Eigen::VectorXd jacobian;  // d value / d theta
};

// Parameter layout: [eta_0..eta_{L-1}, nu_0..nu_{L-1}, t2n (, offset)].
ModelEval eval_model(double nu, const Eigen::VectorXd& theta, int n_lines,
                     bool fit_offset) {
  ModelEval out;
  out.jacobian = Eigen::VectorXd::Zero(theta.size());
  const double t2n = theta[2 * n_lines];
  for (int i = 0; i < n_lines; ++i) {
    const double eta = theta[i];
    const double nu_k = theta[n_lines + i];
    const double y = kTwoPi * (nu - nu_k) * t2n;
    const double denom = 1.0 + y * y;
    const double r = y - eta;
    out.value += (r * r + 1.0) / denom;
    const double dg_deta = -2.0 * r / denom;
    const double dg_dy = (2.0 * r * denom - 2.0 * y * (r * r + 1.0)) /
                         (denom * denom);
    out.jacobian[i] += dg_deta;
    out.jacobian[n_lines + i] += dg_dy * (-kTwoPi * t2n);
    out.jacobian[2 * n_lines] += dg_dy * kTwoPi * (nu - nu_k);
  }
  if (fit_offset) {
    out.value += theta[theta.size() - 1];
    out.jacobian[theta.size() - 1] = 1.0;
  }
  return out;
}

}  // namespace

FanoFitResult fit_multiline(const CurveData& data, const FanoFitResult& init,
                            const FitOptions& options) {
  const Eigen::Index n = data.nu.size();
  if (n != data.response.size() || n < 3) {
    throw std::invalid_argument("fit_multiline: malformed data");
  }
  const int n_lines = static_cast<int>(init.lines.size());
  if (n_lines == 0) {
    throw std::invalid_argument("fit_multiline: no lines in the initial guess");
  }
  if (!(init.t2n > 0.0)) {
    throw std::invalid_argument("fit_multiline: initial t2n must be positive");
  }
  Eigen::ArrayXd weights = options.weights;
  if (weights.size() == 0) weights = Eigen::ArrayXd::Ones(n);
  if (weights.size() != n) {
    throw std::invalid_argument("fit_multiline: weight length mismatch");
  }

  const int n_params = 2 * n_lines + 1 + (options.fit_offset ? 1 : 0);
  Eigen::VectorXd theta(n_params);
  for (int i = 0; i < n_lines; ++i) {
    theta[i] = init.lines[i].eta_k0;
    theta[n_lines + i] = init.lines[i].nu_k;
  }
  theta[2 * n_lines] = init.t2n;
  if (options.fit_offset) theta[n_params - 1] = init.offset;

  const auto sse_and_system = [&](const Eigen::VectorXd& th, double& sse,
                                  Eigen::MatrixXd* jtj,
                                  Eigen::VectorXd* jtr) {
    sse = 0.0;
    if (jtj != nullptr) jtj->setZero(n_params, n_params);
    if (jtr != nullptr) jtr->setZero(n_params);
    for (Eigen::Index i = 0; i < n; ++i) {
      const ModelEval model = eval_model(data.nu[i], th, n_lines,
                                         options.fit_offset);
      const double w = weights[i];
      const double r = w * (model.value - data.response[i]);
      sse += r * r;
      if (jtj != nullptr && jtr != nullptr) {
        const Eigen::VectorXd j = w * model.jacobian;
        jtj->selfadjointView<Eigen::Lower>().rankUpdate(j);
        *jtr += j * r;
      }
    }
    if (jtj != nullptr) {
      *jtj = jtj->selfadjointView<Eigen::Lower>();
    }
  };

  double sse = 0.0;
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;
  sse_and_system(theta, sse, &jtj, &jtr);

  double damping = 1e-3;
  bool converged = false;
  bool exhausted = false;
  int iterations = 0;
  for (; iterations < options.max_iterations && !converged && !exhausted;
       ++iterations) {
    bool stepped = false;
    while (!stepped) {
      Eigen::MatrixXd damped = jtj;
      for (int d = 0; d < n_params; ++d) {
        const double scale = jtj(d, d) > 0.0 ? jtj(d, d) : 1.0;
        damped(d, d) += damping * scale;
      }
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      if (solver.info() != Eigen::Success) {
        throw std::runtime_error("fit_multiline: rank-deficient Jacobian");
      }
      const Eigen::VectorXd delta = solver.solve(-jtr);
      if (!delta.allFinite()) {
        throw std::runtime_error("fit_multiline: rank-deficient Jacobian");
      }
      double max_rel_step = 0.0;
      for (int d = 0; d < n_params; ++d) {
        max_rel_step = std::max(
            max_rel_step, std::abs(delta[d]) / std::max(1.0, std::abs(theta[d])));
      }

      double trial_sse = 0.0;
      const Eigen::VectorXd trial = theta + delta;
      sse_and_system(trial, trial_sse, nullptr, nullptr);
      if (trial_sse <= sse) {
        const double improvement = sse - trial_sse;
        theta = trial;
        sse_and_system(theta, sse, &jtj, &jtr);
        const double gradient_norm = 2.0 * jtr.lpNorm<Eigen::Infinity>();
        // Converged when nothing moves and either the gradient is flat or
        // the objective has stopped improving at evaluation precision (the
        // latter is where quantized or noisy data pins the residual floor
        // and the raw gradient bottoms out above the noiseless threshold).
        converged = max_rel_step < options.parameter_tolerance &&
                    (gradient_norm < options.gradient_tolerance ||
                     improvement <= 1e-12 * std::max(sse, 1e-300));
        damping = std::max(damping / 10.0, 1e-14);
        stepped = true;
      } else if (max_rel_step < options.parameter_tolerance && damping > 1e8) {
        converged = true;
        stepped = true;
      } else {
        damping *= 10.0;
        if (damping > 1e14) {
          // No descent at any damping and steps still large: stalled.
          exhausted = true;
          stepped = true;
        }
      }
    }
  }

  FanoFitResult result;
  result.lines.resize(static_cast<size_t>(n_lines));
  for (int i = 0; i < n_lines; ++i) {
    result.lines[static_cast<size_t>(i)] = {init.lines[static_cast<size_t>(i)].k,
                                            theta[i], theta[n_lines + i]};
  }
  result.t2n = theta[2 * n_lines];
  result.fit_offset = options.fit_offset;
  result.offset = options.fit_offset ? theta[n_params - 1] : 0.0;
  result.converged = converged;
  result.iterations = iterations;
  double final_sse = 0.0;
  sse_and_system(theta, final_sse, nullptr, nullptr);
  result.residual_rms = std::sqrt(final_sse / static_cast<double>(n));
  return result;
}

}  // namespace floqamp
