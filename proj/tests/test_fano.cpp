#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "floqamp/fano.hpp"
#include "floqamp/steady_state.hpp"

using namespace floqamp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Published multi-line fit values used throughout: eta_{-3..3}, nu_{-3..3}
// on a 1.5 Hz comb, shared t2n.
const double kEta[7] = {-12.47, -21.86, -9.574, -8.532, -7.219, -18.71, -8.121};
const double kNu[7] = {5.539, 7.039, 8.539, 10.039, 11.539, 13.039, 14.539};
const double kT2n = 34.05;

FanoFitResult reference_params() {
  FanoFitResult params;
  for (int i = 0; i < 7; ++i) params.lines.push_back({i - 3, kEta[i], kNu[i]});
  params.t2n = kT2n;
  return params;
}

CurveData synthesize(const FanoFitResult& params, double noise_fraction,
                     unsigned seed) {
  // +-3 linewidths around every line, better than 10 points per linewidth.
  const double span = 3.0 / (std::numbers::pi * params.t2n);
  const double step = span / 40.0;
  std::vector<double> nu;
  for (const FanoLine& line : params.lines) {
    for (double d = -span; d <= span + step / 2.0; d += step) {
      nu.push_back(line.nu_k + d);
    }
  }
  std::sort(nu.begin(), nu.end());
  CurveData data;
  data.nu = Eigen::Map<const Eigen::ArrayXd>(nu.data(), Eigen::Index(nu.size()));
  data.response.resize(data.nu.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
    double value = multiline_model(data.nu[i], params);
    if (noise_fraction > 0.0) value *= 1.0 + noise_fraction * gauss(rng);
    data.response[i] = value;
  }
  return data;
}

}  // namespace

TEST_CASE("fano profile limits") {
  SUBCASE("q = 0 antiresonance at the line center") {
    const FanoParams p{0.0, 5.0, 0.4, 1.3, 0.0};
    CHECK(fano_profile(5.0, p) == 0.0);
    CHECK(fano_profile(5.0 + 0.2, p) == doctest::Approx(1.3 / 2.0).epsilon(1e-12));
  }

  SUBCASE("exact zero of the asymmetric term at eps = -q") {
    const FanoParams p{2.5, 1.0, 0.2, 0.7, 0.0};
    const double e_zero = p.e_r - p.q * p.gamma / 2.0;
    CHECK(fano_profile(e_zero, p) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("q -> +-infinity approaches a Lorentzian") {
    // The odd-in-q correction decays as 1/q, so the two-sided limit is
    // probed by averaging +q and -q; the residual then falls as 1/q^2.
    const double q = 1e3;
    const FanoParams plus{q, 0.0, 2.0, 1.0 / (q * q), 0.0};  // sigma_a q^2 = 1
    const FanoParams minus{-q, 0.0, 2.0, 1.0 / (q * q), 0.0};
    for (double e = -4.0; e <= 4.0; e += 0.37) {
      const double eps = e / (plus.gamma / 2.0);
      const double lorentzian = 1.0 / (1.0 + eps * eps);
      const double mean = (fano_profile(e, plus) + fano_profile(e, minus)) / 2.0;
      CHECK(std::abs(mean - lorentzian) < 1e-6);
    }
  }

  CHECK_THROWS_AS(fano_profile(0.0, FanoParams{0, 0, -1, 1, 0}),
                  std::invalid_argument);
}

TEST_CASE("squared response of one line") {
  SUBCASE("no spin response leaves the flat direct term") {
    for (double nu = 9.0; nu <= 11.0; nu += 0.21) {
      CHECK(eta_squared_profile(nu, 0.0, 10.039, 34.0) == 1.0);
    }
  }

  SUBCASE("line center reads eta^2 + 1") {
    CHECK(eta_squared_profile(10.039, -8.532, 10.039, 34.0) ==
          doctest::Approx(8.532 * 8.532 + 1.0).epsilon(1e-14));
  }

  SUBCASE("antiresonance zero of the asymmetric part sits at x = eta") {
    const double eta = -8.532;
    const double nu_k = 10.039;
    const double t2n = 34.0;
    const double nu_zero = nu_k + eta / (kTwoPi * t2n);  // below the line
    CHECK(nu_zero < nu_k);
    const double x = kTwoPi * (nu_zero - nu_k) * t2n;
    const double symmetric = 1.0 / (1.0 + x * x);
    CHECK(eta_squared_profile(nu_zero, eta, nu_k, t2n) ==
          doctest::Approx(symmetric).epsilon(1e-12));
  }

  SUBCASE("negating eta mirrors the profile about the line center") {
    for (double d = -0.08; d <= 0.08; d += 0.005) {
      CHECK(eta_squared_profile(10.039 + d, -8.532, 10.039, 34.0) ==
            doctest::Approx(eta_squared_profile(10.039 - d, 8.532, 10.039, 34.0))
                .epsilon(1e-14));
    }
  }

  SUBCASE("half-power width reproduces gamma = 1/(pi t2n) for strong lines") {
    const double eta = -110.0;
    const double t2n = 34.0;
    const double nu_k = 10.039;
    const double peak = eta_squared_profile(nu_k, eta, nu_k, t2n);
    const double level = (peak + 1.0) / 2.0;
    const auto crossing = [&](double lo, double hi) {
      for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2.0;
        (eta_squared_profile(mid, eta, nu_k, t2n) > level ? hi : lo) = mid;
      }
      return (lo + hi) / 2.0;
    };
    const double gamma = 1.0 / (std::numbers::pi * t2n);
    const double left = crossing(nu_k - 3.0 * gamma, nu_k);
    const double right = crossing(nu_k + 3.0 * gamma, nu_k);
    CHECK(std::abs((right - left) - gamma) / gamma < 0.01);
  }
}

TEST_CASE("fano parameter") {
  CHECK(fano_parameter(-8.532) == 8.532);
  CHECK(fano_parameter(0.0) == 0.0);

  // Sign chain: q = -eta_{k,0} and eta_{k,0} carries the sign of p0n.
  const SpinParams spin = calibrated_to_baseline(SpinParams{}, -110.0);
  const DriveConfig drive = DriveConfig::from_modulation_index(spin, 10.039, 3.12, 1.5);
  for (int k : {-2, 0, 1}) {
    const double eta = amplification_on_resonance(k, 0, 3.12, spin, drive);
    CHECK(eta < 0.0);  // p0n < 0 and J_k^2 > 0
    CHECK(fano_parameter(eta) > 0.0);
  }
}

TEST_CASE("multiline model equals the sum of single lines") {
  const FanoFitResult params = reference_params();
  for (double nu = 5.0; nu <= 15.0; nu += 0.13) {
    double expected = 0.0;
    for (const FanoLine& line : params.lines) {
      expected += eta_squared_profile(nu, line.eta_k0, line.nu_k, params.t2n);
    }
    CHECK(multiline_model(nu, params) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("noiseless multi-line round trip") {
  const FanoFitResult truth = reference_params();
  const CurveData data = synthesize(truth, 0.0, 1u);

  std::vector<double> candidates(kNu, kNu + 7);
  const FanoFitResult guess = fano_initial_guess(data, candidates);
  REQUIRE(guess.lines.size() == 7);
  // The data-driven starting point lands near the truth before any fitting.
  for (int i = 0; i < 7; ++i) {
    CHECK(std::abs(guess.lines[i].nu_k - kNu[i]) < 0.01);
    CHECK(guess.lines[i].eta_k0 < 0.0);
  }

  const FanoFitResult fit = fit_multiline(data, guess);
  CHECK(fit.converged);
  CHECK(fit.residual_rms < 1e-8);
  for (int i = 0; i < 7; ++i) {
    CHECK(std::abs(fit.lines[i].eta_k0 - kEta[i]) / std::abs(kEta[i]) < 1e-3);
    CHECK(std::abs(fit.lines[i].nu_k - kNu[i]) < 1e-4);  // 0.1 mHz
  }
  CHECK(std::abs(fit.t2n - kT2n) / kT2n < 1e-3);

  // The optimizer cannot do worse than its starting point.
  double guess_sse = 0.0;
  for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
    const double r = multiline_model(data.nu[i], guess) - data.response[i];
    guess_sse += r * r;
  }
  CHECK(fit.residual_rms * fit.residual_rms * double(data.nu.size()) <=
        guess_sse);
}

TEST_CASE("noisy fits recover the amplifications within tolerance") {
  const FanoFitResult truth = reference_params();
  std::vector<double> candidates(kNu, kNu + 7);
  int good = 0;
  const int trials = 8;
  for (int trial = 0; trial < trials; ++trial) {
    const CurveData data = synthesize(truth, 0.01, 1000u + trial);
    const FanoFitResult fit =
        fit_multiline(data, fano_initial_guess(data, candidates));
    bool ok = true;
    for (int i = 0; i < 7; ++i) {
      ok = ok &&
           std::abs(fit.lines[i].eta_k0 - kEta[i]) / std::abs(kEta[i]) < 0.05;
    }
    good += ok ? 1 : 0;
  }
  CHECK(good >= trials - 1);
}

TEST_CASE("single-line subset reduces to a three-parameter fit") {
  FanoFitResult truth;
  truth.lines.push_back({0, -8.532, 10.039});
  truth.t2n = 34.05;
  const CurveData data = synthesize(truth, 0.0, 3u);
  const FanoFitResult fit =
      fit_multiline(data, fano_initial_guess(data, {10.039}));
  CHECK(fit.converged);
  REQUIRE(fit.lines.size() == 1);
  CHECK(std::abs(fit.lines[0].eta_k0 + 8.532) < 1e-3);
  CHECK(std::abs(fit.lines[0].nu_k - 10.039) < 1e-5);
  CHECK(std::abs(fit.t2n - 34.05) < 0.03);
}

TEST_CASE("iteration cap returns best-so-far without convergence") {
  const FanoFitResult truth = reference_params();
  const CurveData data = synthesize(truth, 0.0, 5u);
  FitOptions options;
  options.max_iterations = 1;
  const FanoFitResult fit =
      fit_multiline(data, fano_initial_guess(data, {kNu, kNu + 7}), options);
  CHECK(!fit.converged);
  CHECK(fit.iterations == 1);
}

TEST_CASE("optional additive offset") {
  FanoFitResult truth = reference_params();
  truth.fit_offset = true;
  truth.offset = 2.5;
  const CurveData data = synthesize(truth, 0.0, 7u);
  FitOptions options;
  options.fit_offset = true;
  FanoFitResult guess = fano_initial_guess(data, {kNu, kNu + 7});
  const FanoFitResult fit = fit_multiline(data, guess, options);
  CHECK(fit.converged);
  CHECK(std::abs(fit.offset - 2.5) < 1e-3);
  CHECK(std::abs(fit.t2n - kT2n) / kT2n < 1e-3);
}
