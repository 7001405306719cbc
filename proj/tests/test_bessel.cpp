#include <doctest.h>

#include <cmath>
#include <random>

#include "floqamp/bessel.hpp"
#include "support/bessel_reference.hpp"

using namespace floqamp;

TEST_CASE("bessel_j at the origin") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  for (int k = 1; k <= 40; ++k) {
    CHECK(bessel_j(k, 0.0) == 0.0);
    CHECK(bessel_j(-k, 0.0) == 0.0);
  }
}

TEST_CASE("bessel_j rejects non-finite arguments") {
  CHECK_THROWS_AS(bessel_j(0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(bessel_j(3, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("parity identities hold exactly") {
  for (int k = 0; k <= 30; ++k) {
    for (double x : {0.17, 1.84, 3.12, 11.3, 41.7}) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      CHECK(bessel_j(-k, x) == sign * bessel_j(k, x));
      CHECK(bessel_j(k, -x) == sign * bessel_j(k, x));
    }
  }
}

TEST_CASE("bessel_j matches the independent oracle over the contract range") {
  // Two independent routes: long-double power series / Simpson quadrature.
  double worst = 0.0;
  for (int k = 0; k <= 60; k += (k < 8 ? 1 : 7)) {
    for (double x : {0.05, 0.5, 1.84, 3.12, 7.7, 12.0, 18.4, 26.0, 37.5, 50.0}) {
      const double mine = bessel_j(k, x);
      const double ref = testing::bessel_reference(k, x);
      worst = std::max(worst, std::abs(mine - ref));
    }
  }
  CHECK(worst < 1e-10);

  // The specific small-argument anchor: J_1 near its extremum.
  CHECK(std::abs(bessel_j(1, 1.84) - testing::bessel_reference(1, 1.84)) <
        1e-10);
}

TEST_CASE("bessel_j agrees with the standard library to 1e-12") {
  double worst = 0.0;
  for (int k = 0; k <= 60; ++k) {
    for (double x = 0.25; x <= 50.0; x += 2.47) {
      worst = std::max(worst, std::abs(bessel_j(k, x) -
                                       std::cyl_bessel_j(double(k), x)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("recurrence consistency on a random grid") {
  std::mt19937 rng(77u);
  std::uniform_real_distribution<double> xs(0.05, 45.0);
  std::uniform_int_distribution<int> ks(-40, 40);
  for (int trial = 0; trial < 500; ++trial) {
    const double x = xs(rng);
    const int k = ks(rng);
    const double lhs = bessel_j(k - 1, x) + bessel_j(k + 1, x);
    const double rhs = (2.0 * k / x) * bessel_j(k, x);
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("jacobi_anger_coeffs at u = 0 is a delta at k = 0") {
  const Eigen::ArrayXd coeffs = jacobi_anger_coeffs(0.0, 25);
  for (int k = -25; k <= 25; ++k) {
    CHECK(coeffs[k + 25] == (k == 0 ? 1.0 : 0.0));
  }
}

TEST_CASE("completeness identity and monotone convergence") {
  for (double u : {0.5, 1.84, 3.12, 9.6}) {
    const int enough = default_bessel_k_max(u);
    const Eigen::ArrayXd coeffs = jacobi_anger_coeffs(u, enough);
    CHECK(std::abs((coeffs * coeffs).sum() - 1.0) < 1e-10);

    // Truncated partial sums approach 1 from below as the order grows.
    double previous = 0.0;
    for (int k_max = 0; k_max <= enough; k_max += 5) {
      const Eigen::ArrayXd partial = jacobi_anger_coeffs(u, k_max);
      const double sum = (partial * partial).sum();
      CHECK(sum >= previous - 1e-15);
      CHECK(sum <= 1.0 + 1e-12);
      previous = sum;
    }
  }
}

TEST_CASE("sideband weight ratios at u = 3.12") {
  // Published ratio 1 : 0.969 : 2.660 : 1.225 between J_k^2 for k = 0..3.
  const Eigen::ArrayXd j = jacobi_anger_coeffs(3.12, 3);
  const double j0 = j[3], j1 = j[4], j2 = j[5], j3 = j[6];
  CHECK(std::abs(j1 * j1 / (j0 * j0) - 0.969) / 0.969 < 0.01);
  CHECK(std::abs(j2 * j2 / (j0 * j0) - 2.660) / 2.660 < 0.01);
  CHECK(std::abs(j3 * j3 / (j0 * j0) - 1.225) / 1.225 < 0.01);
}

TEST_CASE("default truncation rule") {
  CHECK(default_bessel_k_max(0.0) == 20);
  CHECK(default_bessel_k_max(3.12) == 24);
  CHECK(default_bessel_k_max(-3.12) == 24);
  CHECK(default_bessel_k_max(40.0) == 60);
}
