#include <doctest.h>

#include <cmath>
#include <random>

#include "floqamp/bessel.hpp"
#include "floqamp/floquet.hpp"

using namespace floqamp;

namespace {
const SpinParams kSpin;
const DriveConfig kDrive = DriveConfig::from_larmor(kSpin, 10.039, 397.0, 1.5);
}  // namespace

TEST_CASE("floquet energies") {
  CHECK(floquet_energy(+1, 0, kSpin, kDrive) ==
        doctest::Approx(5.0195).epsilon(1e-12));
  CHECK(floquet_energy(-1, 0, kSpin, kDrive) ==
        doctest::Approx(-5.0195).epsilon(1e-12));
  CHECK_THROWS_AS(floquet_energy(0, 0, kSpin, kDrive), std::invalid_argument);

  // Transition frequencies are linear in the ladder indices.
  std::mt19937 rng(11u);
  std::uniform_int_distribution<int> idx(-8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = idx(rng);
    const int m = idx(rng);
    const double gap = floquet_energy(+1, n, kSpin, kDrive) -
                       floquet_energy(-1, m, kSpin, kDrive);
    CHECK(gap == doctest::Approx(kDrive.larmor(kSpin) + (n - m) * kDrive.nu_ac)
                     .epsilon(1e-12));
  }
}

TEST_CASE("floquet state coefficients") {
  SUBCASE("undriven state is undressed") {
    const DriveConfig undriven = DriveConfig::from_larmor(kSpin, 10.039, 0.0, 1.5);
    const FloquetState state =
        floquet_state_coefficients(+1, 0, kSpin, undriven, 10);
    for (int offset = -10; offset <= 10; ++offset) {
      CHECK(state.coeff(offset) == (offset == 0 ? 1.0 : 0.0));
    }
  }

  SUBCASE("normalization at the default truncation") {
    const double u = kDrive.modulation_index(kSpin);
    const FloquetState state = floquet_state_coefficients(
        +1, 0, kSpin, kDrive, default_bessel_k_max(u / 2.0));
    CHECK(state.norm_squared() >= 1.0 - 1e-10);
    CHECK(state.norm_squared() <= 1.0 + 1e-12);
  }

  SUBCASE("branches are related by alternating signs") {
    const FloquetState up = floquet_state_coefficients(+1, 0, kSpin, kDrive, 12);
    const FloquetState down = floquet_state_coefficients(-1, 0, kSpin, kDrive, 12);
    for (int offset = -12; offset <= 12; ++offset) {
      const double sign = (offset % 2 == 0) ? 1.0 : -1.0;
      CHECK(down.coeff(offset) == sign * up.coeff(offset));
    }
  }
}

TEST_CASE("transition amplitudes") {
  CHECK(transition_amplitude(0, 0, 0.0) == 1.0);

  SUBCASE("brute-force convolution agrees with the closed form") {
    for (double u : {0.5, 1.84, 3.12}) {
      for (int k = -3; k <= 3; ++k) {
        for (int l = -3; l <= 3; ++l) {
          CHECK(std::abs(transition_amplitude_convolution(k, l, u) -
                         transition_amplitude(k, l, u)) < 1e-8);
        }
      }
    }
  }

  SUBCASE("cross-sideband magnitudes at u = 3.12") {
    // Published |ratios| 1 : 0.984 : 1.631 : 1.107 for k = 1, l = -1..2.
    const double u = 3.12;
    const double base = std::abs(transition_amplitude(1, -1, u));
    const double expected[] = {1.0, 0.984, 1.631, 1.107};
    for (int l = -1; l <= 2; ++l) {
      const double ratio = std::abs(transition_amplitude(1, l, u)) / base;
      CHECK(std::abs(ratio - expected[l + 1]) / expected[l + 1] < 0.01);
    }
  }
}

TEST_CASE("resonance comb") {
  SUBCASE("seven lines around the Larmor frequency") {
    const ResonanceComb comb = resonance_comb(kSpin, kDrive, -3, 3);
    REQUIRE(comb.lines.size() == 7);
    const double expected[] = {5.539, 7.039, 8.539, 10.039,
                               11.539, 13.039, 14.539};
    for (int i = 0; i < 7; ++i) {
      CHECK(comb.lines[i].k == i - 3);
      CHECK(comb.lines[i].frequency ==
            doctest::Approx(expected[i]).epsilon(1e-12));
    }
    CHECK(!comb.folded());

    // Spacing is exactly nu_ac and the comb is symmetric about nu0.
    for (int i = 1; i < 7; ++i) {
      CHECK(comb.lines[i].frequency - comb.lines[i - 1].frequency ==
            doctest::Approx(kDrive.nu_ac).epsilon(1e-12));
    }
    for (int i = 0; i < 3; ++i) {
      CHECK(comb.lines[i].frequency + comb.lines[6 - i].frequency ==
            doctest::Approx(2.0 * comb.nu0).epsilon(1e-12));
    }
  }

  SUBCASE("degenerate interval keeps the bare Larmor line") {
    const ResonanceComb comb = resonance_comb(kSpin, kDrive, 0, 0);
    REQUIRE(comb.lines.size() == 1);
    CHECK(comb.lines[0].k == 0);
    CHECK(comb.lines[0].frequency == doctest::Approx(10.039).epsilon(1e-12));
  }

  SUBCASE("lines folding through zero frequency are dropped and recorded") {
    const DriveConfig folded_drive =
        DriveConfig::from_larmor(kSpin, 10.039, 0.0, 13.0);
    const ResonanceComb comb = resonance_comb(kSpin, folded_drive, -3, 3);
    CHECK(comb.folded());
    REQUIRE(comb.dropped_orders.size() == 3);
    CHECK(comb.dropped_orders[0] == -3);
    CHECK(comb.dropped_orders[2] == -1);  // 10.039 - 13 = -2.961 Hz
    REQUIRE(comb.lines.size() == 4);
    CHECK(comb.lines[0].frequency == doctest::Approx(10.039).epsilon(1e-12));
  }

  SUBCASE("empty interval is rejected") {
    CHECK_THROWS_AS(resonance_comb(kSpin, kDrive, 2, 1), std::invalid_argument);
  }
}
