#pragma once

#include <string>
#include <vector>

#include "floqamp/domain.hpp"

// Built-in invariant suite: the identities the whole construction rests on,
// each checked numerically with its measured deviation reported.

namespace floqamp {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst observed deviation
  double threshold = 0.0;  // allowed deviation
  std::string detail;
};

struct VerifyOptions {
  // Test hook: fractional corruption applied to t2n on the formula side of
  // the line-width check. Nonzero values must make that check fail.
  double t2n_corruption = 0.0;
  // Run the reduced-duration time-domain oracle comparison (a few seconds).
  bool include_oracle = true;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
  std::string str() const;       // one PASS/FAIL line per check
  std::string json() const;      // stable schema: name/pass/measured/threshold
};

VerifyReport run_verify_suite(const SpinParams& spin,
                              const VerifyOptions& options = {});

// Width of the k = 0 resonance of the multi-line amplitude envelope at
// modulation index u, measured by bisecting the half-maximum crossings.
double measured_envelope_fwhm(double u, const SpinParams& spin,
                              const DriveConfig& drive);

}  // namespace floqamp
