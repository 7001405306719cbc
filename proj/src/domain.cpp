#include "floqamp/domain.hpp"

#include <cmath>
#include <sstream>

namespace floqamp {

bool ValidationReport::ok() const { return issues.empty(); }

bool ValidationReport::has_errors() const {
  for (const auto& issue : issues) {
    if (issue.severity == ValidationIssue::Severity::error) return true;
  }
  return false;
}

std::string ValidationReport::str() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << (issue.severity == ValidationIssue::Severity::error ? "error"
                                                               : "warning")
        << " [" << issue.field << "]: " << issue.message << "\n";
  }
  return out.str();
}

namespace {

void add_error(ValidationReport& report, const std::string& field,
               const std::string& message) {
  report.issues.push_back(
      {ValidationIssue::Severity::error, field, message});
}

void add_warning(ValidationReport& report, const std::string& field,
                 const std::string& message) {
  report.issues.push_back(
      {ValidationIssue::Severity::warning, field, message});
}

void require_positive(ValidationReport& report, const std::string& field,
                      double value, const std::string& what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    add_error(report, field, what + " must be positive");
  }
}

}  // namespace

ValidationReport validate(const SpinParams& spin, const DriveConfig& drive,
                          const TestField& test) {
  ValidationReport report;

  require_positive(report, "spin.t1n", spin.t1n, "relaxation time");
  require_positive(report, "spin.t2n", spin.t2n, "relaxation time");
  require_positive(report, "spin.t1e", spin.t1e, "relaxation time");
  require_positive(report, "spin.t2e", spin.t2e, "relaxation time");
  require_positive(report, "spin.kappa0", spin.kappa0,
                   "Fermi-contact enhancement factor");
  if (!(std::abs(spin.p0n) <= 1.0)) {
    add_error(report, "spin.p0n", "|polarization| must not exceed 1");
  }
  if (!(std::abs(spin.p0e) <= 1.0)) {
    add_error(report, "spin.p0e", "|polarization| must not exceed 1");
  }
  if (!(spin.q_slowing >= 1.0)) {
    add_error(report, "spin.q_slowing", "slowing-down factor must be >= 1");
  }
  if (!(spin.gamma_n > 0.0)) {
    add_error(report, "spin.gamma_n", "gyromagnetic ratio must be positive");
  }
  if (!(spin.gamma_e > 0.0)) {
    add_error(report, "spin.gamma_e", "gyromagnetic ratio must be positive");
  }
  if (!(spin.m_n >= 0.0)) {
    add_error(report, "spin.m_n", "magnetization scale must be >= 0");
  }
  if (!(spin.m_e >= 0.0)) {
    add_error(report, "spin.m_e", "magnetization scale must be >= 0");
  }

  if (!(drive.nu_ac > 0.0)) {
    add_error(report, "drive.nu_ac", "drive frequency must be positive");
  }
  if (drive.b_ac < 0.0) {
    add_error(report, "drive.b_ac", "drive amplitude must be >= 0");
  }
  if (spin.gamma_n > 0.0 && drive.nu_ac > 0.0) {
    const double u = drive.modulation_index(spin);
    if ((u == 0.0) != (drive.b_ac == 0.0)) {
      add_error(report, "drive.b_ac",
                "modulation index is zero iff the drive amplitude is zero");
    }
  }

  if (!(test.b_y >= 0.0)) {
    add_error(report, "test.b_y", "test amplitude must be >= 0");
  }
  if (!(test.nu >= 0.0)) {
    add_error(report, "test.nu", "test frequency must be >= 0");
  }
  // Small-signal regime required by the linear-response solution.
  const double smallness =
      2.0 * std::numbers::pi * spin.gamma_n * test.b_y * spin.t1n;
  if (std::isfinite(smallness) && smallness > 0.1) {
    std::ostringstream msg;
    msg << "2*pi*gamma_n*b_y*t1n = " << smallness
        << " exceeds 0.1; linear-response formulas degrade";
    add_warning(report, "test.b_y", msg.str());
  }

  return report;
}

ValidationReport validate(const SpinParams& spin, const DriveConfig& drive,
                          const TestField& test, const OpticsParams& optics) {
  ValidationReport report = validate(spin, drive, test);
  require_positive(report, "optics.gamma_opt", optics.gamma_opt,
                   "optical linewidth");
  if (!std::isfinite(optics.nu_pr - optics.nu_d2)) {
    add_error(report, "optics.nu_pr", "probe detuning must be finite");
  }
  return report;
}

}  // namespace floqamp
