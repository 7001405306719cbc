#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "floqamp/domain.hpp"

// Fixed-step RK4 integration of the coupled Bloch equations. This is the
// brute-force time-domain oracle the analytic steady-state formulas are
// checked against.

namespace floqamp {

enum class SimMode {
  xe_only,  // noble-gas spins alone; the electron never enters
  coupled,  // electron sees the noble-gas effective field, no back-action
  full      // both effective-field couplings retained
};

enum class Frame { lab, rotating };

struct SimConfig {
  double dt = 0.0;             // step, s; <= 0 picks 1/(200*f_max)
  double duration = 0.0;       // total integrated time, s
  double transient_skip = -1.0;  // s; < 0 picks 5*max(t1n, t2n)
  SimMode mode = SimMode::xe_only;
  Frame frame = Frame::lab;

  double resolved_dt(const SpinParams&, const DriveConfig&,
                     const TestField&) const;
  double resolved_skip(const SpinParams&) const;
};

// Largest frequency present in the equations of motion (Hz): the test and
// drive frequencies, the Larmor frequency, and in the electron modes the
// slowed electron precession gamma_e*b0/q.
double max_frequency(const SpinParams& spin, const DriveConfig& drive,
                     const TestField& test, SimMode mode);

// Uniformly sampled named channels sharing one time axis.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::string> names;
  std::vector<Eigen::ArrayXd> channels;

  Eigen::Index samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  bool has_channel(const std::string& name) const;
  const Eigen::ArrayXd& channel(const std::string& name) const;  // throws
  void add_channel(const std::string& name, Eigen::ArrayXd data);
  double time(Eigen::Index i) const { return t0 + dt * static_cast<double>(i); }
};

// Checks the SimConfig invariants (positive step, duration > skip >= 0, the
// dt <= 1/(100*f_max) rule, frame/mode compatibility).
ValidationReport validate_sim(const SimConfig& sim, const SpinParams& spin,
                              const DriveConfig& drive, const TestField& test);

// RK4 trajectory from P_n = (0, 0, p0n) (and P_e = (0, 0, p0e) in the
// electron modes) under the total field
//   B = b_y cos(2*pi*nu*t) y + [b0 + b_ac cos(2*pi*nu_ac*t)] z.
// Channels: pxn, pyn, pzn, plus pxe, pye, pze in the electron modes.
// Throws on step-rule violations and on non-finite state (message carries
// the offending step index).
TimeSeries simulate(const SpinParams& spin, const DriveConfig& drive,
                    const TestField& test, const SimConfig& sim);

// Optical-rotation readout theta(t) = l*r_e*c*f*n*P_x^e*D(nu_pr)/4, rad.
// Returns a series with the single channel "theta"; requires pxe.
TimeSeries readout_theta(const TimeSeries& series, const OpticsParams& optics);

// Least-squares projection of one channel onto cos/sin at `frequency` over
// the window after `skip`. Returns (amplitude, phase) of
// amplitude*cos(2*pi*f*t + phase). The window must span >= 5 periods and an
// integer period count within 0.1%.
std::pair<double, double> steady_amplitude(const TimeSeries& series,
                                           const std::string& channel,
                                           double frequency, double skip);

}  // namespace floqamp
