#include "floqamp/bloch.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace floqamp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Vector3d relaxation(const Eigen::Vector3d& p, double p0, double t2,
                           double t1) {
  return {-p.x() / t2, -p.y() / t2, (p0 - p.z()) / t1};
}

}  // namespace

double max_frequency(const SpinParams& spin, const DriveConfig& drive,
                     const TestField& test, SimMode mode) {
  double f = std::max({test.nu, drive.nu_ac, std::abs(drive.larmor(spin))});
  if (mode != SimMode::xe_only) {
    f = std::max(f, std::abs(spin.gamma_e * drive.b0 / spin.q_slowing));
  }
  return f;
}

double SimConfig::resolved_dt(const SpinParams& spin, const DriveConfig& drive,
                              const TestField& test) const {
  if (dt > 0.0) return dt;
  const double f = max_frequency(spin, drive, test, mode);
  if (!(f > 0.0)) return 1e-3;
  return 1.0 / (200.0 * f);
}

double SimConfig::resolved_skip(const SpinParams& spin) const {
  if (transient_skip >= 0.0) return transient_skip;
  return 5.0 * std::max(spin.t1n, spin.t2n);
}

bool TimeSeries::has_channel(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const Eigen::ArrayXd& TimeSeries::channel(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return channels[i];
  }
  throw std::invalid_argument("TimeSeries: no channel named '" + name + "'");
}

void TimeSeries::add_channel(const std::string& name, Eigen::ArrayXd data) {
  if (!channels.empty() && data.size() != samples()) {
    throw std::invalid_argument("TimeSeries: channel length mismatch");
  }
  names.push_back(name);
  channels.push_back(std::move(data));
}

ValidationReport validate_sim(const SimConfig& sim, const SpinParams& spin,
                              const DriveConfig& drive,
                              const TestField& test) {
  ValidationReport report;
  const double dt = sim.resolved_dt(spin, drive, test);
  const double skip = sim.resolved_skip(spin);
  if (!(dt > 0.0)) {
    report.issues.push_back(
        {ValidationIssue::Severity::error, "sim.dt", "step must be positive"});
  }
  if (!(sim.duration > skip) || !(skip >= 0.0)) {
    report.issues.push_back({ValidationIssue::Severity::error, "sim.duration",
                             "duration must exceed transient_skip >= 0"});
  }
  const double f_max = max_frequency(spin, drive, test, sim.mode);
  if (f_max > 0.0 && dt > 1.0 / (100.0 * f_max)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " violates dt <= 1/(100*f_max) with f_max = "
        << f_max << " Hz";
    report.issues.push_back(
        {ValidationIssue::Severity::error, "sim.dt", msg.str()});
  }
  if (sim.frame == Frame::rotating && sim.mode != SimMode::xe_only) {
    report.issues.push_back({ValidationIssue::Severity::error, "sim.frame",
                             "rotating frame is defined for xe_only mode"});
  }
  return report;
}

TimeSeries simulate(const SpinParams& spin, const DriveConfig& drive,
                    const TestField& test, const SimConfig& sim) {
  const ValidationReport report = validate_sim(sim, spin, drive, test);
  if (report.has_errors()) {
    throw std::invalid_argument("simulate: invalid configuration\n" +
                                report.str());
  }

  const double dt = sim.resolved_dt(spin, drive, test);
  const auto n_steps = static_cast<Eigen::Index>(std::llround(sim.duration / dt));
  const Eigen::Index n_samples = n_steps + 1;

  const bool electron = sim.mode != SimMode::xe_only;
  const double wn = kTwoPi * spin.gamma_n;  // rad/s/nT
  const double we = kTwoPi * spin.gamma_e / spin.q_slowing;
  const double nu0 = drive.larmor(spin);
  const double lambda = spin.lambda();

  // Total field seen by the noble gas at time t, in the requested frame.
  const auto field = [&](double t) -> Eigen::Vector3d {
    if (sim.frame == Frame::lab) {
      return {0.0, test.b_y * std::cos(kTwoPi * test.nu * t),
              drive.b0 + drive.b_ac * std::cos(kTwoPi * drive.nu_ac * t)};
    }
    // Rotating frame at the test frequency, co-rotating component kept.
    return {0.0, test.b_y / 2.0,
            (nu0 - test.nu) / spin.gamma_n +
                drive.b_ac * std::cos(kTwoPi * drive.nu_ac * t)};
  };

  using State = Eigen::Matrix<double, 6, 1>;
  const auto rhs = [&](double t, const State& s) -> State {
    const Eigen::Vector3d pn = s.head<3>();
    const Eigen::Vector3d b = field(t);
    State ds = State::Zero();

    Eigen::Vector3d bn = b;
    if (sim.mode == SimMode::full) {
      bn += lambda * spin.m_e * s.tail<3>();
    }
    ds.head<3>() =
        wn * bn.cross(pn) + relaxation(pn, spin.p0n, spin.t2n, spin.t1n);

    if (electron) {
      const Eigen::Vector3d pe = s.tail<3>();
      const Eigen::Vector3d be = b + lambda * spin.m_n * pn;
      ds.tail<3>() = we * be.cross(pe) +
                     relaxation(pe, spin.p0e, spin.t2e, spin.t1e) / spin.q_slowing;
    }
    return ds;
  };

  State s = State::Zero();
  s[2] = spin.p0n;
  if (electron) s[5] = spin.p0e;

  TimeSeries series;
  series.t0 = 0.0;
  series.dt = dt;
  const int n_channels = electron ? 6 : 3;
  static const char* kNames[6] = {"pxn", "pyn", "pzn", "pxe", "pye", "pze"};
  for (int c = 0; c < n_channels; ++c) {
    series.names.emplace_back(kNames[c]);
    series.channels.emplace_back(Eigen::ArrayXd(n_samples));
  }
  for (int c = 0; c < n_channels; ++c) series.channels[c][0] = s[c];

  for (Eigen::Index step = 0; step < n_steps; ++step) {
    const double t = dt * static_cast<double>(step);
    const State k1 = rhs(t, s);
    const State k2 = rhs(t + dt / 2.0, s + (dt / 2.0) * k1);
    const State k3 = rhs(t + dt / 2.0, s + (dt / 2.0) * k2);
    const State k4 = rhs(t + dt, s + dt * k3);
    s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!s.allFinite()) {
      std::ostringstream msg;
      msg << "simulate: non-finite state at step " << step + 1 << " (t = "
          << dt * static_cast<double>(step + 1) << " s)";
      throw std::runtime_error(msg.str());
    }
    for (int c = 0; c < n_channels; ++c) series.channels[c][step + 1] = s[c];
  }
  return series;
}

TimeSeries readout_theta(const TimeSeries& series,
                         const OpticsParams& optics) {
  if (!series.has_channel("pxe")) {
    throw std::invalid_argument(
        "readout_theta: series lacks the pxe channel (electron modes only)");
  }
  const double scale = optics.path_length * optics.r_e * optics.c *
                       optics.oscillator_f * optics.n_density *
                       optics.detuning_factor() / 4.0;
  TimeSeries out;
  out.t0 = series.t0;
  out.dt = series.dt;
  out.add_channel("theta", (series.channel("pxe") * scale).eval());
  return out;
}

std::pair<double, double> steady_amplitude(const TimeSeries& series,
                                           const std::string& channel,
                                           double frequency, double skip) {
  if (!(frequency > 0.0)) {
    throw std::invalid_argument("steady_amplitude: frequency must be > 0");
  }
  const Eigen::ArrayXd& data = series.channel(channel);
  const Eigen::Index n = data.size();
  auto first = static_cast<Eigen::Index>(
      std::ceil((skip - series.t0) / series.dt - 1e-9));
  first = std::max<Eigen::Index>(first, 0);
  if (n - first < 2) {
    throw std::invalid_argument("steady_amplitude: window is empty");
  }
  const double window = series.dt * static_cast<double>(n - 1 - first);
  const double periods = window * frequency;
  if (periods < 5.0) {
    throw std::invalid_argument(
        "steady_amplitude: window shorter than 5 periods");
  }
  if (std::abs(periods - std::round(periods)) / periods > 1e-3) {
    throw std::invalid_argument(
        "steady_amplitude: window must span an integer period count "
        "within 0.1%");
  }

  // Half-open sample window: the final sample would duplicate the phase of
  // the first on an exact integer window and break discrete orthogonality
  // between commensurate tones.
  double scc = 0.0, sss = 0.0, scs = 0.0, sxc = 0.0, sxs = 0.0;
  for (Eigen::Index i = first; i < n - 1; ++i) {
    const double phase = kTwoPi * frequency * series.time(i);
    const double c = std::cos(phase);
    const double sn = std::sin(phase);
    scc += c * c;
    sss += sn * sn;
    scs += c * sn;
    sxc += data[i] * c;
    sxs += data[i] * sn;
  }
  const double det = scc * sss - scs * scs;
  const double a = (sxc * sss - sxs * scs) / det;
  const double b = (sxs * scc - sxc * scs) / det;
  return {std::hypot(a, b), std::atan2(-b, a)};
}

}  // namespace floqamp
