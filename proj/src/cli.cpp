#include "floqamp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "floqamp/bessel.hpp"
#include "floqamp/bloch.hpp"
#include "floqamp/config.hpp"
#include "floqamp/fano.hpp"
#include "floqamp/floquet.hpp"
#include "floqamp/io.hpp"
#include "floqamp/spectrum.hpp"
#include "floqamp/steady_state.hpp"
#include "floqamp/verify.hpp"
#include "floqamp/version.hpp"

namespace floqamp {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitCheckFailed = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("-c,--config", common.config_path,
                  "experiment config file (defaults used when omitted)");
  cmd->add_option("-s,--set", common.overrides,
                  "override section.key=value (repeatable; wins over the file)");
  cmd->add_option("-o,--out", common.out_dir,
                  "run directory (default <FLOQAMP_OUT_ROOT or ./runs>/<command>)");
  cmd->add_option("-j,--jobs", common.jobs,
                  "worker threads for sweep/profile points (default: cores)");
}

ExperimentConfig load_config(const CommonOptions& common) {
  ExperimentConfig config;
  if (!common.config_path.empty()) {
    config = parse_config_file(common.config_path);
  }
  for (const std::string& assignment : common.overrides) {
    apply_override(config, assignment);
  }
  return config;
}

int resolve_jobs(const CommonOptions& common) {
  if (common.jobs > 0) return common.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

fs::path resolve_run_dir(const CommonOptions& common,
                         const std::string& command) {
  if (!common.out_dir.empty()) return fs::path(common.out_dir);
  const char* root = std::getenv("FLOQAMP_OUT_ROOT");
  return fs::path(root != nullptr ? root : "runs") / command;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%FT%TZ", &tm_utc);
  return buffer;
}

class RunManifest {
 public:
  RunManifest(std::string command, const ExperimentConfig& config,
              fs::path dir)
      : dir_(std::move(dir)) {
    doc_["command"] = std::move(command);
    doc_["version"] = kVersion;
    doc_["started_at"] = iso_timestamp();
    doc_["config"] = serialize_config(config);
    doc_["outputs"] = nlohmann::json::array();
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  fs::path output(const std::string& name) {
    doc_["outputs"].push_back(name);
    return dir_ / name;
  }

  void note(const std::string& key, const nlohmann::json& value) {
    doc_[key] = value;
  }

  void finish() {
    doc_["finished_at"] = iso_timestamp();
    std::ofstream out(dir_ / "manifest.json");
    out << doc_.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  nlohmann::json doc_;
};

// Fails the run (exit 1) when the domain configuration is invalid; warnings
// are printed and do not stop the run.
int check_domain(const ExperimentConfig& config) {
  const ValidationReport report =
      validate(config.spin, config.drive, config.test, config.optics);
  if (!report.ok()) std::cerr << report.str();
  return report.has_errors() ? kExitInput : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_validate(const CommonOptions& common) {
  const ExperimentConfig config = load_config(common);
  ValidationReport report =
      validate(config.spin, config.drive, config.test, config.optics);
  // The sim section participates only when it describes a usable run.
  const ValidationReport sim_report =
      validate_sim(config.sim, config.spin, config.drive, config.test);
  report.issues.insert(report.issues.end(), sim_report.issues.begin(),
                       sim_report.issues.end());
  if (report.ok()) {
    std::cout << "configuration valid\n";
    return kExitOk;
  }
  std::cout << report.str();
  return report.has_errors() ? kExitInput : kExitOk;
}

struct ProfileOptions {
  int k_lo = 0, k_hi = 0;
  bool k_range_set = false;
  double window_linewidths = 10.0;
  int points_per_linewidth = 20;
  double grid_step = 0.0;
};

int cmd_profile(const CommonOptions& common, const ProfileOptions& options) {
  const ExperimentConfig config = load_config(common);
  if (int rc = check_domain(config); rc != kExitOk) return rc;

  const double u = config.drive.modulation_index(config.spin);
  int k_lo = options.k_lo, k_hi = options.k_hi;
  if (!options.k_range_set) {
    const int reach = static_cast<int>(std::ceil(u)) + 3;
    k_lo = -reach;
    k_hi = reach;
  }

  RunManifest manifest("profile", config, resolve_run_dir(common, "profile"));
  const Eigen::ArrayXd grid = make_profile_grid(
      config.spin, config.drive, k_lo, k_hi, options.window_linewidths,
      options.points_per_linewidth, options.grid_step);
  const int jobs = resolve_jobs(common);
  const AmplificationProfile bare =
      response_profile(grid, u, config.spin, config.drive, false, jobs);
  const AmplificationProfile with_direct =
      response_profile(grid, u, config.spin, config.drive, true, jobs);
  write_profile_csv(manifest.output("profile.csv").string(), bare, with_direct);
  write_profile_json(manifest.output("profile.json").string(), bare, with_direct);

  manifest.note("modulation_index", u);
  manifest.note("grid_points", static_cast<int>(grid.size()));
  manifest.finish();
  std::cout << "profile: " << grid.size() << " points, u = " << u << "\n";
  return kExitOk;
}

int cmd_simulate(const CommonOptions& common) {
  ExperimentConfig config = load_config(common);
  if (int rc = check_domain(config); rc != kExitOk) return rc;

  // Stretch the analysis window to the nearest integer-period window so the
  // rectangular-window spectrum keeps every comb tone inside one bin.
  const double skip = config.sim.resolved_skip(config.spin);
  const double requested = config.sim.duration - skip;
  if (requested <= 0.0) {
    std::cerr << "error [sim.duration]: duration must exceed transient_skip\n";
    return kExitInput;
  }
  const double window =
      integer_period_window(config.test.nu, config.drive.nu_ac, requested);
  config.sim.duration = skip + window;
  config.sim.transient_skip = skip;

  const ValidationReport sim_report =
      validate_sim(config.sim, config.spin, config.drive, config.test);
  if (!sim_report.ok()) {
    std::cerr << sim_report.str();
    if (sim_report.has_errors()) return kExitInput;
  }
  if (config.sim.mode != SimMode::xe_only) {
    std::cerr << "note: electron modes resolve the electron Larmor timescale; "
                 "expect a much smaller step than xe_only\n";
  }

  RunManifest manifest("simulate", config, resolve_run_dir(common, "simulate"));
  TimeSeries series = simulate(config.spin, config.drive, config.test, config.sim);

  // Effective field of the spins and the total observed transverse field.
  const double field_scale = config.spin.lambda() * config.spin.m_n;
  Eigen::ArrayXd beff_y = field_scale * series.channel("pyn");
  Eigen::ArrayXd direct(series.samples());
  for (Eigen::Index i = 0; i < series.samples(); ++i) {
    direct[i] = config.test.b_y *
                std::cos(2.0 * std::numbers::pi * config.test.nu * series.time(i));
  }
  series.add_channel("beff_y", beff_y);
  series.add_channel("btot_y", (beff_y + direct).eval());
  if (series.has_channel("pxe")) {
    series.add_channel("theta",
                       readout_theta(series, config.optics).channel("theta"));
  }

  write_timeseries_csv(manifest.output("timeseries.csv").string(), series);
  write_timeseries_binary(manifest.output("timeseries.fqts").string(), series);

  // Analysis window: drop the transient, keep the integer-period tail.
  TimeSeries tail;
  tail.dt = series.dt;
  const auto first = static_cast<Eigen::Index>(
      std::ceil(skip / series.dt - 1e-9));
  tail.t0 = series.time(first);
  for (size_t c = 0; c < series.names.size(); ++c) {
    tail.add_channel(series.names[c],
                     series.channels[c].tail(series.samples() - first).eval());
  }

  const Spectrum spin_spectrum = amplitude_spectrum(tail, "beff_y");
  const Spectrum total_spectrum = amplitude_spectrum(tail, "btot_y");
  write_spectrum_csv(manifest.output("spectrum.csv").string(), spin_spectrum);
  write_spectrum_json(manifest.output("spectrum.json").string(), spin_spectrum);
  write_spectrum_csv(manifest.output("spectrum_total.csv").string(),
                     total_spectrum);

  const ResonanceComb comb = resonance_comb(config.spin, config.drive, -3, 3);
  const double tol = std::min(0.4 * config.drive.nu_ac, 0.2);
  std::vector<SidebandPeak> peaks;
  std::vector<MeasuredAmplification> etas;
  if (!comb.lines.empty()) {
    peaks = sideband_peaks(spin_spectrum, comb, std::max(tol, spin_spectrum.df));
    if (config.test.b_y > 0.0) {
      // Reference: the magnetometer sees the bare test tone when the spins
      // are absent, so the reference spectrum is the direct term alone.
      TimeSeries reference;
      reference.t0 = tail.t0;
      reference.dt = tail.dt;
      reference.add_channel("direct", direct.tail(series.samples() - first).eval());
      const Spectrum ref_spectrum = amplitude_spectrum(reference, "direct");
      etas = measure_amplification(spin_spectrum, ref_spectrum, comb,
                                   config.test.nu,
                                   std::max(tol, spin_spectrum.df));
    }
  }
  write_peaks_json(manifest.output("sidebands.json").string(), peaks, etas);

  manifest.note("window_s", window);
  manifest.note("dt_s", series.dt);
  manifest.finish();

  int present = 0;
  for (const auto& peak : peaks) present += peak.present ? 1 : 0;
  std::cout << "simulate: " << series.samples() << " samples, "
            << present << " sidebands above the noise floor\n";
  return kExitOk;
}

struct SweepOptions {
  std::string axis = "u";
  double from = 0.0;
  double to = 1.0;
  int steps = 2;
  std::vector<std::string> pairs;  // "k,l"
};

int cmd_sweep(const CommonOptions& common, const SweepOptions& options) {
  const ExperimentConfig config = load_config(common);
  if (int rc = check_domain(config); rc != kExitOk) return rc;
  if (options.steps < 1) {
    std::cerr << "error [sweep.steps]: need at least one step\n";
    return kExitInput;
  }
  if (options.axis != "u" && options.axis != "nu" && options.axis != "nu_ac") {
    std::cerr << "error [sweep.axis]: axis must be u, nu or nu_ac\n";
    return kExitInput;
  }

  std::vector<std::pair<int, int>> pairs;
  if (options.pairs.empty()) {
    pairs = {{0, 0}, {1, -1}, {1, 0}, {1, 1}};
  } else {
    for (const std::string& text : options.pairs) {
      const auto comma = text.find(',');
      if (comma == std::string::npos) {
        std::cerr << "error [sweep.pair]: expected k,l got '" << text << "'\n";
        return kExitInput;
      }
      pairs.emplace_back(std::stoi(text.substr(0, comma)),
                         std::stoi(text.substr(comma + 1)));
    }
  }

  RunManifest manifest("sweep", config, resolve_run_dir(common, "sweep"));
  const Eigen::Index n = options.steps;
  Eigen::ArrayXd axis_values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    axis_values[i] = n == 1 ? options.from
                            : options.from + (options.to - options.from) *
                                  static_cast<double>(i) /
                                  static_cast<double>(n - 1);
  }

  std::vector<std::string> rows(static_cast<size_t>(n));
  const auto eval_row = [&](Eigen::Index i) {
    const double value = axis_values[i];
    double u = config.drive.modulation_index(config.spin);
    DriveConfig drive = config.drive;
    double test_nu = config.test.nu;
    if (options.axis == "u") {
      u = value;
    } else if (options.axis == "nu") {
      test_nu = value;
    } else {
      drive.nu_ac = value;
      u = drive.modulation_index(config.spin);
    }

    std::ostringstream row;
    row << format_12(value);
    for (const auto& [k, l] : pairs) {
      double eta = 0.0;
      if (options.axis == "nu") {
        eta = amplification_spectrum(u, test_nu, l, config.spin, drive);
      } else {
        eta = amplification_on_resonance(k, l, u, config.spin, drive);
      }
      row << ',' << format_12(eta);
    }
    row << ','
        << format_12(total_response_with_direct_term(u, test_nu, config.spin,
                                                     drive));
    rows[static_cast<size_t>(i)] = row.str();
  };

  const int jobs = std::min<int>(resolve_jobs(common), static_cast<int>(n));
  if (jobs <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) eval_row(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (Eigen::Index i = t; i < n; i += jobs) eval_row(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  const fs::path csv_path = manifest.output("sweep.csv");
  {
    std::ofstream out(csv_path);
    out << options.axis;
    for (const auto& [k, l] : pairs) {
      out << ",eta_" << k << '_' << (l < 0 ? "m" : "") << std::abs(l);
    }
    out << ",response_total\n";
    for (const std::string& row : rows) out << row << '\n';
  }
  manifest.finish();
  std::cout << "sweep: " << n << " rows over " << options.axis << "\n";
  return kExitOk;
}

struct FitOptionsCli {
  std::string data_path;
  bool power_input = false;
  bool with_offset = false;
  int k_lo = -3, k_hi = 3;
  int max_iterations = 200;
};

int cmd_fit(const CommonOptions& common, const FitOptionsCli& options) {
  const ExperimentConfig config = load_config(common);
  if (int rc = check_domain(config); rc != kExitOk) return rc;

  CurveData data = read_curve_csv(options.data_path);
  if (data.nu.size() < 3) {
    std::cerr << "error [fit.data]: too few samples\n";
    return kExitInput;
  }
  // Ascending frequency order, then square amplitudes unless the input is
  // already a power response.
  std::vector<Eigen::Index> order(static_cast<size_t>(data.nu.size()));
  for (Eigen::Index i = 0; i < data.nu.size(); ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.nu[a] < data.nu[b];
  });
  CurveData sorted;
  sorted.nu.resize(data.nu.size());
  sorted.response.resize(data.nu.size());
  for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
    sorted.nu[i] = data.nu[order[static_cast<size_t>(i)]];
    sorted.response[i] = data.response[order[static_cast<size_t>(i)]];
  }
  if (!options.power_input) {
    sorted.response = sorted.response.square();
  }

  const ResonanceComb comb =
      resonance_comb(config.spin, config.drive, options.k_lo, options.k_hi);
  std::vector<double> candidates;
  for (const auto& line : comb.lines) {
    if (line.frequency >= sorted.nu.minCoeff() &&
        line.frequency <= sorted.nu.maxCoeff()) {
      candidates.push_back(line.frequency);
    }
  }
  if (candidates.empty()) {
    std::cerr << "error [fit]: no comb line falls inside the data range\n";
    return kExitInput;
  }

  RunManifest manifest("fit", config, resolve_run_dir(common, "fit"));
  FanoFitResult guess = fano_initial_guess(sorted, candidates);
  // Carry the comb orders into the result records.
  size_t idx = 0;
  for (const auto& line : comb.lines) {
    if (line.frequency >= sorted.nu.minCoeff() &&
        line.frequency <= sorted.nu.maxCoeff() && idx < guess.lines.size()) {
      guess.lines[idx++].k = line.k;
    }
  }
  FitOptions fit_options;
  fit_options.fit_offset = options.with_offset;
  fit_options.max_iterations = options.max_iterations;
  const FanoFitResult fit = fit_multiline(sorted, guess, fit_options);

  write_fit_json(manifest.output("fit.json").string(), fit);
  write_fit_curve_csv(manifest.output("fit_curve.csv").string(), fit, sorted);
  manifest.note("converged", fit.converged);
  manifest.finish();

  std::cout << "fit: t2n = " << fit.t2n << " s, rms = " << fit.residual_rms
            << (fit.converged ? "" : " (not converged)") << "\n";
  return fit.converged ? kExitOk : kExitNoConvergence;
}

struct VerifyOptionsCli {
  bool skip_oracle = false;
  double corrupt_t2n = 0.0;
};

int cmd_verify(const CommonOptions& common, const VerifyOptionsCli& options) {
  const ExperimentConfig config = load_config(common);
  if (int rc = check_domain(config); rc != kExitOk) return rc;

  VerifyOptions verify_options;
  verify_options.include_oracle = !options.skip_oracle;
  verify_options.t2n_corruption = options.corrupt_t2n;
  const VerifyReport report = run_verify_suite(config.spin, verify_options);

  std::cout << report.str();
  RunManifest manifest("verify", config, resolve_run_dir(common, "verify"));
  std::ofstream(manifest.output("verify.json")) << report.json();
  manifest.finish();
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Floquet spin-amplification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  ProfileOptions profile_options;
  SweepOptions sweep_options;
  FitOptionsCli fit_options;
  VerifyOptionsCli verify_options;

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a configuration and exit");
  add_common(validate_cmd, common);

  CLI::App* profile_cmd = app.add_subcommand(
      "profile", "amplification vs test frequency around the comb");
  add_common(profile_cmd, common);
  auto* klo = profile_cmd->add_option("--k-lo", profile_options.k_lo,
                                      "lowest comb order (default: -ceil(u)-3)");
  auto* khi = profile_cmd->add_option("--k-hi", profile_options.k_hi,
                                      "highest comb order");
  profile_cmd->add_option("--window", profile_options.window_linewidths,
                          "half window around each line, in linewidths");
  profile_cmd->add_option("--points-per-linewidth",
                          profile_options.points_per_linewidth,
                          "grid density (ignored with --grid-step)");
  profile_cmd->add_option("--grid-step", profile_options.grid_step,
                          "exact grid step in Hz");

  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "integrate the Bloch equations and analyze the spectrum");
  add_common(simulate_cmd, common);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "amplification factors along one axis");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--axis", sweep_options.axis, "u, nu or nu_ac");
  sweep_cmd->add_option("--from", sweep_options.from, "axis start")->required();
  sweep_cmd->add_option("--to", sweep_options.to, "axis end")->required();
  sweep_cmd->add_option("--steps", sweep_options.steps, "row count")->required();
  sweep_cmd->add_option("--pair", sweep_options.pairs,
                        "sideband pair k,l (repeatable)");

  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "multi-line Fano fit of a measured response curve");
  add_common(fit_cmd, common);
  fit_cmd->add_option("--data", fit_options.data_path, "CSV of nu_hz,response")
      ->required();
  fit_cmd->add_flag("--power-input", fit_options.power_input,
                    "input is already squared (default: amplitude)");
  fit_cmd->add_flag("--with-offset", fit_options.with_offset,
                    "free additive offset in the fit model");
  fit_cmd->add_option("--k-lo", fit_options.k_lo, "lowest comb order");
  fit_cmd->add_option("--k-hi", fit_options.k_hi, "highest comb order");
  fit_cmd->add_option("--max-iterations", fit_options.max_iterations,
                      "optimizer iteration cap");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the built-in invariant suite");
  add_common(verify_cmd, common);
  verify_cmd->add_flag("--skip-oracle", verify_options.skip_oracle,
                       "skip the time-domain oracle comparison");
  verify_cmd
      ->add_option("--inject-corrupt-t2n", verify_options.corrupt_t2n,
                   "test hook: fractional t2n corruption on the formula side")
      ->default_val(0.0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(common);
    if (profile_cmd->parsed()) {
      profile_options.k_range_set = klo->count() > 0 || khi->count() > 0;
      if (klo->count() > 0 && khi->count() == 0) profile_options.k_hi = -profile_options.k_lo;
      if (khi->count() > 0 && klo->count() == 0) profile_options.k_lo = -profile_options.k_hi;
      return cmd_profile(common, profile_options);
    }
    if (simulate_cmd->parsed()) return cmd_simulate(common);
    if (sweep_cmd->parsed()) return cmd_sweep(common, sweep_options);
    if (fit_cmd->parsed()) return cmd_fit(common, fit_options);
    if (verify_cmd->parsed()) return cmd_verify(common, verify_options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("floqamp");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace floqamp
