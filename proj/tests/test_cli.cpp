#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>

#include "floqamp/bessel.hpp"
#include "floqamp/fano.hpp"
#include "floqamp/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "floqamp_cli_test.log";
  const std::string command =
      std::string(FLOQAMP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  std::ifstream in(log);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return {WEXITSTATUS(status), buffer.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate accepts the defaults and rejects bad fields") {
  CHECK(run_cli("validate").exit_code == 1);  // default sim duration is 0
  CHECK(run_cli("validate -s sim.duration=200").exit_code == 0);

  const RunResult bad = run_cli("validate -s spin.t2n=-1 -s sim.duration=200");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("spin.t2n") != std::string::npos);
}

TEST_CASE("profile runs are deterministic and honor the grid step") {
  const fs::path dir1 = fresh_dir("fa_profile1");
  const fs::path dir2 = fresh_dir("fa_profile2");
  const std::string args =
      "profile --k-lo -1 --k-hi 1 --window 3 --grid-step 0.001 -o ";
  CHECK(run_cli(args + dir1.string()).exit_code == 0);
  CHECK(run_cli(args + dir2.string()).exit_code == 0);

  const std::string csv1 = slurp(dir1 / "profile.csv");
  CHECK(csv1 == slurp(dir2 / "profile.csv"));
  CHECK(!csv1.empty());
  CHECK(fs::exists(dir1 / "manifest.json"));
  CHECK(fs::exists(dir1 / "profile.json"));

  // Consecutive grid points differ by exactly the requested step.
  std::istringstream lines(csv1);
  std::string line;
  std::getline(lines, line);  // header
  double previous = -1.0;
  int checked = 0;
  while (std::getline(lines, line) && checked < 50) {
    const double nu = std::stod(line.substr(0, line.find(',')));
    if (previous >= 0.0 && nu - previous < 0.002) {
      CHECK(nu - previous == doctest::Approx(0.001).epsilon(1e-9));
      ++checked;
    }
    previous = nu;
  }
  CHECK(checked > 10);
}

TEST_CASE("profile with no drive keeps a single resonance") {
  const fs::path dir = fresh_dir("fa_profile_u0");
  const RunResult result =
      run_cli("profile -s drive.b_ac=0 --k-lo -2 --k-hi 2 -o " + dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("u = 0") != std::string::npos);
}

TEST_CASE("simulate emits the full artifact set") {
  const fs::path dir = fresh_dir("fa_sim");
  const RunResult result = run_cli(
      "simulate -s spin.t1n=0.5 -s spin.t2n=0.5 -s sim.duration=16 "
      "-s drive.nu0=10.039 -s drive.u=3.12 -s test.nu=11.539 -o " +
      dir.string());
  CHECK(result.exit_code == 0);
  for (const char* name :
       {"timeseries.csv", "timeseries.fqts", "spectrum.csv", "spectrum.json",
        "spectrum_total.csv", "sidebands.json", "manifest.json"}) {
    CHECK(fs::exists(dir / name));
  }

  // The binary record round-trips the series exactly.
  const floqamp::TimeSeries series =
      floqamp::read_timeseries_binary((dir / "timeseries.fqts").string());
  CHECK(series.has_channel("pyn"));
  CHECK(series.samples() > 1000);

  // All seven windows found a sideband on this drive.
  const std::string peaks = slurp(dir / "sidebands.json");
  CHECK(peaks.find("\"present\": false") == std::string::npos);
}

TEST_CASE("simulate with no test field reports every band absent") {
  const fs::path dir = fresh_dir("fa_sim_quiet");
  const RunResult result = run_cli(
      "simulate -s spin.t1n=0.5 -s spin.t2n=0.5 -s sim.duration=12 "
      "-s test.b_y=0 -o " +
      dir.string());
  CHECK(result.exit_code == 0);
  const std::string peaks = slurp(dir / "sidebands.json");
  CHECK(peaks.find("\"present\": true") == std::string::npos);
  CHECK(peaks.find("\"eta\"") == std::string::npos);
}

TEST_CASE("sweep emits one ordered row per step") {
  const fs::path dir = fresh_dir("fa_sweep");
  const RunResult result = run_cli(
      "sweep --axis u --from 0 --to 8 --steps 81 --pair 1,0 --pair 1,-1 "
      "--pair 1,1 -j 4 -o " +
      dir.string());
  CHECK(result.exit_code == 0);
  const std::string csv = slurp(dir / "sweep.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "u,eta_1_0,eta_1_m1,eta_1_1,response_total");
  int rows = 0;
  double previous = -1.0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    const double value = std::stod(field);
    CHECK(value > previous);
    previous = value;
    // The default configuration is calibrated to eta_00(0) = -110, so each
    // eta column is -110 times the matching Bessel product.
    std::getline(fields, field, ',');
    const double eta_10 = std::stod(field);
    std::getline(fields, field, ',');
    const double eta_1m1 = std::stod(field);
    std::getline(fields, field, ',');
    const double eta_11 = std::stod(field);
    using floqamp::bessel_j;
    CHECK(eta_10 == doctest::Approx(-110.0 * bessel_j(1, value) *
                                    bessel_j(1, value)).epsilon(1e-9));
    CHECK(eta_1m1 == doctest::Approx(-110.0 * bessel_j(0, value) *
                                     bessel_j(1, value)).epsilon(1e-9));
    CHECK(eta_11 == doctest::Approx(-110.0 * bessel_j(2, value) *
                                    bessel_j(1, value)).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 81);

  // Worker count must not affect the bytes on disk.
  const fs::path dir_j1 = fresh_dir("fa_sweep_j1");
  CHECK(run_cli("sweep --axis u --from 0 --to 8 --steps 81 --pair 1,0 "
                "--pair 1,-1 --pair 1,1 -j 1 -o " +
                dir_j1.string())
            .exit_code == 0);
  CHECK(slurp(dir_j1 / "sweep.csv") == csv);

  // Degenerate single-step sweep still yields exactly one row.
  const fs::path single = fresh_dir("fa_sweep1");
  CHECK(run_cli("sweep --axis u --from 1.84 --to 1.84 --steps 1 -o " +
                single.string())
            .exit_code == 0);
  std::istringstream single_lines(slurp(single / "sweep.csv"));
  int single_rows = -1;  // discount the header
  while (std::getline(single_lines, line)) {
    if (!line.empty()) ++single_rows;
  }
  CHECK(single_rows == 1);
}

TEST_CASE("fit round trip through the command line") {
  // Synthetic amplitude data from the published line parameters.
  floqamp::FanoFitResult truth;
  const double eta[7] = {-12.47, -21.86, -9.574, -8.532,
                         -7.219, -18.71, -8.121};
  for (int i = 0; i < 7; ++i) {
    truth.lines.push_back({i - 3, eta[i], 5.539 + 1.5 * i});
  }
  truth.t2n = 34.05;

  const fs::path data_path =
      fs::temp_directory_path() / "fa_fit_data.csv";
  {
    std::ofstream out(data_path);
    out << "nu_hz,response\n";
    const double span = 3.0 / (std::numbers::pi * truth.t2n);
    for (const auto& line : truth.lines) {
      for (double d = -span; d <= span; d += span / 25.0) {
        const double nu = line.nu_k + d;
        out << floqamp::format_12(nu) << ','
            << floqamp::format_12(std::sqrt(multiline_model(nu, truth)))
            << '\n';
      }
    }
  }

  const fs::path dir = fresh_dir("fa_fit");
  const RunResult result = run_cli("fit --data " + data_path.string() +
                                   " -s drive.nu0=10.039 -o " + dir.string());
  CHECK(result.exit_code == 0);
  const std::string json = slurp(dir / "fit.json");
  CHECK(json.find("\"converged\": true") != std::string::npos);
  CHECK(fs::exists(dir / "fit_curve.csv"));

  // The fitted t2n sits within a tenth of a percent of the input.
  const auto pos = json.find("\"t2n_s\": ");
  REQUIRE(pos != std::string::npos);
  const double t2n = std::stod(json.substr(pos + 9));
  CHECK(std::abs(t2n - 34.05) / 34.05 < 1e-3);
}

TEST_CASE("fit rejects malformed data with a line number") {
  const fs::path data_path = fs::temp_directory_path() / "fa_fit_bad.csv";
  std::ofstream(data_path) << "nu_hz,response\n10.0,1.0\n10.1;not-a-number\n";
  const RunResult result = run_cli("fit --data " + data_path.string());
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("line 3") != std::string::npos);
}

TEST_CASE("fit exit code distinguishes non-convergence") {
  const fs::path data_path = fs::temp_directory_path() / "fa_fit_slow.csv";
  {
    std::ofstream out(data_path);
    floqamp::FanoFitResult truth;
    truth.lines.push_back({0, -8.532, 10.039});
    truth.t2n = 34.05;
    for (double nu = 10.0; nu <= 10.08; nu += 0.0005) {
      out << floqamp::format_12(nu) << ','
          << floqamp::format_12(std::sqrt(multiline_model(nu, truth))) << '\n';
    }
  }
  const fs::path dir = fresh_dir("fa_fit_slow");
  const RunResult result =
      run_cli("fit --data " + data_path.string() +
              " --max-iterations 1 -s drive.nu0=10.039 -o " + dir.string());
  CHECK(result.exit_code == 2);
}

TEST_CASE("verify command wiring") {
  const fs::path dir = fresh_dir("fa_verify");
  const RunResult ok = run_cli("verify --skip-oracle -o " + dir.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("FAIL") == std::string::npos);
  CHECK(fs::exists(dir / "verify.json"));

  // Stable report schema.
  const std::string json = slurp(dir / "verify.json");
  for (const char* key : {"\"name\"", "\"pass\"", "\"measured\"", "\"threshold\""}) {
    CHECK(json.find(key) != std::string::npos);
  }

  const RunResult corrupted = run_cli(
      "verify --skip-oracle --inject-corrupt-t2n 0.2 -o " + dir.string());
  CHECK(corrupted.exit_code == 3);
  CHECK(corrupted.output.find("FAIL") != std::string::npos);
}

TEST_CASE("unknown config keys fail with exit 1") {
  const fs::path config_path = fs::temp_directory_path() / "fa_bad.conf";
  std::ofstream(config_path) << "[spin]\nnonsense = 3\n";
  const RunResult result =
      run_cli("profile -c " + config_path.string());
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("line 2") != std::string::npos);
}
