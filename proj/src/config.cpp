#include "floqamp/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace floqamp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& value, int line) {
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || trim(end) != "") {
    throw ConfigError(line, "expected a number, got '" + value + "'");
  }
  return parsed;
}

SimMode parse_mode(const std::string& value, int line) {
  if (value == "xe_only") return SimMode::xe_only;
  if (value == "coupled") return SimMode::coupled;
  if (value == "full") return SimMode::full;
  throw ConfigError(line, "mode must be xe_only, coupled or full");
}

Frame parse_frame(const std::string& value, int line) {
  if (value == "lab") return Frame::lab;
  if (value == "rotating") return Frame::rotating;
  throw ConfigError(line, "frame must be lab or rotating");
}

const char* mode_name(SimMode mode) {
  switch (mode) {
    case SimMode::xe_only: return "xe_only";
    case SimMode::coupled: return "coupled";
    case SimMode::full: return "full";
  }
  return "xe_only";
}

const char* frame_name(Frame frame) {
  return frame == Frame::lab ? "lab" : "rotating";
}

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

struct Entry {
  std::string value;
  int line;
};

using SectionEntries = std::map<std::string, Entry>;

void assign_field(ExperimentConfig& config, const std::string& section,
                  const std::string& key, const std::string& value, int line,
                  SectionEntries& deferred_drive) {
  const double* num_sentinel = nullptr;
  (void)num_sentinel;
  auto num = [&] { return parse_double(value, line); };

  if (section == "spin") {
    if (key == "gamma_n") config.spin.gamma_n = num();
    else if (key == "gamma_e") config.spin.gamma_e = num();
    else if (key == "t1n") config.spin.t1n = num();
    else if (key == "t2n") config.spin.t2n = num();
    else if (key == "t1e") config.spin.t1e = num();
    else if (key == "t2e") config.spin.t2e = num();
    else if (key == "p0n") config.spin.p0n = num();
    else if (key == "p0e") config.spin.p0e = num();
    else if (key == "m_n") config.spin.m_n = num();
    else if (key == "m_e") config.spin.m_e = num();
    else if (key == "kappa0") config.spin.kappa0 = num();
    else if (key == "q_slowing") config.spin.q_slowing = num();
    else throw ConfigError(line, "unknown key spin." + key);
  } else if (section == "drive") {
    if (key == "b0") config.drive.b0 = num();
    else if (key == "b_ac") config.drive.b_ac = num();
    else if (key == "nu_ac") config.drive.nu_ac = num();
    else if (key == "nu0" || key == "u") deferred_drive[key] = {value, line};
    else throw ConfigError(line, "unknown key drive." + key);
  } else if (section == "test") {
    if (key == "b_y") config.test.b_y = num();
    else if (key == "nu") config.test.nu = num();
    else throw ConfigError(line, "unknown key test." + key);
  } else if (section == "optics") {
    if (key == "path_length") config.optics.path_length = num();
    else if (key == "r_e") config.optics.r_e = num();
    else if (key == "c") config.optics.c = num();
    else if (key == "oscillator_f") config.optics.oscillator_f = num();
    else if (key == "n_density") config.optics.n_density = num();
    else if (key == "nu_d2") config.optics.nu_d2 = num();
    else if (key == "nu_pr") config.optics.nu_pr = num();
    else if (key == "gamma_opt") config.optics.gamma_opt = num();
    else throw ConfigError(line, "unknown key optics." + key);
  } else if (section == "sim") {
    if (key == "dt") config.sim.dt = num();
    else if (key == "duration") config.sim.duration = num();
    else if (key == "transient_skip") config.sim.transient_skip = num();
    else if (key == "mode") config.sim.mode = parse_mode(value, line);
    else if (key == "frame") config.sim.frame = parse_frame(value, line);
    else throw ConfigError(line, "unknown key sim." + key);
  } else {
    throw ConfigError(line, "unknown section [" + section + "]");
  }
}

void apply_deferred_drive(ExperimentConfig& config,
                          const SectionEntries& deferred) {
  for (const auto& [key, entry] : deferred) {
    const double value = parse_double(entry.value, entry.line);
    if (!(config.spin.gamma_n > 0.0)) {
      throw ConfigError(entry.line,
                        "drive." + key + " requires spin.gamma_n > 0");
    }
    if (key == "nu0") {
      config.drive.b0 = value / config.spin.gamma_n;
    } else {  // u
      if (!(config.drive.nu_ac > 0.0)) {
        throw ConfigError(entry.line, "drive.u requires drive.nu_ac > 0");
      }
      config.drive.b_ac = value * config.drive.nu_ac / config.spin.gamma_n;
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  SectionEntries deferred_drive;
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    const auto comment = raw.find_first_of("#;");
    std::string line = trim(comment == std::string::npos
                                ? raw
                                : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(line_number, "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line_number, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(line_number, "key outside of any [section]");
    }
    if (key.empty() || value.empty()) {
      throw ConfigError(line_number, "expected key = value");
    }
    assign_field(config, section, key, value, line_number, deferred_drive);
  }
  apply_deferred_drive(config, deferred_drive);
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw std::runtime_error("override must look like section.key=value: " +
                             assignment);
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  SectionEntries deferred_drive;
  try {
    assign_field(config, section, key, value, 0, deferred_drive);
    apply_deferred_drive(config, deferred_drive);
  } catch (const ConfigError& e) {
    throw std::runtime_error("override '" + assignment + "': " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  const auto kv = [&out](const char* key, double value) {
    out << key << " = " << format_g17(value) << "\n";
  };
  out << "[spin]\n";
  kv("gamma_n", config.spin.gamma_n);
  kv("gamma_e", config.spin.gamma_e);
  kv("t1n", config.spin.t1n);
  kv("t2n", config.spin.t2n);
  kv("t1e", config.spin.t1e);
  kv("t2e", config.spin.t2e);
  kv("p0n", config.spin.p0n);
  kv("p0e", config.spin.p0e);
  kv("m_n", config.spin.m_n);
  kv("m_e", config.spin.m_e);
  kv("kappa0", config.spin.kappa0);
  kv("q_slowing", config.spin.q_slowing);
  out << "\n[drive]\n";
  kv("b0", config.drive.b0);
  kv("b_ac", config.drive.b_ac);
  kv("nu_ac", config.drive.nu_ac);
  out << "\n[test]\n";
  kv("b_y", config.test.b_y);
  kv("nu", config.test.nu);
  out << "\n[optics]\n";
  kv("path_length", config.optics.path_length);
  kv("r_e", config.optics.r_e);
  kv("c", config.optics.c);
  kv("oscillator_f", config.optics.oscillator_f);
  kv("n_density", config.optics.n_density);
  kv("nu_d2", config.optics.nu_d2);
  kv("nu_pr", config.optics.nu_pr);
  kv("gamma_opt", config.optics.gamma_opt);
  out << "\n[sim]\n";
  kv("dt", config.sim.dt);
  kv("duration", config.sim.duration);
  kv("transient_skip", config.sim.transient_skip);
  out << "mode = " << mode_name(config.sim.mode) << "\n";
  out << "frame = " << frame_name(config.sim.frame) << "\n";
  return out.str();
}

ValidationReport validate(const ExperimentConfig& config) {
  ValidationReport report =
      validate(config.spin, config.drive, config.test, config.optics);
  const ValidationReport sim_report =
      validate_sim(config.sim, config.spin, config.drive, config.test);
  report.issues.insert(report.issues.end(), sim_report.issues.begin(),
                       sim_report.issues.end());
  return report;
}

}  // namespace floqamp
