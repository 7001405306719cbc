#pragma once

#include <stdexcept>
#include <string>

#include "floqamp/bloch.hpp"
#include "floqamp/domain.hpp"

// Declarative experiment configuration: a human-editable text format with
// [section] headers and key = value lines. Sections: spin, drive, test,
// optics, sim. '#' and ';' start comments. Unknown sections or keys are
// errors. Serialization writes 17 significant digits, so a
// serialize -> parse round trip reproduces every field bit for bit.

namespace floqamp {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_number, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line_number) +
                           ": " + message),
        line(line_number) {}
};

struct ExperimentConfig {
  SpinParams spin;
  DriveConfig drive;
  TestField test;
  OpticsParams optics;
  SimConfig sim;
};

// Parses the text of a config file. In [drive], the convenience keys
// nu0 (Hz) and u (dimensionless) may replace b0 and b_ac; they are converted
// through spin.gamma_n once the whole file is read, so section order does
// not matter. Only b0/b_ac are stored.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies one "section.key=value" override on top of an existing config.
void apply_override(ExperimentConfig& config, const std::string& assignment);

std::string serialize_config(const ExperimentConfig& config);

// Validation across all sections (domain + sim rules).
ValidationReport validate(const ExperimentConfig& config);

}  // namespace floqamp
