#include "floqamp/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace floqamp {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string format_12(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

void write_profile_csv(const std::string& path,
                       const AmplificationProfile& no_direct,
                       const AmplificationProfile& with_direct) {
  if (no_direct.nu_grid.size() != with_direct.nu_grid.size()) {
    throw std::invalid_argument("write_profile_csv: grid mismatch");
  }
  auto out = open_out(path);
  out << "nu_hz,eta,eta_with_direct\n";
  for (Eigen::Index i = 0; i < no_direct.nu_grid.size(); ++i) {
    out << format_12(no_direct.nu_grid[i]) << ',' << format_12(no_direct.eta[i])
        << ',' << format_12(with_direct.eta[i]) << '\n';
  }
}

void write_profile_json(const std::string& path,
                        const AmplificationProfile& no_direct,
                        const AmplificationProfile& with_direct) {
  nlohmann::json doc;
  doc["includes_direct_term_column"] = true;
  doc["points"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < no_direct.nu_grid.size(); ++i) {
    doc["points"].push_back({{"nu_hz", no_direct.nu_grid[i]},
                             {"eta", no_direct.eta[i]},
                             {"eta_with_direct", with_direct.eta[i]}});
  }
  open_out(path) << doc.dump(2) << '\n';
}

void write_spectrum_json(const std::string& path, const Spectrum& spectrum) {
  nlohmann::json doc;
  doc["df_hz"] = spectrum.df;
  doc["amplitude"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    doc["amplitude"].push_back(spectrum.amplitude[i]);
  }
  open_out(path) << doc.dump(2) << '\n';
}

void write_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
  auto out = open_out(path);
  out << "frequency_hz,amplitude\n";
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    out << format_12(spectrum.frequency(i)) << ','
        << format_12(spectrum.amplitude[i]) << '\n';
  }
}

void write_timeseries_csv(const std::string& path, const TimeSeries& series) {
  auto out = open_out(path);
  out << "t";
  for (const auto& name : series.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < series.samples(); ++i) {
    out << format_12(series.time(i));
    for (const auto& channel : series.channels) {
      out << ',' << format_12(channel[i]);
    }
    out << '\n';
  }
}

namespace {

constexpr char kMagic[4] = {'F', 'Q', 'T', 'S'};
constexpr uint32_t kBinaryVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  // Little-endian on every supported target.
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw std::runtime_error("truncated time-series record");
  return value;
}

}  // namespace

void write_timeseries_binary(const std::string& path,
                             const TimeSeries& series) {
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, sizeof(kMagic));
  put<uint32_t>(out, kBinaryVersion);
  put<double>(out, series.t0);
  put<double>(out, series.dt);
  put<uint32_t>(out, static_cast<uint32_t>(series.names.size()));
  put<uint64_t>(out, static_cast<uint64_t>(series.samples()));
  for (const auto& name : series.names) {
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (const auto& channel : series.channels) {
    out.write(reinterpret_cast<const char*>(channel.data()),
              static_cast<std::streamsize>(sizeof(double) * channel.size()));
  }
}

TimeSeries read_timeseries_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a time-series record: " + path);
  }
  const auto version = get<uint32_t>(in);
  if (version != kBinaryVersion) {
    throw std::runtime_error("unsupported time-series record version");
  }
  TimeSeries series;
  series.t0 = get<double>(in);
  series.dt = get<double>(in);
  const auto n_channels = get<uint32_t>(in);
  const auto n_samples = get<uint64_t>(in);
  for (uint32_t c = 0; c < n_channels; ++c) {
    const auto len = get<uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw std::runtime_error("truncated time-series record");
    series.names.push_back(name);
  }
  for (uint32_t c = 0; c < n_channels; ++c) {
    Eigen::ArrayXd data(static_cast<Eigen::Index>(n_samples));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(sizeof(double) * n_samples));
    if (!in) throw std::runtime_error("truncated time-series record");
    series.channels.push_back(std::move(data));
  }
  return series;
}

void write_peaks_json(const std::string& path,
                      const std::vector<SidebandPeak>& peaks,
                      const std::vector<MeasuredAmplification>& etas) {
  nlohmann::json doc = nlohmann::json::array();
  for (size_t i = 0; i < peaks.size(); ++i) {
    nlohmann::json rec;
    rec["k"] = peaks[i].k;
    rec["nu_hz"] = peaks[i].frequency;
    rec["amplitude"] = peaks[i].amplitude;
    rec["present"] = peaks[i].present;
    if (i < etas.size()) rec["eta"] = etas[i].eta;
    doc.push_back(rec);
  }
  open_out(path) << doc.dump(2) << '\n';
}

void write_fit_json(const std::string& path, const FanoFitResult& fit) {
  nlohmann::json doc;
  doc["t2n_s"] = fit.t2n;
  doc["residual_rms"] = fit.residual_rms;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  if (fit.fit_offset) doc["offset"] = fit.offset;
  doc["lines"] = nlohmann::json::array();
  for (const FanoLine& line : fit.lines) {
    doc["lines"].push_back({{"k", line.k},
                            {"eta_k0", line.eta_k0},
                            {"nu_k_hz", line.nu_k},
                            {"q", fano_parameter(line.eta_k0)}});
  }
  open_out(path) << doc.dump(2) << '\n';
}

void write_fit_curve_csv(const std::string& path, const FanoFitResult& fit,
                         const CurveData& data) {
  auto out = open_out(path);
  out << "nu_hz,response,fitted\n";
  for (Eigen::Index i = 0; i < data.nu.size(); ++i) {
    out << format_12(data.nu[i]) << ',' << format_12(data.response[i]) << ','
        << format_12(multiline_model(data.nu[i], fit)) << '\n';
  }
}

CurveData read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<double> nu, response;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    // Strip trailing CR and skip blank lines.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_number == 1 && line.find_first_not_of(
                                "0123456789+-.eE, \t") != std::string::npos) {
      continue;  // header row
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("csv line " + std::to_string(line_number) +
                               ": expected nu_hz,response");
    }
    char* end = nullptr;
    const std::string first = line.substr(0, comma);
    const std::string second = line.substr(comma + 1);
    const double a = std::strtod(first.c_str(), &end);
    if (end == first.c_str()) {
      throw std::runtime_error("csv line " + std::to_string(line_number) +
                               ": malformed number '" + first + "'");
    }
    const double b = std::strtod(second.c_str(), &end);
    if (end == second.c_str()) {
      throw std::runtime_error("csv line " + std::to_string(line_number) +
                               ": malformed number '" + second + "'");
    }
    nu.push_back(a);
    response.push_back(b);
  }
  CurveData data;
  data.nu = Eigen::Map<const Eigen::ArrayXd>(nu.data(),
                                             static_cast<Eigen::Index>(nu.size()));
  data.response = Eigen::Map<const Eigen::ArrayXd>(
      response.data(), static_cast<Eigen::Index>(response.size()));
  return data;
}

}  // namespace floqamp
