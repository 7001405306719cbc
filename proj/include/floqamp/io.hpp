#pragma once

#include <string>
#include <vector>

#include "floqamp/bloch.hpp"
#include "floqamp/fano.hpp"
#include "floqamp/spectrum.hpp"
#include "floqamp/steady_state.hpp"

// File emission and ingestion. All data files are deterministic: fixed column
// order, fixed 12-significant-digit decimal formatting, LF newlines, no
// timestamps. Binary time series use the FQTS record layout documented in
// the README (little-endian 64-bit floats).

namespace floqamp {

// %.12g rendering used by every data file.
std::string format_12(double value);

void write_profile_csv(const std::string& path,
                       const AmplificationProfile& no_direct,
                       const AmplificationProfile& with_direct);
void write_profile_json(const std::string& path,
                        const AmplificationProfile& no_direct,
                        const AmplificationProfile& with_direct);
void write_spectrum_csv(const std::string& path, const Spectrum& spectrum);
void write_spectrum_json(const std::string& path, const Spectrum& spectrum);
void write_timeseries_csv(const std::string& path, const TimeSeries& series);

void write_timeseries_binary(const std::string& path,
                             const TimeSeries& series);
TimeSeries read_timeseries_binary(const std::string& path);

// Peak list records {k, nu_hz, amplitude, eta} as a JSON array.
void write_peaks_json(const std::string& path,
                      const std::vector<SidebandPeak>& peaks,
                      const std::vector<MeasuredAmplification>& etas);

void write_fit_json(const std::string& path, const FanoFitResult& fit);
void write_fit_curve_csv(const std::string& path, const FanoFitResult& fit,
                         const CurveData& data);

// CSV with a "nu_hz,response" header (header optional); throws ConfigError
// style messages carrying the offending line number.
CurveData read_curve_csv(const std::string& path);

}  // namespace floqamp
