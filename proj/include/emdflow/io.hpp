#pragma once

#include "emdflow/core.hpp"
#include "emdflow/synth.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace emdflow::io {

using json = nlohmann::json;

std::string base64_encode(const double* values, size_t count);
std::vector<double> base64_decode(const std::string& text);

std::string encode_vec(const Vec& v);
Vec decode_vec(const std::string& text);
std::string encode_mat(const Mat& m);  // row-major payload
Mat decode_mat(const std::string& text, int rows, int cols);

/// FNV-1a hash of the canonical (sorted-key) JSON dump; stable provenance id.
std::string config_hash(const json& config);

/// Rejects keys outside the allowed set; error names the offending key.
void validate_keys(const json& obj, const std::set<std::string>& allowed,
                   const std::string& where);

/// Fixed max-precision formatting so output files are bitwise reproducible.
std::string fmt_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Target-tracking scenario files: a JSON header plus base64 little-endian
// float64 arrays for states, the sensing operator, and measurements.
void write_scenario(const std::filesystem::path& path, const synth::Scenario& sc,
                    const std::string& hash);
synth::Scenario read_scenario(const std::filesystem::path& path, json* header = nullptr);

struct SpectralScenario {
  Vec samples;  // noisy samples as observed
  synth::FrequencyTrack track;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

void write_spectral_scenario(const std::filesystem::path& path, const SpectralScenario& sc,
                             const std::string& hash);
SpectralScenario read_spectral_scenario(const std::filesystem::path& path, json* header = nullptr);

json track_to_json(const synth::FrequencyTrack& track);
synth::FrequencyTrack track_from_json(const json& j);

// Signal files: "# fs=<Hz>" and "# channels=1" header lines, one sample per line.
void write_signal_csv(const std::filesystem::path& path, const Vec& samples, double fs);
std::pair<Vec, double> read_signal_csv(const std::filesystem::path& path);

}  // namespace emdflow::io
