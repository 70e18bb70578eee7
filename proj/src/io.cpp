#include "emdflow/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "scenario payloads are little-endian float64");

namespace emdflow::io {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  throw std::invalid_argument("base64: bad character");
}

}  // namespace

std::string base64_encode(const double* values, size_t count) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(values);
  const size_t nbytes = count * sizeof(double);
  std::string out;
  out.reserve((nbytes + 2) / 3 * 4);
  for (size_t i = 0; i < nbytes; i += 3) {
    unsigned int chunk = bytes[i] << 16;
    int have = 1;
    if (i + 1 < nbytes) {
      chunk |= bytes[i + 1] << 8;
      have = 2;
    }
    if (i + 2 < nbytes) {
      chunk |= bytes[i + 2];
      have = 3;
    }
    out.push_back(kAlphabet[(chunk >> 18) & 63]);
    out.push_back(kAlphabet[(chunk >> 12) & 63]);
    out.push_back(have > 1 ? kAlphabet[(chunk >> 6) & 63] : '=');
    out.push_back(have > 2 ? kAlphabet[chunk & 63] : '=');
  }
  return out;
}

std::vector<double> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64: bad length");
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    const int n_pad = (text[i + 3] == '=') + (text[i + 2] == '=');
    unsigned int chunk = decode_char(text[i]) << 18 | decode_char(text[i + 1]) << 12;
    if (n_pad < 2) chunk |= decode_char(text[i + 2]) << 6;
    if (n_pad < 1) chunk |= decode_char(text[i + 3]);
    bytes.push_back((chunk >> 16) & 0xFF);
    if (n_pad < 2) bytes.push_back((chunk >> 8) & 0xFF);
    if (n_pad < 1) bytes.push_back(chunk & 0xFF);
  }
  if (bytes.size() % sizeof(double) != 0) throw std::invalid_argument("base64: not a float64 payload");
  std::vector<double> values(bytes.size() / sizeof(double));
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

std::string encode_vec(const Vec& v) { return base64_encode(v.data(), v.size()); }

Vec decode_vec(const std::string& text) {
  const auto values = base64_decode(text);
  Vec v(values.size());
  std::memcpy(v.data(), values.data(), values.size() * sizeof(double));
  return v;
}

std::string encode_mat(const Mat& m) {
  std::vector<double> row_major;
  row_major.reserve(m.size());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) row_major.push_back(m(i, j));
  }
  return base64_encode(row_major.data(), row_major.size());
}

Mat decode_mat(const std::string& text, int rows, int cols) {
  const auto values = base64_decode(text);
  if (static_cast<int>(values.size()) != rows * cols) {
    throw std::invalid_argument("decode_mat: payload size mismatch");
  }
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
  }
  return m;
}

std::string config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void validate_keys(const json& obj, const std::set<std::string>& allowed,
                   const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
    }
  }
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_scenario(const std::filesystem::path& path, const synth::Scenario& sc,
                    const std::string& hash) {
  json j;
  j["version"] = 1;
  j["type"] = "target_walk";
  j["grid"] = {{"dims", sc.grid.dims()}, {"spacing", sc.grid.spacing()}};
  j["k"] = sc.targets;
  j["m"] = sc.measurement_rows;
  j["sigma"] = sc.sigma;
  j["speed"] = sc.speed;
  j["steps"] = sc.steps();
  j["seed"] = sc.seed;
  j["config_hash"] = hash;
  j["shared_matrix"] = sc.operators.size() == 1;

  const int n = sc.grid.size();
  std::vector<double> states, measurements;
  for (const auto& s : sc.true_states) {
    for (int i = 0; i < n; ++i) states.push_back(s[i]);
  }
  for (const auto& y : sc.measurements) {
    for (Eigen::Index i = 0; i < y.size(); ++i) measurements.push_back(y[i]);
  }
  j["states"] = base64_encode(states.data(), states.size());
  j["measurements"] = base64_encode(measurements.data(), measurements.size());
  if (sc.operators.size() == 1) {
    j["matrix"] = encode_mat(sc.operators[0]);
  } else {
    json mats = json::array();
    for (const auto& a : sc.operators) mats.push_back(encode_mat(a));
    j["matrices"] = mats;
  }
  write_text(path, j.dump(2) + "\n");
}

synth::Scenario read_scenario(const std::filesystem::path& path, json* header) {
  const json j = json::parse(read_text(path));
  if (!j.contains("type") || j.at("type") != "target_walk") {
    throw std::invalid_argument("read_scenario: not a target_walk scenario file");
  }
  synth::Scenario sc;
  const auto dims = j.at("grid").at("dims").get<std::vector<int>>();
  const auto spacing = j.at("grid").at("spacing").get<std::vector<double>>();
  sc.grid = GridGeometry(dims, spacing);
  sc.targets = j.at("k").get<int>();
  sc.measurement_rows = j.at("m").get<int>();
  sc.sigma = j.at("sigma").get<double>();
  sc.speed = j.at("speed").get<int>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  const int steps = j.at("steps").get<int>();
  const int n = sc.grid.size();
  const int m = sc.measurement_rows;

  const auto states = base64_decode(j.at("states").get<std::string>());
  const auto meas = base64_decode(j.at("measurements").get<std::string>());
  if (static_cast<int>(states.size()) != steps * n || static_cast<int>(meas.size()) != steps * m) {
    throw std::invalid_argument("read_scenario: payload size mismatch");
  }
  for (int s = 0; s < steps; ++s) {
    Vec state(n), y(m);
    for (int i = 0; i < n; ++i) state[i] = states[s * n + i];
    for (int i = 0; i < m; ++i) y[i] = meas[s * m + i];
    sc.true_states.push_back(std::move(state));
    sc.measurements.push_back(std::move(y));
  }
  if (j.contains("matrix")) {
    sc.operators.push_back(decode_mat(j.at("matrix").get<std::string>(), m, n));
  } else {
    for (const auto& enc : j.at("matrices")) {
      sc.operators.push_back(decode_mat(enc.get<std::string>(), m, n));
    }
  }
  if (header) *header = j;
  return sc;
}

json track_to_json(const synth::FrequencyTrack& track) {
  json j;
  j["model"] = track.model == synth::TrackModel::tones ? "tones" : "theta_gamma";
  j["fs"] = track.fs;
  j["samples"] = track.samples;
  j["band_lo"] = track.band_lo;
  j["band_hi"] = track.band_hi;
  j["mu_t"] = track.mu_t;
  j["sigma_t"] = track.sigma_t;
  j["sigma_f"] = track.sigma_f;
  json comps = json::array();
  for (const auto& c : track.components) {
    json segs = json::array();
    for (const auto& s : c.segments) segs.push_back({s.start, s.freq, s.phase});
    comps.push_back({{"amplitude", c.amplitude}, {"segments", segs}});
  }
  j["components"] = comps;
  return j;
}

synth::FrequencyTrack track_from_json(const json& j) {
  synth::FrequencyTrack track;
  track.model = j.at("model") == "tones" ? synth::TrackModel::tones : synth::TrackModel::theta_gamma;
  track.fs = j.at("fs").get<double>();
  track.samples = j.at("samples").get<int>();
  track.band_lo = j.at("band_lo").get<double>();
  track.band_hi = j.at("band_hi").get<double>();
  track.mu_t = j.at("mu_t").get<double>();
  track.sigma_t = j.at("sigma_t").get<double>();
  track.sigma_f = j.at("sigma_f").get<double>();
  for (const auto& c : j.at("components")) {
    synth::FrequencyComponent comp;
    comp.amplitude = c.at("amplitude").get<double>();
    for (const auto& s : c.at("segments")) {
      comp.segments.push_back(
          synth::FreqSegment{s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<double>()});
    }
    track.components.push_back(std::move(comp));
  }
  return track;
}

void write_spectral_scenario(const std::filesystem::path& path, const SpectralScenario& sc,
                             const std::string& hash) {
  json j;
  j["version"] = 1;
  j["type"] = sc.track.model == synth::TrackModel::tones ? "freq" : "theta_gamma";
  j["sigma"] = sc.sigma;
  j["seed"] = sc.seed;
  j["config_hash"] = hash;
  j["samples"] = encode_vec(sc.samples);
  j["track"] = track_to_json(sc.track);
  write_text(path, j.dump(2) + "\n");
}

SpectralScenario read_spectral_scenario(const std::filesystem::path& path, json* header) {
  const json j = json::parse(read_text(path));
  if (!j.contains("track")) throw std::invalid_argument("read_spectral_scenario: missing track");
  SpectralScenario sc;
  sc.sigma = j.at("sigma").get<double>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.samples = decode_vec(j.at("samples").get<std::string>());
  sc.track = track_from_json(j.at("track"));
  if (header) *header = j;
  return sc;
}

void write_signal_csv(const std::filesystem::path& path, const Vec& samples, double fs) {
  std::ostringstream ss;
  ss << "# fs=" << fmt_double(fs) << "\n# channels=1\n";
  for (Eigen::Index i = 0; i < samples.size(); ++i) ss << fmt_double(samples[i]) << "\n";
  write_text(path, ss.str());
}

std::pair<Vec, double> read_signal_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  double fs = 0.0;
  std::vector<double> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("fs=");
      if (pos != std::string::npos) fs = std::stod(line.substr(pos + 3));
      continue;
    }
    samples.push_back(std::stod(line));
  }
  if (fs <= 0.0) throw std::invalid_argument("read_signal_csv: missing '# fs=' header");
  Vec v(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) v[i] = samples[i];
  return {v, fs};
}

}  // namespace emdflow::io
