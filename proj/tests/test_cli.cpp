#include "emdflow/io.hpp"
#include "emdflow/synth.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace emdflow;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return EMDFLOW_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "emdflow_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen is idempotent per seed and honors overrides") {
  const auto dir = fresh_dir("gen");
  write_json(dir / "gen.json",
             R"({"version":1,"kind":"target_walk","dims":[6,6],"k":2,"m":10,"sigma2":0.0004,"speed":1,"steps":3,"seed":9})");
  REQUIRE(run_cli("gen --config " + (dir / "gen.json").string() + " --out " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("gen --config " + (dir / "gen.json").string() + " --out " +
                  (dir / "b").string()) == 0);
  CHECK(io::read_text(dir / "a/scenario.json") == io::read_text(dir / "b/scenario.json"));

  REQUIRE(run_cli("gen --config " + (dir / "gen.json").string() + " --seed 10 --out " +
                  (dir / "c").string()) == 0);
  CHECK(io::read_text(dir / "a/scenario.json") != io::read_text(dir / "c/scenario.json"));
}

TEST_CASE("scenario files round-trip exactly") {
  const auto dir = fresh_dir("roundtrip");
  GridGeometry g({5, 4});
  const auto sc = synth::gen_tracking_scenario(g, 2, 8, 0.03, 1, 4, 21);
  io::write_scenario(dir / "sc.json", sc, "deadbeef");
  const auto back = io::read_scenario(dir / "sc.json");
  CHECK(back.grid == sc.grid);
  CHECK(back.seed == sc.seed);
  CHECK((back.operators[0] - sc.operators[0]).cwiseAbs().maxCoeff() == 0.0);
  for (int s = 0; s < sc.steps(); ++s) {
    CHECK((back.true_states[s] - sc.true_states[s]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.measurements[s] - sc.measurements[s]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("base64 payloads round-trip") {
  synth::Rng rng(2);
  for (int n : {0, 1, 2, 3, 17}) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    const Vec back = io::decode_vec(io::encode_vec(v));
    REQUIRE(back.size() == n);
    for (int i = 0; i < n; ++i) CHECK(back[i] == v[i]);
  }
}

TEST_CASE("track on a noiseless identity scenario recovers the state") {
  const auto dir = fresh_dir("ident");
  GridGeometry g({9});
  synth::Scenario sc;
  sc.grid = g;
  sc.sigma = 0.0;
  sc.seed = 4;
  sc.targets = 2;
  sc.measurement_rows = 9;
  sc.speed = 0;
  sc.operators.push_back(Mat::Identity(9, 9));
  Vec truth = Vec::Zero(9);
  truth[2] = 1.0;
  truth[6] = 1.0;
  for (int s = 0; s < 3; ++s) {
    sc.true_states.push_back(truth);
    sc.measurements.push_back(truth);
  }
  io::write_scenario(dir / "sc.json", sc, "cafe");
  write_json(dir / "track.json", R"({"version":1,"scenario":")" + (dir / "sc.json").string() +
                                     R"(","tracker":{"algorithm":"bpdn","lambda":0.001,
                                     "primal_tol":1e-8,"dual_tol":1e-8}})");
  REQUIRE(run_cli("track --config " + (dir / "track.json").string() + " --out " +
                  (dir / "run").string()) == 0);
  const std::string metrics = io::read_text(dir / "run/metrics.csv");
  std::istringstream in(metrics);
  std::string line;
  std::getline(in, line);  // provenance
  CHECK(line.find("config_hash=") != std::string::npos);
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) < 1e-4);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("track output is deterministic and prefix-causal at the file level") {
  const auto dir = fresh_dir("prefix");
  write_json(dir / "gen6.json",
             R"({"version":1,"kind":"target_walk","dims":[5,5],"k":2,"m":9,"sigma2":0.0009,"speed":1,"steps":6,"seed":33})");
  write_json(dir / "gen4.json",
             R"({"version":1,"kind":"target_walk","dims":[5,5],"k":2,"m":9,"sigma2":0.0009,"speed":1,"steps":4,"seed":33})");
  REQUIRE(run_cli("gen --config " + (dir / "gen6.json").string() + " --out " +
                  (dir / "s6").string()) == 0);
  REQUIRE(run_cli("gen --config " + (dir / "gen4.json").string() + " --out " +
                  (dir / "s4").string()) == 0);

  auto track_cfg = [&](const std::string& scenario) {
    return R"({"version":1,"scenario":")" + scenario +
           R"(","tracker":{"algorithm":"emd-df","backend":"beckmann","lambda":0.06,
           "gamma":0.03,"mu":0.006,"dynamics":"identity","primal_tol":1e-7,"dual_tol":1e-7}})";
  };
  write_json(dir / "t6.json", track_cfg((dir / "s6/scenario.json").string()));
  write_json(dir / "t4.json", track_cfg((dir / "s4/scenario.json").string()));
  REQUIRE(run_cli("track --config " + (dir / "t6.json").string() + " --out " +
                  (dir / "r6").string()) == 0);
  REQUIRE(run_cli("track --config " + (dir / "t6.json").string() + " --out " +
                  (dir / "r6b").string()) == 0);
  REQUIRE(run_cli("track --config " + (dir / "t4.json").string() + " --out " +
                  (dir / "r4").string()) == 0);

  // Determinism: bitwise-identical metric files on rerun.
  CHECK(io::read_text(dir / "r6/metrics.csv") == io::read_text(dir / "r6b/metrics.csv"));
  CHECK(io::read_text(dir / "r6/run.json") == io::read_text(dir / "r6b/run.json"));

  // Causality at the file level: the shorter run is a prefix of the longer.
  const auto rec6 = io::json::parse(io::read_text(dir / "r6/run.json"));
  const auto rec4 = io::json::parse(io::read_text(dir / "r4/run.json"));
  const Vec est6 = io::decode_vec(rec6.at("estimates").get<std::string>());
  const Vec est4 = io::decode_vec(rec4.at("estimates").get<std::string>());
  REQUIRE(est6.size() == 6 * 25);
  REQUIRE(est4.size() == 4 * 25);
  for (int i = 0; i < est4.size(); ++i) CHECK(est6[i] == est4[i]);
}

TEST_CASE("exit codes: config errors are 1") {
  const auto dir = fresh_dir("errors");
  write_json(dir / "bad_key.json", R"({"version":1,"kind":"target_walk","dimz":[4,4]})");
  CHECK(run_cli("gen --config " + (dir / "bad_key.json").string() + " --out " +
                (dir / "x").string()) == 1);

  write_json(dir / "bad_kind.json", R"({"version":1,"kind":"nope"})");
  CHECK(run_cli("gen --config " + (dir / "bad_kind.json").string() + " --out " +
                (dir / "x").string()) == 1);

  write_json(dir / "missing.json",
             R"({"version":1,"scenario":"/nonexistent/sc.json","tracker":{"algorithm":"bpdn"}})");
  CHECK(run_cli("track --config " + (dir / "missing.json").string() + " --out " +
                (dir / "x").string()) == 1);

  CHECK(run_cli("gen --config /nonexistent/config.json --out " + (dir / "x").string()) == 1);
}

TEST_CASE("tf reports native stft resolution and half the dictionary bins") {
  const auto dir = fresh_dir("tf");
  write_json(dir / "gen.json",
             R"({"version":1,"kind":"freq","fs":64,"components":1,"mu_t":30,"sigma_t":0,"sigma_f":0,"band":[4,28],"duration_s":0.75,"sigma":0.0,"seed":2})");
  REQUIRE(run_cli("gen --config " + (dir / "gen.json").string() + " --out " +
                  (dir / "s").string()) == 0);
  write_json(dir / "tf.json", R"({"version":1,"scenario":")" +
                                  (dir / "s/scenario.json").string() +
                                  R"(","window":16,"oversampling":2,"hop":8,
      "tracker":{"algorithm":"emd-df","backend":"beckmann","lambda":0.05,"gamma":0.02,
      "mu":0.005,"q":1,"dynamics":"top_q","primal_tol":1e-6,"dual_tol":1e-6}})");
  REQUIRE(run_cli("tf --config " + (dir / "tf.json").string() + " --out " +
                  (dir / "out").string()) == 0);

  const auto meta = io::json::parse(io::read_text(dir / "out/tf_meta.json"));
  CHECK(meta.at("stft_bins").get<int>() == 16);
  CHECK(meta.at("emddf_bins").get<int>() == 16);  // S*M/2

  auto count_columns = [&](const fs::path& p) {
    std::istringstream in(io::read_text(p));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);  // column header
    std::getline(in, line);  // first data row
    int commas = 0;
    for (char c : line) commas += c == ',';
    return commas;  // window_start + bins
  };
  CHECK(count_columns(dir / "out/emddf_tf.csv") == 16);
  CHECK(count_columns(dir / "out/stft_tf.csv") == 16);
}

TEST_CASE("signal csv io round-trips") {
  const auto dir = fresh_dir("signal");
  synth::Rng rng(8);
  Vec s(50);
  for (int i = 0; i < 50; ++i) s[i] = rng.gaussian();
  io::write_signal_csv(dir / "sig.csv", s, 250.0);
  const auto [back, fs_hz] = io::read_signal_csv(dir / "sig.csv");
  CHECK(fs_hz == 250.0);
  REQUIRE(back.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(back[i] == s[i]);
}

}  // TEST_SUITE
