#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "aigrav/cli.hpp"
#include "aigrav/plot.hpp"
#include "aigrav/scenario.hpp"
#include "aigrav/sensitivity.hpp"
#include "aigrav/series_io.hpp"
#include "aigrav/stability.hpp"

using namespace aigrav;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aigrav");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("aigrav-test-cli-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string minimal(const std::string& extra = "") {
  return R"({"schema": "aigrav.scenario/1", "name": "t", "seed": 4)" + extra + "}";
}

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("bundled scenarios parse and validate") {
  const auto& all = bundled_scenarios();
  std::set<std::string> names;
  for (const auto& [name, text] : all) {
    names.insert(name);
    const Scenario sc = load_scenario(name);
    CHECK(sc.name == name);
  }
  for (const char* n : {"single-aom", "dual-aom", "dual-aom-single-fiber", "fig2-transfer", "fringe-T10ms", "allan-white"})
    CHECK(names.count(n) == 1);
}

TEST_CASE("scenario schema and unknown keys") {
  CHECK(field_of(minimal()) == "<accepted>");
  CHECK(field_of(R"({"name": "t"})") == "schema");
  CHECK(field_of(R"({"schema": "aigrav.scenario/9", "name": "t"})") == "schema");
  CHECK(field_of(minimal(R"(, "colour": 1)")) == "colour");
  CHECK(field_of(minimal(R"(, "sequence": {"t": 0.01, "rabbi_hz": 5000})")) == "sequence.rabbi_hz");
  CHECK(field_of(minimal(R"(, "sequence": {"t": -1})")) == "sequence.t");
  CHECK(field_of(minimal(R"(, "sequence": {"t": "ten"})")) == "sequence.t");
  CHECK(field_of(minimal(R"(, "beat": {"fs": 1e5, "duration": 0.1},
      "noise": {"tones": [{"frequency": 100, "rms_phase": -1}]})")) == "noise.tones[0].rms_phase");
  CHECK(field_of(minimal(R"(, "beat": {"fs": 1e5, "duration": 0.1},
      "noise": {"shaped_bands": [{"f_lo": 10, "f_hi": 20, "psd_level": 1e-9, "slope": 1}]})")) ==
        "noise.shaped_bands[0].slope");
  CHECK(field_of(minimal(R"(, "noise": {"additive_rms": 0.1})")) == "noise");
  CHECK(field_of(minimal(R"(, "fringe": {"mode": "sideways"})")) == "fringe.mode");
  CHECK(field_of(minimal(R"(, "bragg": {"order": 0})")) == "bragg.order");
  CHECK(field_of("{ not json") != "<accepted>");

  try {
    parse_scenario(minimal(R"(, "sequence": {"t": -1})"));
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "sequence.t: must be positive");
  }
}

TEST_CASE("species file next to the scenario") {
  const fs::path dir = scratch("species");
  write_text(dir / "k.json", R"({"mass_kg": 6.47e-26, "wavelength_m": 766.7e-9, "label": "39K"})");
  write_text(dir / "sc.json", minimal(R"(, "species_file": "k.json")"));
  const Scenario sc = load_scenario((dir / "sc.json").string());
  CHECK(sc.bragg.species.label == "39K");
  CHECK(sc.bragg.species.wavelength == doctest::Approx(766.7e-9));

  write_text(dir / "bad.json", R"({"mass_kg": 1e-25, "wavelength_m": 780e-9, "charge": 1})");
  write_text(dir / "sc2.json", minimal(R"(, "species_file": "bad.json")"));
  CHECK_THROWS_AS(load_scenario((dir / "sc2.json").string()), ValidationError);
}

TEST_CASE("exit codes and error messages") {
  const fs::path dir = scratch("exit");
  const std::string out = dir.string();

  CHECK(run_cli({"limit", "--out", out, "--quiet"}).code == cli::kExitOk);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
  CHECK(run_cli({}).code == cli::kExitValidation);
  CHECK(run_cli({"limit", "--bogus"}).code == cli::kExitValidation);
  CHECK(run_cli({"limit", "--atoms", "-5", "--out", out}).code == cli::kExitValidation);

  const Result missing = run_cli({"demo", "--scenario", "no-such-scenario", "--out", out});
  CHECK(missing.code == cli::kExitValidation);
  CHECK(missing.err.find("scenario") != std::string::npos);

  write_text(dir / "bad.json", minimal(R"(, "beat": {"fs": 1e5, "duration": 0.1},
      "noise": {"tones": [{"frequency": 100, "rms_phase": -1}]})"));
  const Result bad = run_cli({"synth", "--scenario", (dir / "bad.json").string(), "--out", out});
  CHECK(bad.code == cli::kExitValidation);
  CHECK(bad.err.find("noise.tones[0].rms_phase") != std::string::npos);

  // Zero contrast leaves no carrier to demodulate.
  write_text(dir / "flat.json", minimal(R"(, "beat": {"contrast": 0, "fs": 1e5, "duration": 0.2, "carrier": 15000},
      "analysis": {"f_hi": 3000})"));
  const Result flat = run_cli({"demo", "--scenario", (dir / "flat.json").string(), "--out", out});
  CHECK(flat.code == cli::kExitNumerical);

  // Commensurate interrogation times: the report is still written, flagged ambiguous.
  write_text(dir / "amb.json", minimal(R"(, "fringe": {"interrogation_times": [5e-3, 10e-3], "atoms": 0,
      "alpha_width": 120e3, "points": 60})"));
  const Result amb = run_cli({"extract-g", "--scenario", (dir / "amb.json").string(), "--out", out, "--no-svg"});
  CHECK(amb.code == cli::kExitNumerical);
  const auto report = nlohmann::json::parse(slurp(dir / "extract-g-t.json"));
  CHECK(report["status"] == "ambiguous");
}

TEST_CASE("empty plot data is an error") {
  PlotSpec spec;
  spec.title = "x";
  CHECK_THROWS_AS(render_svg(spec, {}), ValidationError);
  CHECK_THROWS_AS(render_svg(spec, {{"a", Eigen::ArrayXd(), Eigen::ArrayXd()}}), ValidationError);
  Eigen::ArrayXd x(3), y(3);
  x << 1, 2, 3;
  y << 0, -1, 0;
  spec.y_scale = AxisScale::Log;
  CHECK_THROWS_AS(render_svg(spec, {{"a", x, y}}), ValidationError);
  spec.y_scale = AxisScale::Linear;
  const std::string svg = render_svg(spec, {{"a", x, y}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("artifact names, output directory and plot options") {
  const fs::path dir = scratch("names");
  CHECK(run_cli({"transfer", "--scenario", "fig2-transfer", "--out", dir.string(), "--quiet"}).code == 0);
  for (const char* ext : {".csv", ".json", ".svg"}) CHECK(fs::exists(dir / (std::string("transfer-fig2-transfer") + ext)));
  CHECK(slurp(dir / "transfer-fig2-transfer.csv").rfind("f_hz,weight\n", 0) == 0);
  const std::string svg = slurp(dir / "transfer-fig2-transfer.svg");
  CHECK(svg.find("fig2-transfer") != std::string::npos);
  CHECK(svg.find("seed 0") != std::string::npos);
  CHECK(svg.find("f (Hz)") != std::string::npos);
  CHECK(svg.find("generated ") != std::string::npos);

  CHECK(run_cli({"transfer", "--scenario", "fig2-transfer", "--out", dir.string(), "--quiet", "--no-timestamp"}).code == 0);
  CHECK(slurp(dir / "transfer-fig2-transfer.svg").find("generated ") == std::string::npos);

  const fs::path quiet = scratch("nosvg");
  const Result r = run_cli({"limit", "--out", quiet.string(), "--no-svg", "--quiet"});
  CHECK(r.out.empty());
  CHECK(fs::exists(quiet / "limit-default.json"));

  const fs::path env_dir = scratch("env") / "nested";
  setenv(cli::kOutDirEnv, env_dir.string().c_str(), 1);
  const Result e = run_cli({"limit"});
  unsetenv(cli::kOutDirEnv);
  CHECK(e.code == 0);
  CHECK(fs::exists(env_dir / "limit-default.json"));
  CHECK(e.out.find("5.678e-07") != std::string::npos);
}

TEST_CASE("fringe csv feeds fit and extract-g") {
  const fs::path dir = scratch("fringe");
  const std::string out = dir.string();
  write_text(dir / "multi.json", minimal(R"(, "fringe": {"interrogation_times": [3.4e-3, 7e-3, 10e-3], "atoms": 0,
      "alpha_width": 120e3, "points": 40})"));
  REQUIRE(run_cli({"fringe", "--scenario", (dir / "multi.json").string(), "--out", out, "--quiet"}).code == 0);
  const fs::path a = dir / "fringe-t-T3.4ms.csv", b = dir / "fringe-t-T7ms.csv", c = dir / "fringe-t-T10ms.csv";
  REQUIRE(fs::exists(a));
  REQUIRE(fs::exists(c));
  CHECK(slurp(c).find("alpha_hz_per_s,population,stderr\n") != std::string::npos);

  CHECK(run_cli({"fit", "--input", c.string(), "--out", out, "--quiet"}).code == 0);
  const auto fit = nlohmann::json::parse(slurp(dir / "fit-fringe-t-T10ms.json"));
  CHECK(fit["fits"][0]["period"].get<double>() == doctest::Approx(1e4));
  CHECK(fit["fits"][0]["covariance"].size() == 4);

  REQUIRE(run_cli({"extract-g", "--input", a.string(), "--input", b.string(), "--input", c.string(), "--out", out,
                   "--quiet"})
              .code == 0);
  const auto g = nlohmann::json::parse(slurp(dir / "extract-g-fringe-t-T3.4ms.json"));
  CHECK(g["status"] == "ok");
  CHECK(std::abs(g["g"].get<double>() - 9.7833) < 1e-9 * 9.7833);
}

TEST_CASE("psd and integrate-noise from files") {
  const fs::path dir = scratch("psd");
  const std::string out = dir.string();
  write_text(dir / "tone.json", minimal(R"(, "beat": {"fs": 2e5, "duration": 1, "carrier": 20000},
      "noise": {"tones": [{"frequency": 800, "rms_phase": 0.01}]},
      "analysis": {"rbw": 3, "f_hi": 4000})"));
  const std::string sc = (dir / "tone.json").string();
  REQUIRE(run_cli({"synth", "--scenario", sc, "--out", out, "--quiet", "--no-svg"}).code == 0);
  REQUIRE(run_cli({"psd", "--scenario", sc, "--input", (dir / "synth-t.bin").string(), "--demod", "--out", out,
                   "--quiet"})
              .code == 0);
  const Result r = run_cli({"integrate-noise", "--input", (dir / "psd-t.csv").string(), "--f-lo", "0",
                            "--f-hi", "4000", "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mrad") != std::string::npos);
  const auto rep = nlohmann::json::parse(slurp(dir / "integrate-noise-psd-t.json"));
  const double expected = 0.01 * std::sqrt(weighting(PulseSequence{}, 800.0));
  CHECK(rep["sigma_phi_rad"].get<double>() == doctest::Approx(expected).epsilon(0.05));

  // dBm spectrum of the raw beat
  const fs::path beat = dir / "beat";
  REQUIRE(run_cli({"psd", "--scenario", sc, "--dbm", "--out", beat.string(), "--quiet", "--no-svg"}).code == 0);
  const std::string csv = slurp(beat / "psd-t.csv");
  CHECK(csv.find(",dBm") != std::string::npos);
  // integrate-noise refuses non-phase units
  CHECK(run_cli({"integrate-noise", "--input", (beat / "psd-t.csv").string(), "--out", out}).code ==
        cli::kExitValidation);
}

TEST_CASE("allan from a shot file") {
  const fs::path dir = scratch("allan");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2e-6);
  ShotSeries shots;
  shots.cycle_time = 2;
  shots.values.resize(256);
  {
    std::ofstream f(dir / "shots.csv");
    f << "shot_index,value\n";
    for (int i = 0; i < 256; ++i) {
      shots.values[i] = std::stod(format_number(9.78 + n(rng)));
      f << i << ',' << format_number(shots.values[i]) << '\n';
    }
  }
  const Result r = run_cli({"allan", "--input", (dir / "shots.csv").string(), "--cycle-time", "2", "--out",
                            dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "allan-shots.csv").rfind("tau_s,adev,count\n", 0) == 0);
  const CsvTable t = read_csv_table((dir / "allan-shots.csv").string());
  const AllanResult direct = allan_deviation(shots, default_taus(shots));
  REQUIRE(t.column("tau_s").size() == static_cast<std::size_t>(direct.taus.size()));
  for (Eigen::Index i = 0; i < direct.taus.size(); ++i) {
    CHECK(t.column("tau_s")[i] == doctest::Approx(direct.taus[i]));
    // written in uGal by default
    CHECK(t.column("adev")[i] == doctest::Approx(direct.adev[i] / 1e-8).epsilon(1e-12));
    CHECK(t.column("count")[i] == direct.counts[i]);
  }
  // no cycle time anywhere
  CHECK(run_cli({"allan", "--input", (dir / "shots.csv").string(), "--out", dir.string()}).code ==
        cli::kExitValidation);
}

TEST_CASE("same seed gives identical files") {
  auto files_of = [](const std::vector<std::string>& args, const std::string& tag) {
    const fs::path dir = scratch(tag);
    std::vector<std::string> a = args;
    a.insert(a.end(), {"--out", dir.string(), "--quiet", "--no-timestamp"});
    REQUIRE(run_cli(a).code == 0);
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
  };
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"demo", "--scenario", "fringe-T10ms"},
           {"demo", "--scenario", "allan-white"},
           {"transfer", "--scenario", "fig2-transfer"},
           {"limit"}}) {
    const auto a = files_of(args, "det-a"), b = files_of(args, "det-b");
    CHECK(a.size() == b.size());
    CHECK(a == b);
  }
  const auto s1 = files_of({"demo", "--scenario", "fringe-T10ms", "--seed", "1"}, "det-c");
  const auto s2 = files_of({"demo", "--scenario", "fringe-T10ms", "--seed", "2"}, "det-d");
  CHECK(s1.at("demo-fringe-T10ms.csv") != s2.at("demo-fringe-T10ms.csv"));
}
