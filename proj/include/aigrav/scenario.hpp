#ifndef AIGRAV_SCENARIO_HPP
#define AIGRAV_SCENARIO_HPP

#include <Eigen/Core>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aigrav/fringe.hpp"
#include "aigrav/noise.hpp"
#include "aigrav/physics.hpp"

namespace aigrav {

inline constexpr const char* kScenarioSchema = "aigrav.scenario/1";

// Phase-noise analysis chain: demodulation, PSD, weighted integral.
struct AnalysisBlock {
  double rbw = 25.0;         // Hz, phase PSD
  double lp_cutoff = 0.0;    // Hz, 0 = carrier / 4
  double f_lo = 0.0;         // Hz
  double f_hi = 10e3;        // Hz
  double beat_rbw = 500.0;   // Hz, beat-note spectrum in dBm
  double impedance = 50.0;   // ohm
  std::string reference;     // scenario to compare against in `demo`
};

struct TransferBlock {
  double f_min = 1.0;
  double f_max = 5e4;
  Eigen::Index points = 4000;
};

struct FringeBlock {
  double g_true = 9.7833;
  std::vector<double> interrogation_times{10e-3};
  ScanMode mode = ScanMode::SweepRate;
  double alpha_center = 25.078e6;  // Hz/s
  double alpha_width = 120e3;      // Hz/s
  Eigen::Index points = 40;
  std::vector<double> abscissa;    // explicit grid; overrides centre/width/points
  double phase_span = 4 * std::numbers::pi;
  double fixed_alpha = 25.07e6;    // Hz/s, final-phase scans
  long atoms = 50000;
  double contrast = 0.5;
  int shots = 5;
  double detection_noise = 0;
  double phase_noise_rms = 0;

  Eigen::ArrayXd grid() const;
  ScanOptions options(std::uint64_t seed) const;
};

struct StabilityBlock {
  double cycle_time = 17.98;  // s
  double duration = 72000;    // s of synthetic record
  double asd_1s = 1360;       // uGal at 1 s of white noise
  double g_true = 9.7833;
  double tau_ref = 200;       // s
  bool overlapping = false;
};

struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  BraggConfig bragg;
  PulseSequence sequence;
  std::optional<BeatConfig> beat;
  std::optional<NoiseSpec> noise;
  std::optional<AnalysisBlock> analysis;
  std::optional<TransferBlock> transfer;
  std::optional<FringeBlock> fringe;
  std::optional<StabilityBlock> stability;

  void validate() const;
  NoiseSpec noise_or_empty() const;
};

// `origin` resolves relative paths (species_file) and labels diagnostics.
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "");

// A bundled scenario name or a path to a JSON file.
Scenario load_scenario(const std::string& name_or_path);

// Bundled scenarios compiled into the binary: (name, JSON text).
const std::vector<std::pair<std::string, std::string>>& bundled_scenarios();

}  // namespace aigrav

#endif  // AIGRAV_SCENARIO_HPP
