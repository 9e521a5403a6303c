#ifndef AIGRAV_CLI_HPP
#define AIGRAV_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "aigrav/scenario.hpp"
#include "aigrav/spectral.hpp"

namespace aigrav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "AIGRAV_OUT_DIR";

// Full beat -> phase -> PSD -> weighted-integral chain for a scenario with
// beat, noise and analysis blocks.
struct NoiseRun {
  PsdEstimate phase_psd;   // rad^2/Hz
  double sigma_phi = 0;    // rad
  Eigen::Index taps = 0;
  Eigen::Index unwrap_jumps = 0;
};

NoiseRun run_noise_pipeline(const Scenario& sc);

// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aigrav::cli

#endif  // AIGRAV_CLI_HPP
