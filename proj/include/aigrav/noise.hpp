#ifndef AIGRAV_NOISE_HPP
#define AIGRAV_NOISE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "aigrav/error.hpp"
#include "aigrav/random.hpp"

namespace aigrav {

// Uniformly sampled real signal starting at t0.
struct TimeSeries {
  double fs = 1.0;
  Eigen::ArrayXd samples;
  double t0 = 0.0;

  Eigen::Index size() const { return samples.size(); }
  double time(Eigen::Index i) const { return t0 + static_cast<double>(i) / fs; }
  double duration() const { return static_cast<double>(samples.size()) / fs; }
  void validate() const;
};

struct PhaseTone {
  double frequency = 0;  // Hz
  double rms_phase = 0;  // rad
};

// One-sided flat phase-noise band.
struct ShapedBand {
  double f_lo = 0;       // Hz
  double f_hi = 0;       // Hz
  double psd_level = 0;  // rad^2/Hz
};

struct NoiseSpec {
  std::vector<PhaseTone> tones;
  std::vector<ShapedBand> shaped_bands;
  double additive_rms = 0;        // signal units
  double multiplicative_rms = 0;  // dimensionless
  std::uint64_t seed = 0;

  void validate() const;
  // Band edges must also sit below fs/2.
  void validate_against(double fs) const;
  bool empty() const {
    return tones.empty() && shaped_bands.empty() && additive_rms == 0 && multiplicative_rms == 0;
  }
};

struct BeatConfig {
  double amplitude = 1.0;  // A
  double contrast = 1.0;   // C
  double carrier = 15e3;   // f_c, Hz
  double phase0 = 0.0;     // rad
  double fs = 1e6;         // Hz
  double duration = 1.0;   // s

  void validate() const;
  Eigen::Index sample_count() const;
};

// Number of samples for fs * duration; throws unless it is an integer >= 16.
Eigen::Index checked_sample_count(double fs, double duration);

// Laser phase noise n_p(t) in rad. Tones carry a uniformly random initial
// phase and amplitude sqrt(2) * rms. Each shaped band is built in the
// frequency domain: every DFT bin inside [f_lo, f_hi] gets the magnitude of
// the one-sided level and an independent uniform phase, then one inverse
// transform yields the record.
TimeSeries generate_phase_noise(const NoiseSpec& spec, double fs, double duration);

// S(t) = A [1 + n_m(t)] [1 + C cos(2 pi f_c t + n_p(t) + phi_0)] + n_a(t).
TimeSeries synth_beat(const BeatConfig& cfg, const NoiseSpec& spec);

// The phase channel used by synth_beat for the same inputs.
TimeSeries synth_phase_channel(const BeatConfig& cfg, const NoiseSpec& spec);

}  // namespace aigrav

#endif  // AIGRAV_NOISE_HPP
