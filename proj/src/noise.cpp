#include "aigrav/noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aigrav/error.hpp"
#include "aigrav/fft.hpp"

namespace aigrav {

namespace {

enum Stream : std::uint64_t { kTones = 0, kBands = 1, kMultiplicative = 2, kAdditive = 3 };

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void TimeSeries::validate() const {
  if (!(fs > 0) || !std::isfinite(fs)) throw ValidationError("sample rate must be positive", "fs");
  if (samples.size() == 0) throw ValidationError("time series is empty", "samples");
}

void NoiseSpec::validate() const {
  for (std::size_t i = 0; i < tones.size(); ++i) {
    const std::string path = "noise.tones[" + std::to_string(i) + "]";
    if (!(tones[i].frequency > 0)) throw ValidationError("must be positive", path + ".frequency");
    if (!(tones[i].rms_phase >= 0)) throw ValidationError("must be >= 0", path + ".rms_phase");
  }
  for (std::size_t i = 0; i < shaped_bands.size(); ++i) {
    const std::string path = "noise.shaped_bands[" + std::to_string(i) + "]";
    const ShapedBand& b = shaped_bands[i];
    if (!(b.f_lo > 0)) throw ValidationError("must be positive", path + ".f_lo");
    if (!(b.f_hi > b.f_lo)) throw ValidationError("must exceed f_lo", path + ".f_hi");
    if (!(b.psd_level >= 0)) throw ValidationError("must be >= 0", path + ".psd_level");
  }
  if (!(additive_rms >= 0)) throw ValidationError("must be >= 0", "noise.additive_rms");
  if (!(multiplicative_rms >= 0)) throw ValidationError("must be >= 0", "noise.multiplicative_rms");
}

void NoiseSpec::validate_against(double fs) const {
  validate();
  const double nyquist = fs / 2;
  for (std::size_t i = 0; i < tones.size(); ++i)
    if (!(tones[i].frequency < nyquist))
      throw ValidationError("tone above Nyquist", "noise.tones[" + std::to_string(i) + "].frequency");
  for (std::size_t i = 0; i < shaped_bands.size(); ++i)
    if (!(shaped_bands[i].f_hi < nyquist))
      throw ValidationError("band edge above Nyquist",
                            "noise.shaped_bands[" + std::to_string(i) + "].f_hi");
}

Eigen::Index checked_sample_count(double fs, double duration) {
  if (!(fs > 0)) throw ValidationError("sample rate must be positive", "fs");
  if (!(duration > 0)) throw ValidationError("duration must be positive", "duration");
  const double exact = fs * duration;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact))
    throw ValidationError("fs * duration is not an integer sample count", "duration");
  if (rounded < 16) throw ValidationError("record shorter than 16 samples", "duration");
  return static_cast<Eigen::Index>(rounded);
}

void BeatConfig::validate() const {
  if (!(amplitude >= 0)) throw ValidationError("must be >= 0", "beat.amplitude");
  if (!(contrast >= 0 && contrast <= 1)) throw ValidationError("must lie in [0, 1]", "beat.contrast");
  if (!(carrier > 0)) throw ValidationError("must be positive", "beat.carrier");
  if (!(carrier < fs / 2)) throw ValidationError("carrier above Nyquist", "beat.carrier");
  checked_sample_count(fs, duration);
}

Eigen::Index BeatConfig::sample_count() const { return checked_sample_count(fs, duration); }

TimeSeries generate_phase_noise(const NoiseSpec& spec, double fs, double duration) {
  spec.validate_against(fs);
  const Eigen::Index n = checked_sample_count(fs, duration);

  TimeSeries out;
  out.fs = fs;
  out.samples = Eigen::ArrayXd::Zero(n);

  Rng tone_rng(derive_seed(spec.seed, kTones));
  for (const PhaseTone& tone : spec.tones) {
    const double amp = tone.rms_phase * std::numbers::sqrt2;
    const double phase = kTwoPi * tone_rng.uniform();
    const double cycles_per_sample = tone.frequency / fs;
    for (Eigen::Index i = 0; i < n; ++i) {
      // Reduce the cycle count before scaling so long records keep precision.
      const double cycles = cycles_per_sample * static_cast<double>(i);
      out.samples[i] += amp * std::cos(kTwoPi * (cycles - std::floor(cycles)) + phase);
    }
  }

  if (!spec.shaped_bands.empty()) {
    const auto un = static_cast<std::size_t>(n);
    const double df = fs / static_cast<double>(n);
    std::vector<double> power(un / 2 + 1, 0.0);
    for (const ShapedBand& band : spec.shaped_bands) {
      const auto k_lo = static_cast<std::size_t>(std::ceil(band.f_lo / df - 1e-9));
      const auto k_hi = static_cast<std::size_t>(std::floor(band.f_hi / df + 1e-9));
      for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= k_hi && 2 * k < un; ++k)
        power[k] += band.psd_level;
    }
    // |X_k|^2 = S fs N / 2 puts S * df of variance into each bin after the 1/N inverse.
    const double scale = fs * static_cast<double>(n) / 2.0;
    std::vector<fft::Complex> spectrum(un, fft::Complex(0, 0));
    Rng band_rng(derive_seed(spec.seed, kBands));
    for (std::size_t k = 1; 2 * k < un; ++k) {
      if (power[k] <= 0) continue;
      const double mag = std::sqrt(power[k] * scale);
      spectrum[k] = std::polar(mag, kTwoPi * band_rng.uniform());
      spectrum[un - k] = std::conj(spectrum[k]);
    }
    const std::vector<fft::Complex> shaped = fft::inverse(spectrum);
    for (Eigen::Index i = 0; i < n; ++i) out.samples[i] += shaped[static_cast<std::size_t>(i)].real();
  }
  return out;
}

TimeSeries synth_phase_channel(const BeatConfig& cfg, const NoiseSpec& spec) {
  cfg.validate();
  return generate_phase_noise(spec, cfg.fs, cfg.duration);
}

TimeSeries synth_beat(const BeatConfig& cfg, const NoiseSpec& spec) {
  cfg.validate();
  const TimeSeries phase = generate_phase_noise(spec, cfg.fs, cfg.duration);
  const Eigen::Index n = phase.size();

  TimeSeries out;
  out.fs = cfg.fs;
  out.samples.resize(n);

  Rng mult_rng(derive_seed(spec.seed, kMultiplicative));
  Rng add_rng(derive_seed(spec.seed, kAdditive));
  const double cycles_per_sample = cfg.carrier / cfg.fs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double cycles = cycles_per_sample * static_cast<double>(i);
    const double carrier_phase = kTwoPi * (cycles - std::floor(cycles));
    const double n_m = spec.multiplicative_rms > 0 ? spec.multiplicative_rms * mult_rng.normal() : 0.0;
    const double n_a = spec.additive_rms > 0 ? spec.additive_rms * add_rng.normal() : 0.0;
    out.samples[i] = cfg.amplitude * (1.0 + n_m) *
                         (1.0 + cfg.contrast * std::cos(carrier_phase + phase.samples[i] + cfg.phase0)) +
                     n_a;
  }
  return out;
}

}  // namespace aigrav
