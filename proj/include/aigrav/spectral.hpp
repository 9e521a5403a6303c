#ifndef AIGRAV_SPECTRAL_HPP
#define AIGRAV_SPECTRAL_HPP

#include <Eigen/Core>
#include <string>

#include "aigrav/noise.hpp"
#include "aigrav/physics.hpp"

namespace aigrav {

enum class PsdUnit { RadSquaredPerHz, SignalSquaredPerHz, DbmPerRbw, DbcPerHz };

std::string to_string(PsdUnit unit);

// One-sided PSD on bins f_k = k fs / L, k = 0 .. L/2.
struct PsdEstimate {
  Eigen::ArrayXd frequencies;
  Eigen::ArrayXd values;
  double rbw = 0;     // equivalent noise bandwidth of the window, Hz
  double bin_width = 0;  // fs / L, Hz
  PsdUnit unit = PsdUnit::SignalSquaredPerHz;
  std::string window = "hann";
  int segments = 0;
  Eigen::Index segment_length = 0;
};

struct Demodulated {
  TimeSeries phase;       // rad, unwrapped
  TimeSeries in_phase;
  TimeSeries quadrature;
  double carrier = 0;
  double lp_cutoff = 0;
  Eigen::Index taps = 0;
  // Samples dropped at each end so that only fully settled filter output remains.
  Eigen::Index settle_samples = 0;
  // I and Q both vanish relative to the input level (e.g. zero contrast).
  bool phase_undefined = false;
  // Adjacent raw phases that differed by more than pi before unwrapping.
  Eigen::Index unwrap_jumps = 0;
};

// Linear-phase Kaiser-windowed sinc low-pass, ~100 dB stop band. The
// transition band is centred on `cutoff` with full width `transition`.
Eigen::ArrayXd design_lowpass(double fs, double cutoff, double transition);

// Linear convolution trimmed to the fully overlapped ("valid") part:
// output length = x.size() - taps.size() + 1.
Eigen::ArrayXd fir_filter_valid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps);

// Orthogonal demodulation at `carrier`. lp_cutoff <= 0 selects carrier / 4.
Demodulated demodulate(const TimeSeries& s, double carrier, double lp_cutoff = 0);

// Welch estimate with a periodic Hann window, 50 % overlap, per-segment mean
// removal. The segment length is the smallest 2-3-5-smooth length whose
// window ENBW (1.5 fs / L) lies within 1 % of `rbw`.
PsdEstimate estimate_psd(const TimeSeries& s, double rbw,
                         PsdUnit unit = PsdUnit::SignalSquaredPerHz);

// Per-bin power in dBm: 10 log10(value * rbw / impedance / 1 mW).
PsdEstimate psd_to_dbm(const PsdEstimate& psd, double impedance = 50.0);

// Single-sideband phase noise L(f) = S_phi(f) / 2 in dBc/Hz.
PsdEstimate psd_to_dbc(const PsdEstimate& psd);

// sigma_Phi (rad) from a phase PSD weighted by |H(2 pi f)|^2 over [f_lo, f_hi].
// Bins are piecewise constant; inside each bin the weighting is averaged over
// 8 sub-interval midpoints.
double integrated_phase_noise(const PsdEstimate& psd, const PulseSequence& seq, double f_lo,
                              double f_hi);

// Sum of PSD * bin width over the band; bins weighted by their overlap.
double band_power(const PsdEstimate& psd, double f_lo, double f_hi);

}  // namespace aigrav

#endif  // AIGRAV_SPECTRAL_HPP
