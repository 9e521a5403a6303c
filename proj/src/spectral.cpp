#include "aigrav/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aigrav/error.hpp"
#include "aigrav/fft.hpp"
#include "aigrav/sensitivity.hpp"

namespace aigrav {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStopbandDb = 100.0;

double kaiser_beta(double attenuation_db) {
  if (attenuation_db > 50) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21)
    return 0.5842 * std::pow(attenuation_db - 21, 0.4) + 0.07886 * (attenuation_db - 21);
  return 0.0;
}

// Valid-mode convolution of a complex sequence with real taps (overlap-save).
std::vector<fft::Complex> convolve_valid(const std::vector<fft::Complex>& x,
                                         const Eigen::ArrayXd& taps) {
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(taps.size());
  if (m == 0 || n < m) throw ValidationError("record shorter than the filter", "samples");
  const std::size_t out_len = n - m + 1;

  std::size_t block = 1;
  while (block < 8 * m) block <<= 1;
  block = std::max<std::size_t>(block, 1024);
  const std::size_t step = block - m + 1;

  std::vector<fft::Complex> kernel(block, fft::Complex(0, 0));
  for (std::size_t j = 0; j < m; ++j) kernel[j] = taps[static_cast<Eigen::Index>(j)];
  const std::vector<fft::Complex> kernel_f = fft::forward(kernel);

  std::vector<fft::Complex> out(out_len);
  std::vector<fft::Complex> buf(block);
  for (std::size_t p = 0; p < out_len; p += step) {
    for (std::size_t i = 0; i < block; ++i) buf[i] = p + i < n ? x[p + i] : fft::Complex(0, 0);
    std::vector<fft::Complex> spec = fft::forward(buf);
    for (std::size_t i = 0; i < block; ++i) spec[i] *= kernel_f[i];
    const std::vector<fft::Complex> conv = fft::inverse(spec);
    for (std::size_t j = m - 1; j < block && p + j - (m - 1) < out_len; ++j) out[p + j - (m - 1)] = conv[j];
  }
  return out;
}

// Even 2-3-5-smooth segment length whose Hann ENBW is closest to the request.
Eigen::Index segment_length_for(double fs, double rbw) {
  const double target = 1.5 * fs / rbw;
  const auto lo = static_cast<std::size_t>(std::ceil(target / 1.01));
  const auto hi = static_cast<std::size_t>(std::floor(target / 0.99));
  std::size_t best = 0;
  double best_err = 0;
  for (std::size_t len = std::max<std::size_t>(lo, 4); len <= hi; ++len) {
    if (len % 2 != 0 || !fft::is_smooth(len)) continue;
    const double err = std::abs(static_cast<double>(len) - target);
    if (best == 0 || err < best_err) {
      best = len;
      best_err = err;
    }
  }
  if (best == 0) throw ValidationError("no segment length realises this resolution bandwidth", "rbw");
  return static_cast<Eigen::Index>(best);
}

double bin_width_of(const PsdEstimate& psd) {
  if (psd.bin_width > 0) return psd.bin_width;
  if (psd.frequencies.size() < 2) throw ValidationError("PSD needs at least two bins", "psd");
  return psd.frequencies[1] - psd.frequencies[0];
}

template <typename Fn>
double integrate_bins(const PsdEstimate& psd, double f_lo, double f_hi, Fn&& bin_weight) {
  if (!(f_lo >= 0)) throw ValidationError("must be >= 0", "f_lo");
  if (!(f_hi > f_lo)) throw ValidationError("must exceed f_lo", "f_hi");
  const double df = bin_width_of(psd);
  const Eigen::Index n = psd.frequencies.size();
  const double support_lo = std::max(0.0, psd.frequencies[0] - df / 2);
  const double support_hi = psd.frequencies[n - 1] + df / 2;
  if (f_lo < support_lo - 1e-9 * df || f_hi > support_hi + 1e-9 * df)
    throw ValidationError("band outside PSD support", "f_hi");

  double total = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lo = std::max({psd.frequencies[k] - df / 2, 0.0, f_lo});
    const double hi = std::min(psd.frequencies[k] + df / 2, f_hi);
    if (hi <= lo) continue;
    total += psd.values[k] * bin_weight(lo, hi) * (hi - lo);
  }
  return total;
}

}  // namespace

std::string to_string(PsdUnit unit) {
  switch (unit) {
    case PsdUnit::RadSquaredPerHz: return "rad^2/Hz";
    case PsdUnit::SignalSquaredPerHz: return "signal^2/Hz";
    case PsdUnit::DbmPerRbw: return "dBm";
    case PsdUnit::DbcPerHz: return "dBc/Hz";
  }
  return "unknown";
}

Eigen::ArrayXd design_lowpass(double fs, double cutoff, double transition) {
  if (!(cutoff > 0 && cutoff < fs / 2)) throw ValidationError("cutoff outside (0, fs/2)", "lp_cutoff");
  if (!(transition > 0)) throw ValidationError("transition width must be positive", "lp_cutoff");
  const double beta = kaiser_beta(kStopbandDb);
  const double delta_omega = 2 * kPi * transition / fs;
  auto order = static_cast<Eigen::Index>(std::ceil((kStopbandDb - 8.0) / (2.285 * delta_omega)));
  if (order % 2 != 0) ++order;  // odd tap count, integer group delay
  const Eigen::Index taps = order + 1;

  Eigen::ArrayXd h(taps);
  const double fc = cutoff / fs;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  const double half = static_cast<double>(order) / 2;
  for (Eigen::Index i = 0; i < taps; ++i) {
    const double x = static_cast<double>(i) - half;
    const double ideal = 2 * fc * detail::sinc(2 * kPi * fc * x);
    const double r = x / half;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1 - r * r))) / i0_beta;
    h[i] = ideal * window;
  }
  h /= h.sum();
  return h;
}

Eigen::ArrayXd fir_filter_valid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps) {
  std::vector<fft::Complex> cx(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) cx[static_cast<std::size_t>(i)] = x[i];
  const auto y = convolve_valid(cx, taps);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[i].real();
  return out;
}

Demodulated demodulate(const TimeSeries& s, double carrier, double lp_cutoff) {
  s.validate();
  if (!(carrier > 0 && carrier < s.fs / 2)) throw ValidationError("carrier above Nyquist", "carrier");
  if (lp_cutoff <= 0) lp_cutoff = carrier / 4;
  if (!(lp_cutoff < carrier))
    throw ValidationError("low-pass cutoff must be below the carrier", "lp_cutoff");

  const double transition = std::min(lp_cutoff, carrier - lp_cutoff);
  const Eigen::ArrayXd taps = design_lowpass(s.fs, lp_cutoff, transition);

  // 2 s(t) exp(-i 2 pi f_c t): baseband term is A C exp(i phase).
  const auto n = static_cast<std::size_t>(s.size());
  const double cycles_per_sample = carrier / s.fs;
  const double start_cycles = carrier * s.t0;
  std::vector<fft::Complex> mixed(n);
  for (std::size_t i = 0; i < n; ++i) {
    double cycles = start_cycles + cycles_per_sample * static_cast<double>(i);
    cycles -= std::floor(cycles);
    mixed[i] = 2.0 * s.samples[static_cast<Eigen::Index>(i)] * std::polar(1.0, -2 * kPi * cycles);
  }
  const std::vector<fft::Complex> base = convolve_valid(mixed, taps);

  Demodulated out;
  out.carrier = carrier;
  out.lp_cutoff = lp_cutoff;
  out.taps = taps.size();
  out.settle_samples = (taps.size() - 1) / 2;
  const auto m = static_cast<Eigen::Index>(base.size());
  const double t0 = s.t0 + static_cast<double>(out.settle_samples) / s.fs;
  for (TimeSeries* ts : {&out.phase, &out.in_phase, &out.quadrature}) {
    ts->fs = s.fs;
    ts->t0 = t0;
    ts->samples.resize(m);
  }

  double magnitude_sum = 0;
  double previous_raw = 0;
  double offset = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const fft::Complex z = base[static_cast<std::size_t>(i)];
    out.in_phase.samples[i] = z.real();
    out.quadrature.samples[i] = z.imag();
    magnitude_sum += std::abs(z);
    const double raw = std::atan2(z.imag(), z.real());
    if (i > 0) {
      const double delta = raw - previous_raw;
      if (std::abs(delta) > kPi) {
        ++out.unwrap_jumps;
        offset -= 2 * kPi * std::round(delta / (2 * kPi));
      }
    }
    out.phase.samples[i] = raw + offset;
    previous_raw = raw;
  }

  const double input_rms = std::sqrt(s.samples.square().sum() / static_cast<double>(s.size()));
  const double mean_magnitude = magnitude_sum / static_cast<double>(m);
  out.phase_undefined = !(mean_magnitude > 1e-3 * input_rms);
  return out;
}

PsdEstimate estimate_psd(const TimeSeries& s, double rbw, PsdUnit unit) {
  s.validate();
  if (!(rbw > 0)) throw ValidationError("resolution bandwidth must be positive", "rbw");
  const Eigen::Index len = segment_length_for(s.fs, rbw);
  if (s.size() < len)
    throw ValidationError("record shorter than one segment (" + std::to_string(len) + " samples)",
                          "rbw");

  const Eigen::Index step = len / 2;
  const Eigen::Index segments = (s.size() - len) / step + 1;
  Eigen::ArrayXd window(len);
  for (Eigen::Index i = 0; i < len; ++i)
    window[i] = 0.5 * (1 - std::cos(2 * kPi * static_cast<double>(i) / static_cast<double>(len)));
  const double window_power = window.square().sum();
  const double window_sum = window.sum();

  const Eigen::Index bins = len / 2 + 1;
  Eigen::ArrayXd accum = Eigen::ArrayXd::Zero(bins);
  std::vector<double> buf(static_cast<std::size_t>(len));
  for (Eigen::Index seg = 0; seg < segments; ++seg) {
    const auto piece = s.samples.segment(seg * step, len);
    const double mean = piece.mean();
    for (Eigen::Index i = 0; i < len; ++i)
      buf[static_cast<std::size_t>(i)] = (piece[i] - mean) * window[i];
    const auto spec = fft::forward(buf);
    for (Eigen::Index k = 0; k < bins; ++k) accum[k] += std::norm(spec[static_cast<std::size_t>(k)]);
  }

  PsdEstimate psd;
  psd.frequencies.resize(bins);
  for (Eigen::Index k = 0; k < bins; ++k)
    psd.frequencies[k] = static_cast<double>(k) * s.fs / static_cast<double>(len);
  psd.values = accum / (static_cast<double>(segments) * s.fs * window_power);
  psd.values.segment(1, bins - 2) *= 2.0;
  psd.rbw = s.fs * window_power / (window_sum * window_sum);
  psd.bin_width = s.fs / static_cast<double>(len);
  psd.unit = unit;
  psd.window = "hann";
  psd.segments = static_cast<int>(segments);
  psd.segment_length = len;
  return psd;
}

PsdEstimate psd_to_dbm(const PsdEstimate& psd, double impedance) {
  if (!(impedance > 0)) throw ValidationError("impedance must be positive", "impedance");
  if (psd.unit != PsdUnit::SignalSquaredPerHz)
    throw ValidationError("dBm conversion needs a signal^2/Hz (volt^2/Hz) estimate", "unit");
  PsdEstimate out = psd;
  constexpr double floor_watts = 1e-30;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    const double watts = std::max(psd.values[k] * psd.rbw / impedance, floor_watts);
    out.values[k] = 10 * std::log10(watts / 1e-3);
  }
  out.unit = PsdUnit::DbmPerRbw;
  return out;
}

PsdEstimate psd_to_dbc(const PsdEstimate& psd) {
  if (psd.unit != PsdUnit::RadSquaredPerHz)
    throw ValidationError("dBc/Hz conversion needs a rad^2/Hz estimate", "unit");
  PsdEstimate out = psd;
  for (Eigen::Index k = 0; k < out.values.size(); ++k)
    out.values[k] = 10 * std::log10(std::max(psd.values[k] / 2, 1e-30));
  out.unit = PsdUnit::DbcPerHz;
  return out;
}

double band_power(const PsdEstimate& psd, double f_lo, double f_hi) {
  return integrate_bins(psd, f_lo, f_hi, [](double, double) { return 1.0; });
}

double integrated_phase_noise(const PsdEstimate& psd, const PulseSequence& seq, double f_lo,
                              double f_hi) {
  if (psd.unit != PsdUnit::RadSquaredPerHz)
    throw ValidationError("integrated phase noise needs a rad^2/Hz PSD, got " + to_string(psd.unit),
                          "unit");
  seq.validate();
  constexpr int kSubPoints = 8;
  const double variance = integrate_bins(psd, f_lo, f_hi, [&seq](double lo, double hi) {
    const double h = (hi - lo) / kSubPoints;
    double acc = 0;
    for (int j = 0; j < kSubPoints; ++j) acc += weighting(seq, lo + (j + 0.5) * h);
    return acc / kSubPoints;
  });
  return std::sqrt(std::max(variance, 0.0));
}

}  // namespace aigrav
