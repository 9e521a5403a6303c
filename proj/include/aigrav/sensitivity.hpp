#ifndef AIGRAV_SENSITIVITY_HPP
#define AIGRAV_SENSITIVITY_HPP

// Sensitivity function of the pi/2 - pi - pi/2 sequence and its transfer
// function. Time is measured from the centre of the mirror pulse; the
// function is odd and vanishes for |t| >= T + 2 tau_R.

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aigrav/error.hpp"
#include "aigrav/physics.hpp"

namespace aigrav {

namespace detail {
template <typename Scalar>
Scalar sinc(Scalar x) {
  using std::abs;
  using std::sin;
  if (abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return 1 - x2 / 6 + x2 * x2 / 120;
  }
  return sin(x) / x;
}
}  // namespace detail

template <typename Scalar>
Scalar sensitivity_value(const PulseSequenceT<Scalar>& seq, Scalar t) {
  using std::sin;
  if (t < 0) return -sensitivity_value(seq, -t);
  const Scalar omega = seq.rabi;
  const Scalar tau = seq.beamsplitter_duration;
  const Scalar big_t = seq.interrogation;
  if (t < tau) return sin(omega * t);
  if (t <= big_t + tau) return Scalar(1);
  if (t < big_t + 2 * tau) return -sin(omega * (big_t - t));
  return Scalar(0);
}

// Fourier transform G(w) = int g(t) exp(-i w t) dt of the sensitivity function.
//
// The closed form carries a removable 0/0 at |w| = Omega_R whenever
// Omega_R tau_R = pi/2. Within 1e-3 Omega_R of it the bracket is rewritten as a
// product of sines so that the cancelling factor (w - Omega_R) divides out
// exactly.
template <typename Scalar>
std::complex<Scalar> transfer_G(const PulseSequenceT<Scalar>& seq, Scalar omega) {
  using std::abs;
  using std::cos;
  using std::sin;
  using Complex = std::complex<Scalar>;
  constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / 2;

  if (omega == Scalar(0)) return Complex(0, 0);
  if (omega < 0) return std::conj(transfer_G(seq, -omega));

  const Scalar rabi = seq.rabi;
  const Scalar tau = seq.beamsplitter_duration;
  const Scalar big_t = seq.interrogation;
  const Scalar a = omega * (big_t + 2 * tau) / 2;
  const Scalar b = omega * big_t / 2;
  const Scalar eps = omega - rabi;
  const Scalar pulse_error = rabi * tau - half_pi;

  if (abs(eps) < Scalar(1e-3) * rabi && abs(pulse_error) < Scalar(1e-12)) {
    // cos a + (Omega/w) sin b
    //   = -2 sin(eps tau / 2) cos((a + b - pi/2) / 2) - (eps / w) sin b
    const Scalar bracket_over_eps =
        -tau * detail::sinc(eps * tau / 2) * cos((a + b - half_pi) / 2) - sin(b) / omega;
    const Scalar im = 4 * rabi * sin(a) / (omega + rabi) * bracket_over_eps;
    return Complex(0, im);
  }

  // (Omega/w) sin b written through sinc keeps w -> 0 finite.
  const Scalar bracket = cos(a) + rabi * big_t / 2 * detail::sinc(b);
  const Scalar im = 4 * rabi / (omega * omega - rabi * rabi) * sin(a) * bracket;
  return Complex(0, im);
}

// |H(2 pi f)|^2 = |2 pi f G(2 pi f)|^2.
template <typename Scalar>
Scalar weighting(const PulseSequenceT<Scalar>& seq, Scalar f) {
  if (f < 0) throw ValidationError("frequency must be non-negative", "f");
  const Scalar omega = 2 * std::numbers::pi_v<Scalar> * f;
  return std::norm(omega * transfer_G(seq, omega));
}

struct CharacteristicFrequencies {
  std::vector<double> zeros;  // Hz, n / (T + 2 tau_R) within the band
  double cutoff = 0;          // Hz, sqrt(3) Omega_R / (6 pi)
};

CharacteristicFrequencies characteristic_frequencies(const PulseSequence& seq, double band);

struct TransferGrid {
  Eigen::ArrayXd frequencies;  // Hz, strictly increasing, > 0
  Eigen::ArrayXd weights;      // |H|^2
  PulseSequence sequence;
};

TransferGrid make_transfer_grid(const PulseSequence& seq, const Eigen::ArrayXd& frequencies);

// count points from f_lo to f_hi inclusive, evenly spaced in log f.
Eigen::ArrayXd log_spaced(double f_lo, double f_hi, Eigen::Index count);

}  // namespace aigrav

#endif  // AIGRAV_SENSITIVITY_HPP
