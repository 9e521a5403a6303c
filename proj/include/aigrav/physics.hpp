#ifndef AIGRAV_PHYSICS_HPP
#define AIGRAV_PHYSICS_HPP

// Closed-form gravimeter relations for a vertical Bragg lattice.
//
// Unit conventions: Rabi and recoil frequencies are angular (rad/s); every
// lattice frequency offset is reported in Hz and every chirp in Hz/s.

#include <cmath>
#include <numbers>
#include <string>

#include "aigrav/error.hpp"

namespace aigrav {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s, CODATA 2018
inline constexpr double mass_rb87 = 1.44316060e-25;   // kg
inline constexpr double d2_wavelength = 780.24e-9;    // m
inline constexpr double gal = 1e-2;                   // m/s^2
inline constexpr double microgal = 1e-8;              // m/s^2
}  // namespace constants

template <typename Scalar>
struct AtomSpeciesT {
  Scalar mass = Scalar(constants::mass_rb87);
  Scalar wavelength = Scalar(constants::d2_wavelength);
  std::string label = "87Rb";

  void validate() const {
    if (!(mass > 0)) throw ValidationError("mass must be positive", "species.mass_kg");
    if (!(wavelength > 0))
      throw ValidationError("wavelength must be positive", "species.wavelength_m");
  }
};

template <typename Scalar>
struct BraggConfigT {
  AtomSpeciesT<Scalar> species;
  int order = 1;
  Scalar detuning = Scalar(0);  // rad/s, informational
  // Projection of the lattice wavevector on g; 1 for perfectly vertical beams.
  Scalar alignment = Scalar(1);

  void validate() const {
    species.validate();
    if (order < 1) throw ValidationError("Bragg order must be >= 1", "bragg.order");
    if (!(alignment > 0 && alignment <= 1))
      throw ValidationError("alignment factor must lie in (0, 1]", "bragg.alignment");
  }
};

template <typename Scalar>
struct PulseSequenceT {
  Scalar rabi = Scalar(2 * std::numbers::pi * 5e3);  // Omega_R, rad/s
  Scalar beamsplitter_duration = Scalar(50e-6);     // tau_R, s
  Scalar interrogation = Scalar(10e-3);             // T, s
  Scalar cycle_time = Scalar(17.98);                // s

  void validate() const {
    if (!(rabi > 0)) throw ValidationError("must be positive", "sequence.rabi_hz");
    if (!(beamsplitter_duration > 0))
      throw ValidationError("must be positive", "sequence.tau_r");
    if (!(interrogation > 0)) throw ValidationError("must be positive", "sequence.t");
    if (!(cycle_time > 0)) throw ValidationError("must be positive", "sequence.cycle_time");
  }

  // Set when Omega_R * tau_R is not a pi/2 pulse; the sensitivity function
  // is only continuous under that condition.
  bool pi_half_warning() const {
    using std::abs;
    return abs(rabi * beamsplitter_duration - std::numbers::pi_v<Scalar> / 2) > Scalar(1e-6);
  }

  // Half-length of the sensitivity window, T + 2 tau_R.
  Scalar half_span() const { return interrogation + 2 * beamsplitter_duration; }
};

using AtomSpecies = AtomSpeciesT<double>;
using BraggConfig = BraggConfigT<double>;
using PulseSequence = PulseSequenceT<double>;

template <typename Scalar>
Scalar wavenumber(const AtomSpeciesT<Scalar>& species) {
  return 2 * std::numbers::pi_v<Scalar> / species.wavelength;
}

// Vertical wavenumber k.g/|g| seen by the atoms.
template <typename Scalar>
Scalar vertical_wavenumber(const BraggConfigT<Scalar>& cfg) {
  return wavenumber(cfg.species) * cfg.alignment;
}

// omega_R = hbar k^2 / (2 m), rad/s.
template <typename Scalar>
Scalar recoil_frequency(const AtomSpeciesT<Scalar>& species) {
  const Scalar k = wavenumber(species);
  return Scalar(constants::hbar) * k * k / (2 * species.mass);
}

// Chirp alpha_0 = k g / pi (Hz/s) that keeps a falling atom on Bragg resonance.
template <typename Scalar>
Scalar chirp_for_gravity(const BraggConfigT<Scalar>& cfg, Scalar g) {
  if (!(g > 0)) throw ValidationError("gravity must be positive", "g");
  return vertical_wavenumber(cfg) * g / std::numbers::pi_v<Scalar>;
}

template <typename Scalar>
Scalar gravity_from_chirp(const BraggConfigT<Scalar>& cfg, Scalar alpha) {
  if (!(alpha > 0)) throw ValidationError("chirp must be positive", "alpha");
  return std::numbers::pi_v<Scalar> * alpha / vertical_wavenumber(cfg);
}

// Lattice frequency difference (Hz) satisfying the Bragg condition at time t
// of free fall: (4 n omega_R + 2 k g t) / 2 pi.
template <typename Scalar>
Scalar bragg_resonance_offset(const BraggConfigT<Scalar>& cfg, Scalar g, Scalar t) {
  if (t < 0) throw ValidationError("time must be non-negative", "t");
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  const Scalar angular =
      4 * Scalar(cfg.order) * recoil_frequency(cfg.species) + 2 * vertical_wavenumber(cfg) * g * t;
  return angular / two_pi;
}

// Mach-Zehnder phase n (2 k g T^2 - 2 pi alpha T^2), rad.
template <typename Scalar>
Scalar mz_phase(const BraggConfigT<Scalar>& cfg, const PulseSequenceT<Scalar>& seq, Scalar g,
                Scalar alpha) {
  const Scalar t2 = seq.interrogation * seq.interrogation;
  return Scalar(cfg.order) *
         (2 * vertical_wavenumber(cfg) * g * t2 - 2 * std::numbers::pi_v<Scalar> * alpha * t2);
}

// Two-photon Rabi frequency Omega_1 Omega_2 / (2 Delta).
template <typename Scalar>
Scalar effective_rabi(Scalar omega1, Scalar omega2, Scalar detuning) {
  if (detuning == Scalar(0)) throw ValidationError("detuning must be non-zero", "detuning");
  return omega1 * omega2 / (2 * detuning);
}

// Reads {"mass_kg", "wavelength_m", "label"}; missing keys keep the 87Rb defaults.
AtomSpecies load_species(const std::string& path);
AtomSpecies parse_species(const std::string& json_text);

}  // namespace aigrav

#endif  // AIGRAV_PHYSICS_HPP
