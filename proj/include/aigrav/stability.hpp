#ifndef AIGRAV_STABILITY_HPP
#define AIGRAV_STABILITY_HPP

#include <Eigen/Core>
#include <vector>

namespace aigrav {

struct ShotSeries {
  Eigen::ArrayXd values;  // one measurement per shot
  double cycle_time = 1;  // tau_0, s

  void validate() const;
};

struct AllanResult {
  Eigen::ArrayXd taus;   // s, increasing
  Eigen::ArrayXd adev;   // units of the input values
  std::vector<Eigen::Index> counts;  // cluster means (non-overlapping) or running means (overlapping)
  bool overlapping = false;
};

// Octave grid tau_0, 2 tau_0, 4 tau_0, ... up to span / 8.
Eigen::ArrayXd default_taus(const ShotSeries& s);

// sigma^2(tau) = 1 / (2 (M - 1)) sum (y_{i+1} - y_i)^2 over M block means.
// Each tau must be an integer multiple of the cycle time and leave M >= 3.
AllanResult allan_deviation(const ShotSeries& s, const Eigen::ArrayXd& taus, bool overlapping = false);

struct SensitivityReport {
  double at_one_second = 0;  // A in adev = A tau^-1/2
  double slope = 0;          // free log-log slope
  bool slope_warning = false;  // |slope + 1/2| > 0.15
  double tau_ref = 0;
  double predicted = 0;      // A / sqrt(tau_ref)
  bool extrapolated = false; // tau_ref is not one of the measured taus
  double raw_nearest = 0;    // measured adev at the tau nearest tau_ref
  double raw_nearest_tau = 0;
};

// White-noise fit of an Allan curve. log(adev) = log(A) - log(tau) / 2 is fitted
// by least squares with each tau weighted by its degrees of freedom (count - 1).
SensitivityReport sensitivity_at_tau(const AllanResult& r, double tau_ref);

// (Delta g / g) = 1 / (C sqrt(N) g k_eff T^2).
double qpn_limit(double contrast, double atoms, double g, double k_eff, double interrogation);

}  // namespace aigrav

#endif  // AIGRAV_STABILITY_HPP
