#ifndef AIGRAV_FRINGE_HPP
#define AIGRAV_FRINGE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "aigrav/error.hpp"
#include "aigrav/physics.hpp"

namespace aigrav {

// Abscissa of a fringe scan: lattice sweep rate alpha (Hz/s) or the phase of
// the final beamsplitter (rad).
enum class ScanMode { SweepRate, FinalPhase };

struct ScanOptions {
  long atoms = 50000;         // N per shot; 0 evaluates the transfer probability exactly
  double contrast = 0.5;      // C
  int shots_per_point = 5;
  std::uint64_t seed = 0;
  double detection_noise = 0;  // additive Gaussian rms on each detected fraction
  double phase_noise_rms = 0;  // per-shot Gaussian phase kick, rad (sigma_Phi)
  ScanMode mode = ScanMode::SweepRate;
  double fixed_alpha = 0;      // sweep rate held during a final-phase scan, Hz/s
};

struct FringeScan {
  PulseSequence sequence;
  int order = 1;
  ScanMode mode = ScanMode::SweepRate;
  Eigen::ArrayXd abscissa;     // alpha (Hz/s) or final phase (rad), strictly monotone
  Eigen::ArrayXd populations;  // mean detected fraction per point, in [0, 1]
  Eigen::ArrayXd stderr_;      // standard error of each mean (0 in the exact limit)
  int shots_per_point = 1;
  long atoms = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Parameter order in `covariance`: offset, contrast, center, period.
struct FringeFit {
  double offset = 0;
  double contrast = 0;
  double center = 0;   // fringe centre (Phi = 0 mod 2 pi), reduced into the scan window
  double period = 0;   // 1 / (n T^2) Hz/s, or 2 pi / n rad; fixed, not fitted
  double residual_rms = 0;
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  ScanMode mode = ScanMode::SweepRate;
  int order = 1;
  double interrogation = 0;  // T, s
  double window_lo = 0;
  double window_hi = 0;
  Eigen::Index points = 0;

  double center_sigma() const;
  // center + m * period for every m landing inside [window_lo, window_hi].
  std::vector<double> candidates() const;
};

FringeScan simulate_scan(const BraggConfig& cfg, const PulseSequence& seq, double g_true,
                         const Eigen::ArrayXd& abscissa, const ScanOptions& options);

// Least-squares fit of P(x) = offset (1 + C cos(kappa (x - center))) with
// kappa fixed by the geometry (2 pi n T^2 for sweep-rate scans, n for
// final-phase scans). The model is linear in (offset, offset C cos, offset C
// sin), so the normal equations are solved directly and the covariance is
// propagated through that reparametrisation.
FringeFit fit_fringe(const FringeScan& scan);

struct CandidateSet {
  std::vector<double> centers;  // one per fit, same order as the input
  double mean = 0;              // weighted mean alpha_0
  double spread = 0;            // max |center - mean|
  bool consistent = false;
};

struct GravityEstimate {
  double g = 0;
  double g_sigma = 0;
  double alpha0 = 0;
  double alpha0_sigma = 0;
  std::vector<std::vector<double>> candidates;  // per fit
  std::vector<CandidateSet> ranked;             // best first
};

class AmbiguityError : public NumericalError {
public:
  AmbiguityError(const std::string& what, std::vector<CandidateSet> sets)
      : NumericalError(what), sets_(std::move(sets)) {}
  const std::vector<CandidateSet>& sets() const noexcept { return sets_; }

private:
  std::vector<CandidateSet> sets_;
};

// Common-minimum g extraction across interrogation times.
GravityEstimate extract_g(const BraggConfig& cfg, const std::vector<FringeFit>& fits);

// Evenly spaced sweep rates centred on `center`, spanning `width`.
Eigen::ArrayXd sweep_grid(double center, double width, Eigen::Index points);

}  // namespace aigrav

#endif  // AIGRAV_FRINGE_HPP
