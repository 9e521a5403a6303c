#include "aigrav/fringe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "aigrav/random.hpp"

namespace aigrav {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double angular_rate(ScanMode mode, int order, double interrogation) {
  if (mode == ScanMode::SweepRate) return kTwoPi * order * interrogation * interrogation;
  return static_cast<double>(order);
}

bool strictly_monotone(const Eigen::ArrayXd& x) {
  if (x.size() < 2) return true;
  const bool up = x[1] > x[0];
  for (Eigen::Index i = 1; i < x.size(); ++i)
    if (up ? !(x[i] > x[i - 1]) : !(x[i] < x[i - 1])) return false;
  return true;
}

}  // namespace

void FringeScan::validate() const {
  sequence.validate();
  if (order < 1) throw ValidationError("Bragg order must be >= 1", "fringe.order");
  if (abscissa.size() < 2) throw ValidationError("need at least two scan points", "fringe.alphas");
  if (populations.size() != abscissa.size())
    throw ValidationError("populations and abscissa differ in length", "fringe.populations");
  if (!strictly_monotone(abscissa)) throw ValidationError("must be strictly monotone", "fringe.alphas");
  if ((populations < 0).any() || (populations > 1).any())
    throw ValidationError("populations must lie in [0, 1]", "fringe.populations");
}

Eigen::ArrayXd sweep_grid(double center, double width, Eigen::Index points) {
  if (points < 2) throw ValidationError("need at least two points", "fringe.points");
  if (!(width > 0)) throw ValidationError("must be positive", "fringe.width");
  return Eigen::ArrayXd::LinSpaced(points, center - width / 2, center + width / 2);
}

FringeScan simulate_scan(const BraggConfig& cfg, const PulseSequence& seq, double g_true,
                         const Eigen::ArrayXd& abscissa, const ScanOptions& options) {
  cfg.validate();
  seq.validate();
  if (!(options.contrast >= 0 && options.contrast <= 1))
    throw ValidationError("must lie in [0, 1]", "fringe.contrast");
  if (options.atoms < 0) throw ValidationError("must be >= 0", "fringe.atoms");
  if (options.shots_per_point < 1) throw ValidationError("must be >= 1", "fringe.shots");
  if (!(options.detection_noise >= 0)) throw ValidationError("must be >= 0", "fringe.detection_noise");
  if (!(options.phase_noise_rms >= 0)) throw ValidationError("must be >= 0", "fringe.phase_noise_rms");
  if (!strictly_monotone(abscissa) || abscissa.size() < 2)
    throw ValidationError("must be strictly monotone with >= 2 points", "fringe.alphas");

  FringeScan scan;
  scan.sequence = seq;
  scan.order = cfg.order;
  scan.mode = options.mode;
  scan.abscissa = abscissa;
  scan.populations.resize(abscissa.size());
  scan.stderr_.resize(abscissa.size());
  scan.shots_per_point = options.shots_per_point;
  scan.atoms = options.atoms;
  scan.seed = options.seed;

  const int shots = options.shots_per_point;
  const bool stochastic = options.atoms > 0 || options.detection_noise > 0 || options.phase_noise_rms > 0;
  for (Eigen::Index i = 0; i < abscissa.size(); ++i) {
    const double phase = options.mode == ScanMode::SweepRate
                             ? mz_phase(cfg, seq, g_true, abscissa[i])
                             : mz_phase(cfg, seq, g_true, options.fixed_alpha) + cfg.order * abscissa[i];
    double sum = 0;
    double sum_sq = 0;
    for (int s = 0; s < shots; ++s) {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(i) * 1'000'003ULL + static_cast<std::uint64_t>(s)));
      const double kick = options.phase_noise_rms > 0 ? options.phase_noise_rms * rng.normal() : 0.0;
      const double p = 0.5 * (1 + options.contrast * std::cos(phase + kick));
      double fraction = p;
      if (options.atoms > 0) {
        std::binomial_distribution<long> detect(options.atoms, std::clamp(p, 0.0, 1.0));
        fraction = static_cast<double>(detect(rng.engine())) / static_cast<double>(options.atoms);
      }
      if (options.detection_noise > 0) fraction += options.detection_noise * rng.normal();
      fraction = std::clamp(fraction, 0.0, 1.0);
      sum += fraction;
      sum_sq += fraction * fraction;
    }
    const double mean = sum / shots;
    scan.populations[i] = mean;
    if (!stochastic) {
      scan.stderr_[i] = 0;
    } else if (shots > 1) {
      const double var = std::max(0.0, (sum_sq - shots * mean * mean) / (shots - 1));
      scan.stderr_[i] = std::sqrt(var / shots);
    } else {
      scan.stderr_[i] = options.atoms > 0
                            ? std::sqrt(mean * (1 - mean) / static_cast<double>(options.atoms))
                            : options.detection_noise;
    }
  }
  return scan;
}

double FringeFit::center_sigma() const { return std::sqrt(std::max(covariance(2, 2), 0.0)); }

std::vector<double> FringeFit::candidates() const {
  std::vector<double> out;
  const double slack = 1e-12 * std::max(std::abs(window_lo), std::abs(window_hi));
  const auto m_lo = static_cast<long long>(std::ceil((window_lo - slack - center) / period));
  const auto m_hi = static_cast<long long>(std::floor((window_hi + slack - center) / period));
  for (long long m = m_lo; m <= m_hi; ++m) out.push_back(center + static_cast<double>(m) * period);
  return out;
}

FringeFit fit_fringe(const FringeScan& scan) {
  scan.validate();
  const Eigen::Index n = scan.abscissa.size();
  const double kappa = angular_rate(scan.mode, scan.order, scan.sequence.interrogation);
  const double period = kTwoPi / kappa;
  const double lo = scan.abscissa.minCoeff();
  const double hi = scan.abscissa.maxCoeff();
  if (n < 4) throw ValidationError("need at least four points to fit a fringe", "fringe.alphas");
  if (hi - lo < period && n < 8)
    throw ValidationError("scan must span one fringe period or carry >= 8 points", "fringe.alphas");

  // Evaluating the phase relative to the window centre keeps kappa * x small.
  const double ref = 0.5 * (lo + hi);
  Eigen::MatrixXd design(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = kappa * (scan.abscissa[i] - ref);
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(u);
    design(i, 2) = std::sin(u);
  }
  const Eigen::VectorXd y = scan.populations.matrix();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw NumericalError("scan points do not resolve the fringe (rank-deficient design)");
  const Eigen::Vector3d beta = qr.solve(y);
  const Eigen::VectorXd residual = y - design * beta;
  const double rss = residual.squaredNorm();
  const double sigma2 = n > 3 ? rss / static_cast<double>(n - 3) : 0.0;
  const Eigen::Matrix3d normal_inv = (design.transpose() * design).inverse();
  const Eigen::Matrix3d cov_lin = sigma2 * normal_inv;

  const double a = beta[0];
  const double b = beta[1];
  const double d = beta[2];
  const double r = std::hypot(b, d);
  const double r_sigma = std::sqrt(std::max(0.0, 0.5 * (cov_lin(1, 1) + cov_lin(2, 2))));
  if (!(a > 0) || r <= std::max(1e-9 * std::abs(a), 3.0 * r_sigma))
    throw NumericalError("fringe fit does not converge: no resolvable fringe amplitude");

  FringeFit fit;
  fit.offset = a;
  fit.contrast = std::min(r / a, 1.0);
  fit.center = ref + std::atan2(d, b) / kappa;
  fit.period = period;
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
  fit.mode = scan.mode;
  fit.order = scan.order;
  fit.interrogation = scan.sequence.interrogation;
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.points = n;

  Eigen::Matrix3d jac;
  jac << 1, 0, 0,
         -r / (a * a), b / (a * r), d / (a * r),
         0, -d / (r * r * kappa), b / (r * r * kappa);
  fit.covariance.topLeftCorner<3, 3>() = jac * cov_lin * jac.transpose();
  return fit;
}

GravityEstimate extract_g(const BraggConfig& cfg, const std::vector<FringeFit>& fits) {
  cfg.validate();
  std::set<double> times;
  for (const FringeFit& f : fits) {
    if (f.mode != ScanMode::SweepRate)
      throw ValidationError("g extraction needs sweep-rate fits", "fits");
    times.insert(f.interrogation);
  }
  if (times.size() < 2)
    throw ValidationError("need fits at >= 2 distinct interrogation times", "fits");

  GravityEstimate est;
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    est.candidates.push_back(fits[i].candidates());
    if (est.candidates[i].empty())
      throw AmbiguityError("fit at T = " + std::to_string(fits[i].interrogation) +
                               " s has no fringe centre inside its scan window",
                           {});
    if (est.candidates[i].size() < est.candidates[anchor].size()) anchor = i;
  }

  std::vector<double> sigma(fits.size());
  bool weighted = true;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    sigma[i] = fits[i].center_sigma();
    weighted = weighted && sigma[i] > 0;
  }

  for (double seed : est.candidates[anchor]) {
    CandidateSet set;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const auto& c = est.candidates[i];
      set.centers.push_back(*std::min_element(c.begin(), c.end(), [seed](double x, double y) {
        return std::abs(x - seed) < std::abs(y - seed);
      }));
    }
    double wsum = 0;
    double acc = 0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
      wsum += w;
      acc += w * set.centers[i];
    }
    set.mean = acc / wsum;
    set.consistent = true;
    const double floor = 1e-9 * std::abs(set.mean);
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const double dev = std::abs(set.centers[i] - set.mean);
      set.spread = std::max(set.spread, dev);
      if (dev > 5.0 * sigma[i] + floor) set.consistent = false;
    }
    est.ranked.push_back(std::move(set));
  }
  std::stable_sort(est.ranked.begin(), est.ranked.end(),
                   [](const CandidateSet& x, const CandidateSet& y) {
                     if (x.consistent != y.consistent) return x.consistent;
                     return x.spread < y.spread;
                   });

  const auto consistent = std::count_if(est.ranked.begin(), est.ranked.end(),
                                        [](const CandidateSet& s) { return s.consistent; });
  if (consistent == 0)
    throw AmbiguityError("no fringe centre is common to all interrogation times", est.ranked);
  if (consistent > 1)
    throw AmbiguityError("ambiguous common minimum: " + std::to_string(consistent) +
                             " candidate sets agree across interrogation times",
                         est.ranked);

  const CandidateSet& best = est.ranked.front();
  est.alpha0 = best.mean;
  if (weighted) {
    double wsum = 0;
    for (double s : sigma) wsum += 1.0 / (s * s);
    est.alpha0_sigma = 1.0 / std::sqrt(wsum);
  }
  est.g = gravity_from_chirp(cfg, est.alpha0);
  est.g_sigma = std::numbers::pi * est.alpha0_sigma / vertical_wavenumber(cfg);
  return est;
}

}  // namespace aigrav
