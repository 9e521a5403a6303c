#include "aigrav/stability.hpp"

#include <cmath>
#include <string>

#include "aigrav/error.hpp"

namespace aigrav {

void ShotSeries::validate() const {
  if (values.size() < 2) throw ValidationError("need at least two shots", "values");
  if (!(cycle_time > 0)) throw ValidationError("must be positive", "cycle_time");
  if (!values.allFinite()) throw ValidationError("non-finite value", "values");
}

Eigen::ArrayXd default_taus(const ShotSeries& s) {
  s.validate();
  std::vector<double> taus;
  const auto n = s.values.size();
  for (Eigen::Index m = 1; 8 * m <= n; m *= 2) taus.push_back(static_cast<double>(m) * s.cycle_time);
  if (taus.empty()) throw ValidationError("series too short for an Allan curve", "values");
  return Eigen::Map<Eigen::ArrayXd>(taus.data(), static_cast<Eigen::Index>(taus.size()));
}

AllanResult allan_deviation(const ShotSeries& s, const Eigen::ArrayXd& taus, bool overlapping) {
  s.validate();
  AllanResult out;
  out.overlapping = overlapping;
  out.taus = taus;
  out.adev.resize(taus.size());
  const Eigen::Index n = s.values.size();
  // Allan deviation ignores offsets. Gravity shots sit at ~9.8 with uGal
  // scatter, so work on departures from the mean when every subtraction is
  // exact (all values within a factor of two of it, same sign).
  const double c = s.values.mean();
  const Eigen::ArrayXd a = s.values.abs();
  const bool exact_shift = (s.values * c > 0).all() && (a >= 0.5 * std::abs(c)).all() && (a <= 2 * std::abs(c)).all();
  const Eigen::ArrayXd v = exact_shift ? Eigen::ArrayXd(s.values - c) : s.values;

  for (Eigen::Index t = 0; t < taus.size(); ++t) {
    const std::string field = "taus[" + std::to_string(t) + "]";
    if (t > 0 && !(taus[t] > taus[t - 1])) throw ValidationError("taus must increase", field);
    const double ratio = taus[t] / s.cycle_time;
    const double m_real = std::round(ratio);
    if (m_real < 1 || std::abs(ratio - m_real) > 1e-9 * ratio)
      throw ValidationError("tau is not an integer multiple of the cycle time", field);
    const auto m = static_cast<Eigen::Index>(m_real);
    const Eigen::Index clusters = n / m;
    if (clusters < 3) throw ValidationError("fewer than three clusters at this tau", field);

    if (!overlapping) {
      Eigen::ArrayXd means(clusters);
      for (Eigen::Index c = 0; c < clusters; ++c) {
        double sum = 0;
        for (Eigen::Index i = 0; i < m; ++i) sum += v[c * m + i];
        means[c] = sum / static_cast<double>(m);
      }
      double acc = 0;
      for (Eigen::Index i = 0; i + 1 < clusters; ++i) {
        const double d = means[i + 1] - means[i];
        acc += d * d;
      }
      out.adev[t] = std::sqrt(acc / (2.0 * static_cast<double>(clusters - 1)));
      out.counts.push_back(clusters);
    } else {
      // Running means of length m, differenced m apart.
      const Eigen::Index running = n - m + 1;
      Eigen::ArrayXd means(running);
      double window = v.head(m).sum();
      means[0] = window / static_cast<double>(m);
      for (Eigen::Index j = 1; j < running; ++j) {
        window += v[j + m - 1] - v[j - 1];
        means[j] = window / static_cast<double>(m);
      }
      const Eigen::Index terms = n - 2 * m + 1;
      double acc = 0;
      for (Eigen::Index j = 0; j < terms; ++j) {
        const double d = means[j + m] - means[j];
        acc += d * d;
      }
      out.adev[t] = std::sqrt(acc / (2.0 * static_cast<double>(terms)));
      out.counts.push_back(running);
    }
  }
  return out;
}

SensitivityReport sensitivity_at_tau(const AllanResult& r, double tau_ref) {
  const Eigen::Index n = r.taus.size();
  if (n < 3) throw ValidationError("need at least three tau points", "taus");
  if (!(tau_ref > 0)) throw ValidationError("must be positive", "tau_ref");
  if ((r.adev <= 0).any()) throw NumericalError("Allan deviation has non-positive points; cannot fit in log space");

  const Eigen::ArrayXd x = r.taus.log();
  const Eigen::ArrayXd y = r.adev.log();
  Eigen::ArrayXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = static_cast<double>(std::max<Eigen::Index>(r.counts[i] - 1, 1));
  const double wsum = w.sum();

  SensitivityReport rep;
  // Fixed slope -1/2: log A is the weighted mean of log(adev) + log(tau)/2.
  rep.at_one_second = std::exp((w * (y + 0.5 * x)).sum() / wsum);

  const double xm = (w * x).sum() / wsum;
  const double ym = (w * y).sum() / wsum;
  const double sxx = (w * (x - xm).square()).sum();
  rep.slope = sxx > 0 ? (w * (x - xm) * (y - ym)).sum() / sxx : -0.5;
  rep.slope_warning = std::abs(rep.slope + 0.5) > 0.15;

  rep.tau_ref = tau_ref;
  rep.predicted = rep.at_one_second / std::sqrt(tau_ref);
  Eigen::Index nearest = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(std::log(r.taus[i] / tau_ref)) < std::abs(std::log(r.taus[nearest] / tau_ref))) nearest = i;
  rep.raw_nearest = r.adev[nearest];
  rep.raw_nearest_tau = r.taus[nearest];
  rep.extrapolated = std::abs(r.taus[nearest] - tau_ref) > 1e-9 * tau_ref;
  return rep;
}

double qpn_limit(double contrast, double atoms, double g, double k_eff, double interrogation) {
  if (!(contrast > 0 && contrast <= 1)) throw ValidationError("must lie in (0, 1]", "contrast");
  if (!(atoms > 0)) throw ValidationError("must be positive", "atoms");
  if (!(g > 0)) throw ValidationError("must be positive", "g");
  if (!(k_eff > 0)) throw ValidationError("must be positive", "k_eff");
  if (!(interrogation > 0)) throw ValidationError("must be positive", "t");
  return 1.0 / (contrast * std::sqrt(atoms) * g * k_eff * interrogation * interrogation);
}

}  // namespace aigrav
