#include "aigrav/sensitivity.hpp"

#include <cmath>

namespace aigrav {

CharacteristicFrequencies characteristic_frequencies(const PulseSequence& seq, double band) {
  seq.validate();
  if (!(band > 0)) throw ValidationError("band must be positive", "band");
  CharacteristicFrequencies out;
  for (long n = 1;; ++n) {
    const double f = static_cast<double>(n) / seq.half_span();
    if (f > band) break;
    out.zeros.push_back(f);
  }
  out.cutoff = std::sqrt(3.0) * seq.rabi / (6.0 * std::numbers::pi);
  return out;
}

TransferGrid make_transfer_grid(const PulseSequence& seq, const Eigen::ArrayXd& frequencies) {
  seq.validate();
  for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > 0)) throw ValidationError("frequencies must be positive", "frequencies");
    if (i > 0 && !(frequencies[i] > frequencies[i - 1]))
      throw ValidationError("frequencies must be strictly increasing", "frequencies");
  }
  TransferGrid grid;
  grid.sequence = seq;
  grid.frequencies = frequencies;
  grid.weights = frequencies.unaryExpr([&seq](double f) { return weighting(seq, f); });
  return grid;
}

Eigen::ArrayXd log_spaced(double f_lo, double f_hi, Eigen::Index count) {
  if (!(f_lo > 0 && f_hi > f_lo) || count < 2)
    throw ValidationError("need 0 < f_lo < f_hi and count >= 2", "frequencies");
  return Eigen::ArrayXd::LinSpaced(count, std::log(f_lo), std::log(f_hi)).exp();
}

}  // namespace aigrav
