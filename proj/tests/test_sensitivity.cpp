#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "aigrav/sensitivity.hpp"

using namespace aigrav;

namespace {

constexpr double kPi = std::numbers::pi;

// Positive half of the sensitivity function written out directly from the
// piecewise definition; the oracle below does not touch transfer_G.
double reference_g(const PulseSequence& seq, double t) {
  const double w = seq.rabi, tau = seq.beamsplitter_duration, T = seq.interrogation;
  if (t < tau) return std::sin(w * t);
  if (t < T + tau) return 1.0;
  if (t < T + 2 * tau) return -std::sin(w * (T - t));
  return 0.0;
}

// G(w) = -2i int_0^{T+2tau} g(t) sin(w t) dt for odd g, by Gauss-Kronrod on
// each smooth branch cut into pieces no longer than half an oscillation.
// Kronrod nodes are interior, so each piece only sees its own branch.
std::complex<double> quadrature_G(const PulseSequence& seq, double omega) {
  using boost::math::quadrature::gauss_kronrod;
  const double tau = seq.beamsplitter_duration, T = seq.interrogation;
  const double joins[] = {0.0, tau, T + tau, T + 2 * tau};
  const double max_piece = std::min(kPi / omega, tau / 4);
  double total = 0;
  for (int b = 0; b < 3; ++b) {
    const double lo = joins[b], hi = joins[b + 1];
    const int pieces = static_cast<int>(std::ceil((hi - lo) / max_piece));
    for (int p = 0; p < pieces; ++p) {
      const double a = lo + (hi - lo) * p / pieces;
      const double c = lo + (hi - lo) * (p + 1) / pieces;
      total += gauss_kronrod<double, 31>::integrate(
          [&](double t) { return reference_g(seq, t) * std::sin(omega * t); },
          a, c, 0, 1e-15);
    }
  }
  return {0.0, -2.0 * total};
}

}  // namespace

TEST_CASE("sensitivity function values") {
  const PulseSequence seq;
  const double tau = seq.beamsplitter_duration, T = seq.interrogation;
  CHECK(sensitivity_value(seq, tau + T / 2) == 1.0);
  CHECK(sensitivity_value(seq, 0.0) == 0.0);
  CHECK(std::abs(sensitivity_value(seq, T + 2 * tau)) < 1e-15);
  CHECK(sensitivity_value(seq, T + 2 * tau + 1e-6) == 0.0);
  CHECK(sensitivity_value(seq, -(T + 2 * tau) - 1e-6) == 0.0);
  CHECK(sensitivity_value(seq, -tau - T / 2) == -1.0);

  // Branch expressions at the joins.
  CHECK(std::abs(std::sin(seq.rabi * tau) - 1.0) < 1e-12);
  CHECK(std::abs(-std::sin(seq.rabi * (T - (T + tau))) - 1.0) < 1e-12);
  const double h = 1e-13;
  CHECK(std::abs(sensitivity_value(seq, tau - h) - sensitivity_value(seq, tau + h)) < 1e-12);
  CHECK(std::abs(sensitivity_value(seq, T + tau - h) - sensitivity_value(seq, T + tau + h)) < 1e-12);

  for (double t : {1e-5, 3e-5, 2e-3, 9.99e-3, 10.07e-3}) CHECK(sensitivity_value(seq, t) == reference_g(seq, t));
}

TEST_CASE("sensitivity function is odd") {
  const PulseSequence seq;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.011, 0.011);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    CHECK(sensitivity_value(seq, -t) == -sensitivity_value(seq, t));
  }
}

TEST_CASE("transfer function against numerical Fourier transform") {
  const PulseSequence seq;
  const Eigen::ArrayXd freqs = log_spaced(1.0, 5e4, 200);
  double peak = 0;
  for (double f : freqs) peak = std::max(peak, std::abs(transfer_G(seq, 2 * kPi * f)));
  for (double f : freqs) {
    const double omega = 2 * kPi * f;
    const auto analytic = transfer_G(seq, omega);
    const auto numeric = quadrature_G(seq, omega);
    CHECK(std::abs(analytic.real()) == 0.0);
    const double err = std::abs(analytic - numeric);
    CHECK_MESSAGE((err < 1e-6 * std::abs(numeric) || err < 1e-9 * peak), "f = " << f);
  }
}

TEST_CASE("transfer function limits") {
  const PulseSequence seq;
  CHECK(std::abs(transfer_G(seq, 0.0)) == 0.0);
  CHECK(std::abs(transfer_G(seq, 1e-9)) < 1e-12);
  // G(-w) = conj(G(w)) for real g.
  const auto gp = transfer_G(seq, 1234.5);
  const auto gm = transfer_G(seq, -1234.5);
  CHECK(gm.imag() == -gp.imag());

  const double w = seq.rabi;
  const auto below = transfer_G(seq, w * (1 - 1e-9));
  const auto at = transfer_G(seq, w);
  const auto above = transfer_G(seq, w * (1 + 1e-9));
  CHECK(std::isfinite(at.imag()));
  CHECK(std::abs(below - at) < 1e-6 * std::abs(at));
  CHECK(std::abs(above - at) < 1e-6 * std::abs(at));
  CHECK(std::abs(at - quadrature_G(seq, w)) < 1e-9 * std::abs(at));
  // Either side of the switch between closed form and factored form.
  for (double r : {1 - 1.0001e-3, 1 - 0.9999e-3, 1 + 0.9999e-3, 1 + 1.0001e-3}) {
    const auto g = transfer_G(seq, w * r);
    CHECK(std::abs(g - quadrature_G(seq, w * r)) < 1e-9 * std::abs(g));
  }
}

TEST_CASE("weighting zeros and cutoff") {
  const PulseSequence seq;
  const auto cf = characteristic_frequencies(seq, 5e4);
  CHECK(cf.cutoff == doctest::Approx(2886.7513459481288).epsilon(1e-12));
  REQUIRE(cf.zeros.size() == 505);
  CHECK(cf.zeros[0] == doctest::Approx(99.00990099009901).epsilon(1e-12));
  for (std::size_t n = 0; n < cf.zeros.size(); ++n)
    CHECK(cf.zeros[n] == doctest::Approx((n + 1) * 99.00990099009901).epsilon(1e-9));

  const Eigen::ArrayXd freqs = Eigen::ArrayXd::LinSpaced(50000, 1.0, 5e4);
  const TransferGrid grid = make_transfer_grid(seq, freqs);
  const double max_w = grid.weights.maxCoeff();
  CHECK((grid.weights >= 0).all());
  for (double z : cf.zeros) CHECK(weighting(seq, z) < 1e-8 * max_w);

  CHECK(characteristic_frequencies(seq, 50.0).zeros.empty());
  CHECK_THROWS_AS(characteristic_frequencies(seq, 0.0), ValidationError);
  CHECK_THROWS_AS(weighting(seq, -1.0), ValidationError);
}

TEST_CASE("high-frequency envelope") {
  const PulseSequence seq;
  const double span = seq.half_span();
  auto lobe = [&](double f) {
    // lobe between consecutive zeros at or above f
    const double n = std::ceil(f * span);
    double peak = 0, mean = 0;
    const int samples = 4000;
    for (int i = 0; i < samples; ++i) {
      const double x = (n + (i + 0.5) / samples) / span;
      const double w = weighting(seq, x);
      peak = std::max(peak, w);
      mean += w / samples;
    }
    return std::pair{peak, mean};
  };
  for (double f : {40e3, 80e3, 160e3}) {
    const auto [p1, m1] = lobe(f);
    const auto [p2, m2] = lobe(2 * f);
    CHECK(p2 / p1 == doctest::Approx(0.25).epsilon(0.1));
    const double trend = 2.0 / std::pow(2 * kPi * f / seq.rabi, 2);
    CHECK(m1 == doctest::Approx(trend).epsilon(0.1));
  }
}

TEST_CASE("transfer grid validation") {
  const PulseSequence seq;
  Eigen::ArrayXd bad(3);
  bad << 1.0, 3.0, 2.0;
  CHECK_THROWS_AS(make_transfer_grid(seq, bad), ValidationError);
  bad << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(make_transfer_grid(seq, bad), ValidationError);
  const Eigen::ArrayXd grid = log_spaced(1.0, 1e4, 5);
  CHECK(grid[0] == doctest::Approx(1.0));
  CHECK(grid[4] == doctest::Approx(1e4));
  CHECK(grid[2] == doctest::Approx(100.0));
}
