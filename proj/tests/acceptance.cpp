// End-to-end checks of the headline numbers. One PASS/FAIL line each;
// exit status is non-zero if any fails.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "aigrav/cli.hpp"
#include "aigrav/fringe.hpp"
#include "aigrav/noise.hpp"
#include "aigrav/physics.hpp"
#include "aigrav/random.hpp"
#include "aigrav/sensitivity.hpp"
#include "aigrav/spectral.hpp"
#include "aigrav/stability.hpp"

using namespace aigrav;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "aigrav");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("aigrav-acceptance-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// ---------------------------------------------------------------------------

Outcome transfer_zeros_and_cutoff() {
  Outcome o;
  const PulseSequence seq;  // T = 10 ms, tau_R = 50 us, Rabi 5 kHz
  const auto cf = characteristic_frequencies(seq, 5e4);
  double worst = 0;
  for (std::size_t n = 0; n < cf.zeros.size(); ++n) {
    const double expected = static_cast<double>(n + 1) * 99.00990099009901;
    worst = std::max(worst, std::abs(cf.zeros[n] - expected) / expected);
  }
  o.require(!cf.zeros.empty() && worst < 1e-9, "zero positions");

  const TransferGrid dense = make_transfer_grid(seq, Eigen::ArrayXd::LinSpaced(200000, 1.0, 5e4));
  const double peak = dense.weights.maxCoeff();
  double worst_zero = 0;
  for (double z : cf.zeros) worst_zero = std::max(worst_zero, weighting(seq, z) / peak);
  o.require(worst_zero < 1e-8, "weighting at zeros");
  o.require(std::abs(cf.cutoff - 2886.8) <= 0.1, "cutoff");

  // same numbers through the command
  const fs::path dir = scratch("transfer");
  const CliResult r = cli_run({"transfer", "--scenario", "fig2-transfer", "--out", dir.string(), "--quiet"});
  o.require(r.code == 0, "transfer command");
  if (r.code == 0) {
    const json j = json::parse(slurp(dir / "transfer-fig2-transfer.json"));
    o.require(std::abs(j["cutoff_hz"].get<double>() - 2886.8) <= 0.1, "reported cutoff");
    o.require(std::abs(j["zeros_hz"][0].get<double>() - 99.00990099009901) < 1e-9 * 99.0099, "reported first zero");
  }
  o.note(std::to_string(cf.zeros.size()) + " zeros, worst rel " + num(worst, 2) + ", max |H|^2 at zeros / peak " +
         num(worst_zero, 2) + ", cutoff " + num(cf.cutoff, 7) + " Hz");
  return o;
}

// g(t) written out directly; the reference transform never calls transfer_G.
double reference_g(const PulseSequence& seq, double t) {
  const double w = seq.rabi, tau = seq.beamsplitter_duration, T = seq.interrogation;
  if (t < tau) return std::sin(w * t);
  if (t < T + tau) return 1.0;
  if (t < T + 2 * tau) return -std::sin(w * (T - t));
  return 0.0;
}

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
          [&](double t) { return reference_g(seq, t) * std::sin(omega * t); }, a, c, 0, 1e-15);
    }
  }
  return {0.0, -2.0 * total};
}

Outcome transfer_against_quadrature() {
  Outcome o;
  const PulseSequence seq;
  const Eigen::ArrayXd f = log_spaced(1.0, 5e4, 500);
  std::vector<std::complex<double>> analytic(500), numeric(500);
  double peak = 0;
  for (int i = 0; i < 500; ++i) {
    analytic[i] = transfer_G(seq, 2 * kPi * f[i]);
    numeric[i] = quadrature_G(seq, 2 * kPi * f[i]);
    peak = std::max(peak, std::abs(numeric[i]));
  }
  const auto zeros = characteristic_frequencies(seq, 6e4).zeros;
  double worst_rel = 0, worst_abs = 0;
  int near_zero = 0;
  for (int i = 0; i < 500; ++i) {
    const double lo = f[std::max(i - 1, 0)], hi = f[std::min(i + 1, 499)];
    bool near = false;
    for (double z : zeros) near = near || (z >= lo && z <= hi);
    const double err = std::abs(analytic[i] - numeric[i]);
    if (near) {
      ++near_zero;
      worst_abs = std::max(worst_abs, err / peak);
    } else {
      worst_rel = std::max(worst_rel, err / std::abs(numeric[i]));
    }
  }
  o.require(worst_rel < 1e-6, "relative error");
  o.require(worst_abs < 1e-9, "absolute error near zeros");
  o.note("500 points, max rel " + num(worst_rel, 2) + ", " + std::to_string(near_zero) +
         " points within a bin of a zero, max abs/peak " + num(worst_abs, 2));
  return o;
}

Outcome tone_round_trip() {
  Outcome o;
  BeatConfig beat;
  beat.carrier = 15e3;
  beat.fs = 1e6;
  beat.duration = 2.0;
  NoiseSpec noise;
  noise.tones.push_back({800.0, 0.010});
  noise.seed = 11;
  const PulseSequence seq;
  const TimeSeries s = synth_beat(beat, noise);
  const Demodulated d = demodulate(s, beat.carrier);
  o.require(!d.phase_undefined, "demodulation");
  const PsdEstimate psd = estimate_psd(d.phase, 1.5, PsdUnit::RadSquaredPerHz);
  const double sigma = integrated_phase_noise(psd, seq, 0.0, 3000.0);
  const double expected = 0.010 * std::sqrt(weighting(seq, 800.0));
  const double rel = sigma / expected - 1;
  o.require(std::abs(rel) < 0.05, "sigma_phi within 5%");
  o.note("sigma_phi " + num(sigma * 1e3, 5) + " mrad vs 0.010 |H(2 pi 800)| = " + num(expected * 1e3, 5) +
         " mrad (" + num(100 * rel, 2) + "%)");
  return o;
}

Outcome bundled_noise_scenarios() {
  Outcome o;
  const fs::path dir = scratch("noise");
  const CliResult single = cli_run({"demo", "--scenario", "single-aom", "--out", dir.string(), "--no-svg"});
  const CliResult dual = cli_run({"demo", "--scenario", "dual-aom", "--out", dir.string(), "--no-svg"});
  o.require(single.code == 0 && dual.code == 0, "demo runs");
  if (!o.pass) return o;
  const double s = json::parse(slurp(dir / "demo-single-aom.json"))["sigma_phi_mrad"].get<double>();
  const json dj = json::parse(slurp(dir / "demo-dual-aom.json"));
  const double d = dj["sigma_phi_mrad"].get<double>();
  const double ratio = dj["ratio"].get<double>();
  o.require(std::abs(s - 10) <= 0.5, "single-aom 10 +/- 0.5 mrad");
  o.require(std::abs(d - 47) <= 2.5, "dual-aom 47 +/- 2.5 mrad");
  o.require(std::abs(ratio - 4.7) <= 0.1, "ratio 4.7 +/- 0.1");
  // the printed ratio, as a user sees it
  const auto at = dual.out.find("ratio ");
  o.require(at != std::string::npos && std::abs(std::stod(dual.out.substr(at + 6)) - 4.7) <= 0.1, "printed ratio");
  o.note("single-aom " + num(s, 4) + " mrad, dual-aom " + num(d, 4) + " mrad, ratio " + num(ratio, 4));
  return o;
}

Outcome gravity_from_fringes() {
  Outcome o;
  const BraggConfig cfg;
  const double g_true = 9.7833;
  const double times[] = {3.4e-3, 7e-3, 10e-3};
  const Eigen::ArrayXd grid = sweep_grid(25.078e6, 120e3, 40);
  auto fits_for = [&](const ScanOptions& base, std::uint64_t seed) {
    std::vector<FringeFit> fits;
    for (int i = 0; i < 3; ++i) {
      PulseSequence seq;
      seq.interrogation = times[i];
      ScanOptions opt = base;
      opt.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
      fits.push_back(fit_fringe(simulate_scan(cfg, seq, g_true, grid, opt)));
    }
    return fits;
  };

  ScanOptions exact;
  exact.atoms = 0;
  const GravityEstimate clean = extract_g(cfg, fits_for(exact, 0));
  const double clean_rel = std::abs(clean.g - g_true) / g_true;
  o.require(clean_rel < 1e-9, "noiseless recovery");

  ScanOptions qpn;
  qpn.atoms = 50000;
  qpn.contrast = 0.5;
  qpn.shots_per_point = 5;
  int covered = 0, ambiguous = 0;
  double mean_sigma = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    try {
      const GravityEstimate est = extract_g(cfg, fits_for(qpn, 1000 + run));
      if (std::abs(est.g - g_true) <= 3 * est.g_sigma) ++covered;
      mean_sigma += est.g_sigma / 100;
    } catch (const NumericalError&) {
      ++ambiguous;
    }
  }
  o.require(covered >= 95, ">= 95 of 100 within 3 sigma");
  o.note("noiseless rel error " + num(clean_rel, 2) + "; QPN: " + std::to_string(covered) +
         "/100 within 3 sigma, " + std::to_string(ambiguous) + " unresolved, mean sigma_g/g " +
         num(mean_sigma / g_true, 3));
  return o;
}

Outcome qpn_limit_value() {
  Outcome o;
  const double k_eff = 2 * 2 * kPi / 780.24e-9;
  const double v = qpn_limit(0.5, 5e4, 9.78, k_eff, 10e-3);
  o.require(std::abs(v / 56.7e-8 - 1) < 0.01, "56.7e-8 within 1%");
  const fs::path dir = scratch("limit");
  const CliResult r = cli_run({"limit", "--out", dir.string()});
  o.require(r.code == 0 && r.out.find("56.78e-8") != std::string::npos, "printed value");
  o.note("(dg/g) = " + num(v, 6));
  return o;
}

// Definition in long double. Offsets are removed first (exactly, in long
// double) so the reference is not limited by cancellation at ~9.78.
long double brute_adev(const Eigen::ArrayXd& v, Eigen::Index m) {
  const Eigen::Index clusters = v.size() / m;
  std::vector<long double> y;
  for (Eigen::Index c = 0; c < clusters; ++c) {
    long double sum = 0;
    for (Eigen::Index i = c * m; i < (c + 1) * m; ++i) sum += static_cast<long double>(v[i]) - v[0];
    y.push_back(sum / m);
  }
  long double acc = 0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) acc += (y[i + 1] - y[i]) * (y[i + 1] - y[i]);
  return std::sqrt(acc / (2.0L * static_cast<long double>(y.size() - 1)));
}

Outcome allan_suite() {
  Outcome o;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 59; ++seed) {
    Rng rng(seed);
    ShotSeries s;
    s.cycle_time = 1.0;
    s.values.resize(static_cast<Eigen::Index>(6 + seed));  // 6 .. 64
    for (auto& v : s.values) v = 9.78 + 1e-5 * rng.normal();
    std::vector<double> t;
    for (Eigen::Index m = 1; s.values.size() / m >= 3; ++m) t.push_back(static_cast<double>(m));
    const AllanResult r =
        allan_deviation(s, Eigen::Map<Eigen::ArrayXd>(t.data(), static_cast<Eigen::Index>(t.size())));
    for (Eigen::Index k = 0; k < r.taus.size(); ++k) {
      const auto ref = static_cast<double>(brute_adev(s.values, k + 1));
      worst = std::max(worst, std::abs(r.adev[k] - ref) / ref);
    }
  }
  o.require(worst <= 1e-15, "brute-force equivalence");

  double slope = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(77, seed));
    ShotSeries s;
    s.cycle_time = 1.0;
    s.values.resize(2048);
    for (auto& v : s.values) v = rng.normal();
    slope += sensitivity_at_tau(allan_deviation(s, default_taus(s)), 1.0).slope / 50;
  }
  o.require(std::abs(slope + 0.5) <= 0.05, "white-noise slope");

  const fs::path dir = scratch("allan");
  const CliResult r = cli_run({"demo", "--scenario", "allan-white", "--out", dir.string(), "--no-svg"});
  o.require(r.code == 0, "allan-white demo");
  if (r.code == 0) {
    const json j = json::parse(slurp(dir / "demo-allan-white.json"));
    const double a1 = j["at_one_second"]["ugal"].get<double>();
    const double p = j["predicted_at_tau_ref"]["ugal"].get<double>();
    o.require(std::abs(a1 / 1360 - 1) <= 0.05, "1360 uGal/sqrt(Hz) at 1 s within 5%");
    o.require(p <= 110, "<= 110 uGal at 200 s");
    o.require(j["extrapolated"].get<bool>() && r.out.find("extrapolation") != std::string::npos,
              "flagged as extrapolation");
    o.note("at 1 s " + num(a1, 5) + " uGal/sqrt(Hz), at 200 s " + num(p, 4) + " uGal (extrapolated)");
  }
  o.note("brute-force worst rel " + num(worst, 2) + ", mean white slope " + num(slope, 4));
  return o;
}

Outcome determinism() {
  Outcome o;
  std::size_t compared = 0;
  const std::vector<std::vector<std::string>> runs = {
      {"demo", "--scenario", "single-aom"},       {"demo", "--scenario", "dual-aom-single-fiber"},
      {"demo", "--scenario", "fringe-T10ms"},     {"demo", "--scenario", "allan-white"},
      {"demo", "--scenario", "fig2-transfer"},    {"synth", "--scenario", "dual-aom", "--format", "csv"},
      {"fringe", "--scenario", "fringe-T10ms", "--seed", "99"}};
  for (const auto& args : runs) {
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path dir = scratch("det-" + std::to_string(pass));
      std::vector<std::string> a = args;
      a.insert(a.end(), {"--out", dir.string(), "--quiet", "--no-svg"});
      if (cli_run(a).code != 0) {
        o.require(false, args[0] + " " + args[2]);
        break;
      }
      for (const auto& e : fs::directory_iterator(dir)) {
        const std::string ext = e.path().extension().string();
        if (ext != ".csv" && ext != ".json") continue;
        const std::string name = e.path().filename().string();
        if (pass == 0) {
          first[name] = slurp(e.path());
        } else {
          o.require(first.count(name) && first[name] == slurp(e.path()), name + " identical");
          ++compared;
        }
      }
    }
  }
  o.require(compared >= 14, "enough files compared");
  o.note(std::to_string(compared) + " CSV/JSON files byte-identical across two runs");
  return o;
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
      {"weighting zeros and cutoff", 1, transfer_zeros_and_cutoff},
      {"closed-form transfer vs quadrature", 10, transfer_against_quadrature},
      {"800 Hz tone round trip", 30, tone_round_trip},
      {"single vs dual AOM phase noise", 60, bundled_noise_scenarios},
      {"g from three interrogation times", 120, gravity_from_fringes},
      {"quantum projection limit", 1, qpn_limit_value},
      {"Allan deviation suite", 60, allan_suite},
      {"same seed, same bytes", 600, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > checks[i].budget_s) o.require(false, "runtime " + num(secs, 3) + " s over " + num(checks[i].budget_s) + " s");
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << checks[i].name << " (" << num(secs, 3)
              << " s): " << o.detail << std::endl;
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << checks.size() - failures << "/" << checks.size() << std::endl;
  return failures ? 1 : 0;
}
