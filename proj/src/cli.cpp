#include "aigrav/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <set>

#include "aigrav/error.hpp"
#include "aigrav/fringe.hpp"
#include "aigrav/noise.hpp"
#include "aigrav/plot.hpp"
#include "aigrav/random.hpp"
#include "aigrav/sensitivity.hpp"
#include "aigrav/series_io.hpp"
#include "aigrav/spectral.hpp"
#include "aigrav/stability.hpp"

namespace aigrav::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr double kTwoPi = 2 * std::numbers::pi;

// Sub-streams of the scenario seed.
constexpr std::uint64_t kFringeStream = 100;
constexpr std::uint64_t kStabilityStream = 200;

struct Common {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string species;
  bool no_svg = false;
  bool quiet = false;
  bool no_timestamp = false;
};

struct Context {
  std::string command;
  Common common;
  std::optional<Scenario> scenario;
  fs::path out_dir;
  std::ostream* out = nullptr;

  std::string name(const std::vector<std::string>& inputs = {}) const {
    if (scenario) return scenario->name;
    if (!inputs.empty()) return fs::path(inputs.front()).stem().string();
    return "default";
  }
  fs::path artifact(const std::string& stem, const std::string& ext) const {
    return out_dir / (command + "-" + stem + ext);
  }
  std::uint64_t seed() const { return scenario ? scenario->seed : common.seed.value_or(0); }
  std::string title(const std::string& what, const std::string& stem) const {
    return what + ", " + stem + ", seed " + std::to_string(seed());
  }
  void summary(const std::string& line) const {
    if (!common.quiet) *out << line << '\n';
  }
  void plot(const std::string& stem, const std::string& suffix, PlotSpec spec,
            const std::vector<PlotSeries>& series) const {
    if (common.no_svg) return;
    if (!common.no_timestamp) spec.timestamp = "generated " + utc_now();
    write_svg(artifact(stem + suffix, ".svg").string(), spec, series);
  }

  static std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }
};

const Scenario& need_scenario(const Context& ctx, const char* block, bool present) {
  if (!ctx.scenario) throw ValidationError("this command needs --scenario", "scenario");
  if (!present)
    throw ValidationError("scenario '" + ctx.scenario->name + "' has no " + block + " block", block);
  return *ctx.scenario;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string(), "out");
  return f;
}

void write_json(const fs::path& p, const ojson& doc) { open_out(p) << doc.dump(2) << '\n'; }

void write_psd_csv(const fs::path& p, const PsdEstimate& psd) {
  auto f = open_out(p);
  const std::string unit = to_string(psd.unit);
  f << "f_hz,value,unit\n";
  for (Eigen::Index k = 0; k < psd.values.size(); ++k)
    f << format_number(psd.frequencies[k]) << ',' << format_number(psd.values[k]) << ',' << unit << '\n';
}

ojson psd_meta(const PsdEstimate& psd) {
  return {{"unit", to_string(psd.unit)},       {"rbw_hz", psd.rbw},
          {"bin_width_hz", psd.bin_width},     {"window", psd.window},
          {"segments", psd.segments},          {"segment_length", psd.segment_length}};
}

ojson sequence_json(const PulseSequence& seq) {
  return {{"rabi_hz", seq.rabi / kTwoPi},
          {"tau_r_s", seq.beamsplitter_duration},
          {"t_s", seq.interrogation},
          {"pi_half_warning", seq.pi_half_warning()}};
}

std::string ms_label(double t) { return general(t * 1e3, 6) + "ms"; }

PsdUnit parse_unit(const std::string& s) {
  for (PsdUnit u : {PsdUnit::RadSquaredPerHz, PsdUnit::SignalSquaredPerHz, PsdUnit::DbmPerRbw, PsdUnit::DbcPerHz})
    if (to_string(u) == s) return u;
  throw ValidationError("unknown PSD unit '" + s + "'", "unit");
}

PsdEstimate read_psd_csv(const std::string& path) {
  const CsvTable t = read_csv_table(path, {"unit"});
  PsdEstimate psd;
  const auto& f = t.column("f_hz");
  const auto& v = t.column("value");
  const auto& u = t.text_column("unit");
  if (f.size() < 2) throw ValidationError("PSD needs at least two rows", "input");
  psd.unit = parse_unit(u.front());
  for (const auto& x : u)
    if (x != u.front()) throw ValidationError("mixed units in one PSD file", "unit");
  psd.frequencies = Eigen::Map<const Eigen::ArrayXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  psd.values = Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  psd.bin_width = f[1] - f[0];
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs((f[i] - f[i - 1]) - psd.bin_width) > 1e-6 * psd.bin_width)
      throw ValidationError("PSD bins must be evenly spaced", "f_hz");
  return psd;
}

// --------------------------------------------------------------------------
// shared pipelines

Demodulated demod_for(const Scenario& sc, const TimeSeries& beat) {
  const double cutoff = sc.analysis ? sc.analysis->lp_cutoff : 0.0;
  Demodulated d = demodulate(beat, sc.beat->carrier, cutoff);
  if (d.phase_undefined)
    throw NumericalError("demodulated amplitude vanishes (contrast ~ 0); phase is undefined");
  return d;
}

FringeScan scan_for(const Scenario& sc, std::size_t index) {
  const FringeBlock& f = *sc.fringe;
  PulseSequence seq = sc.sequence;
  seq.interrogation = f.interrogation_times[index];
  return simulate_scan(sc.bragg, seq, f.g_true, f.grid(), f.options(derive_seed(sc.seed, kFringeStream + index)));
}

ShotSeries shots_for(const Scenario& sc) {
  const StabilityBlock& s = *sc.stability;
  const auto n = static_cast<Eigen::Index>(std::floor(s.duration / s.cycle_time + 1e-9));
  const double sigma = s.asd_1s * constants::microgal / std::sqrt(s.cycle_time);
  Rng rng(derive_seed(sc.seed, kStabilityStream));
  ShotSeries shots;
  shots.cycle_time = s.cycle_time;
  shots.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) shots.values[i] = s.g_true + sigma * rng.normal();
  return shots;
}

std::string fringe_column(ScanMode m) { return m == ScanMode::SweepRate ? "alpha_hz_per_s" : "phase_rad"; }
std::string mode_name(ScanMode m) { return m == ScanMode::SweepRate ? "sweep-rate" : "final-phase"; }

void write_fringe_csv(const fs::path& p, const FringeScan& scan, double g_true) {
  auto f = open_out(p);
  f << "# interrogation_s=" << format_number(scan.sequence.interrogation) << '\n'
    << "# order=" << scan.order << '\n'
    << "# mode=" << mode_name(scan.mode) << '\n'
    << "# atoms=" << scan.atoms << '\n'
    << "# shots=" << scan.shots_per_point << '\n'
    << "# seed=" << scan.seed << '\n'
    << "# g_true=" << format_number(g_true) << '\n';
  f << fringe_column(scan.mode) << ",population,stderr\n";
  for (Eigen::Index i = 0; i < scan.abscissa.size(); ++i)
    f << format_number(scan.abscissa[i]) << ',' << format_number(scan.populations[i]) << ','
      << format_number(scan.stderr_[i]) << '\n';
}

struct FitOverrides {
  std::optional<double> t;
  std::optional<int> order;
};

FringeScan read_fringe_csv(const std::string& path, const FitOverrides& o, const PulseSequence& base) {
  const CsvTable table = read_csv_table(path);
  FringeScan scan;
  scan.sequence = base;
  scan.mode = ScanMode::SweepRate;
  if (auto m = table.meta("mode")) {
    if (*m == "final-phase")
      scan.mode = ScanMode::FinalPhase;
    else if (*m != "sweep-rate")
      throw ValidationError("unknown scan mode '" + *m + "'", path + ":mode");
  }
  auto meta_number = [&](const char* key) -> std::optional<double> {
    const auto v = table.meta(key);
    if (!v) return std::nullopt;
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ValidationError("not a number", path + ":" + key);
    }
  };
  if (o.t)
    scan.sequence.interrogation = *o.t;
  else if (auto t = meta_number("interrogation_s"))
    scan.sequence.interrogation = *t;
  else
    throw ValidationError("interrogation time unknown; pass --t", "t");
  if (o.order)
    scan.order = *o.order;
  else if (auto n = meta_number("order"))
    scan.order = static_cast<int>(*n);
  const auto& x = table.column(fringe_column(scan.mode));
  const auto& p = table.column("population");
  const auto& e = table.column("stderr");
  scan.abscissa = Eigen::Map<const Eigen::ArrayXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  scan.populations = Eigen::Map<const Eigen::ArrayXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  scan.stderr_ = Eigen::Map<const Eigen::ArrayXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  return scan;
}

ojson fit_json(const FringeFit& fit) {
  ojson cov = ojson::array();
  for (int i = 0; i < 4; ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < 4; ++j) row.push_back(fit.covariance(i, j));
    cov.push_back(row);
  }
  return {{"interrogation_s", fit.interrogation},
          {"order", fit.order},
          {"mode", mode_name(fit.mode)},
          {"offset", fit.offset},
          {"contrast", fit.contrast},
          {"center", fit.center},
          {"center_sigma", fit.center_sigma()},
          {"period", fit.period},
          {"residual_rms", fit.residual_rms},
          {"points", fit.points},
          {"window", {fit.window_lo, fit.window_hi}},
          {"covariance_order", {"offset", "contrast", "center", "period"}},
          {"covariance", cov},
          {"candidates", fit.candidates()}};
}

PlotSeries fit_curve(const FringeFit& fit, const std::string& label) {
  const double kappa = kTwoPi / fit.period;
  PlotSeries s;
  s.label = label;
  s.x = Eigen::ArrayXd::LinSpaced(800, fit.window_lo, fit.window_hi);
  s.y = fit.offset * (1 + fit.contrast * (kappa * (s.x - fit.center)).cos());
  return s;
}

ojson estimate_json(const GravityEstimate& est) {
  ojson sets = ojson::array();
  for (const auto& s : est.ranked)
    sets.push_back({{"mean", s.mean}, {"spread", s.spread}, {"consistent", s.consistent}, {"centers", s.centers}});
  return {{"candidates", est.candidates}, {"ranked_sets", sets}};
}

ojson sets_json(const std::vector<CandidateSet>& ranked) {
  ojson sets = ojson::array();
  for (const auto& s : ranked)
    sets.push_back({{"mean", s.mean}, {"spread", s.spread}, {"consistent", s.consistent}, {"centers", s.centers}});
  return sets;
}

// Fits, g extraction, report and plot shared by `extract-g` and `demo`.
int extract_and_report(const Context& ctx, const std::string& stem, const BraggConfig& cfg,
                       const std::vector<FringeFit>& fits, const std::vector<std::string>& sources,
                       std::optional<double> g_true) {
  ojson report;
  report["name"] = stem;
  report["seed"] = ctx.seed();
  ojson fits_json = ojson::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    ojson j = fit_json(fits[i]);
    j["source"] = sources[i];
    fits_json.push_back(j);
  }
  report["fits"] = fits_json;

  std::vector<PlotSeries> curves;
  for (const auto& f : fits) curves.push_back(fit_curve(f, "T = " + ms_label(f.interrogation)));
  PlotSpec spec;
  spec.title = ctx.title("common fringe centre", stem);
  spec.x_label = fits.front().mode == ScanMode::SweepRate ? "sweep rate alpha (Hz/s)" : "final phase (rad)";
  spec.y_label = "population fraction";

  try {
    const GravityEstimate est = extract_g(cfg, fits);
    report["status"] = "ok";
    report["g"] = est.g;
    report["g_sigma"] = est.g_sigma;
    report["alpha0_hz_per_s"] = est.alpha0;
    report["alpha0_sigma"] = est.alpha0_sigma;
    if (g_true) {
      report["g_true"] = *g_true;
      report["relative_error"] = (est.g - *g_true) / *g_true;
    }
    report.update(estimate_json(est));
    write_json(ctx.artifact(stem, ".json"), report);
    spec.x_markers = {est.alpha0};
    ctx.plot(stem, "", spec, curves);
    std::string line = ctx.command + " " + stem + ": g = " + fixed(est.g, 9) + " +/- " + general(est.g_sigma, 3) +
                       " m/s^2 from " + std::to_string(fits.size()) + " scans (alpha0 = " + fixed(est.alpha0, 3) +
                       " Hz/s)";
    if (g_true) line += ", relative error " + general((est.g - *g_true) / *g_true, 3);
    ctx.summary(line);
    return kExitOk;
  } catch (const AmbiguityError& e) {
    report["status"] = "ambiguous";
    report["message"] = e.what();
    report["ranked_sets"] = sets_json(e.sets());
    write_json(ctx.artifact(stem, ".json"), report);
    ctx.plot(stem, "", spec, curves);
    throw;
  }
}

// --------------------------------------------------------------------------
// commands

struct SeqOverrides {
  std::optional<double> t, tau_r, rabi_hz;
  void apply(PulseSequence& seq) const {
    if (t) seq.interrogation = *t;
    if (tau_r) seq.beamsplitter_duration = *tau_r;
    if (rabi_hz) seq.rabi = kTwoPi * *rabi_hz;
    seq.validate();
  }
};

int cmd_transfer(const Context& ctx, const SeqOverrides& ov) {
  PulseSequence seq = ctx.scenario ? ctx.scenario->sequence : PulseSequence{};
  ov.apply(seq);
  const TransferBlock tb = ctx.scenario && ctx.scenario->transfer ? *ctx.scenario->transfer : TransferBlock{};
  const TransferGrid grid = make_transfer_grid(seq, log_spaced(tb.f_min, tb.f_max, tb.points));
  const CharacteristicFrequencies cf = characteristic_frequencies(seq, tb.f_max);
  const std::string stem = ctx.name();

  auto csv = open_out(ctx.artifact(stem, ".csv"));
  csv << "f_hz,weight\n";
  for (Eigen::Index i = 0; i < grid.frequencies.size(); ++i)
    csv << format_number(grid.frequencies[i]) << ',' << format_number(grid.weights[i]) << '\n';
  csv.close();

  ojson report = {{"name", stem},
                  {"sequence", sequence_json(seq)},
                  {"cutoff_hz", cf.cutoff},
                  {"zero_spacing_hz", 1.0 / seq.half_span()},
                  {"zeros_hz", cf.zeros},
                  {"band_hz", {tb.f_min, tb.f_max}},
                  {"points", tb.points}};
  write_json(ctx.artifact(stem, ".json"), report);

  PlotSpec spec;
  spec.title = ctx.title("weighting |H(2 pi f)|^2", stem);
  spec.x_label = "f (Hz)";
  spec.y_label = "|H|^2";
  spec.x_scale = spec.y_scale = AxisScale::Log;
  spec.x_markers = {cf.cutoff};
  ctx.plot(stem, "", spec, {{"|H(2 pi f)|^2", grid.frequencies, grid.weights}});

  std::string line = ctx.command + " " + stem + ": cutoff " + fixed(cf.cutoff, 2) + " Hz, zeros every " +
                     fixed(1.0 / seq.half_span(), 4) + " Hz (" + std::to_string(cf.zeros.size()) + " below " +
                     general(tb.f_max) + " Hz)";
  if (seq.pi_half_warning()) line += "; warning: rabi * tau_r is not pi/2";
  ctx.summary(line);
  return kExitOk;
}

int cmd_synth(const Context& ctx, const std::string& format) {
  const Scenario& sc = need_scenario(ctx, "beat", ctx.scenario && ctx.scenario->beat.has_value());
  if (format != "bin" && format != "csv") throw ValidationError("expected bin or csv", "format");
  const TimeSeries s = synth_beat(*sc.beat, sc.noise_or_empty());
  const std::string stem = ctx.name();
  const fs::path data = ctx.artifact(stem, "." + format);
  if (format == "csv")
    write_series_csv(data.string(), s);
  else
    write_series_binary(data.string(), s);
  ojson report = {{"name", stem},        {"seed", sc.seed},          {"file", data.filename().string()},
                  {"fs_hz", s.fs},       {"count", s.size()},        {"t0_s", s.t0},
                  {"carrier_hz", sc.beat->carrier}, {"contrast", sc.beat->contrast}};
  write_json(ctx.artifact(stem, ".json"), report);

  const Eigen::Index shown = std::min<Eigen::Index>(s.size(), std::max<Eigen::Index>(16, static_cast<Eigen::Index>(1e-3 * s.fs)));
  PlotSeries trace{"S(t)", Eigen::ArrayXd::LinSpaced(shown, 0, static_cast<double>(shown - 1) / s.fs) * 1e3,
                   s.samples.head(shown)};
  PlotSpec spec;
  spec.title = ctx.title("beat note", stem);
  spec.x_label = "t (ms)";
  spec.y_label = "S (signal units)";
  ctx.plot(stem, "", spec, {trace});
  ctx.summary("synth " + stem + ": " + std::to_string(s.size()) + " samples at " + general(s.fs) + " S/s -> " +
              data.filename().string());
  return kExitOk;
}

struct PsdFlags {
  std::string input;
  std::optional<double> rbw;
  bool dbm = false;
  bool dbc = false;
  bool demod = false;
  bool phase = false;
  std::optional<double> impedance;
  std::optional<double> carrier;
  std::optional<double> lp_cutoff;
};

int cmd_psd(const Context& ctx, const PsdFlags& fl) {
  if (fl.demod && fl.phase) throw ValidationError("--demod and --phase are exclusive", "demod");
  TimeSeries series;
  if (!fl.input.empty()) {
    series = read_series(fl.input);
  } else {
    const Scenario& sc = need_scenario(ctx, "beat", ctx.scenario && ctx.scenario->beat.has_value());
    series = synth_beat(*sc.beat, sc.noise_or_empty());
  }
  const bool is_phase = fl.phase || fl.demod;
  if (fl.demod) {
    double carrier = 0;
    if (fl.carrier)
      carrier = *fl.carrier;
    else if (ctx.scenario && ctx.scenario->beat)
      carrier = ctx.scenario->beat->carrier;
    else
      throw ValidationError("--demod needs --carrier or a scenario beat block", "carrier");
    const double cutoff =
        fl.lp_cutoff.value_or(ctx.scenario && ctx.scenario->analysis ? ctx.scenario->analysis->lp_cutoff : 0.0);
    const Demodulated d = demodulate(series, carrier, cutoff);
    if (d.phase_undefined) throw NumericalError("demodulated amplitude vanishes; phase is undefined");
    series = d.phase;
  }
  const AnalysisBlock ab = ctx.scenario && ctx.scenario->analysis ? *ctx.scenario->analysis : AnalysisBlock{};
  const double rbw = fl.rbw.value_or(is_phase ? ab.rbw : ab.beat_rbw);
  PsdEstimate psd = estimate_psd(series, rbw, is_phase ? PsdUnit::RadSquaredPerHz : PsdUnit::SignalSquaredPerHz);
  if (fl.dbm && is_phase) throw ValidationError("dBm applies to beat-note spectra, not phase", "dbm");
  if (fl.dbc && !is_phase) throw ValidationError("dBc/Hz applies to phase spectra", "dbc");
  if (fl.dbm) psd = psd_to_dbm(psd, fl.impedance.value_or(ab.impedance));
  if (fl.dbc) psd = psd_to_dbc(psd);

  const std::string stem = ctx.name(fl.input.empty() ? std::vector<std::string>{} : std::vector{fl.input});
  write_psd_csv(ctx.artifact(stem, ".csv"), psd);
  ojson report = psd_meta(psd);
  report["name"] = stem;
  report["input"] = fl.input.empty() ? "scenario" : fl.input;
  write_json(ctx.artifact(stem, ".json"), report);

  PlotSpec spec;
  spec.title = ctx.title(is_phase ? "phase noise spectrum" : "beat-note spectrum", stem);
  spec.x_label = "f (Hz)";
  spec.y_label = to_string(psd.unit);
  const bool log_y = psd.unit == PsdUnit::RadSquaredPerHz || psd.unit == PsdUnit::SignalSquaredPerHz;
  spec.x_scale = is_phase ? AxisScale::Log : AxisScale::Linear;
  spec.y_scale = log_y ? AxisScale::Log : AxisScale::Linear;
  ctx.plot(stem, "", spec, {{stem, psd.frequencies, psd.values}});
  ctx.summary("psd " + stem + ": " + std::to_string(psd.values.size()) + " bins, rbw " + general(psd.rbw, 5) +
              " Hz, " + std::to_string(psd.segments) + " segments, unit " + to_string(psd.unit));
  return kExitOk;
}

struct IntegrateFlags {
  std::string input;
  SeqOverrides seq;
  std::optional<double> f_lo, f_hi;
};

int cmd_integrate(const Context& ctx, const IntegrateFlags& fl) {
  PulseSequence seq = ctx.scenario ? ctx.scenario->sequence : PulseSequence{};
  fl.seq.apply(seq);
  const AnalysisBlock ab = ctx.scenario && ctx.scenario->analysis ? *ctx.scenario->analysis : AnalysisBlock{};
  const double f_lo = fl.f_lo.value_or(ab.f_lo), f_hi = fl.f_hi.value_or(ab.f_hi);
  PsdEstimate psd;
  if (!fl.input.empty()) {
    psd = read_psd_csv(fl.input);
  } else {
    const Scenario& sc = need_scenario(ctx, "analysis", ctx.scenario && ctx.scenario->analysis.has_value());
    psd = run_noise_pipeline(sc).phase_psd;
  }
  const double sigma = integrated_phase_noise(psd, seq, f_lo, f_hi);
  const std::string stem = ctx.name(fl.input.empty() ? std::vector<std::string>{} : std::vector{fl.input});
  ojson report = {{"name", stem},
                  {"sigma_phi_rad", sigma},
                  {"sigma_phi_mrad", sigma * 1e3},
                  {"band_hz", {f_lo, f_hi}},
                  {"sequence", sequence_json(seq)},
                  {"psd", psd_meta(psd)}};
  write_json(ctx.artifact(stem, ".json"), report);
  ctx.summary("integrate-noise " + stem + ": sigma_phi = " + fixed(sigma * 1e3, 3) + " mrad/shot (" +
              general(f_lo) + "-" + general(f_hi) + " Hz)");
  return kExitOk;
}

int cmd_fringe(const Context& ctx) {
  const Scenario& sc = need_scenario(ctx, "fringe", ctx.scenario && ctx.scenario->fringe.has_value());
  const FringeBlock& f = *sc.fringe;
  const std::string stem = ctx.name();
  std::vector<PlotSeries> series;
  ojson files = ojson::array();
  for (std::size_t i = 0; i < f.interrogation_times.size(); ++i) {
    const FringeScan scan = scan_for(sc, i);
    const std::string suffix = f.interrogation_times.size() == 1 ? "" : "-T" + ms_label(scan.sequence.interrogation);
    const fs::path p = ctx.artifact(stem + suffix, ".csv");
    write_fringe_csv(p, scan, f.g_true);
    files.push_back({{"file", p.filename().string()}, {"interrogation_s", scan.sequence.interrogation}});
    PlotSeries s{"T = " + ms_label(scan.sequence.interrogation), scan.abscissa, scan.populations};
    s.points = true;
    series.push_back(s);
  }
  ojson report = {{"name", stem},
                  {"seed", sc.seed},
                  {"g_true", f.g_true},
                  {"alpha0_true_hz_per_s", chirp_for_gravity(sc.bragg, f.g_true)},
                  {"mode", mode_name(f.mode)},
                  {"atoms", f.atoms},
                  {"contrast", f.contrast},
                  {"shots_per_point", f.shots},
                  {"scans", files}};
  write_json(ctx.artifact(stem, ".json"), report);
  PlotSpec spec;
  spec.title = ctx.title("fringe scans", stem);
  spec.x_label = f.mode == ScanMode::SweepRate ? "sweep rate alpha (Hz/s)" : "final phase (rad)";
  spec.y_label = "population fraction";
  ctx.plot(stem, "", spec, series);
  ctx.summary("fringe " + stem + ": " + std::to_string(f.interrogation_times.size()) + " scan(s) of " +
              std::to_string(f.grid().size()) + " points, " + std::to_string(f.shots) + " shots/point");
  return kExitOk;
}

int cmd_fit(const Context& ctx, const std::vector<std::string>& inputs, const FitOverrides& ov) {
  if (inputs.empty()) throw ValidationError("need at least one --input fringe CSV", "input");
  const PulseSequence base = ctx.scenario ? ctx.scenario->sequence : PulseSequence{};
  const std::string stem = ctx.name(inputs);
  ojson fits = ojson::array();
  std::vector<PlotSeries> series;
  std::string line;
  for (const auto& in : inputs) {
    const FringeScan scan = read_fringe_csv(in, ov, base);
    const FringeFit fit = fit_fringe(scan);
    ojson j = fit_json(fit);
    j["source"] = in;
    fits.push_back(j);
    PlotSeries data{fs::path(in).filename().string(), scan.abscissa, scan.populations};
    data.points = true;
    series.push_back(data);
    series.push_back(fit_curve(fit, ""));
    if (!line.empty()) line += "; ";
    line += "T = " + ms_label(fit.interrogation) + ": centre " + fixed(fit.center, 3) + " +/- " +
            general(fit.center_sigma(), 3) + ", contrast " + fixed(fit.contrast, 4) + ", period " +
            general(fit.period, 6);
  }
  write_json(ctx.artifact(stem, ".json"), {{"name", stem}, {"fits", fits}});
  PlotSpec spec;
  spec.title = ctx.title("fringe fit", stem);
  spec.x_label = "scan abscissa";
  spec.y_label = "population fraction";
  ctx.plot(stem, "", spec, series);
  ctx.summary("fit " + stem + ": " + line);
  return kExitOk;
}

int cmd_extract(const Context& ctx, const std::vector<std::string>& inputs, const FitOverrides& ov) {
  std::vector<FringeFit> fits;
  std::vector<std::string> sources;
  std::optional<double> g_true;
  const BraggConfig cfg = ctx.scenario ? ctx.scenario->bragg : BraggConfig{};
  if (!inputs.empty()) {
    const PulseSequence base = ctx.scenario ? ctx.scenario->sequence : PulseSequence{};
    for (const auto& in : inputs) {
      fits.push_back(fit_fringe(read_fringe_csv(in, ov, base)));
      sources.push_back(in);
    }
  } else {
    const Scenario& sc = need_scenario(ctx, "fringe", ctx.scenario && ctx.scenario->fringe.has_value());
    for (std::size_t i = 0; i < sc.fringe->interrogation_times.size(); ++i) {
      fits.push_back(fit_fringe(scan_for(sc, i)));
      sources.push_back("simulated");
    }
    g_true = sc.fringe->g_true;
  }
  return extract_and_report(ctx, ctx.name(inputs), cfg, fits, sources, g_true);
}

struct AllanFlags {
  std::string input;
  std::optional<double> cycle_time;
  bool overlapping = false;
  std::string unit = "ugal";
  std::string input_unit = "ms2";
  std::optional<double> tau_ref;
};

double unit_scale(const std::string& u, const char* field) {
  if (u == "ugal") return constants::microgal;
  if (u == "ms2") return 1.0;
  throw ValidationError("expected ugal or ms2", field);
}

int cmd_allan(const Context& ctx, const AllanFlags& fl) {
  const double out_scale = unit_scale(fl.unit, "unit");
  ShotSeries shots;
  double tau_ref = fl.tau_ref.value_or(200.0);
  bool overlapping = fl.overlapping;
  const std::string stem = ctx.name(fl.input.empty() ? std::vector<std::string>{} : std::vector{fl.input});
  if (!fl.input.empty()) {
    const double in_scale = unit_scale(fl.input_unit, "input_unit");
    const CsvTable t = read_csv_table(fl.input);
    const auto& v = t.column("value");
    t.column("shot_index");
    shots.values = Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size())) * in_scale;
    if (fl.cycle_time)
      shots.cycle_time = *fl.cycle_time;
    else if (ctx.scenario && ctx.scenario->stability)
      shots.cycle_time = ctx.scenario->stability->cycle_time;
    else
      throw ValidationError("cycle time unknown; pass --cycle-time", "cycle_time");
  } else {
    const Scenario& sc = need_scenario(ctx, "stability", ctx.scenario && ctx.scenario->stability.has_value());
    shots = shots_for(sc);
    if (fl.cycle_time) throw ValidationError("--cycle-time only applies to --input series", "cycle_time");
    if (!fl.tau_ref) tau_ref = sc.stability->tau_ref;
    overlapping = overlapping || sc.stability->overlapping;
    auto csv = open_out(ctx.artifact(stem + "-shots", ".csv"));
    csv << "shot_index,value\n";
    for (Eigen::Index i = 0; i < shots.values.size(); ++i) csv << i << ',' << format_number(shots.values[i]) << '\n';
  }
  const AllanResult r = allan_deviation(shots, default_taus(shots), overlapping);
  const SensitivityReport rep = sensitivity_at_tau(r, tau_ref);

  auto csv = open_out(ctx.artifact(stem, ".csv"));
  csv << "tau_s,adev,count\n";
  for (Eigen::Index i = 0; i < r.taus.size(); ++i)
    csv << format_number(r.taus[i]) << ',' << format_number(r.adev[i] / out_scale) << ','
        << r.counts[static_cast<std::size_t>(i)] << '\n';
  csv.close();

  auto both = [](double v) { return ojson{{"ms2", v}, {"ugal", v / constants::microgal}}; };
  ojson report = {{"name", stem},
                  {"seed", ctx.seed()},
                  {"unit", fl.unit},
                  {"cycle_time_s", shots.cycle_time},
                  {"shots", shots.values.size()},
                  {"estimator", overlapping ? "overlapping" : "non-overlapping"},
                  {"at_one_second", both(rep.at_one_second)},
                  {"slope", rep.slope},
                  {"slope_warning", rep.slope_warning},
                  {"tau_ref_s", rep.tau_ref},
                  {"predicted_at_tau_ref", both(rep.predicted)},
                  {"extrapolated", rep.extrapolated},
                  {"raw_nearest", both(rep.raw_nearest)},
                  {"raw_nearest_tau_s", rep.raw_nearest_tau}};
  write_json(ctx.artifact(stem, ".json"), report);

  PlotSeries measured{"Allan deviation", r.taus, r.adev / out_scale};
  measured.points = true;
  PlotSeries fit{"A tau^-1/2", r.taus, rep.at_one_second / out_scale * r.taus.rsqrt()};
  fit.dashed = true;
  PlotSpec spec;
  spec.title = ctx.title("Allan deviation", stem);
  spec.x_label = "tau (s)";
  spec.y_label = fl.unit == "ugal" ? "sigma (uGal)" : "sigma (m/s^2)";
  spec.x_scale = spec.y_scale = AxisScale::Log;
  spec.x_markers = {rep.tau_ref};
  ctx.plot(stem, "", spec, {measured, fit});

  const std::string u = fl.unit == "ugal" ? " uGal" : " m/s^2";
  std::string line = ctx.command + " " + stem + ": " + general(rep.at_one_second / out_scale, 5) + u + "/sqrt(Hz) at 1 s (slope " +
                     fixed(rep.slope, 3) + "); " + general(rep.predicted / out_scale, 4) + u + " at " +
                     general(rep.tau_ref) + " s" + (rep.extrapolated ? " (white-noise extrapolation)" : "");
  if (rep.slope_warning) line += "; warning: slope far from -1/2, extrapolation not valid";
  ctx.summary(line);
  return kExitOk;
}

struct LimitFlags {
  double contrast = 0.5;
  double atoms = 5e4;
  double t = 10e-3;
  double g = 9.78;
  std::optional<double> k_eff;
};

int cmd_limit(const Context& ctx, const LimitFlags& fl) {
  const BraggConfig cfg = ctx.scenario ? ctx.scenario->bragg : BraggConfig{};
  const double k_eff = fl.k_eff.value_or(2.0 * cfg.order * wavenumber(cfg.species));
  const double limit = qpn_limit(fl.contrast, fl.atoms, fl.g, k_eff, fl.t);
  const std::string stem = ctx.name();
  write_json(ctx.artifact(stem, ".json"), {{"name", stem},
                                           {"contrast", fl.contrast},
                                           {"atoms", fl.atoms},
                                           {"t_s", fl.t},
                                           {"g", fl.g},
                                           {"k_eff_per_m", k_eff},
                                           {"dg_over_g", limit},
                                           {"dg_ms2", limit * fl.g}});
  ctx.summary("limit " + stem + ": (dg/g)_limit = " + general(limit, 4) + " (" + fixed(limit * 1e8, 2) +
              "e-8), dg = " + general(limit * fl.g / constants::microgal, 4) + " uGal per shot");
  return kExitOk;
}

PsdEstimate beat_dbm(const Scenario& sc) {
  const AnalysisBlock& ab = *sc.analysis;
  const TimeSeries beat = synth_beat(*sc.beat, sc.noise_or_empty());
  return psd_to_dbm(estimate_psd(beat, ab.beat_rbw), ab.impedance);
}

Scenario load_reference(const Context& ctx, const Scenario& sc) {
  const std::string& ref = sc.analysis->reference;
  fs::path p(ref);
  Scenario r;
  bool bundled = false;
  for (const auto& [name, text] : bundled_scenarios()) bundled = bundled || name == ref;
  if (!bundled && p.is_relative() && !ctx.common.scenario.empty() && fs::exists(ctx.common.scenario))
    p = fs::path(ctx.common.scenario).parent_path() / p;
  try {
    r = load_scenario(bundled ? ref : p.string());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("reference scenario: ") + e.what(), "analysis.reference");
  }
  if (!r.analysis || !r.beat) throw ValidationError("reference lacks beat/analysis blocks", "analysis.reference");
  if (ctx.common.seed) r.seed = *ctx.common.seed;
  return r;
}

int demo_noise(const Context& ctx) {
  const Scenario& sc = *ctx.scenario;
  const std::string stem = ctx.name();
  const NoiseRun run = run_noise_pipeline(sc);
  write_psd_csv(ctx.artifact(stem, ".csv"), run.phase_psd);
  const PsdEstimate beat = beat_dbm(sc);
  write_psd_csv(ctx.artifact(stem + "-beat", ".csv"), beat);

  ojson report = {{"name", stem},
                  {"seed", sc.seed},
                  {"sigma_phi_rad", run.sigma_phi},
                  {"sigma_phi_mrad", run.sigma_phi * 1e3},
                  {"band_hz", {sc.analysis->f_lo, sc.analysis->f_hi}},
                  {"sequence", sequence_json(sc.sequence)},
                  {"demod_taps", run.taps},
                  {"unwrap_jumps", run.unwrap_jumps},
                  {"psd", psd_meta(run.phase_psd)}};

  // Above the demodulation low-pass there is only filter residue.
  const double shown = sc.analysis->lp_cutoff > 0 ? sc.analysis->lp_cutoff : sc.beat->carrier / 4;
  auto below = [shown](const std::string& label, const PsdEstimate& p) {
    Eigen::Index n = 0;
    while (n < p.frequencies.size() && p.frequencies[n] <= shown) ++n;
    return PlotSeries{label, p.frequencies.head(n), p.values.head(n)};
  };
  std::vector<PlotSeries> phase_series{below(stem, run.phase_psd)};
  std::vector<PlotSeries> beat_series{{stem, beat.frequencies, beat.values}};
  std::string line = "demo " + stem + ": sigma_phi = " + fixed(run.sigma_phi * 1e3, 2) + " mrad/shot (" +
                     general(sc.analysis->f_lo) + "-" + general(sc.analysis->f_hi) + " Hz)";
  if (!sc.analysis->reference.empty()) {
    const Scenario ref = load_reference(ctx, sc);
    const NoiseRun ref_run = run_noise_pipeline(ref);
    const double ratio = run.sigma_phi / ref_run.sigma_phi;
    report["reference"] = {{"name", ref.name},
                           {"seed", ref.seed},
                           {"sigma_phi_mrad", ref_run.sigma_phi * 1e3}};
    report["ratio"] = ratio;
    PlotSeries rp = below(ref.name, ref_run.phase_psd);
    rp.dashed = true;
    phase_series.push_back(rp);
    const PsdEstimate ref_beat = beat_dbm(ref);
    PlotSeries rb{ref.name, ref_beat.frequencies, ref_beat.values};
    rb.dashed = true;
    beat_series.push_back(rb);
    line += "; " + ref.name + " = " + fixed(ref_run.sigma_phi * 1e3, 2) + " mrad/shot; ratio " + fixed(ratio, 2);
  }
  write_json(ctx.artifact(stem, ".json"), report);

  PlotSpec ps;
  ps.title = ctx.title("phase noise S_phi(f)", stem);
  ps.x_label = "f (Hz)";
  ps.y_label = "S_phi (rad^2/Hz)";
  ps.x_scale = ps.y_scale = AxisScale::Log;
  ctx.plot(stem, "", ps, phase_series);

  // Beat-note spectrum around the carrier, offsets from f_c on the x axis.
  const double fc = sc.beat->carrier;
  for (auto& s : beat_series) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < s.x.size(); ++k)
      if (std::abs(s.x[k] - fc) <= 12e3) keep.push_back(k);
    Eigen::ArrayXd x(static_cast<Eigen::Index>(keep.size())), y(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      x[static_cast<Eigen::Index>(i)] = s.x[keep[i]] - fc;
      y[static_cast<Eigen::Index>(i)] = s.y[keep[i]];
    }
    s.x = x;
    s.y = y;
  }
  PlotSpec bs;
  bs.title = ctx.title("beat note, rbw " + general(sc.analysis->beat_rbw) + " Hz", stem);
  bs.x_label = "f - f_c (Hz)";
  bs.y_label = "power (dBm)";
  ctx.plot(stem, "-beat", bs, beat_series);
  ctx.summary(line);
  return kExitOk;
}

int demo_fringe(const Context& ctx) {
  const Scenario& sc = *ctx.scenario;
  const std::string stem = ctx.name();
  std::vector<FringeFit> fits;
  std::vector<std::string> sources;
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < sc.fringe->interrogation_times.size(); ++i) {
    const FringeScan scan = scan_for(sc, i);
    const std::string suffix =
        sc.fringe->interrogation_times.size() == 1 ? "" : "-T" + ms_label(scan.sequence.interrogation);
    write_fringe_csv(ctx.artifact(stem + suffix, ".csv"), scan, sc.fringe->g_true);
    fits.push_back(fit_fringe(scan));
    sources.push_back(ctx.artifact(stem + suffix, ".csv").filename().string());
    PlotSeries data{"T = " + ms_label(scan.sequence.interrogation), scan.abscissa, scan.populations};
    data.points = true;
    series.push_back(data);
    series.push_back(fit_curve(fits.back(), ""));
  }
  if (fits.size() >= 2 && sc.fringe->mode == ScanMode::SweepRate)
    return extract_and_report(ctx, stem, sc.bragg, fits, sources, sc.fringe->g_true);

  ojson out = ojson::array();
  std::string line = "demo " + stem + ":";
  for (std::size_t i = 0; i < fits.size(); ++i) {
    ojson j = fit_json(fits[i]);
    j["source"] = sources[i];
    out.push_back(j);
    line += " T = " + ms_label(fits[i].interrogation) + " centre " + fixed(fits[i].center, 3) + " +/- " +
            general(fits[i].center_sigma(), 3) + ", contrast " + fixed(fits[i].contrast, 3) + ", period " +
            general(fits[i].period) + ";";
  }
  ojson report = {{"name", stem}, {"seed", sc.seed}, {"fits", out}};
  if (sc.fringe->mode == ScanMode::SweepRate)
    report["alpha0_true_hz_per_s"] = chirp_for_gravity(sc.bragg, sc.fringe->g_true);
  write_json(ctx.artifact(stem, ".json"), report);
  PlotSpec spec;
  spec.title = ctx.title("fringe and fit", stem);
  spec.x_label = sc.fringe->mode == ScanMode::SweepRate ? "sweep rate alpha (Hz/s)" : "final phase (rad)";
  spec.y_label = "population fraction";
  ctx.plot(stem, "", spec, series);
  line += " one interrogation time fixes the centre only modulo the period";
  ctx.summary(line);
  return kExitOk;
}

int cmd_demo(const Context& ctx) {
  if (!ctx.scenario) throw ValidationError("demo needs --scenario", "scenario");
  const Scenario& sc = *ctx.scenario;
  if (sc.analysis) return demo_noise(ctx);
  if (sc.fringe) return demo_fringe(ctx);
  if (sc.stability) return cmd_allan(ctx, AllanFlags{});
  return cmd_transfer(ctx, SeqOverrides{});
}

fs::path resolve_out_dir(const Common& c) {
  std::string dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir, "out");
  return dir;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--scenario", c.scenario, "bundled scenario name or path to a scenario JSON");
  sub->add_option("--out", c.out_dir, std::string("output directory (default $") + kOutDirEnv + " or .)");
  sub->add_option("--seed", c.seed, "override the scenario seed");
  sub->add_option("--species", c.species, "species.json overriding the scenario species");
  sub->add_flag("--no-svg", c.no_svg, "skip SVG plots");
  sub->add_flag("--quiet", c.quiet, "suppress the summary line");
  sub->add_flag("--no-timestamp", c.no_timestamp, "omit the generation time from SVG plots");
}

void add_seq(CLI::App* sub, SeqOverrides& s) {
  sub->add_option("--t", s.t, "interrogation time T (s)");
  sub->add_option("--tau-r", s.tau_r, "beamsplitter duration tau_R (s)");
  sub->add_option("--rabi", s.rabi_hz, "Rabi frequency Omega_R / 2 pi (Hz)");
}

}  // namespace

NoiseRun run_noise_pipeline(const Scenario& sc) {
  if (!sc.beat || !sc.analysis) throw ValidationError("noise pipeline needs beat and analysis blocks", "analysis");
  const TimeSeries beat = synth_beat(*sc.beat, sc.noise_or_empty());
  const Demodulated d = demod_for(sc, beat);
  NoiseRun run;
  run.phase_psd = estimate_psd(d.phase, sc.analysis->rbw, PsdUnit::RadSquaredPerHz);
  run.sigma_phi = integrated_phase_noise(run.phase_psd, sc.sequence, sc.analysis->f_lo, sc.analysis->f_hi);
  run.taps = d.taps;
  run.unwrap_jumps = d.unwrap_jumps;
  return run;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Atom-interferometer gravimeter phase-noise and stability toolkit", "aigrav"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  SeqOverrides transfer_seq;
  std::string synth_format = "bin";
  PsdFlags psd;
  IntegrateFlags integ;
  std::vector<std::string> fit_inputs, extract_inputs;
  FitOverrides fit_ov, extract_ov;
  AllanFlags allan;
  LimitFlags limit;

  std::vector<std::pair<CLI::App*, std::string>> subs;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, common);
    subs.emplace_back(s, name);
    return s;
  };

  auto* transfer = sub("transfer", "sensitivity weighting |H(2 pi f)|^2 on a frequency grid");
  add_seq(transfer, transfer_seq);
  auto* synth = sub("synth", "synthesise the beat-note record of a scenario");
  synth->add_option("--format", synth_format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));
  auto* psd_cmd = sub("psd", "Welch spectrum of a series (file or scenario)");
  psd_cmd->add_option("--input", psd.input, "CSV or binary series");
  psd_cmd->add_option("--rbw", psd.rbw, "resolution bandwidth (Hz)");
  psd_cmd->add_flag("--dbm", psd.dbm, "power per rbw in dBm");
  psd_cmd->add_flag("--dbc", psd.dbc, "phase spectra as L(f) in dBc/Hz");
  psd_cmd->add_option("--impedance", psd.impedance, "load for dBm (ohm)");
  psd_cmd->add_flag("--demod", psd.demod, "demodulate a beat note first, then take the phase spectrum");
  psd_cmd->add_flag("--phase", psd.phase, "input is already a phase record (rad)");
  psd_cmd->add_option("--carrier", psd.carrier, "carrier for --demod (Hz)");
  psd_cmd->add_option("--lp-cutoff", psd.lp_cutoff, "demodulation low-pass cutoff (Hz); default carrier / 4");
  auto* integ_cmd = sub("integrate-noise", "weighted integral of a phase PSD");
  integ_cmd->add_option("--input", integ.input, "PSD CSV (f_hz,value,unit) in rad^2/Hz");
  add_seq(integ_cmd, integ.seq);
  integ_cmd->add_option("--f-lo", integ.f_lo, "lower band edge (Hz)");
  integ_cmd->add_option("--f-hi", integ.f_hi, "upper band edge (Hz)");
  sub("fringe", "simulate fringe scans");
  auto* fit = sub("fit", "fit fringe CSVs");
  fit->add_option("--input", fit_inputs, "fringe CSV (repeatable)");
  fit->add_option("--t", fit_ov.t, "interrogation time (s), overrides the file");
  fit->add_option("--order", fit_ov.order, "Bragg order, overrides the file");
  auto* extract = sub("extract-g", "common fringe centre across interrogation times");
  extract->add_option("--input", extract_inputs, "fringe CSV (repeatable); scenario scans when absent");
  extract->add_option("--order", extract_ov.order, "Bragg order, overrides the files");
  auto* allan_cmd = sub("allan", "Allan deviation and white-noise sensitivity");
  allan_cmd->add_option("--input", allan.input, "CSV shot_index,value");
  allan_cmd->add_option("--cycle-time", allan.cycle_time, "shot period (s)");
  allan_cmd->add_flag("--overlapping", allan.overlapping, "overlapping estimator");
  allan_cmd->add_option("--unit", allan.unit, "output unit")->check(CLI::IsMember({"ugal", "ms2"}));
  allan_cmd->add_option("--input-unit", allan.input_unit, "unit of the input values")
      ->check(CLI::IsMember({"ugal", "ms2"}));
  allan_cmd->add_option("--tau-ref", allan.tau_ref, "averaging time for the predicted sensitivity (s)");
  auto* limit_cmd = sub("limit", "quantum projection noise limit on dg/g");
  limit_cmd->add_option("--contrast", limit.contrast, "fringe contrast C");
  limit_cmd->add_option("--atoms", limit.atoms, "atom number N");
  limit_cmd->add_option("--t", limit.t, "interrogation time T (s)");
  limit_cmd->add_option("--g", limit.g, "local gravity (m/s^2)");
  limit_cmd->add_option("--k-eff", limit.k_eff, "effective wavenumber (rad/m); default 2 n k");
  sub("demo", "run the full pipeline behind a scenario");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Context ctx;
    ctx.common = common;
    ctx.out = &out;
    for (const auto& [s, name] : subs)
      if (s->parsed()) ctx.command = name;
    if (!common.scenario.empty()) {
      ctx.scenario = load_scenario(common.scenario);
      if (common.seed) ctx.scenario->seed = *common.seed;
    }
    if (!common.species.empty()) {
      const AtomSpecies sp = load_species(common.species);
      if (ctx.scenario) {
        ctx.scenario->bragg.species = sp;
      } else {
        Scenario sc;
        sc.name = "default";
        sc.seed = common.seed.value_or(0);
        sc.bragg.species = sp;
        ctx.scenario = sc;
      }
    }
    ctx.out_dir = resolve_out_dir(common);

    const std::string& c = ctx.command;
    if (c == "transfer") return cmd_transfer(ctx, transfer_seq);
    if (c == "synth") return cmd_synth(ctx, synth_format);
    if (c == "psd") return cmd_psd(ctx, psd);
    if (c == "integrate-noise") return cmd_integrate(ctx, integ);
    if (c == "fringe") return cmd_fringe(ctx);
    if (c == "fit") return cmd_fit(ctx, fit_inputs, fit_ov);
    if (c == "extract-g") return cmd_extract(ctx, extract_inputs, extract_ov);
    if (c == "allan") return cmd_allan(ctx, allan);
    if (c == "limit") return cmd_limit(ctx, limit);
    if (c == "demo") return cmd_demo(ctx);
    throw ValidationError("unknown command", "command");
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aigrav::cli
