#include "aigrav/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "aigrav/error.hpp"

namespace aigrav {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Block {
public:
  Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError("expected an object", path_);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ValidationError("expected a number", field(key));
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = get(key)) {
      if (v->is_number_integer()) {
        out = v->get<Int>();
      } else if (v->is_number_float() && v->get<double>() == std::floor(v->get<double>())) {
        out = static_cast<Int>(v->get<double>());
      } else {
        throw ValidationError("expected an integer", field(key));
      }
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned()) throw ValidationError("expected a non-negative integer", field(key));
      out = v->get<std::uint64_t>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ValidationError("expected a string", field(key));
      out = v->get<std::string>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ValidationError("expected true or false", field(key));
      out = v->get<bool>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) throw ValidationError("expected an array of numbers", field(key));
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number())
          throw ValidationError("expected a number", field(key) + "[" + std::to_string(i) + "]");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) throw ValidationError("unknown key", field(key));
  }

private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

// Module validators report paths relative to their own block; make them
// absolute when they are not already.
template <typename Fn>
void within(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    const std::string& f = e.field();
    if (f.rfind(prefix + ".", 0) == 0 || f == prefix) throw;
    throw ValidationError(e.message(), f.empty() ? prefix : prefix + "." + f);
  }
}

AtomSpecies read_species(Block b) {
  AtomSpecies s;
  b.number("mass_kg", s.mass);
  b.number("wavelength_m", s.wavelength);
  b.text("label", s.label);
  b.finish();
  return s;
}

void read_bragg(Block b, BraggConfig& cfg) {
  b.integer("order", cfg.order);
  double detuning_hz = cfg.detuning / (2 * std::numbers::pi);
  b.number("detuning_hz", detuning_hz);
  cfg.detuning = 2 * std::numbers::pi * detuning_hz;
  b.number("alignment", cfg.alignment);
  b.finish();
}

void read_sequence(Block b, PulseSequence& seq) {
  double rabi_hz = seq.rabi / (2 * std::numbers::pi);
  b.number("rabi_hz", rabi_hz);
  seq.rabi = 2 * std::numbers::pi * rabi_hz;
  b.number("tau_r", seq.beamsplitter_duration);
  b.number("t", seq.interrogation);
  b.number("cycle_time", seq.cycle_time);
  b.finish();
}

BeatConfig read_beat(Block b) {
  BeatConfig cfg;
  b.number("amplitude", cfg.amplitude);
  b.number("contrast", cfg.contrast);
  b.number("carrier", cfg.carrier);
  b.number("phase0", cfg.phase0);
  b.number("fs", cfg.fs);
  b.number("duration", cfg.duration);
  b.finish();
  return cfg;
}

NoiseSpec read_noise(Block b) {
  NoiseSpec spec;
  if (const json* tones = b.get("tones")) {
    if (!tones->is_array()) throw ValidationError("expected an array", b.field("tones"));
    for (std::size_t i = 0; i < tones->size(); ++i) {
      Block t((*tones)[i], b.field("tones") + "[" + std::to_string(i) + "]");
      PhaseTone tone;
      t.number("frequency", tone.frequency);
      t.number("rms_phase", tone.rms_phase);
      t.finish();
      spec.tones.push_back(tone);
    }
  }
  if (const json* bands = b.get("shaped_bands")) {
    if (!bands->is_array()) throw ValidationError("expected an array", b.field("shaped_bands"));
    for (std::size_t i = 0; i < bands->size(); ++i) {
      Block t((*bands)[i], b.field("shaped_bands") + "[" + std::to_string(i) + "]");
      ShapedBand band;
      t.number("f_lo", band.f_lo);
      t.number("f_hi", band.f_hi);
      t.number("psd_level", band.psd_level);
      t.finish();
      spec.shaped_bands.push_back(band);
    }
  }
  b.number("additive_rms", spec.additive_rms);
  b.number("multiplicative_rms", spec.multiplicative_rms);
  b.finish();
  return spec;
}

AnalysisBlock read_analysis(Block b) {
  AnalysisBlock a;
  b.number("rbw", a.rbw);
  b.number("lp_cutoff", a.lp_cutoff);
  b.number("f_lo", a.f_lo);
  b.number("f_hi", a.f_hi);
  b.number("beat_rbw", a.beat_rbw);
  b.number("impedance", a.impedance);
  b.text("reference", a.reference);
  b.finish();
  return a;
}

TransferBlock read_transfer(Block b) {
  TransferBlock t;
  b.number("f_min", t.f_min);
  b.number("f_max", t.f_max);
  b.integer("points", t.points);
  b.finish();
  return t;
}

FringeBlock read_fringe(Block b) {
  FringeBlock f;
  b.number("g_true", f.g_true);
  b.numbers("interrogation_times", f.interrogation_times);
  std::string mode = "sweep-rate";
  b.text("mode", mode);
  if (mode == "sweep-rate")
    f.mode = ScanMode::SweepRate;
  else if (mode == "final-phase")
    f.mode = ScanMode::FinalPhase;
  else
    throw ValidationError("expected \"sweep-rate\" or \"final-phase\"", b.field("mode"));
  b.number("alpha_center", f.alpha_center);
  b.number("alpha_width", f.alpha_width);
  b.integer("points", f.points);
  b.numbers("abscissa", f.abscissa);
  b.number("phase_span", f.phase_span);
  b.number("fixed_alpha", f.fixed_alpha);
  b.integer("atoms", f.atoms);
  b.number("contrast", f.contrast);
  b.integer("shots", f.shots);
  b.number("detection_noise", f.detection_noise);
  b.number("phase_noise_rms", f.phase_noise_rms);
  b.finish();
  return f;
}

StabilityBlock read_stability(Block b) {
  StabilityBlock s;
  b.number("cycle_time", s.cycle_time);
  b.number("duration", s.duration);
  b.number("asd_1s", s.asd_1s);
  b.number("g_true", s.g_true);
  b.number("tau_ref", s.tau_ref);
  b.boolean("overlapping", s.overlapping);
  b.finish();
  return s;
}

std::string slurp(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path, field);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Eigen::ArrayXd FringeBlock::grid() const {
  if (!abscissa.empty())
    return Eigen::Map<const Eigen::ArrayXd>(abscissa.data(), static_cast<Eigen::Index>(abscissa.size()));
  if (mode == ScanMode::FinalPhase) {
    if (points < 2) throw ValidationError("need at least two points", "fringe.points");
    if (!(phase_span > 0)) throw ValidationError("must be positive", "fringe.phase_span");
    return Eigen::ArrayXd::LinSpaced(points, 0.0, phase_span);
  }
  return sweep_grid(alpha_center, alpha_width, points);
}

ScanOptions FringeBlock::options(std::uint64_t seed) const {
  ScanOptions o;
  o.atoms = atoms;
  o.contrast = contrast;
  o.shots_per_point = shots;
  o.seed = seed;
  o.detection_noise = detection_noise;
  o.phase_noise_rms = phase_noise_rms;
  o.mode = mode;
  o.fixed_alpha = fixed_alpha;
  return o;
}

NoiseSpec Scenario::noise_or_empty() const {
  NoiseSpec spec = noise.value_or(NoiseSpec{});
  spec.seed = seed;
  return spec;
}

void Scenario::validate() const {
  if (name.empty()) throw ValidationError("must not be empty", "name");
  bragg.species.validate();
  within("bragg", [&] { bragg.validate(); });
  within("sequence", [&] { sequence.validate(); });
  if (beat) {
    within("beat", [&] {
      beat->validate();
      checked_sample_count(beat->fs, beat->duration);
    });
  }
  if (noise) {
    within("noise", [&] {
      noise->validate();
      if (beat) noise->validate_against(beat->fs);
    });
  }
  if (noise && !beat) throw ValidationError("a noise block needs a beat block", "noise");
  if (analysis) {
    const AnalysisBlock& a = *analysis;
    if (!beat) throw ValidationError("an analysis block needs a beat block", "analysis");
    if (!(a.rbw > 0)) throw ValidationError("must be positive", "analysis.rbw");
    if (!(a.beat_rbw > 0)) throw ValidationError("must be positive", "analysis.beat_rbw");
    if (!(a.impedance > 0)) throw ValidationError("must be positive", "analysis.impedance");
    if (!(a.lp_cutoff >= 0 && a.lp_cutoff < beat->carrier))
      throw ValidationError("must lie in [0, carrier)", "analysis.lp_cutoff");
    if (!(a.f_lo >= 0)) throw ValidationError("must be >= 0", "analysis.f_lo");
    if (!(a.f_hi > a.f_lo)) throw ValidationError("must exceed f_lo", "analysis.f_hi");
    const double passband = a.lp_cutoff > 0 ? a.lp_cutoff : beat->carrier / 4;
    if (a.f_hi > passband)
      throw ValidationError("integration band extends past the demodulation low-pass", "analysis.f_hi");
  }
  if (transfer) {
    if (!(transfer->f_min > 0)) throw ValidationError("must be positive", "transfer.f_min");
    if (!(transfer->f_max > transfer->f_min)) throw ValidationError("must exceed f_min", "transfer.f_max");
    if (transfer->points < 2) throw ValidationError("must be >= 2", "transfer.points");
  }
  if (fringe) {
    const FringeBlock& f = *fringe;
    if (!(f.g_true > 0)) throw ValidationError("must be positive", "fringe.g_true");
    if (f.interrogation_times.empty())
      throw ValidationError("need at least one interrogation time", "fringe.interrogation_times");
    for (std::size_t i = 0; i < f.interrogation_times.size(); ++i)
      if (!(f.interrogation_times[i] > 0))
        throw ValidationError("must be positive", "fringe.interrogation_times[" + std::to_string(i) + "]");
    if (f.atoms < 0) throw ValidationError("must be >= 0", "fringe.atoms");
    if (!(f.contrast >= 0 && f.contrast <= 1)) throw ValidationError("must lie in [0, 1]", "fringe.contrast");
    if (f.shots < 1) throw ValidationError("must be >= 1", "fringe.shots");
    if (!(f.detection_noise >= 0)) throw ValidationError("must be >= 0", "fringe.detection_noise");
    if (!(f.phase_noise_rms >= 0)) throw ValidationError("must be >= 0", "fringe.phase_noise_rms");
    const Eigen::ArrayXd grid = f.grid();
    for (Eigen::Index i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw ValidationError("must be strictly increasing", "fringe.abscissa");
  }
  if (stability) {
    const StabilityBlock& s = *stability;
    if (!(s.cycle_time > 0)) throw ValidationError("must be positive", "stability.cycle_time");
    if (!(s.duration >= 8 * s.cycle_time))
      throw ValidationError("must cover at least eight cycles", "stability.duration");
    if (!(s.asd_1s >= 0)) throw ValidationError("must be >= 0", "stability.asd_1s");
    if (!(s.g_true > 0)) throw ValidationError("must be positive", "stability.g_true");
    if (!(s.tau_ref > 0)) throw ValidationError("must be positive", "stability.tau_ref");
  }
}

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what(), origin.empty() ? "scenario" : origin);
  }
  Block top(doc, "");
  std::string schema;
  top.text("schema", schema);
  if (schema.empty()) throw ValidationError("missing schema version", "schema");
  if (schema != kScenarioSchema)
    throw ValidationError("unsupported schema '" + schema + "', expected " + kScenarioSchema, "schema");

  Scenario sc;
  top.text("name", sc.name);
  top.text("description", sc.description);
  top.seed("seed", sc.seed);
  if (top.has("species") && top.has("species_file"))
    throw ValidationError("give either species or species_file", "species_file");
  if (const json* s = top.get("species")) sc.bragg.species = read_species(Block(*s, "species"));
  std::string species_file;
  top.text("species_file", species_file);
  if (!species_file.empty()) {
    std::filesystem::path p(species_file);
    if (p.is_relative() && !origin.empty()) p = std::filesystem::path(origin).parent_path() / p;
    within("species_file", [&] { sc.bragg.species = load_species(p.string()); });
  }
  if (const json* b = top.get("bragg")) read_bragg(Block(*b, "bragg"), sc.bragg);
  if (const json* s = top.get("sequence")) read_sequence(Block(*s, "sequence"), sc.sequence);
  if (const json* b = top.get("beat")) sc.beat = read_beat(Block(*b, "beat"));
  if (const json* n = top.get("noise")) sc.noise = read_noise(Block(*n, "noise"));
  if (const json* a = top.get("analysis")) sc.analysis = read_analysis(Block(*a, "analysis"));
  if (const json* t = top.get("transfer")) sc.transfer = read_transfer(Block(*t, "transfer"));
  if (const json* f = top.get("fringe")) sc.fringe = read_fringe(Block(*f, "fringe"));
  if (const json* s = top.get("stability")) sc.stability = read_stability(Block(*s, "stability"));
  top.finish();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& name_or_path) {
  for (const auto& [name, text] : bundled_scenarios())
    if (name == name_or_path) return parse_scenario(text, "");
  if (!std::filesystem::exists(name_or_path))
    throw ValidationError("no bundled scenario or file named '" + name_or_path + "'", "scenario");
  return parse_scenario(slurp(name_or_path, "scenario"), name_or_path);
}

}  // namespace aigrav
