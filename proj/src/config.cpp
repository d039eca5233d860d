#include "iontrap/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace iontrap {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw InputError("config: " + where + ": " + what);
}

// strict object reader: every known key is read at most once, leftovers are
// reported as unknown.  absent keys leave the bound variable untouched
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) bad(where_, "expected an object");
  }

  void read(const char* key, double& into) {
    if (const json* v = take(key)) {
      if (!v->is_number()) bad(path(key), "expected a number");
      into = v->get<double>();
    }
  }

  void read(const char* key, int& into) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) bad(path(key), "expected an integer");
      into = v->get<int>();
    }
  }

  void read(const char* key, std::uint64_t& into) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) bad(path(key), "expected a non-negative integer");
      into = v->get<std::uint64_t>();
    }
  }

  void read(const char* key, bool& into) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) bad(path(key), "expected true or false");
      into = v->get<bool>();
    }
  }

  void read(const char* key, std::string& into) {
    if (const json* v = take(key)) {
      if (!v->is_string()) bad(path(key), "expected a string");
      into = v->get<std::string>();
    }
  }

  void read(const char* key, std::vector<int>& into) {
    if (const json* v = take(key)) {
      if (!v->is_array()) bad(path(key), "expected an array of integers");
      std::vector<int> parsed;
      for (const json& e : *v) {
        if (!e.is_number_integer()) bad(path(key), "expected an array of integers");
        parsed.push_back(e.get<int>());
      }
      into = std::move(parsed);
    }
  }

  // nested section, or null when absent
  const json* child(const char* key) { return take(key); }

  std::string path(const char* key) const { return where_ + "." + key; }

  // call after all reads: anything not consumed is a typo or a misplaced key
  void finish() {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) bad(where_, "unknown key \"" + item.key() + "\"");
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_trap(const json& j, const std::string& where, TrapConfig& t) {
  Section s(j, where);
  s.read("axial_freq", t.axial_freq);
  s.read("radial_freq", t.radial_freq);
  s.read("radial_freq_high", t.radial_freq_high);
  s.read("mass_amu", t.mass_amu);
  s.read("single_qubit_scale", t.single_qubit_scale);
  s.read("two_qubit_scale", t.two_qubit_scale);
  s.finish();
}

void read_beam(const json& j, const std::string& where, BeamProfile& b) {
  Section s(j, where);
  s.read("waist1_um", b.waist1_um);
  s.read("waist2_um", b.waist2_um);
  s.read("peak_rabi", b.peak_rabi);
  s.read("coma", b.coma);
  s.read("phase_tilt", b.phase_tilt);
  s.read("phase_curvature", b.phase_curvature);
  s.read("wavelength_nm", b.wavelength_nm);
  s.finish();
}

void read_timings(const json& j, const std::string& where, Timings& t) {
  Section s(j, where);
  s.read("transport_us", t.transport_us);
  s.read("well_change_us", t.well_change_us);
  s.read("pi2_slice_us", t.pi2_slice_us);
  s.read("slice_overhead_us", t.slice_overhead_us);
  s.read("ms_gate_us", t.ms_gate_us);
  s.read("ms_loops", t.ms_loops);
  s.finish();
}

void read_noise(const json& j, const std::string& where, NoiseModel& n) {
  Section s(j, where);
  s.read("amp_static", n.amp_static);
  s.read("amp_sigma", n.amp_sigma);
  s.read("ms_amp_sigma", n.ms_amp_sigma);
  s.read("dephase_rate", n.dephase_rate);
  s.read("prep_flip", n.prep_flip);
  s.read("detection_fidelity", n.detection_fidelity);
  s.read("pmt_crosstalk", n.pmt_crosstalk);
  s.finish();
}

json trap_to_json(const TrapConfig& t) {
  return {{"axial_freq", t.axial_freq},
          {"radial_freq", t.radial_freq},
          {"radial_freq_high", t.radial_freq_high},
          {"mass_amu", t.mass_amu},
          {"single_qubit_scale", t.single_qubit_scale},
          {"two_qubit_scale", t.two_qubit_scale}};
}

json beam_to_json(const BeamProfile& b) {
  return {{"waist1_um", b.waist1_um},
          {"waist2_um", b.waist2_um},
          {"peak_rabi", b.peak_rabi},
          {"coma", b.coma},
          {"phase_tilt", b.phase_tilt},
          {"phase_curvature", b.phase_curvature},
          {"wavelength_nm", b.wavelength_nm}};
}

json timings_to_json(const Timings& t) {
  return {{"transport_us", t.transport_us},
          {"well_change_us", t.well_change_us},
          {"pi2_slice_us", t.pi2_slice_us},
          {"slice_overhead_us", t.slice_overhead_us},
          {"ms_gate_us", t.ms_gate_us},
          {"ms_loops", t.ms_loops}};
}

json noise_to_json(const NoiseModel& n) {
  return {{"amp_static", n.amp_static},
          {"amp_sigma", n.amp_sigma},
          {"ms_amp_sigma", n.ms_amp_sigma},
          {"dephase_rate", n.dephase_rate},
          {"prep_flip", n.prep_flip},
          {"detection_fidelity", n.detection_fidelity},
          {"pmt_crosstalk", n.pmt_crosstalk}};
}

void check(bool ok, const std::string& what) {
  if (!ok) throw InputError("config: " + what);
}

}  // namespace

void RbConfig::validate() const {
  check(!lengths.empty(), "characterize.rb.lengths must not be empty");
  for (int l : lengths) check(l >= 1, "characterize.rb.lengths entries must be >= 1");
  check(n_seq >= 1, "characterize.rb.n_seq must be >= 1");
  check(shots >= 1, "characterize.rb.shots must be >= 1");
}

void BellConfig::validate() const {
  check(pair_first >= 0, "characterize.bell.pair_first must be >= 0");
  check(n_phases >= 4, "characterize.bell.n_phases must be >= 4");
  check(shots >= 1, "characterize.bell.shots must be >= 1");
}

void QptConfig::validate() const {
  check(shots_per_setting >= 1, "characterize.qpt.shots_per_setting must be >= 1");
  check(bootstrap_resamples >= 0, "characterize.qpt.bootstrap_resamples must be >= 0");
}

ChainSetup RunConfig::chain() const { return ChainSetup::build(n_ions, trap, beam); }

void RunConfig::validate() const {
  check(n_ions >= 1 && n_ions <= 10, "chain.n_ions must be between 1 and 10");
  check(trap.axial_freq > 0 && trap.radial_freq > 0 && trap.radial_freq_high > 0,
        "chain.trap frequencies must be positive");
  check(trap.mass_amu > 0, "chain.trap.mass_amu must be positive");
  check(trap.single_qubit_scale > 0 && trap.two_qubit_scale > 0,
        "chain.trap well scales must be positive");
  check(beam.waist1_um > 0 && beam.waist2_um > 0, "chain.beam waists must be positive");
  check(beam.peak_rabi > 0, "chain.beam.peak_rabi must be positive");
  check(beam.wavelength_nm > 0, "chain.beam.wavelength_nm must be positive");
  check(compile.direction == 1 || compile.direction == -1,
        "compiler.direction must be 1 or -1");
  check(compile.verify_tol > 0, "compiler.verify_tol must be positive");
  const Timings& t = compile.timings;
  check(t.transport_us > 0 && t.well_change_us > 0 && t.pi2_slice_us > 0 &&
            t.slice_overhead_us >= 0 && t.ms_gate_us > 0,
        "compiler.timings durations must be positive");
  check(t.ms_loops >= 1, "compiler.timings.ms_loops must be >= 1");
  noise.validate();
  check(shots >= 1, "sim.shots must be >= 1");
  rb.validate();
  bell.validate();
  qpt.validate();
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  RunConfig cfg;
  Section root(j, "config");

  if (const json* c = root.child("chain")) {
    Section s(*c, "chain");
    s.read("n_ions", cfg.n_ions);
    if (const json* t = s.child("trap")) read_trap(*t, "chain.trap", cfg.trap);
    if (const json* b = s.child("beam")) read_beam(*b, "chain.beam", cfg.beam);
    s.finish();
  }

  if (const json* c = root.child("compiler")) {
    Section s(*c, "compiler");
    s.read("composite", cfg.compile.composite);
    s.read("echo", cfg.compile.echo);
    s.read("optimize_cnot", cfg.compile.optimize_cnot);
    s.read("direction", cfg.compile.direction);
    s.read("verify_tol", cfg.compile.verify_tol);
    if (const json* t = s.child("timings"))
      read_timings(*t, "compiler.timings", cfg.compile.timings);
    s.finish();
  }

  if (const json* c = root.child("sim")) {
    Section s(*c, "sim");
    if (const json* n = s.child("noise")) read_noise(*n, "sim.noise", cfg.noise);
    s.read("shots", cfg.shots);
    s.read("seed", cfg.seed);
    s.finish();
  }

  if (const json* c = root.child("characterize")) {
    Section s(*c, "characterize");
    if (const json* r = s.child("rb")) {
      Section sr(*r, "characterize.rb");
      sr.read("lengths", cfg.rb.lengths);
      sr.read("n_seq", cfg.rb.n_seq);
      sr.read("shots", cfg.rb.shots);
      sr.read("fix_offset", cfg.rb.fix_offset);
      sr.finish();
    }
    if (const json* b = s.child("bell")) {
      Section sb(*b, "characterize.bell");
      sb.read("pair_first", cfg.bell.pair_first);
      sb.read("n_phases", cfg.bell.n_phases);
      sb.read("shots", cfg.bell.shots);
      sb.finish();
    }
    if (const json* q = s.child("qpt")) {
      Section sq(*q, "characterize.qpt");
      sq.read("shots_per_setting", cfg.qpt.shots_per_setting);
      sq.read("bootstrap_resamples", cfg.qpt.bootstrap_resamples);
      sq.finish();
    }
    s.finish();
  }

  if (const json* c = root.child("cli")) {
    Section s(*c, "cli");
    s.read("out", cfg.out);
    s.finish();
  }

  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open \"" + path + "\"");
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["chain"] = {{"n_ions", cfg.n_ions},
                {"trap", trap_to_json(cfg.trap)},
                {"beam", beam_to_json(cfg.beam)}};
  j["compiler"] = {{"composite", cfg.compile.composite},
                   {"echo", cfg.compile.echo},
                   {"optimize_cnot", cfg.compile.optimize_cnot},
                   {"direction", cfg.compile.direction},
                   {"verify_tol", cfg.compile.verify_tol},
                   {"timings", timings_to_json(cfg.compile.timings)}};
  j["sim"] = {{"noise", noise_to_json(cfg.noise)},
              {"shots", cfg.shots},
              {"seed", cfg.seed}};
  j["characterize"] = {{"rb",
                        {{"lengths", cfg.rb.lengths},
                         {"n_seq", cfg.rb.n_seq},
                         {"shots", cfg.rb.shots},
                         {"fix_offset", cfg.rb.fix_offset}}},
                       {"bell",
                        {{"pair_first", cfg.bell.pair_first},
                         {"n_phases", cfg.bell.n_phases},
                         {"shots", cfg.bell.shots}}},
                       {"qpt",
                        {{"shots_per_setting", cfg.qpt.shots_per_setting},
                         {"bootstrap_resamples", cfg.qpt.bootstrap_resamples}}}};
  j["cli"] = {{"out", cfg.out}};
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json(cfg);
  std::uint64_t h = 1469598103934665603ull;  // fnv-1a offset basis
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig default_config() {
  RunConfig cfg;
  // calibrated against the published error budget: single-qubit
  // benchmarking fidelity near 0.97, entangling-gate parity fidelity at
  // the high end of the reported pairs, readout error near 0.02 per ion.
  // the phase-walk rate carries most of the budget; amplitude jitter is
  // composite-suppressed and the readout numbers are the platform defaults
  cfg.noise.amp_sigma = 0.005;
  cfg.noise.ms_amp_sigma = 0.05;
  cfg.noise.dephase_rate = 1.1e-3;
  cfg.noise.prep_flip = 0.005;
  cfg.noise.detection_fidelity = 0.98;
  cfg.noise.pmt_crosstalk = 0.05;
  return cfg;
}

}  // namespace iontrap
