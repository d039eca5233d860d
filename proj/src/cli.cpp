#include "iontrap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "iontrap/characterize.hpp"
#include "iontrap/compiler.hpp"
#include "iontrap/config.hpp"
#include "iontrap/sim.hpp"

namespace iontrap {

namespace {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open \"" + path + "\"");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write \"" + path + "\"");
  out << text;
}

// ion 0 is the leftmost character (highest readout bit)
std::string state_bits(std::uint32_t s, int n_ions) {
  std::string bits(n_ions, '0');
  for (int i = 0; i < n_ions; ++i)
    if (s >> (n_ions - 1 - i) & 1u) bits[i] = '1';
  return bits;
}

// 95% Wilson score interval for a binomial frequency
std::pair<double, double> wilson(double freq, int shots) {
  const double z = 1.959963984540054;
  const double n = shots;
  const double denom = 1.0 + z * z / n;
  const double center = (freq + z * z / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(freq * (1.0 - freq) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

json populations_json(const RunResult& r) {
  const RVec freq = r.frequencies();
  json rows = json::array();
  for (int s = 0; s < freq.size(); ++s) {
    const auto [lo, hi] = wilson(freq(s), static_cast<int>(r.shots.size()));
    rows.push_back({{"state", state_bits(s, r.n_ions)},
                    {"count", r.counts[s]},
                    {"frequency", freq(s)},
                    {"ci_low", lo},
                    {"ci_high", hi}});
  }
  return rows;
}

const char* op_type_name(OpType t) {
  switch (t) {
    case OpType::transport: return "transport";
    case OpType::well_change: return "well_change";
    case OpType::pulse: return "pulse";
    case OpType::ms_segment: return "ms_segment";
    case OpType::echo_flip: return "echo_flip";
  }
  return "?";
}

const char* well_name(WellMode w) {
  switch (w) {
    case WellMode::cooling: return "cooling";
    case WellMode::single_qubit: return "single_qubit";
    case WellMode::two_qubit: return "two_qubit";
    case WellMode::detection: return "detection";
  }
  return "?";
}

json op_json(const ProgramOp& op, std::size_t index) {
  json o{{"index", index},
         {"type", op_type_name(op.type)},
         {"duration_us", op.duration_us},
         {"text", op_to_string(op)}};
  switch (op.type) {
    case OpType::transport:
      o["slot"] = op.primary;
      o["dir"] = op.dir;
      o["offset_um"] = op.offset_um;
      break;
    case OpType::well_change:
      o["well"] = well_name(op.well);
      break;
    case OpType::pulse:
      o["theta"] = op.theta;
      o["phi"] = op.phi;
      o["composite"] = op.composite;
      break;
    case OpType::ms_segment:
      o["pair_first"] = op.pair_first;
      o["area"] = op.area;
      o["loops"] = op.loops;
      o["phi"] = op.phi;
      break;
    case OpType::echo_flip:
      o["ion"] = op.primary;
      o["phi"] = op.phi;
      break;
  }
  return o;
}

std::string csv_number(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

// every command returns its payload plus an optional csv trace
struct Report {
  json payload;
  std::string csv;
};

Report cmd_compile(const CircuitIR& ir, const RunConfig& cfg) {
  const CompileResult res = compile_circuit(ir, cfg.chain(), cfg.compile);
  const PulseProgram& prog = res.program;

  json ops = json::array();
  std::ostringstream csv;
  csv << "index,type,duration_us,detail\n";
  for (std::size_t i = 0; i < prog.ops.size(); ++i) {
    ops.push_back(op_json(prog.ops[i], i));
    csv << i << ',' << op_type_name(prog.ops[i].type) << ','
        << csv_number(prog.ops[i].duration_us) << ",\"" << op_to_string(prog.ops[i])
        << "\"\n";
  }

  json payload{{"gates", ir.gates.size()},
               {"ops", ops},
               {"totals",
                {{"ops", prog.ops.size()},
                 {"pulses", prog.count(OpType::pulse)},
                 {"transports", prog.count(OpType::transport)},
                 {"well_changes", prog.count(OpType::well_change)},
                 {"ms_segments", prog.count(OpType::ms_segment)},
                 {"echo_flips", prog.count(OpType::echo_flip)},
                 {"duration_us", prog.total_duration_us()}}},
               {"verify_distance", res.verify_distance}};
  return {std::move(payload), csv.str()};
}

Report cmd_run(const CircuitIR& ir, const RunConfig& cfg) {
  const ChainSetup setup = cfg.chain();
  const CompileResult res = compile_circuit(ir, setup, cfg.compile);
  const RunResult r = run_program(res.program, setup, cfg.noise, cfg.shots, cfg.seed);

  std::ostringstream csv;
  csv << "state,count,frequency,ci_low,ci_high\n";
  const RVec freq = r.frequencies();
  for (int s = 0; s < freq.size(); ++s) {
    const auto [lo, hi] = wilson(freq(s), cfg.shots);
    csv << state_bits(s, r.n_ions) << ',' << r.counts[s] << ',' << csv_number(freq(s))
        << ',' << csv_number(lo) << ',' << csv_number(hi) << "\n";
  }

  json payload{{"shots", cfg.shots},
               {"duration_us", r.duration_us},
               {"populations", populations_json(r)}};
  return {std::move(payload), csv.str()};
}

// population trace over gate-scan truncation points: step k keeps only the
// first k drive ops of the compiled program
Report cmd_scan(const CircuitIR& ir, const RunConfig& cfg) {
  const ChainSetup setup = cfg.chain();
  const CompileResult res = compile_circuit(ir, setup, cfg.compile);
  const std::vector<RunResult> trace =
      gate_scan(res.program, setup, cfg.noise, cfg.shots, cfg.seed);

  const int dim = 1 << cfg.n_ions;
  json states = json::array();
  for (int s = 0; s < dim; ++s) states.push_back(state_bits(s, cfg.n_ions));

  std::ostringstream csv;
  csv << "applied_drive_ops";
  for (int s = 0; s < dim; ++s) csv << ",p_" << state_bits(s, cfg.n_ions);
  csv << "\n";

  json steps = json::array();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const RVec freq = trace[k].frequencies();
    json row = json::array();
    csv << k;
    for (int s = 0; s < dim; ++s) {
      row.push_back(freq(s));
      csv << ',' << csv_number(freq(s));
    }
    csv << "\n";
    steps.push_back({{"applied_drive_ops", k}, {"frequencies", row}});
  }

  json payload{{"shots", cfg.shots},
               {"drive_ops", static_cast<int>(trace.size()) - 1},
               {"states", states},
               {"steps", steps}};
  return {std::move(payload), csv.str()};
}

// one preparation circuit per combination of {I, H, X} across the chain;
// ion 0 is the leftmost letter of the label
Report cmd_batch(const RunConfig& cfg) {
  const ChainSetup setup = cfg.chain();
  long n_circuits = 1;
  for (int i = 0; i < cfg.n_ions; ++i) n_circuits *= 3;

  const int dim = 1 << cfg.n_ions;
  json states = json::array();
  for (int s = 0; s < dim; ++s) states.push_back(state_bits(s, cfg.n_ions));

  std::ostringstream csv;
  csv << "circuit";
  for (int s = 0; s < dim; ++s) csv << ",p_" << state_bits(s, cfg.n_ions);
  csv << "\n";

  const char letters[3] = {'I', 'H', 'X'};
  json rows = json::array();
  for (long c = 0; c < n_circuits; ++c) {
    std::string label(cfg.n_ions, 'I');
    std::ostringstream text;
    long rem = c;
    for (int ion = cfg.n_ions - 1; ion >= 0; --ion) {
      const int g = static_cast<int>(rem % 3);
      rem /= 3;
      label[ion] = letters[g];
      if (g == 1) text << "H " << ion << "\n";
      if (g == 2) text << "X " << ion << "\n";
    }
    const CircuitIR ir = parse_circuit(text.str(), cfg.n_ions);
    const CompileResult res = compile_circuit(ir, setup, cfg.compile);
    const RunResult r = run_program(res.program, setup, cfg.noise, cfg.shots,
                                    mix_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    const RVec freq = r.frequencies();
    json row = json::array();
    csv << label;
    for (int s = 0; s < dim; ++s) {
      row.push_back(freq(s));
      csv << ',' << csv_number(freq(s));
    }
    csv << "\n";
    rows.push_back({{"circuit", label}, {"frequencies", row}});
  }

  json payload{{"shots", cfg.shots},
               {"circuits", static_cast<int>(n_circuits)},
               {"states", states},
               {"rows", rows}};
  return {std::move(payload), csv.str()};
}

Report cmd_rb(const RunConfig& cfg) {
  RbOptions opts;
  opts.shots = cfg.rb.shots;
  opts.fix_offset = cfg.rb.fix_offset;
  opts.compile = cfg.compile;
  const RbExperiment exp = rb_run(cfg.n_ions, cfg.rb.lengths, cfg.rb.n_seq, cfg.chain(),
                                  cfg.noise, cfg.seed, opts);

  std::ostringstream csv;
  csv << "length,mean_survival,sigma\n";
  for (std::size_t i = 0; i < exp.lengths.size(); ++i)
    csv << exp.lengths[i] << ',' << csv_number(exp.mean_survival[i]) << ','
        << csv_number(exp.sigma_survival[i]) << "\n";

  json payload{{"lengths", exp.lengths},
               {"n_seq", exp.n_seq},
               {"shots", cfg.rb.shots},
               {"mean_survival", exp.mean_survival},
               {"sigma_survival", exp.sigma_survival},
               {"fit",
                {{"eps_g", exp.fit.eps_g},
                 {"err_g", exp.fit.err_g},
                 {"eps_m", exp.fit.eps_m},
                 {"err_m", exp.fit.err_m},
                 {"offset", exp.fit.offset},
                 {"chi2_red", exp.fit.chi2_red}}},
               {"avg_clifford_fidelity", 1.0 - exp.fit.eps_g}};
  return {std::move(payload), csv.str()};
}

Report cmd_bell(const RunConfig& cfg) {
  if (cfg.bell.pair_first + 1 >= cfg.n_ions)
    throw InputError("bell: pair (" + std::to_string(cfg.bell.pair_first) + ", " +
                     std::to_string(cfg.bell.pair_first + 1) + ") does not fit a " +
                     std::to_string(cfg.n_ions) + "-ion chain");
  const ChainSetup setup = cfg.chain();
  const PulseProgram prog =
      ms_sequence(cfg.n_ions, cfg.bell.pair_first, pi / 4.0, setup, cfg.compile);

  std::vector<double> phases(cfg.bell.n_phases);
  for (int k = 0; k < cfg.bell.n_phases; ++k)
    phases[k] = 2.0 * pi * k / cfg.bell.n_phases;
  const ParityScan scan = parity_scan(prog, setup, cfg.bell.pair_first, phases,
                                      cfg.bell.shots, cfg.noise, cfg.seed,
                                      cfg.compile.timings);

  std::ostringstream csv;
  csv << "phase,parity\n";
  for (std::size_t i = 0; i < scan.phases.size(); ++i)
    csv << csv_number(scan.phases[i]) << ',' << csv_number(scan.parity[i]) << "\n";

  json payload{{"pair", {cfg.bell.pair_first, cfg.bell.pair_first + 1}},
               {"shots", cfg.bell.shots},
               {"p00", scan.p00},
               {"p11", scan.p11},
               {"amplitude", scan.amplitude},
               {"phase0", scan.phase0},
               {"offset", scan.offset},
               {"fidelity", scan.fidelity},
               {"fidelity_rounded", round_half_even(scan.fidelity, 2)},
               {"p1_unaddressed", scan.p1_unaddressed},
               {"post_selected", scan.post_selected}};
  return {std::move(payload), csv.str()};
}

Report cmd_qpt(const RunConfig& cfg) {
  if (cfg.n_ions != 2)
    throw InputError("qpt: the tomographed gate needs chain.n_ions = 2");
  QptOptions opts;
  opts.shots_per_setting = cfg.qpt.shots_per_setting;
  opts.bootstrap_resamples = cfg.qpt.bootstrap_resamples;
  opts.compile = cfg.compile;
  const ProcessMatrix pm = qpt_cnot(cfg.chain(), cfg.noise, cfg.seed, opts);

  json re = json::array(), im = json::array();
  std::ostringstream csv;
  csv << "m,n,re,im\n";
  for (int m = 0; m < 16; ++m) {
    json rrow = json::array(), irow = json::array();
    for (int n = 0; n < 16; ++n) {
      rrow.push_back(pm.chi(m, n).real());
      irow.push_back(pm.chi(m, n).imag());
      csv << m << ',' << n << ',' << csv_number(pm.chi(m, n).real()) << ','
          << csv_number(pm.chi(m, n).imag()) << "\n";
    }
    re.push_back(rrow);
    im.push_back(irow);
  }

  json payload{{"shots_per_setting", cfg.qpt.shots_per_setting},
               {"bootstrap_resamples", cfg.qpt.bootstrap_resamples},
               {"fidelity", pm.fidelity},
               {"fidelity_mean", pm.fidelity_mean},
               {"fidelity_std", pm.fidelity_std},
               {"chi_re", re},
               {"chi_im", im}};
  return {std::move(payload), csv.str()};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"trapped-ion circuit compiler and shot simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string circuit_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::optional<std::string> out_base;
  std::optional<int> ions;
  bool scan_flag = false;
  bool batch_flag = false;

  auto add_common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--config", config_path, "json run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_base, "report file basename (.json and .csv)");
    sub->add_option("--ions", ions, "chain length override")->check(CLI::Range(1, 10));
    if (stochastic) {
      sub->add_option("--seed", seed, "rng seed override");
      sub->add_option("--shots", shots, "shot count override")
          ->check(CLI::PositiveNumber);
    }
  };
  auto add_circuit = [&](CLI::App* sub) {
    sub->add_option("circuit", circuit_path, "gate list file")
        ->required()
        ->check(CLI::ExistingFile);
  };

  CLI::App* compile = app.add_subcommand("compile", "compile a circuit to pulses");
  add_common(compile, false);
  add_circuit(compile);

  CLI::App* run = app.add_subcommand("run", "compile and simulate a circuit");
  add_common(run, true);
  run->add_option("circuit", circuit_path, "gate list file")->check(CLI::ExistingFile);
  run->add_flag("--scan", scan_flag, "sweep gate-scan truncation points");
  run->add_flag("--batch", batch_flag,
                "run all {I,H,X} preparation circuits instead of a file");

  CLI::App* scan = app.add_subcommand("scan", "population trace over gate truncations");
  add_common(scan, true);
  add_circuit(scan);

  CLI::App* rb = app.add_subcommand("rb", "randomized benchmarking");
  add_common(rb, true);

  CLI::App* bell = app.add_subcommand("bell", "parity-scan Bell certification");
  add_common(bell, true);

  CLI::App* qpt = app.add_subcommand("qpt", "process tomography of the compiled cnot");
  add_common(qpt, true);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (ions) cfg.n_ions = *ions;
    if (seed) cfg.seed = *seed;
    if (out_base) cfg.out = *out_base;

    std::string command;
    Report report;
    if (app.got_subcommand(compile)) {
      command = "compile";
      cfg.validate();
      report = cmd_compile(parse_circuit(read_text_file(circuit_path), cfg.n_ions), cfg);
    } else if (app.got_subcommand(run) || app.got_subcommand(scan)) {
      if (shots) cfg.shots = *shots;
      cfg.validate();
      if (app.got_subcommand(scan) || scan_flag) {
        command = "scan";
        if (batch_flag) throw InputError("run: --scan and --batch are exclusive");
        if (circuit_path.empty()) throw InputError("run: missing circuit file");
        report = cmd_scan(parse_circuit(read_text_file(circuit_path), cfg.n_ions), cfg);
      } else if (batch_flag) {
        command = "batch";
        if (!circuit_path.empty())
          throw InputError("run: --batch takes no circuit file");
        report = cmd_batch(cfg);
      } else {
        command = "run";
        if (circuit_path.empty()) throw InputError("run: missing circuit file");
        report = cmd_run(parse_circuit(read_text_file(circuit_path), cfg.n_ions), cfg);
      }
    } else if (app.got_subcommand(rb)) {
      command = "rb";
      if (shots) cfg.rb.shots = *shots;
      cfg.validate();
      report = cmd_rb(cfg);
    } else if (app.got_subcommand(bell)) {
      command = "bell";
      if (shots) cfg.bell.shots = *shots;
      cfg.validate();
      report = cmd_bell(cfg);
    } else {
      command = "qpt";
      if (shots) cfg.qpt.shots_per_setting = *shots;
      cfg.validate();
      report = cmd_qpt(cfg);
    }

    json full{{"command", command},
              {"config_hash", config_hash(cfg)},
              {"seed", cfg.seed},
              {"n_ions", cfg.n_ions}};
    full.update(report.payload);
    const std::string text = full.dump(2) + "\n";
    out << text;
    if (!cfg.out.empty()) {
      write_text_file(cfg.out + ".json", text);
      if (!report.csv.empty()) write_text_file(cfg.out + ".csv", report.csv);
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace iontrap
