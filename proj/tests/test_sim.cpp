#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "iontrap/chain.hpp"
#include "iontrap/compiler.hpp"
#include "iontrap/program.hpp"
#include "iontrap/sim.hpp"

using namespace iontrap;

namespace {

ChainSetup make_setup(int n) { return ChainSetup::build(n, TrapConfig{}, BeamProfile{}); }

PulseProgram compile_text(const std::string& text, int n,
                          const CompileOptions& opts = CompileOptions{}) {
  return compile_circuit(parse_circuit(text, n), make_setup(n), opts).program;
}

// marginal bright probability of one ion from a run histogram
double bright_frac(const RunResult& r, int ion) {
  std::uint64_t hits = 0, total = 0;
  for (std::size_t b = 0; b < r.counts.size(); ++b) {
    total += r.counts[b];
    if ((b >> (r.n_ions - 1 - ion)) & 1) hits += r.counts[b];
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("noise model rejects out-of-range parameters") {
  const auto bad = [](auto&& tweak) {
    NoiseModel m;
    tweak(m);
    CHECK_THROWS_AS(m.validate(), InputError);
  };
  bad([](NoiseModel& m) { m.pmt_crosstalk = 0.5; });
  bad([](NoiseModel& m) { m.pmt_crosstalk = -0.01; });
  bad([](NoiseModel& m) { m.detection_fidelity = 0.5; });
  bad([](NoiseModel& m) { m.detection_fidelity = 1.2; });
  bad([](NoiseModel& m) { m.prep_flip = 0.6; });
  bad([](NoiseModel& m) { m.amp_sigma = -0.1; });
  bad([](NoiseModel& m) { m.dephase_rate = -1.0; });

  NoiseModel ok;
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.is_ideal());
  ok.amp_static = 0.01;
  CHECK_FALSE(ok.is_ideal());
}

TEST_CASE("runs are reproducible and shots are seeded independently") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("H 0\nCNOT 0 1", 2);
  NoiseModel noise;
  noise.amp_sigma = 0.05;
  noise.dephase_rate = 1e-4;
  noise.detection_fidelity = 0.98;

  const RunResult a = run_program(prog, setup, noise, 100, 77);
  const RunResult b = run_program(prog, setup, noise, 100, 77);
  REQUIRE(a.shots.size() == 100);
  for (int s = 0; s < 100; ++s) CHECK(a.shots[s].observed == b.shots[s].observed);
  CHECK(a.counts == b.counts);

  // each shot draws from its own stream, so a shorter run is a prefix
  const RunResult head = run_program(prog, setup, noise, 5, 77);
  for (int s = 0; s < 5; ++s) CHECK(head.shots[s].observed == a.shots[s].observed);

  const RunResult c = run_program(prog, setup, noise, 100, 78);
  bool differs = false;
  for (int s = 0; s < 100; ++s) differs |= c.shots[s].observed != a.shots[s].observed;
  CHECK(differs);
}

TEST_CASE("ideal run samples the pure final state") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("H 0\nCNOT 0 1", 2);
  const int shots = 10000;
  const RunResult r = run_program(prog, setup, NoiseModel{}, shots, 5);

  const RVec f = r.frequencies();
  CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Bell state: only 00 and 11 ever appear, each at one half
  CHECK(r.counts[1] == 0);
  CHECK(r.counts[2] == 0);
  const double sigma = 0.5 / std::sqrt(static_cast<double>(shots));
  CHECK(std::abs(f(0) - 0.5) < 4 * sigma);
  CHECK(std::abs(f(3) - 0.5) < 4 * sigma);
  CHECK(r.duration_us == doctest::Approx(prog.total_duration_us()));
}

TEST_CASE("detection fidelity darkens bright ions and vice versa") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("X 0", 2);
  NoiseModel noise;
  noise.detection_fidelity = 0.98;

  const int shots = 10000;
  const RunResult r = run_program(prog, setup, noise, shots, 11);
  const double s_bright = std::sqrt(0.98 * 0.02 / shots);
  CHECK(std::abs(bright_frac(r, 0) - 0.98) < 4 * s_bright);
  CHECK(std::abs(bright_frac(r, 1) - 0.02) < 4 * s_bright);
}

TEST_CASE("camera crosstalk lights up neighbors of bright ions") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("X 0", 2);
  NoiseModel noise;
  noise.detection_fidelity = 0.98;
  noise.pmt_crosstalk = 0.05;

  const int shots = 10000;
  const RunResult r = run_program(prog, setup, noise, shots, 13);
  // ion 1 is dark but sits next to a bright ion: misread unless both its
  // own readout and the neighbor bleed stay quiet
  const double expect = 1.0 - (1.0 - 0.02) * (1.0 - 0.05);
  const double sigma = std::sqrt(expect * (1 - expect) / shots);
  CHECK(std::abs(bright_frac(r, 1) - expect) < 4 * sigma);

  // and the matrix agrees with the sampler's own model
  const RMat conf = confusion_matrix(2, noise);
  for (int s = 0; s < 4; ++s)
    CHECK(conf.col(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(conf(0, 0) == doctest::Approx(0.98 * 0.98));
  // state |10>: P(read 11) = P(ion0 bright) * P(ion1 bright)
  CHECK(conf(3, 2) == doctest::Approx(0.98 * expect));
}

TEST_CASE("population inference undoes the detection model") {
  NoiseModel noise;
  noise.detection_fidelity = 0.95;
  noise.pmt_crosstalk = 0.05;
  const RMat conf = confusion_matrix(2, noise);

  SUBCASE("exact expected counts round-trip") {
    RVec p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    const RVec mixed = conf * p;
    std::vector<std::uint64_t> counts(4);
    for (int o = 0; o < 4; ++o)
      counts[o] = static_cast<std::uint64_t>(std::llround(1e9 * mixed(o)));
    const RVec inferred = infer_populations(counts, 2, noise);
    CHECK(std::abs(inferred.sum() - 1.0) < 1e-9);
    CHECK((inferred - p).cwiseAbs().maxCoeff() < 1e-5);
  }

  SUBCASE("all-dark counts infer the all-dark state") {
    const std::vector<std::uint64_t> counts{100000, 0, 0, 0};
    const RVec inferred = infer_populations(counts, 2, noise);
    CHECK(inferred(0) > 1.0 - 1e-6);
  }

  SUBCASE("sampled five-percent admixture at 1e5 shots") {
    RVec p(4);
    p << 0.95, 0.0, 0.0, 0.05;
    const RVec mixed = conf * p;
    std::mt19937_64 rng(2024);
    std::vector<std::uint64_t> counts(4, 0);
    std::discrete_distribution<int> draw(mixed.data(), mixed.data() + 4);
    for (int s = 0; s < 100000; ++s) ++counts[draw(rng)];
    const RVec inferred = infer_populations(counts, 2, noise);
    CHECK(std::abs(inferred.sum() - 1.0) < 1e-9);
    CHECK((inferred - p).cwiseAbs().maxCoeff() < 0.01);
  }

  SUBCASE("bad inputs are rejected") {
    CHECK_THROWS_AS(infer_populations({1, 2, 3}, 2, noise), InputError);
    CHECK_THROWS_AS(infer_populations({0, 0, 0, 0}, 2, noise), InputError);
  }
}

TEST_CASE("simulated readout and inference agree at a million shots") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("X 0", 2);
  NoiseModel noise;
  noise.detection_fidelity = 0.98;
  noise.pmt_crosstalk = 0.05;

  const RunResult r = run_program(prog, setup, noise, 1000000, 99);
  const RVec inferred = infer_populations(r.counts, 2, noise);
  CHECK(inferred(2) > 1.0 - 1e-3);
  CHECK(std::abs(inferred.sum() - 1.0) < 1e-9);
}

TEST_CASE("gate scan replays every drive prefix") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("X 0\nCNOT 0 1", 2);
  const int total = count_drive_ops(prog);
  REQUIRE(total >= 3);

  const std::vector<RunResult> trace = gate_scan(prog, setup, NoiseModel{}, 400, 21);
  REQUIRE(static_cast<int>(trace.size()) == total + 1);

  // nothing applied: still |00>; everything applied: the CNOT fires
  CHECK(trace.front().counts[0] == 400);
  CHECK(trace.back().counts[3] == 400);

  // each prefix matches the truncated ideal propagator
  std::vector<std::size_t> drive_at;
  for (std::size_t i = 0; i < prog.ops.size(); ++i) {
    const OpType t = prog.ops[i].type;
    if (t == OpType::pulse || t == OpType::ms_segment || t == OpType::echo_flip)
      drive_at.push_back(i);
  }
  drive_at.push_back(prog.ops.size());
  for (int k = 0; k <= total; ++k) {
    const Mat u = program_unitary_truncated(prog, setup, drive_at[k]);
    const RVec f = trace[k].frequencies();
    for (int b = 0; b < 4; ++b) CHECK(std::abs(f(b) - std::norm(u(b, 0))) < 0.1);
  }
}

TEST_CASE("entangled population degrades as amplitude noise grows") {
  const ChainSetup setup = make_setup(2);
  CompileOptions opts;
  opts.composite = false;  // bare pulses, so Rabi-rate spread actually bites
  const PulseProgram prog = compile_text("X 0\nCNOT 0 1", 2, opts);

  std::vector<double> mean;
  for (const double sigma : {0.0, 0.15, 0.3}) {
    NoiseModel noise;
    noise.amp_sigma = sigma;
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const RunResult r = run_program(prog, setup, noise, 400, 1000 + seed);
      acc += r.frequencies()(3);
    }
    mean.push_back(acc / 10.0);
  }
  CHECK(mean[0] > 0.999);
  CHECK(mean[0] > mean[1] + 0.01);
  CHECK(mean[1] > mean[2] + 0.01);
}

TEST_CASE("composite pulses absorb a static Rabi-rate offset") {
  const ChainSetup setup = make_setup(2);
  NoiseModel noise;
  noise.amp_static = 0.1;

  CompileOptions bare;
  bare.composite = false;
  const PulseProgram pb = compile_text("X 0\nCNOT 0 1", 2, bare);
  const PulseProgram pc = compile_text("X 0\nCNOT 0 1", 2);

  // the deterministic offset leaves the state pure, so frequencies are exact
  const double f_bare = run_program(pb, setup, noise, 20000, 3).frequencies()(3);
  const double f_comp = run_program(pc, setup, noise, 20000, 3).frequencies()(3);
  CHECK(f_comp > 0.985);
  CHECK(f_comp > f_bare + 0.02);
}

TEST_CASE("dephasing contrast follows the phase-walk variance") {
  const ChainSetup setup = make_setup(2);
  CompileOptions opts;
  opts.composite = false;
  const PulseProgram seed_prog = compile_text("R 0 pi/2 0", 2, opts);
  REQUIRE(seed_prog.ops[0].type == OpType::transport);
  REQUIRE(seed_prog.ops[1].type == OpType::pulse);

  // two half turns about the same axis with an idle shuttle between them:
  // a Ramsey sequence whose contrast decays with the phase variance
  const ProgramOp shuttle = seed_prog.ops[0];
  const ProgramOp half = seed_prog.ops[1];
  PulseProgram prog;
  prog.n_ions = 2;
  prog.ops = {shuttle, half, shuttle, half};

  NoiseModel noise;
  noise.dephase_rate = 0.005;
  // only the idle shuttle between the two half turns adds phase variance;
  // the walk does not run during drive windows
  const double var = noise.dephase_rate * shuttle.duration_us;
  const double expect = 0.5 * (1.0 + std::exp(-0.5 * var));

  const RunResult r = run_program(prog, setup, noise, 20000, 8);
  CHECK(std::abs(bright_frac(r, 0) - expect) < 0.02);

  // with no idle window between the halves the flip stays essentially full
  PulseProgram tight;
  tight.n_ions = 2;
  tight.ops = {shuttle, half, half};
  const RunResult r2 = run_program(tight, setup, noise, 20000, 8);
  CHECK(bright_frac(r2, 0) > 0.995);
}

TEST_CASE("preparation flips act even on an empty program") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("", 2);
  REQUIRE(prog.ops.empty());

  NoiseModel noise;
  noise.prep_flip = 0.25;
  const int shots = 10000;
  const RunResult r = run_program(prog, setup, noise, shots, 4);
  const double sigma = std::sqrt(0.25 * 0.75 / shots);
  CHECK(std::abs(bright_frac(r, 0) - 0.25) < 4 * sigma);
  CHECK(std::abs(bright_frac(r, 1) - 0.25) < 4 * sigma);

  // flips on different ions are independent
  const double f11 = r.frequencies()(3);
  CHECK(std::abs(f11 - 0.0625) < 4 * std::sqrt(0.0625 * 0.9375 / shots));
}

TEST_CASE("drive truncation keeps transports but rejects overruns") {
  const ChainSetup setup = make_setup(2);
  const PulseProgram prog = compile_text("CNOT 0 1", 2);
  const int total = count_drive_ops(prog);

  const RunResult r = run_program(prog, setup, NoiseModel{}, 1, 0, 0);
  CHECK(r.counts[0] == 1);
  // every transport and well change still executes, only drives are dropped
  CHECK(r.duration_us == doctest::Approx(prog.total_duration_us() -
                                         119 * 5 - 169));
  CHECK_THROWS_AS(run_program(prog, setup, NoiseModel{}, 1, 0, total + 1), InputError);
}
