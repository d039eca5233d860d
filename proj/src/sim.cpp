#include "iontrap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "iontrap/chain.hpp"

namespace iontrap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d49bb133111aebull;
  return x ^ (x >> 31);
}

std::mt19937_64 shot_rng(std::uint64_t seed, std::uint64_t shot) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(shot + 1)));
}

void apply_one_qubit(Vec& psi, const Mat2& u, int ion, int n) {
  const long stride = 1L << (n - 1 - ion);
  const long dim = psi.size();
  for (long base = 0; base < dim; ++base) {
    if (base & stride) continue;
    const cxd a = psi(base), b = psi(base | stride);
    psi(base) = u(0, 0) * a + u(0, 1) * b;
    psi(base | stride) = u(1, 0) * a + u(1, 1) * b;
  }
}

void apply_z_kicks(Vec& psi, const std::vector<double>& delta, int n) {
  const long dim = psi.size();
  for (long i = 0; i < dim; ++i) {
    double phase = 0.0;
    for (int j = 0; j < n; ++j)
      phase += ((i >> (n - 1 - j)) & 1) ? 0.5 * delta[j] : -0.5 * delta[j];
    psi(i) *= std::exp(ii * phase);
  }
}

// probability channel j reads bright given the collapsed basis state:
// its own readout with fidelity f, plus light bleeding from each bright
// neighbor with probability c
double p_bright(int j, long state, int n, const NoiseModel& noise) {
  const bool lit = (state >> (n - 1 - j)) & 1;
  double dark = lit ? 1.0 - noise.detection_fidelity : noise.detection_fidelity;
  for (int k : {j - 1, j + 1}) {
    if (k < 0 || k >= n) continue;
    if ((state >> (n - 1 - k)) & 1) dark *= 1.0 - noise.pmt_crosstalk;
  }
  return 1.0 - dark;
}

// keep only the first `keep` drive ops; transports and well changes stay
PulseProgram truncate_drives(const PulseProgram& prog, int keep) {
  PulseProgram out;
  out.n_ions = prog.n_ions;
  int seen = 0;
  for (const ProgramOp& op : prog.ops) {
    const bool drive = op.type == OpType::pulse || op.type == OpType::ms_segment ||
                       op.type == OpType::echo_flip;
    if (drive && seen >= keep) continue;
    if (drive) ++seen;
    out.ops.push_back(op);
  }
  return out;
}

long sample_index(const RVec& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double x = uni(rng);
  for (long i = 0; i < p.size(); ++i) {
    x -= p(i);
    if (x <= 0.0) return i;
  }
  return p.size() - 1;
}

// one noisy pass over the program; the state randomness (amplitude draw,
// dephasing walk) comes from rng, which may be null for the deterministic
// part of the model
Vec evolve(const PulseProgram& prog, const ChainSetup& setup, const NoiseModel& noise,
           std::mt19937_64* rng, long start_state) {
  const int n = prog.n_ions;
  const long dim = 1L << n;
  Vec psi = Vec::Zero(dim);
  psi(start_state) = 1.0;

  std::normal_distribution<double> gauss(0.0, 1.0);
  double amp = 1.0 + noise.amp_static;
  double ms_scale = 1.0;
  if (rng && noise.amp_sigma > 0.0) amp += noise.amp_sigma * gauss(*rng);
  if (rng && noise.ms_amp_sigma > 0.0) ms_scale += noise.ms_amp_sigma * gauss(*rng);

  ProgramCursor c;
  for (std::size_t i = 0; i < prog.ops.size(); ++i) {
    cursor_advance(c, prog, setup, i);
    const ProgramOp& op = prog.ops[i];
    switch (op.type) {
      case OpType::transport:
      case OpType::well_change: break;
      case OpType::pulse:
      case OpType::echo_flip: {
        const std::vector<Mat2> factors = pulse_factors(op, c, setup, amp);
        for (int j = 0; j < n; ++j)
          if (!factors[j].isIdentity(0.0)) apply_one_qubit(psi, factors[j], j, n);
        break;
      }
      case OpType::ms_segment:
        psi = (ms_segment_unitary(op, setup, ms_scale) * psi).eval();
        break;
    }
    // the walk accrues while the chain idles or moves; during a drive the
    // qubit tracks the beam's rotating frame, so drive ops contribute none
    if (rng && noise.dephase_rate > 0.0 && op.duration_us > 0.0 &&
        (op.type == OpType::transport || op.type == OpType::well_change)) {
      std::vector<double> delta(n);
      const double sigma = std::sqrt(noise.dephase_rate * op.duration_us);
      for (int j = 0; j < n; ++j) delta[j] = sigma * gauss(*rng);
      apply_z_kicks(psi, delta, n);
    }
  }
  return psi;
}

std::uint32_t sample_readout(long state, int n, const NoiseModel& noise,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uint32_t obs = 0;
  for (int j = 0; j < n; ++j)
    if (uni(rng) < p_bright(j, state, n, noise)) obs |= 1u << (n - 1 - j);
  return obs;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(0x517cc1b727220a95ull + stream));
}

bool NoiseModel::is_ideal() const {
  return amp_static == 0.0 && amp_sigma == 0.0 && ms_amp_sigma == 0.0 &&
         dephase_rate == 0.0 && prep_flip == 0.0 && detection_fidelity == 1.0 &&
         pmt_crosstalk == 0.0;
}

void NoiseModel::validate() const {
  if (amp_sigma < 0.0 || ms_amp_sigma < 0.0 || dephase_rate < 0.0)
    throw InputError("noise model: spreads and rates must be non-negative");
  if (prep_flip < 0.0 || prep_flip > 0.5)
    throw InputError("noise model: preparation flip must lie in [0, 0.5]");
  if (detection_fidelity <= 0.5 || detection_fidelity > 1.0)
    throw InputError("noise model: detection fidelity must lie in (0.5, 1]");
  if (pmt_crosstalk < 0.0 || pmt_crosstalk >= 0.5)
    throw InputError("noise model: camera crosstalk must lie in [0, 0.5)");
}

RVec RunResult::frequencies() const {
  RVec f = RVec::Zero(counts.size());
  const double total = static_cast<double>(shots.size());
  if (total == 0) return f;
  for (std::size_t i = 0; i < counts.size(); ++i)
    f(static_cast<long>(i)) = counts[i] / total;
  return f;
}

int count_drive_ops(const PulseProgram& prog) {
  int k = 0;
  for (const ProgramOp& op : prog.ops)
    if (op.type == OpType::pulse || op.type == OpType::ms_segment ||
        op.type == OpType::echo_flip)
      ++k;
  return k;
}

RunResult run_program(const PulseProgram& prog, const ChainSetup& setup,
                      const NoiseModel& noise, int shots, std::uint64_t seed,
                      int applied_drive_ops) {
  noise.validate();
  if (shots < 0) throw InputError("run_program: negative shot count");
  if (applied_drive_ops > count_drive_ops(prog))
    throw InputError("run_program: more drive ops requested than the program has");
  PulseProgram truncated;
  const PulseProgram* runp = &prog;
  if (applied_drive_ops >= 0) {
    truncated = truncate_drives(prog, applied_drive_ops);
    runp = &truncated;
  }
  const PulseProgram& run = *runp;
  validate_program(run, setup);

  const int n = run.n_ions;
  const long dim = 1L << n;
  RunResult out;
  out.n_ions = n;
  out.seed = seed;
  out.counts.assign(dim, 0);
  out.duration_us = run.total_duration_us();
  out.shots.reserve(shots);

  // without per-shot state randomness the final state is common to every
  // shot, so the quantum part runs once and only readout is sampled
  const bool frozen_state = noise.amp_sigma == 0.0 && noise.ms_amp_sigma == 0.0 &&
                            noise.dephase_rate == 0.0 && noise.prep_flip == 0.0;
  RVec frozen_probs;
  if (frozen_state) frozen_probs = evolve(run, setup, noise, nullptr, 0).cwiseAbs2();

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int s = 0; s < shots; ++s) {
    std::mt19937_64 rng = shot_rng(seed, s);
    long collapsed;
    if (frozen_state) {
      collapsed = sample_index(frozen_probs, rng);
    } else {
      long start = 0;
      for (int j = 0; j < n; ++j)
        if (uni(rng) < noise.prep_flip) start |= 1L << (n - 1 - j);
      const Vec psi = evolve(run, setup, noise, &rng, start);
      collapsed = sample_index(psi.cwiseAbs2(), rng);
    }
    ShotRecord rec;
    rec.observed = sample_readout(collapsed, n, noise, rng);
    out.shots.push_back(rec);
    ++out.counts[rec.observed];
  }
  return out;
}

RMat confusion_matrix(int n_ions, const NoiseModel& noise) {
  noise.validate();
  const long dim = 1L << n_ions;
  RMat c(dim, dim);
  for (long s = 0; s < dim; ++s)
    for (long o = 0; o < dim; ++o) {
      double p = 1.0;
      for (int j = 0; j < n_ions; ++j) {
        const double pb = p_bright(j, s, n_ions, noise);
        p *= ((o >> (n_ions - 1 - j)) & 1) ? pb : 1.0 - pb;
      }
      c(o, s) = p;
    }
  return c;
}

RVec infer_populations(const std::vector<std::uint64_t>& counts, int n_ions,
                       const NoiseModel& noise) {
  const long dim = 1L << n_ions;
  if (static_cast<long>(counts.size()) != dim)
    throw InputError("infer_populations: counts must have one entry per basis state");
  double total = 0.0;
  for (std::uint64_t c : counts) total += static_cast<double>(c);
  if (total == 0.0) throw InputError("infer_populations: no counts");

  const RMat conf = confusion_matrix(n_ions, noise);
  RVec p = RVec::Constant(dim, 1.0 / dim);
  for (int iter = 0; iter < 20000; ++iter) {
    RVec mix = conf * p;  // predicted observation distribution
    RVec next = RVec::Zero(dim);
    for (long o = 0; o < dim; ++o) {
      if (counts[o] == 0) continue;
      if (mix(o) <= 0.0) continue;
      const double w = counts[o] / (total * mix(o));
      for (long s = 0; s < dim; ++s) next(s) += p(s) * conf(o, s) * w;
    }
    const double step = (next - p).cwiseAbs().maxCoeff();
    p = next;
    p /= p.sum();  // keep the simplex exact against rounding
    if (step < 1e-13) break;
  }
  return p;
}

std::vector<RunResult> gate_scan(const PulseProgram& prog, const ChainSetup& setup,
                                 const NoiseModel& noise, int shots, std::uint64_t seed) {
  const int total = count_drive_ops(prog);
  std::vector<RunResult> out;
  out.reserve(total + 1);
  for (int k = 0; k <= total; ++k)
    out.push_back(run_program(prog, setup, noise, shots, mix_seed(seed, k), k));
  return out;
}

}  // namespace iontrap
