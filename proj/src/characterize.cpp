#include "iontrap/characterize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "iontrap/chain.hpp"
#include "iontrap/pauli.hpp"
#include "iontrap/pulse.hpp"

namespace iontrap {

namespace {

double bright_marginal(const RVec& p, int n_ions, int ion) {
  double acc = 0.0;
  for (int b = 0; b < p.size(); ++b)
    if ((b >> (n_ions - 1 - ion)) & 1) acc += p(b);
  return acc;
}

// decay model and its gradient in the raw parameters p (per-Clifford
// retention), A (twice the contrast), B (offset)
double decay(double p, double a, double b, double len) {
  return b + 0.5 * a * std::pow(p, len);
}

struct FitData {
  std::vector<double> len, y, w;  // w = 1/sigma^2, or 1 in the unweighted case
  bool weighted = true;
};

double chi2_of(const FitData& d, double p, double a, double b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.len.size(); ++i) {
    const double r = d.y[i] - decay(p, a, b, d.len[i]);
    acc += d.w[i] * r * r;
  }
  return acc;
}

}  // namespace

RVec corrected_populations(const RunResult& r, const NoiseModel& noise) {
  if (noise.pmt_crosstalk <= 0.0) return r.frequencies();
  NoiseModel spill;
  spill.pmt_crosstalk = noise.pmt_crosstalk;
  return infer_populations(r.counts, r.n_ions, spill);
}

double rb_model(double eps_g, double eps_m, double length) {
  return 0.5 + 0.5 * (1.0 - 2.0 * eps_m) * std::pow(1.0 - 2.0 * eps_g, length);
}

RbFit fit_rb(const std::vector<double>& lengths, const std::vector<double>& survival,
             const std::vector<double>& sigma, bool fix_offset) {
  const std::size_t n = lengths.size();
  const std::size_t k = fix_offset ? 2 : 3;
  if (survival.size() != n || (!sigma.empty() && sigma.size() != n))
    throw InputError("fit_rb: lengths, survival, and sigma must align");
  if (n < k) throw InputError("fit_rb: not enough points for the fit");

  FitData d;
  d.len = lengths;
  d.y = survival;
  d.weighted = !sigma.empty() &&
               std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 1e-12; });
  d.w.resize(n, 1.0);
  if (d.weighted)
    for (std::size_t i = 0; i < n; ++i) d.w[i] = 1.0 / (sigma[i] * sigma[i]);

  // initial guess from the endpoints of the decay
  const auto lo = std::min_element(lengths.begin(), lengths.end()) - lengths.begin();
  const auto hi = std::max_element(lengths.begin(), lengths.end()) - lengths.begin();
  double p = 0.9, a = 0.9, b = 0.5;
  const double num = survival[lo] - 0.5, den = survival[hi] - 0.5;
  if (num > 1e-12 && den > 1e-12 && lengths[hi] > lengths[lo]) {
    p = std::clamp(std::pow(den / num, 1.0 / (lengths[hi] - lengths[lo])), 0.1, 1.0);
    a = std::clamp(2.0 * num / std::pow(p, lengths[lo]), 0.05, 1.5);
  }

  // damped Gauss-Newton on (p, A[, B])
  double lambda = 1e-3;
  double chi2 = chi2_of(d, p, a, b);
  for (int iter = 0; iter < 300; ++iter) {
    RMat jtj = RMat::Zero(k, k);
    RVec jtr = RVec::Zero(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double pl = std::pow(p, d.len[i]);
      RVec j(k);
      j(0) = 0.5 * a * d.len[i] * (p > 0 ? pl / p : 0.0);
      j(1) = 0.5 * pl;
      if (!fix_offset) j(2) = 1.0;
      const double r = d.y[i] - decay(p, a, b, d.len[i]);
      jtj += d.w[i] * j * j.transpose();
      jtr += d.w[i] * r * j;
    }
    RMat damped = jtj;
    for (std::size_t q = 0; q < k; ++q) damped(q, q) *= 1.0 + lambda;
    const RVec step = damped.ldlt().solve(jtr);
    const double pt = std::clamp(p + step(0), 1e-9, 1.0);
    const double at = std::clamp(a + step(1), -2.0, 2.0);
    const double bt = fix_offset ? b : std::clamp(b + step(2), -1.0, 2.0);
    const double trial = chi2_of(d, pt, at, bt);
    if (trial <= chi2) {
      const bool done = step.cwiseAbs().maxCoeff() < 1e-14;
      p = pt;
      a = at;
      b = bt;
      chi2 = trial;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (done) break;
    } else {
      lambda *= 5.0;
      if (lambda > 1e12) break;
    }
  }
  if (!std::isfinite(chi2)) throw NumericalError("fit_rb: fit did not converge");

  // covariance of the converged parameters
  RMat jtj = RMat::Zero(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double pl = std::pow(p, d.len[i]);
    RVec j(k);
    j(0) = 0.5 * a * d.len[i] * (p > 0 ? pl / p : 0.0);
    j(1) = 0.5 * pl;
    if (!fix_offset) j(2) = 1.0;
    jtj += d.w[i] * j * j.transpose();
  }
  RMat cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  const double dof = static_cast<double>(n - k);
  if (!d.weighted && dof > 0) cov *= chi2 / dof;  // scale by the residual variance

  RbFit fit;
  fit.eps_g = 0.5 * (1.0 - p);
  fit.eps_m = 0.5 * (1.0 - a);
  if (fix_offset) {
    fit.eps_g = std::clamp(fit.eps_g, 0.0, 0.5);
    fit.eps_m = std::clamp(fit.eps_m, 0.0, 0.5);
  }
  fit.err_g = 0.5 * std::sqrt(std::max(cov(0, 0), 0.0));
  fit.err_m = 0.5 * std::sqrt(std::max(cov(1, 1), 0.0));
  fit.offset = b;
  fit.chi2_red = dof > 0 ? chi2 / dof : 0.0;
  return fit;
}

RbExperiment rb_run(int n_ions, const std::vector<int>& lengths, int n_seq,
                    const ChainSetup& setup, const NoiseModel& noise, std::uint64_t seed,
                    const RbOptions& opts) {
  if (lengths.empty()) throw InputError("rb_run: no sequence lengths given");
  if (n_ions < 1 || n_seq < 1 || opts.shots < 1)
    throw InputError("rb_run: chain length, sequence count, and shots must be positive");
  const CliffordTable& table = clifford_table();
  const int x_idx = clifford_index(pauli_x());
  const bool injected = opts.injected_error >= 0.0;
  // a depolarizing channel of strength q mixes the state with I/2 after
  // every Clifford; the decay parameter is 1-q, so the fitted error is q/2
  const double q = 2.0 * opts.injected_error;

  RbExperiment ex;
  ex.lengths = lengths;
  ex.n_seq = n_seq;

  std::vector<double> fit_len, fit_y, fit_sigma;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const int length = lengths[li];
    std::vector<double> pool;
    for (int s = 0; s < n_seq; ++s) {
      std::mt19937_64 rng(mix_seed(mix_seed(seed, li), s));
      std::uniform_int_distribution<int> pick(0, 23);

      RbSequence sq;
      sq.length = length;
      sq.cliffords.assign(n_ions, std::vector<int>(length));
      sq.inversion.assign(n_ions, 0);
      sq.survival.assign(n_ions, 0.0);
      for (int ion = 0; ion < n_ions; ++ion) {
        int net = 0;
        for (int pass = 0; pass < length; ++pass) {
          const int g = pick(rng);
          sq.cliffords[ion][pass] = g;
          net = table.compose[g][net];
        }
        sq.inversion[ion] = table.compose[x_idx][table.inverse[net]];
      }

      if (injected) {
        for (int ion = 0; ion < n_ions; ++ion) {
          Mat2 rho = Mat2::Zero();
          rho(0, 0) = 1.0;
          for (int pass = 0; pass < length; ++pass) {
            const Mat2& u = table.u[sq.cliffords[ion][pass]];
            rho = (u * rho * u.adjoint()).eval();
            rho = ((1.0 - q) * rho + (0.5 * q) * Mat2::Identity()).eval();
          }
          const Mat2& inv = table.u[sq.inversion[ion]];
          rho = (inv * rho * inv.adjoint()).eval();
          const double p1 = rho(1, 1).real();
          const double flip = opts.injected_readout_flip;
          const double p_obs = std::clamp(flip + (1.0 - 2.0 * flip) * p1, 0.0, 1.0);
          std::binomial_distribution<int> shots(opts.shots, p_obs);
          sq.survival[ion] = static_cast<double>(shots(rng)) / opts.shots;
        }
      } else {
        CompilerState st = CompilerState::start(n_ions);
        std::vector<Mat2> targets(n_ions);
        for (int pass = 0; pass < length; ++pass) {
          for (int ion = 0; ion < n_ions; ++ion)
            targets[ion] = table.u[sq.cliffords[ion][pass]];
          compile_cascade(st, targets, setup, opts.compile, ZMode::free_rz);
        }
        for (int ion = 0; ion < n_ions; ++ion) targets[ion] = table.u[sq.inversion[ion]];
        compile_cascade(st, targets, setup, opts.compile, ZMode::free_rz);
        const RunResult r = run_program(st.prog, setup, noise, opts.shots,
                                        mix_seed(mix_seed(seed, 0xb000 + li), s));
        const RVec p = corrected_populations(r, noise);
        for (int ion = 0; ion < n_ions; ++ion)
          sq.survival[ion] = bright_marginal(p, n_ions, ion);
      }

      pool.insert(pool.end(), sq.survival.begin(), sq.survival.end());
      ex.sequences.push_back(std::move(sq));
    }

    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= static_cast<double>(pool.size());
    double var = 0.0;
    for (double v : pool) var += (v - mean) * (v - mean);
    const double sem = pool.size() > 1
                           ? std::sqrt(var / (pool.size() - 1) / pool.size())
                           : 0.0;
    ex.mean_survival.push_back(mean);
    ex.sigma_survival.push_back(sem);
    fit_len.push_back(static_cast<double>(length));
    fit_y.push_back(mean);
    fit_sigma.push_back(sem);
  }

  ex.fit = fit_rb(fit_len, fit_y, fit_sigma, opts.fix_offset);
  return ex;
}

double bell_fidelity(double p00, double p11, double amplitude) {
  const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(p00) || !in01(p11) || !in01(amplitude))
    throw InputError("bell_fidelity: inputs must lie in [0, 1]");
  if (p00 + p11 > 1.0 + 1e-9)
    throw InputError("bell_fidelity: pair populations exceed unity");
  return 0.5 * (p00 + p11) + 0.5 * amplitude;
}

double round_half_even(double x, int decimals) {
  if (decimals < 0 || decimals > 12)
    throw InputError("round_half_even: unsupported decimal count");
  const double scale = std::pow(10.0, decimals);
  // snap to a fine grid first, so a value meant to sit exactly on a tie
  // (0.845 at two decimals, say) is not nudged off it by representation
  const long long micro = std::llround(std::abs(x) * scale * 10000.0);
  long long units = micro / 10000;
  const long long rem = micro % 10000;
  if (rem > 5000 || (rem == 5000 && units % 2 != 0)) ++units;
  return std::copysign(static_cast<double>(units) / scale, x);
}

ParityScan parity_scan(const PulseProgram& prog, const ChainSetup& setup, int pair_first,
                       const std::vector<double>& phases, int shots,
                       const NoiseModel& noise, std::uint64_t seed,
                       const Timings& timings) {
  const int n = prog.n_ions;
  if (pair_first < 0 || pair_first + 1 >= n)
    throw InputError("parity_scan: pair outside the chain");
  if (phases.size() < 3)
    throw InputError("parity_scan: need at least three analysis phases");
  if (shots < 1) throw InputError("parity_scan: shots must be positive");

  const std::size_t bit_hi = 1u << (n - 1 - pair_first);
  const std::size_t bit_lo = 1u << (n - 2 - pair_first);
  const std::size_t spectator_mask = ((1u << n) - 1) & ~(bit_hi | bit_lo);

  ParityScan scan;
  scan.phases = phases;

  // pair populations and spectator build-up, no analysis pulse.  all
  // populations are read with the channel spill unmixed, the way the
  // detection system's joint bright-set determination reports them
  const RunResult pop = run_program(prog, setup, noise, shots, mix_seed(seed, 0xffff));
  const RVec pfree = corrected_populations(pop, noise);
  double acc = 0.0;
  int spectators = 0;
  for (int ion = 0; ion < n; ++ion) {
    if (ion == pair_first || ion == pair_first + 1) continue;
    acc += bright_marginal(pfree, n, ion);
    ++spectators;
  }
  scan.p1_unaddressed = spectators ? acc / spectators : 0.0;
  double kept = 0.0;
  for (int b = 0; b < pfree.size(); ++b)
    if ((b & spectator_mask) == 0) kept += pfree(b);
  if (kept < 1e-9)
    throw NumericalError("parity_scan: no population survives the spectator cut");
  scan.p00 = pfree(0) / kept;
  scan.p11 = pfree(bit_hi | bit_lo) / kept;

  // analysis block: one commanded half turn on the pair slot, which the
  // step drive delivers to both pair ions.  programs that end aligned on
  // the pair (the raw entangling sequence does) take the pulse directly;
  // anything else is re-aligned first
  ProgramCursor end;
  for (std::size_t i = 0; i < prog.ops.size(); ++i) cursor_advance(end, prog, setup, i);
  const bool on_pair = end.mode == WellMode::single_qubit && end.aligned &&
                       end.primary == pair_first && end.dir == 1;
  ProgramOp shuttle;
  shuttle.type = OpType::transport;
  shuttle.duration_us = timings.transport_us;
  shuttle.primary = pair_first;
  shuttle.dir = 1;
  shuttle.offset_um = setup.single_qubit.step_center_um(pair_first, 1);
  ProgramOp analyze;
  analyze.type = OpType::pulse;
  analyze.theta = 0.5 * pi;
  analyze.composite = true;
  analyze.duration_us = timings.pulse_us(analyze.theta, analyze.composite);

  for (std::size_t i = 0; i < phases.size(); ++i) {
    PulseProgram with = prog;
    analyze.phi = phases[i];
    if (!on_pair) with.ops.push_back(shuttle);
    with.ops.push_back(analyze);
    const RunResult r = run_program(with, setup, noise, shots, mix_seed(seed, i));
    std::uint64_t sel = 0;
    for (std::size_t b = 0; b < r.counts.size(); ++b)
      if ((b & spectator_mask) == 0) sel += r.counts[b];
    if (sel == 0) throw NumericalError("parity_scan: no shots survive the spectator cut");
    scan.post_selected += sel;
    const RVec pr = corrected_populations(r, noise);
    double par = 0.0;
    double norm = 0.0;
    for (int b = 0; b < pr.size(); ++b) {
      if ((b & spectator_mask) != 0) continue;
      const bool even = ((b & bit_hi) != 0) == ((b & bit_lo) != 0);
      par += (even ? 1.0 : -1.0) * pr(b);
      norm += pr(b);
    }
    if (norm < 1e-9)
      throw NumericalError("parity_scan: no population survives the spectator cut");
    scan.parity.push_back(par / norm);
  }

  // least squares against {cos 2phi, sin 2phi, 1}
  RMat basis(phases.size(), 3);
  RVec y(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    basis(i, 0) = std::cos(2.0 * phases[i]);
    basis(i, 1) = std::sin(2.0 * phases[i]);
    basis(i, 2) = 1.0;
    y(i) = scan.parity[i];
  }
  Eigen::ColPivHouseholderQR<RMat> qr(basis);
  if (qr.rank() < 3) throw InputError("parity_scan: analysis phases are degenerate");
  const RVec beta = qr.solve(y);
  scan.amplitude = std::min(1.0, std::hypot(beta(0), beta(1)));
  scan.phase0 = std::atan2(beta(1), beta(0));
  scan.offset = beta(2);
  scan.fidelity = bell_fidelity(scan.p00, scan.p11, scan.amplitude);
  return scan;
}

namespace {

// preparation gates for {|0>, |1>, |+>, |-y>} and the analysis gates that
// rotate each of those states back onto |0>
const std::array<Mat2, 4>& tomo_prep() {
  static const std::array<Mat2, 4> g{Mat2::Identity(), pauli_x(), gate_h(),
                                     r_phi(0.5 * pi, 0.0)};
  return g;
}

const std::array<Mat2, 4>& tomo_analysis() {
  static const std::array<Mat2, 4> g{Mat2::Identity(), pauli_x(), gate_h(),
                                     r_phi(0.5 * pi, pi)};
  return g;
}

Vec tomo_state(int k0, int k1) {
  return tensor(Vec(tomo_prep()[k0].col(0)), Vec(tomo_prep()[k1].col(0)));
}

// inverse of the linear map from chi to the 256 setting probabilities,
// computed once; the preparation and analysis sets are informationally
// complete, so the map is square and invertible
const Mat& qpt_design_inverse() {
  static const Mat inv = [] {
    Mat design(256, 256);
    for (int s = 0; s < 256; ++s) {
      const int prep = s / 16, ana = s % 16;
      const Vec in = tomo_state(prep / 4, prep % 4);
      const Vec out = tomo_state(ana / 4, ana % 4);
      Vec t(16);
      for (int m = 0; m < 16; ++m)
        t(m) = out.adjoint() * tensor(Mat(pauli(m / 4)), Mat(pauli(m % 4))) * in;
      for (int m = 0; m < 16; ++m)
        for (int nn = 0; nn < 16; ++nn) design(s, 16 * m + nn) = t(m) * std::conj(t(nn));
    }
    return Mat(design.inverse());
  }();
  return inv;
}

double process_overlap(const Mat& a, const Mat& b) { return (a * b).trace().real(); }

}  // namespace

Mat chi_of_unitary(const Mat& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw InputError("chi_of_unitary: expected a two-qubit unitary");
  const std::vector<cxd> c = pauli_expand(u);
  Vec cv(16);
  for (int m = 0; m < 16; ++m) cv(m) = c[m];
  return cv * cv.adjoint();
}

RVec qpt_probabilities(const Mat& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw InputError("qpt_probabilities: expected a two-qubit unitary");
  RVec p(256);
  for (int s = 0; s < 256; ++s) {
    const int prep = s / 16, ana = s % 16;
    const Vec in = tomo_state(prep / 4, prep % 4);
    const Vec out = tomo_state(ana / 4, ana % 4);
    p(s) = std::norm(cxd(out.adjoint() * u * in));
  }
  return p;
}

Mat qpt_linear(const RVec& p00) {
  if (p00.size() != 256)
    throw InputError("qpt_linear: need all 256 setting probabilities");
  Vec rhs(256);
  for (int s = 0; s < 256; ++s) rhs(s) = p00(s);
  const Vec chiv = qpt_design_inverse() * rhs;
  Mat chi(16, 16);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) chi(m, n) = chiv(16 * m + n);
  return 0.5 * (chi + chi.adjoint());
}

Mat qpt_reconstruct(const RVec& p00) {
  // the simplest projection onto the physical set.  alternatives (spectrum
  // thresholding, full maximum likelihood) slot in here; fidelities are
  // computed from the unprojected inversion either way, because any
  // positivity repair turns symmetric shot noise into a one-sided bias
  const Mat lin = qpt_linear(p00);
  Eigen::SelfAdjointEigenSolver<Mat> es(lin);
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  const double trace = lam.sum();
  if (!(trace > 1e-12))
    throw NumericalError("qpt_reconstruct: projection collapsed the process");
  lam /= trace;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<double> qpt_bootstrap(const RVec& p00, const Mat& chi_ideal, int shots,
                                  int resamples, std::uint64_t seed) {
  if (shots < 1 || resamples < 0) throw InputError("qpt_bootstrap: bad sample counts");
  std::mt19937_64 rng(mix_seed(seed, 0xb00737ull));
  std::vector<double> out;
  out.reserve(resamples);
  RVec pb(256);
  for (int r = 0; r < resamples; ++r) {
    for (int s = 0; s < 256; ++s) {
      std::binomial_distribution<int> draw(shots, std::clamp(p00(s), 0.0, 1.0));
      pb(s) = static_cast<double>(draw(rng)) / shots;
    }
    out.push_back(process_overlap(chi_ideal, qpt_linear(pb)));
  }
  return out;
}

ProcessMatrix qpt_process(const CircuitIR& circuit, const Mat& ideal,
                          const ChainSetup& setup, const NoiseModel& noise,
                          std::uint64_t seed, const QptOptions& opts) {
  if (circuit.n_ions != 2) throw InputError("qpt_process: two-ion chains only");
  if (opts.shots_per_setting < 1) throw InputError("qpt_process: shots must be positive");
  for (const CircuitGate& g : circuit.gates)
    if (g.kind == CircuitGate::Kind::prepare || g.kind == CircuitGate::Kind::measure)
      throw InputError("qpt_process: strip preparation and measurement markers");

  RVec probs(256);
  for (int s = 0; s < 256; ++s) {
    const int prep = s / 16, ana = s % 16;
    CircuitIR full;
    full.n_ions = 2;
    const auto add = [&full](int ion, const Mat2& g) {
      CircuitGate cg;
      cg.ion = ion;
      cg.u = g;
      full.gates.push_back(cg);
    };
    if (prep / 4) add(0, tomo_prep()[prep / 4]);
    if (prep % 4) add(1, tomo_prep()[prep % 4]);
    full.gates.insert(full.gates.end(), circuit.gates.begin(), circuit.gates.end());
    if (ana / 4) add(0, tomo_analysis()[ana / 4]);
    if (ana % 4) add(1, tomo_analysis()[ana % 4]);

    const CompileResult compiled = compile_circuit(full, setup, opts.compile);
    const RunResult r = run_program(compiled.program, setup, noise,
                                    opts.shots_per_setting, mix_seed(seed, s));
    probs(s) = corrected_populations(r, noise)(0);
  }

  ProcessMatrix out;
  out.chi_ideal = chi_of_unitary(ideal);
  out.chi = qpt_reconstruct(probs);
  out.fidelity = process_overlap(out.chi_ideal, qpt_linear(probs));
  out.bootstrap = qpt_bootstrap(probs, out.chi_ideal, opts.shots_per_setting,
                                opts.bootstrap_resamples, mix_seed(seed, 0x400));
  if (!out.bootstrap.empty()) {
    double mean = 0.0;
    for (double f : out.bootstrap) mean += f;
    mean /= out.bootstrap.size();
    double var = 0.0;
    for (double f : out.bootstrap) var += (f - mean) * (f - mean);
    out.fidelity_mean = mean;
    out.fidelity_std =
        out.bootstrap.size() > 1 ? std::sqrt(var / (out.bootstrap.size() - 1)) : 0.0;
  }
  return out;
}

ProcessMatrix qpt_cnot(const ChainSetup& setup, const NoiseModel& noise,
                       std::uint64_t seed, const QptOptions& opts) {
  return qpt_process(parse_circuit("CNOT 0 1", 2), Mat(gate_cnot()), setup, noise, seed,
                     opts);
}

}  // namespace iontrap
