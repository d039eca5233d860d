#pragma once

// measurement analyses on top of the simulator: randomized benchmarking
// with the exponential survival fit, parity-scan Bell certification, and
// two-qubit process tomography with parametric bootstrap errors

#include <cstdint>
#include <vector>

#include "iontrap/compiler.hpp"
#include "iontrap/linalg.hpp"
#include "iontrap/program.hpp"
#include "iontrap/sim.hpp"

namespace iontrap {

// survival decay 1/2 + 1/2 (1 - 2 eps_m) (1 - 2 eps_g)^L
double rb_model(double eps_g, double eps_m, double length);

struct RbFit {
  double eps_g = 0.0, eps_m = 0.0;
  double err_g = 0.0, err_m = 0.0;  // standard errors from the fit covariance
  double offset = 0.5;              // free only in the three-parameter variant
  double chi2_red = 0.0;
};

// weighted least squares of the decay model.  The default fixes the offset
// at one half; the three-parameter variant (fix_offset = false) lets it
// float, which can drive eps_m negative on real decays and is therefore
// not the default
RbFit fit_rb(const std::vector<double>& lengths, const std::vector<double>& survival,
             const std::vector<double>& sigma, bool fix_offset = true);

struct RbSequence {
  int length = 0;
  std::vector<std::vector<int>> cliffords;  // [ion][pass], table indices
  std::vector<int> inversion;               // closing gate per ion, takes it to |1>
  std::vector<double> survival;             // measured P(bright) per ion
};

struct RbOptions {
  int shots = 160;
  bool fix_offset = true;
  // >= 0 switches from compiled pulses to error injection: Cliffords are
  // applied as exact matrices and each is followed by a depolarizing
  // channel of this average gate error, plus a symmetric readout flip
  double injected_error = -1.0;
  double injected_readout_flip = 0.0;
  CompileOptions compile{};
};

struct RbExperiment {
  std::vector<int> lengths;
  int n_seq = 0;
  std::vector<RbSequence> sequences;
  std::vector<double> mean_survival;   // per length, pooled over ions and sequences
  std::vector<double> sigma_survival;  // standard error of that mean
  RbFit fit;
};

// random Clifford sequences of every requested length, each closed by the
// inverting gate, executed and fit to the decay model
RbExperiment rb_run(int n_ions, const std::vector<int>& lengths, int n_seq,
                    const ChainSetup& setup, const NoiseModel& noise, std::uint64_t seed,
                    const RbOptions& opts = RbOptions{});

// measured frequencies with the calibrated imaging spill unmixed, matching
// the joint bright-set determination the detection chain performs; the
// per-ion threshold error and preparation error remain in the numbers
RVec corrected_populations(const RunResult& r, const NoiseModel& noise);

// F = (P00 + P11)/2 + amplitude/2; rejects inputs outside [0, 1] and
// pair populations that exceed unity together
double bell_fidelity(double p00, double p11, double amplitude);

// banker's rounding at a fixed number of decimals, for table-style reports
double round_half_even(double x, int decimals);

struct ParityScan {
  std::vector<double> phases;
  std::vector<double> parity;   // P00 + P11 - P01 - P10 at each phase
  double amplitude = 0.0;       // fitted oscillation amplitude in 2*phi
  double phase0 = 0.0;
  double offset = 0.0;
  double p00 = 0.0, p11 = 0.0;  // pair populations without the analysis pulse
  double fidelity = 0.0;
  double p1_unaddressed = 0.0;  // mean bright build-up on spectator ions
  long post_selected = 0;       // shots kept by the spectator-dark cut
};

// appends one analysis half-turn on the pair slot per phase, measures the
// pair parity (post-selected on dark spectators for longer chains), and
// fits a sinusoid in twice the analysis phase
ParityScan parity_scan(const PulseProgram& prog, const ChainSetup& setup, int pair_first,
                       const std::vector<double>& phases, int shots,
                       const NoiseModel& noise, std::uint64_t seed,
                       const Timings& timings = Timings{});

// rank-one process matrix of a unitary in the two-qubit Pauli basis,
// chi = c c^dag with c the Pauli expansion coefficients
Mat chi_of_unitary(const Mat& u);

// exact P(00) of every preparation/analysis setting for a unitary process
// (synthetic tomography data); setting order is 16*prep + analysis with
// prep = 4*(state of ion 0) + state of ion 1 over {|0>, |1>, |+>, |-y>}
RVec qpt_probabilities(const Mat& u);

// linear inversion of the 256 setting probabilities, Hermitized but not
// projected; overlaps against this matrix are unbiased under shot noise
Mat qpt_linear(const RVec& p00);

// linear inversion followed by the physical projection: Hermitize, clip
// negative eigenvalues, renormalize the trace
Mat qpt_reconstruct(const RVec& p00);

// fidelity spread of linear-inversion overlaps from binomial resamples of
// the setting probabilities at the given shot count
std::vector<double> qpt_bootstrap(const RVec& p00, const Mat& chi_ideal, int shots,
                                  int resamples, std::uint64_t seed);

struct ProcessMatrix {
  Mat chi;        // measured, after projection
  Mat chi_ideal;  // target process
  // overlap of chi_ideal with the unprojected inversion.  the projection
  // biases overlaps low by the clipped shot noise, so the fidelity is taken
  // before it; the estimate is unbiased but not confined to [0, 1]
  double fidelity = 0.0;
  std::vector<double> bootstrap;  // resampled fidelities
  double fidelity_mean = 0.0, fidelity_std = 0.0;
};

struct QptOptions {
  int shots_per_setting = 10000;
  int bootstrap_resamples = 10000;
  CompileOptions compile{};
};

// full tomography of a two-ion circuit: wrap it in all 16x16 preparation
// and analysis settings, compile and run each, take the inferred P(00),
// reconstruct chi, and bootstrap the fidelity against the ideal process
ProcessMatrix qpt_process(const CircuitIR& circuit, const Mat& ideal,
                          const ChainSetup& setup, const NoiseModel& noise,
                          std::uint64_t seed, const QptOptions& opts = QptOptions{});

// tomography of the standard compiled CNOT (control ion 0)
ProcessMatrix qpt_cnot(const ChainSetup& setup, const NoiseModel& noise,
                       std::uint64_t seed, const QptOptions& opts = QptOptions{});

}  // namespace iontrap
