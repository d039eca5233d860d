#pragma once

// shot-level simulator
//
// executes a pulse program as a noisy state-vector evolution and models
// state preparation, threshold detection, and camera channel crosstalk.
// Every shot is seeded from (seed, shot index), so a single shot can be
// reproduced without rerunning the batch

#include <cstdint>
#include <vector>

#include "iontrap/linalg.hpp"
#include "iontrap/program.hpp"

namespace iontrap {

struct NoiseModel {
  double amp_static = 0.0;     // fixed fractional Rabi-rate offset
  double amp_sigma = 0.0;      // per-shot Gaussian fractional Rabi-rate error
  double ms_amp_sigma = 0.0;   // per-shot fractional area error of entangling segments
  // variance (rad^2) per us of each ion's z phase walk, accrued over idle
  // and transport time (drive windows track the beam's rotating frame)
  double dephase_rate = 0.0;
  double prep_flip = 0.0;      // probability an ion is prepared in |1> instead of |0>
  double detection_fidelity = 1.0;  // probability one ion's readout is correct
  double pmt_crosstalk = 0.0;  // probability a bright ion registers on a neighbor channel

  // true when every channel is exact: the run reduces to sampling the pure
  // final state
  bool is_ideal() const;
  void validate() const;
};

struct ShotRecord {
  std::uint32_t observed = 0;  // readout bits, ion 0 in the highest bit
};

struct RunResult {
  int n_ions = 0;
  std::uint64_t seed = 0;
  std::vector<ShotRecord> shots;
  std::vector<std::uint64_t> counts;  // histogram over observed bit patterns
  double duration_us = 0.0;           // wall-clock length of one executed program

  RVec frequencies() const;
};

// derive an independent child seed for a named stream; results for
// distinct streams are decorrelated from each other and from the parent,
// so batches can be split without replanning seeds
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// number of drive ops (pulses, entangling segments, echo flips) in a program
int count_drive_ops(const PulseProgram& prog);

// simulate `shots` executions.  applied_drive_ops >= 0 keeps only that many
// leading drive ops (the rest are removed, transports and well changes
// stay), which is the gate-scan override used by population traces
RunResult run_program(const PulseProgram& prog, const ChainSetup& setup,
                      const NoiseModel& noise, int shots, std::uint64_t seed,
                      int applied_drive_ops = -1);

// confusion matrix of the detection model: entry (o, s) is the probability
// of reading out pattern o when the register collapsed to basis state s
RMat confusion_matrix(int n_ions, const NoiseModel& noise);

// maximum-likelihood populations under the detection confusion model,
// found by expectation-maximization on the multinomial likelihood; the
// output is a probability vector (sums to one)
RVec infer_populations(const std::vector<std::uint64_t>& counts, int n_ions,
                       const NoiseModel& noise);

// run every drive-op prefix of the program: element k of the result used
// only the first k drive ops
std::vector<RunResult> gate_scan(const PulseProgram& prog, const ChainSetup& setup,
                                 const NoiseModel& noise, int shots, std::uint64_t seed);

}  // namespace iontrap
