#pragma once

// physical pulse programs: the op list a compiled circuit turns into, plus
// the exact noiseless executor that both the compiler's self-check and the
// shot simulator are built on.
//
// an op list is interpreted against a fixed beam: transports re-align the
// chain so a given addressing slot sits at the beam, well changes swap the
// axial confinement preset, and pulse / ms_segment / echo_flip ops drive
// whatever the current alignment exposes.  all per-ion responses go through
// ChainModel, so compiler and simulator can never disagree about crosstalk.

#include <string>
#include <vector>

#include "iontrap/chain.hpp"
#include "iontrap/linalg.hpp"
#include "iontrap/pulse.hpp"

namespace iontrap {

// wall-clock bookkeeping used when emitting ops
struct Timings {
  double transport_us = 100.0;
  double well_change_us = 50.0;
  double pi2_slice_us = 4.0;      // one pi/2 of laser-on time
  double slice_overhead_us = 3.0; // AOM switching between slices
  double ms_gate_us = 169.0;      // full entangling gate (all loops)
  int ms_loops = 2;

  // drive-frame angular frequency of one phase-space loop (rad/s)
  double ms_loop_freq() const { return 2.0 * pi * ms_loops / (ms_gate_us * 1e-6); }
  double pulse_us(double theta, bool composite) const;
};

enum class OpType { transport, well_change, pulse, ms_segment, echo_flip };

struct ProgramOp {
  OpType type = OpType::transport;
  double duration_us = 0.0;

  // transport: the addressing slot the chain is aligned to afterwards
  // (primary ion of the cascade step, walk direction), and the beam-frame
  // chain offset for reporting.  echo_flip reuses `primary` for its ion.
  int primary = 0;
  int dir = 1;
  double offset_um = 0.0;

  // well_change
  WellMode well = WellMode::single_qubit;

  // pulse: equatorial rotation through theta, commanded axis phase phi
  // (each ion adds its own optical phase on top); composite selects PB1.
  // ms_segment and echo_flip reuse phi as the shared drive phase.
  double theta = 0.0;
  double phi = 0.0;
  bool composite = true;

  // ms_segment: addressed pair and the signed geometric area of this
  // segment (the full gate splits into 2^d equal segments when echoed)
  int pair_first = 0;
  double area = 0.0;
  int loops = 0;
};

struct PulseProgram {
  int n_ions = 0;
  std::vector<ProgramOp> ops;

  double total_duration_us() const;
  int count(OpType t) const;
};

// single chain in both axial presets used by a program
struct ChainSetup {
  ChainModel single_qubit;
  ChainModel two_qubit;

  static ChainSetup build(int n_ions, const TrapConfig& trap, const BeamProfile& beam);
  int n_ions() const { return single_qubit.n_ions(); }
};

// the pulse train an op commands, before any per-ion phase offset
std::vector<PulseSegment> pulse_train(double theta, double phi, bool composite);

// ordering rules: pulses only while aligned in the single-qubit well,
// entangling ops only inside a two-qubit well bracket aligned on their
// pair, and the program must end back in the single-qubit well.
// throws InputError with the offending op index.
void validate_program(const PulseProgram& prog, const ChainSetup& setup);

// walk state shared by validation, execution, and the shot simulator
struct ProgramCursor {
  WellMode mode = WellMode::single_qubit;
  bool aligned = false;
  int primary = 0;
  int dir = 1;
};

// advance over op i with the same legality checks validate_program applies
void cursor_advance(ProgramCursor& c, const PulseProgram& prog, const ChainSetup& setup,
                    std::size_t i);

// per-ion response factors of a pulse or echo flip at the cursor; amp
// scales every rotation angle (a fractional Rabi-rate error)
std::vector<Mat2> pulse_factors(const ProgramOp& op, const ProgramCursor& c,
                                const ChainSetup& setup, double amp = 1.0);

// full-register unitary of one entangling segment; area_scale models a
// fractional error of the accumulated geometric area
Mat ms_segment_unitary(const ProgramOp& op, const ChainSetup& setup,
                       double area_scale = 1.0);

// exact unitary of the whole program (no noise, no sampling); the
// reference every compiled program is checked against
Mat program_unitary(const PulseProgram& prog, const ChainSetup& setup);

// unitary of the program truncated after `applied_ops` ops, with later
// pulses suppressed but transports and well changes still executed (the
// gate-scan override used by the population-trace diagnostic)
Mat program_unitary_truncated(const PulseProgram& prog, const ChainSetup& setup,
                              int applied_ops);

std::string op_to_string(const ProgramOp& op);

}  // namespace iontrap
