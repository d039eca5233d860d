#pragma once

// circuit-to-pulse compiler
//
// the chain walks past the beam one addressing slot at a time; each step's
// pulses realize the primary ion's outstanding work exactly while their
// spillover onto the not-yet-addressed neighbors is recorded and undone at
// the neighbors' own steps.  per-ion bookkeeping keeps the invariant
//
//   emitted = stored * R_z(frame) * declared
//
// where `declared` is the gate stream the compiler has committed to,
// `frame` collects z rotations that are never emitted (they commute to the
// end of the program or through a phase-matched entangling gate), and
// `stored` is the physical residue still to be undone (crosstalk hits,
// full-strength partner spillover).  entangling gates are emitted with the
// drive phase matched to the per-ion frames, so deferred z rotations pass
// through them unchanged.

#include <string>
#include <vector>

#include "iontrap/decompose.hpp"
#include "iontrap/linalg.hpp"
#include "iontrap/program.hpp"

namespace iontrap {

struct IonLedger {
  Mat2 stored = Mat2::Identity();
  double frame = 0.0;
  Mat2 pending = Mat2::Identity();
};

struct CompilerLedger {
  std::vector<IonLedger> ions;
  static CompilerLedger clean(int n_ions);
};

// circuit-level input
struct CircuitGate {
  enum class Kind { single, entangle, cnot, prepare, measure };
  Kind kind = Kind::single;
  int ion = -1;
  int ion2 = -1;
  Mat2 u = Mat2::Identity();  // single-qubit gates
  double area = 0.0;          // entangle: XX rotation angle
  std::string text;
  int line = 0;
};

struct CircuitIR {
  int n_ions = 0;
  std::vector<CircuitGate> gates;
};

// line-oriented gate list: `H 0`, `RZ 0 pi/2`, `R 1 pi/2 0.3`, `C17 0`,
// `MS 0 1 pi/4`, `CNOT 1 0`, `PREPARE`, `MEASURE`; `#` starts a comment.
// throws InputError with the line number on malformed input
CircuitIR parse_circuit(const std::string& text, int n_ions);

// numeric literal or a pi expression such as pi, -pi/2, 2pi/3, 0.5*pi
double parse_angle(const std::string& token);

struct CompileOptions {
  bool composite = true;    // emit every pulse as a PB1 train
  bool echo = true;         // decouple entangling-gate spectators
  bool optimize_cnot = true;  // gauge-angle solve giving the 2+3 pulse wrap
  int direction = +1;       // cascade walk order; +1 leaves the low side clean
  Timings timings;
  double verify_tol = 1e-8;   // replay check on the finished program
};

// per entangling gate: the gauge angles inserted around the interaction and
// the phase-matching z rotations folded into the drive phase
struct MsPhaseFrame {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3[2] = {0.0, 0.0};
  double phi4[2] = {0.0, 0.0};
};

// mutable compilation state threaded through the passes
struct CompilerState {
  CompilerLedger ledger;
  PulseProgram prog;
  std::vector<MsPhaseFrame> frames;
  // beam alignment bookkeeping (mirrors what the program will replay)
  bool aligned = false;
  int primary = 0;
  int dir = 1;
  WellMode mode = WellMode::single_qubit;

  static CompilerState start(int n_ions);
};

// one cascading pass realizing a per-ion unitary on every ion whose target
// (or accumulated residue) needs work; mode picks exact targeting or
// targeting up to a deferred trailing z rotation
void compile_cascade(CompilerState& st, const std::vector<Mat2>& targets,
                     const ChainSetup& setup, const CompileOptions& opts, ZMode mode);

// declare a z rotation done without emitting anything; only legal while the
// ion has no pending non-z work
void defer_rz(CompilerState& st, int ion, double alpha);

// entangling gate exp(-i area XX) on an adjacent pair: flushes the pair's
// outstanding work, phase-matches the drive to the ion frames, and emits
// the (optionally echoed) segment train inside a two-qubit well bracket
void compile_ms(CompilerState& st, int pair_first, double area, const ChainSetup& setup,
                const CompileOptions& opts);

// CNOT via one entangling gate wrapped in quarter-turn pulses; with
// optimize_cnot the wrap costs 2 composite pulses before and 3 after
void compile_cnot(CompilerState& st, int control, int target, const ChainSetup& setup,
                  const CompileOptions& opts);

// the raw entangling sequence of the parity experiments: shift the pair
// into the beam and run the (optionally echoed) segment train at drive
// phase zero, with no frame-matching wrap.  from |0..0> this makes a Bell
// state up to single-ion phases, which a parity analysis absorbs
PulseProgram ms_sequence(int n_ions, int pair_first, double area, const ChainSetup& setup,
                         const CompileOptions& opts);

struct CompileResult {
  PulseProgram program;
  CompilerLedger ledger;
  std::vector<MsPhaseFrame> frames;
  double verify_distance = 0.0;  // replay mismatch against the ideal circuit
};

// full pipeline: concatenate per-ion gates between entangling gates, compile
// them in cascading passes, finish with an up-to-z pass before measurement,
// then replay the program and compare against the ideal circuit
CompileResult compile_circuit(const CircuitIR& ir, const ChainSetup& setup,
                              const CompileOptions& opts);

// dense unitary of the ideal (hardware-free) circuit
Mat ideal_circuit_unitary(const CircuitIR& ir);

// net z rotations left deferred by a compile, as one diagonal unitary
Mat ledger_frame_unitary(const CompilerLedger& ledger);

}  // namespace iontrap
