#include "iontrap/program.hpp"

#include <cmath>
#include <sstream>

#include "iontrap/ms.hpp"
#include "iontrap/state.hpp"

namespace iontrap {

double Timings::pulse_us(double theta, bool composite) const {
  double slices = train_slices(pulse_train(theta, 0.0, composite));
  return slices * (pi2_slice_us + slice_overhead_us);
}

std::vector<PulseSegment> pulse_train(double theta, double phi, bool composite) {
  if (composite) return pb1(theta, phi);
  return {{theta, phi}};
}

double PulseProgram::total_duration_us() const {
  double t = 0.0;
  for (const ProgramOp& op : ops) t += op.duration_us;
  return t;
}

int PulseProgram::count(OpType t) const {
  int n = 0;
  for (const ProgramOp& op : ops)
    if (op.type == t) ++n;
  return n;
}

ChainSetup ChainSetup::build(int n_ions, const TrapConfig& trap, const BeamProfile& beam) {
  return ChainSetup{ChainModel::build(n_ions, WellMode::single_qubit, trap, beam),
                    ChainModel::build(n_ions, WellMode::two_qubit, trap, beam)};
}

void cursor_advance(ProgramCursor& c, const PulseProgram& prog, const ChainSetup& setup,
                    std::size_t i) {
  const ProgramOp& op = prog.ops[i];
  const int n = prog.n_ions;
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << "program op " << i << ": " << why;
    throw InputError(os.str());
  };

  switch (op.type) {
    case OpType::transport:
      if (op.dir != 1 && op.dir != -1) fail("transport dir must be +1 or -1");
      if (op.primary < 0 || op.primary >= n) fail("transport primary out of range");
      c.aligned = true;
      c.primary = op.primary;
      c.dir = op.dir;
      break;
    case OpType::well_change:
      if (op.well != WellMode::single_qubit && op.well != WellMode::two_qubit)
        fail("program well changes only switch between qubit presets");
      c.mode = op.well;
      break;
    case OpType::pulse:
      if (!c.aligned) fail("pulse before any transport");
      if (c.mode != WellMode::single_qubit) fail("pulse outside the single-qubit well");
      if (op.theta <= 0.0) fail("pulse with non-positive rotation angle");
      break;
    case OpType::ms_segment: {
      if (!c.aligned) fail("entangling segment before any transport");
      if (c.mode != WellMode::two_qubit) fail("entangling segment outside the two-qubit well");
      if (op.pair_first < 0 || op.pair_first + 1 >= n) fail("entangling pair out of range");
      int lo = (c.dir == 1) ? c.primary : c.primary - 1;
      if (lo != op.pair_first) fail("entangling segment not aligned on its pair");
      break;
    }
    case OpType::echo_flip:
      if (c.mode != WellMode::two_qubit) fail("echo flip outside the two-qubit well");
      if (op.primary < 0 || op.primary >= n) fail("echo flip ion out of range");
      break;
  }
  (void)setup;
}

std::vector<Mat2> pulse_factors(const ProgramOp& op, const ProgramCursor& c,
                                const ChainSetup& setup, double amp) {
  const int n = setup.n_ions();
  std::vector<Mat2> factors(n, Mat2::Identity());
  if (op.type == OpType::pulse) {
    std::vector<IonDrive> d = setup.single_qubit.step_drive(c.primary, c.dir);
    for (int j = 0; j < n; ++j) {
      if (d[j].kappa == 0.0) continue;
      factors[j] = train_unitary(pulse_train(op.theta, op.phi + d[j].psi, op.composite),
                                 d[j].kappa * amp);
    }
  } else if (op.type == OpType::echo_flip) {
    const int lo = (c.dir == 1) ? c.primary : c.primary - 1;
    RVec psi = setup.two_qubit.ms_phases(lo);
    factors[op.primary] =
        train_unitary(pulse_train(pi, op.phi + psi(op.primary), false), amp);
  } else {
    throw InputError("pulse_factors: op is not a pulse or echo flip");
  }
  return factors;
}

namespace {

Mat tensor_ops(const std::vector<Mat2>& factors) {
  Mat u = Mat::Identity(1, 1);
  for (const Mat2& f : factors) u = tensor(u, f).eval();
  return u;
}

}  // namespace

Mat ms_segment_unitary(const ProgramOp& op, const ChainSetup& setup, double area_scale) {
  const int n = setup.n_ions();
  RVec cpl = setup.two_qubit.ms_couplings(op.pair_first);
  RVec psi = setup.two_qubit.ms_phases(op.pair_first);
  std::vector<Mat2> factors(n, Mat2::Identity());
  for (int j = 0; j < n; ++j) factors[j] = r_z(op.phi + psi(j));
  Mat zf = tensor_ops(factors);
  return zf * ms_propagator(op.area * area_scale, cpl) * zf.adjoint();
}

namespace {

Mat op_unitary(const ProgramOp& op, const ProgramCursor& c, const ChainSetup& setup) {
  switch (op.type) {
    case OpType::transport:
    case OpType::well_change: {
      const int n = setup.n_ions();
      return Mat::Identity(1 << n, 1 << n);
    }
    case OpType::pulse:
    case OpType::echo_flip: return tensor_ops(pulse_factors(op, c, setup));
    case OpType::ms_segment: return ms_segment_unitary(op, setup);
  }
  throw InputError("op_unitary: unknown op type");
}

}  // namespace

void validate_program(const PulseProgram& prog, const ChainSetup& setup) {
  if (prog.n_ions != setup.n_ions())
    throw InputError("validate_program: ion count mismatch with chain");
  ProgramCursor c;
  for (size_t i = 0; i < prog.ops.size(); ++i) cursor_advance(c, prog, setup, i);
  if (c.mode != WellMode::single_qubit)
    throw InputError("program must end in the single-qubit well");
}

Mat program_unitary_truncated(const PulseProgram& prog, const ChainSetup& setup,
                              int applied_ops) {
  if (applied_ops < 0 || applied_ops > static_cast<int>(prog.ops.size()))
    throw InputError("program_unitary_truncated: op count out of range");
  const int dim = 1 << prog.n_ions;
  Mat u = Mat::Identity(dim, dim);
  ProgramCursor c;
  for (size_t i = 0; i < prog.ops.size(); ++i) {
    cursor_advance(c, prog, setup, i);
    const ProgramOp& op = prog.ops[i];
    bool drive = op.type == OpType::pulse || op.type == OpType::ms_segment ||
                 op.type == OpType::echo_flip;
    if (drive && static_cast<int>(i) >= applied_ops) continue;
    if (drive) u = (op_unitary(op, c, setup) * u).eval();
  }
  return u;
}

Mat program_unitary(const PulseProgram& prog, const ChainSetup& setup) {
  return program_unitary_truncated(prog, setup, static_cast<int>(prog.ops.size()));
}

std::string op_to_string(const ProgramOp& op) {
  std::ostringstream os;
  switch (op.type) {
    case OpType::transport:
      os << "transport  slot " << op.primary << (op.dir == 1 ? "+" : "-") << "  offset "
         << op.offset_um << " um";
      break;
    case OpType::well_change:
      os << "well       " << (op.well == WellMode::two_qubit ? "two-qubit" : "single-qubit");
      break;
    case OpType::pulse:
      os << (op.composite ? "pb1 pulse " : "pulse     ") << " theta " << op.theta << "  phi "
         << op.phi;
      break;
    case OpType::ms_segment:
      os << "ms segment pair " << op.pair_first << "  area " << op.area << "  phi " << op.phi;
      break;
    case OpType::echo_flip:
      os << "echo flip  ion " << op.primary << "  phi " << op.phi;
      break;
  }
  os << "  (" << op.duration_us << " us)";
  return os.str();
}

}  // namespace iontrap
