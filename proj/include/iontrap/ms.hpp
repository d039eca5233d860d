#pragma once

// entangling interaction: effective XX propagator, echo decoupling schedules,
// and a full spin-motion reference integration used to validate the
// effective description

#include <vector>

#include "iontrap/linalg.hpp"

namespace iontrap {

// U = exp(-i area sum_{i<j} 2 c_i c_j X_i X_j); for a balanced pair
// (c = 1/2 each) area = pi/2 is the fully entangling gate, taking |00> to
// (|00> - i |11>)/sqrt(2).  Built from the commuting pair factors
Mat ms_propagator(double area, const RVec& c);

// cyclic Gray-code flip schedule decoupling the listed ions: the gate is cut
// into 2^d equal segments, with one single-ion pi flip after each segment
// (the last flip restores the original frame).  Returned value is the ion
// flipped after each segment; empty when nothing is decoupled
std::vector<int> echo_flip_schedule(const std::vector<int>& decouple);

// effective propagator of the echoed gate: equals ms_propagator with the
// couplings of every decoupled ion removed, up to global phase
Mat echoed_propagator(double area, const RVec& c, const std::vector<int>& decouple);

// reference propagator on spins tensor one boson mode, from integrating the
// time-dependent spin-motion Hamiltonian
//   H(t) = sqrt(2) rabi_eta (sum_i c_i X_i) (x cos(wt) + p sin(wt))
// over `loops` closed phase-space loops, t_end = 2 pi loops / loop_freq
Mat ms_oracle_propagator(const RVec& c, double rabi_eta, double loop_freq, int loops,
                         int fock_dim);

// spin-only effective area matching the reference at loop closure:
// area = -(rabi_eta)^2 t / loop_freq
double ms_area_from_drive(double rabi_eta, double loop_freq, int loops);

// block <s',0|U|s,0> of a spin-motion propagator (motional ground state in
// and out)
Mat spin_block_ground(const Mat& u, int n_spin_dim, int fock_dim);

// worst-case leakage out of the motional ground state over all spin inputs
double motional_leakage(const Mat& u, int n_spin_dim, int fock_dim);

}  // namespace iontrap
