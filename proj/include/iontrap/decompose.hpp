#pragma once

// synthesis of single-qubit targets from quarter-turn pulses
//
// the reachable one-pulse set, up to global phase and a leading z rotation,
// is exactly the unitaries whose entries all have magnitude 1/sqrt(2).  Two
// pulses reach the surface Re(N00) = |N00|^2 of SU(2), and appending one or
// two more quarter turns steers any target onto that surface, so synthesis
// is closed form throughout

#include <cstdint>
#include <vector>

#include "iontrap/linalg.hpp"
#include "iontrap/pauli.hpp"

namespace iontrap {

// product of quarter-turn pulses R(pi/2, phi), time order (phis[0] first)
Mat2 pi2_product(const std::vector<double>& phis);

// true when u = exp(i gamma) R_z(zeta) R(pi/2, phi) for some gamma, zeta, phi
bool in_pi2_class(const Mat2& u, double tol = 1e-9);

struct Pi2Frame {
  double phi = 0.0;   // pulse azimuth
  double zeta = 0.0;  // z rotation left of the pulse
};

// recover (phi, zeta) from a class member; throws if u is not in the class
Pi2Frame pi2_frame(const Mat2& u, double tol = 1e-9);

// the two angles phi for which R_x(phi) * k lands in the one-pulse class
std::array<double, 2> class_knob_roots(const Mat2& k);

enum class ZMode {
  exact,    // match the target up to global phase only
  free_rz,  // match up to an arbitrary z rotation applied after the pulses
};

struct Decomposition {
  std::vector<double> phis;  // pulse azimuths, time order
  double trailing_rz = 0.0;  // alpha with target ~ R_z(alpha) * product (free_rz)
  double distance = 0.0;     // residual phase-invariant distance
};

// express the target with as few quarter-turn pulses as possible; throws
// NumericalError if nothing under max_pulses reaches tol
Decomposition decompose_pi2(const Mat2& target, ZMode mode, double tol = 1e-10,
                            int max_pulses = 4, std::uint64_t seed = 0);

}  // namespace iontrap
