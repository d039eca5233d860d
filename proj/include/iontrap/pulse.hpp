#pragma once

// composite pulse trains: every physical rotation is emitted as an
// amplitude-tolerant composite, so a calibrated drive gives the commanded
// rotation exactly while both drive miscalibration and weak spillover on
// neighboring ions enter only at second order

#include <vector>

#include "iontrap/linalg.hpp"
#include "iontrap/pauli.hpp"

namespace iontrap {

// one commanded rotation: angle theta about the equatorial axis at azimuth phi
struct PulseSegment {
  double theta = 0.0;
  double phi = 0.0;
};

// composite train for R_phi(theta): the base pulse followed by a 2pi, 4pi,
// 2pi correction whose azimuth offset phi_p satisfies cos(phi_p) = -theta/(8 pi).
// At full drive the corrections multiply to the identity; the first-order
// response to both amplitude error and small drive cancels
std::vector<PulseSegment> pb1(double theta, double phi);

// unitary of a train at relative drive strength kappa, segments in time order
Mat2 train_unitary(const std::vector<PulseSegment>& train, double kappa = 1.0);

// total rotation area of a train (radians)
double train_area(const std::vector<PulseSegment>& train);

// area expressed in quarter-turn slices, the unit of duration accounting
double train_slices(const std::vector<PulseSegment>& train);

}  // namespace iontrap
