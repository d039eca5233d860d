#include "iontrap/pulse.hpp"

#include <cmath>

namespace iontrap {

std::vector<PulseSegment> pb1(double theta, double phi) {
  if (theta < 0 || theta > 2.0 * pi) throw InputError("pb1: theta must lie in [0, 2 pi]");
  const double phi_p = std::acos(-theta / (8.0 * pi));
  return {
      {theta, phi},
      {2.0 * pi, phi + phi_p},
      {4.0 * pi, phi - phi_p},
      {2.0 * pi, phi + phi_p},
  };
}

Mat2 train_unitary(const std::vector<PulseSegment>& train, double kappa) {
  Mat2 u = Mat2::Identity();
  for (const PulseSegment& s : train) u = r_phi(s.theta * kappa, s.phi) * u;
  return u;
}

double train_area(const std::vector<PulseSegment>& train) {
  double a = 0.0;
  for (const PulseSegment& s : train) a += std::abs(s.theta);
  return a;
}

double train_slices(const std::vector<PulseSegment>& train) {
  return train_area(train) / (pi / 2.0);
}

}  // namespace iontrap
