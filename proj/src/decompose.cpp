#include "iontrap/decompose.hpp"

#include <algorithm>
#include <cmath>

namespace iontrap {

Mat2 pi2_product(const std::vector<double>& phis) {
  Mat2 u = Mat2::Identity();
  for (double phi : phis) u = r_phi(pi / 2.0, phi) * u;
  return u;
}

bool in_pi2_class(const Mat2& u, double tol) {
  return std::abs(std::abs(u(0, 0)) - 1.0 / std::sqrt(2.0)) < tol;
}

Pi2Frame pi2_frame(const Mat2& u, double tol) {
  if (!in_pi2_class(u, tol)) throw InputError("pi2_frame: not a single-pulse unitary");
  Pi2Frame f;
  f.zeta = std::arg(u(1, 1)) - std::arg(u(0, 0));
  f.phi = std::arg(u(1, 0)) - std::arg(u(1, 1)) + pi / 2.0;
  return f;
}

std::array<double, 2> class_knob_roots(const Mat2& k) {
  // |(R_x(phi) k)_00|^2 - 1/2 = cos(phi) (u - v)/2 - w sin(phi) with
  // u = |k00|^2, v = |k10|^2, w = Im(k00 conj(k10)); u + v = 1 kills the
  // constant term, so two roots always exist
  const double u = std::norm(k(0, 0));
  const double v = std::norm(k(1, 0));
  const double w = std::imag(k(0, 0) * std::conj(k(1, 0)));
  const double phi = std::atan2(u - v, 2.0 * w);
  return {phi, phi + pi};
}

namespace {

// two successive quarter turns give N = R(pi/2,b) R(pi/2,a) with
// N00 = (1 - e^{i(a-b)})/2, which pins the reachable set: an SU(2) matrix is
// such a product exactly when Re(N00) = |N00|^2.  Inverting the entries gives
// the angles back.
bool two_product_angles(const Mat2& k, double& a, double& b) {
  if (std::abs(std::norm(k(0, 0)) - std::real(k(0, 0))) > 1e-7) return false;
  if (std::abs(k(0, 0) - cxd(1.0, 0.0)) < 1e-9) {
    // k is the identity; an opposed pair cancels
    a = 0.0;
    b = pi;
    return true;
  }
  cxd ed = 1.0 - 2.0 * k(0, 0);  // e^{i(a-b)}
  cxd ea = 2.0 * ii * k(0, 1) / (1.0 + ed);  // e^{-ia}
  a = -std::arg(ea);
  b = a - std::arg(ed);
  return true;
}

// feasibility function for a trailing quarter-turn knob: K = R(pi/2,phi)^dag T
// has K00 = A + B e^{-i phi}, and the two-product condition on K reads
// c0 + c1 cos(phi) + c2 sin(phi) = 0
void knob_condition(const Mat2& t, double& c0, double& c1, double& c2) {
  const cxd a = t(0, 0) / std::sqrt(2.0);
  const cxd b = ii * t(1, 0) / std::sqrt(2.0);
  const cxd ab = std::conj(a) * b;
  c0 = std::norm(a) + std::norm(b) - std::real(a);
  c1 = 2.0 * std::real(ab) - std::real(b);
  c2 = 2.0 * std::imag(ab) - std::imag(b);
}

Mat2 su2_normalize(const Mat2& t) {
  cxd d = t.determinant();
  return t / std::sqrt(d);
}

bool try_three(const Mat2& su, std::vector<double>& phis) {
  double c0, c1, c2;
  knob_condition(su, c0, c1, c2);
  const double r = std::hypot(c1, c2);
  if (std::abs(c0) > r * (1.0 + 1e-9) + 1e-12) return false;
  const double base = std::atan2(c2, c1);
  const double off = std::acos(std::clamp(-c0 / std::max(r, 1e-300), -1.0, 1.0));
  for (double phi3 : {base + off, base - off}) {
    Mat2 k = r_phi(pi / 2.0, phi3).adjoint() * su;
    double a, b;
    if (!two_product_angles(k, a, b)) continue;
    phis = {a, b, phi3};
    return true;
  }
  return false;
}

}  // namespace

Decomposition decompose_pi2(const Mat2& target, ZMode mode, double tol, int max_pulses,
                            std::uint64_t /*seed*/) {
  if (!is_unitary(target, 1e-9)) throw InputError("decompose_pi2: target is not unitary");

  auto score = [&](const std::vector<double>& phis) {
    Mat2 p = pi2_product(phis);
    if (mode == ZMode::exact) return std::abs((target.adjoint() * p).trace()) / 2.0;
    Mat2 n = target * p.adjoint();
    return 0.5 * (std::abs(n(0, 0)) + std::abs(n(1, 1)));
  };
  auto finish = [&](std::vector<double> phis) {
    Decomposition d;
    d.distance = 1.0 - score(phis);
    if (mode == ZMode::free_rz) {
      Mat2 n = target * pi2_product(phis).adjoint();
      d.trailing_rz = std::arg(n(1, 1)) - std::arg(n(0, 0));
    }
    d.phis = std::move(phis);
    return d;
  };
  auto good = [&](const std::vector<double>& phis) { return 1.0 - score(phis) < tol; };

  // zero pulses
  if (good({})) return finish({});

  // one pulse: class membership gives the azimuth in closed form
  if (in_pi2_class(target, 1e-7)) {
    Pi2Frame f = pi2_frame(target, 1e-7);
    if (good({f.phi})) return finish({f.phi});
  }

  const Mat2 su = su2_normalize(target);

  if (mode == ZMode::free_rz) {
    // a leading z rotation can always steer onto the two-product surface:
    // with T00 = rho e^{i theta}, the condition becomes cos(alpha/2 + theta) = rho
    if (max_pulses < 2) throw NumericalError("decompose_pi2: pulse budget too small");
    const double rho = std::abs(su(0, 0));
    for (double sign : {1.0, -1.0}) {
      Mat2 ts = sign * su;
      const double theta0 = std::arg(ts(0, 0));
      for (double root : {1.0, -1.0}) {
        double alpha = 2.0 * (root * std::acos(std::clamp(rho, 0.0, 1.0)) - theta0);
        Mat2 k = r_z(-alpha) * ts;
        double a, b;
        if (!two_product_angles(k, a, b)) continue;
        if (good({a, b})) return finish({a, b});
      }
    }
    throw NumericalError("decompose_pi2: free-frame synthesis failed");
  }

  // exact mode, two pulses: only on the reachable surface
  for (double sign : {1.0, -1.0}) {
    double a, b;
    if (two_product_angles(sign * su, a, b) && good({a, b})) return finish({a, b});
  }

  // three pulses: one knob root away from the surface
  if (max_pulses >= 3) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> phis;
      if (try_three(sign * su, phis) && good(phis)) return finish(phis);
    }
  }

  // four pulses: pick a fourth azimuth that makes the rest three-solvable
  if (max_pulses >= 4) {
    for (double sign : {1.0, -1.0}) {
      Mat2 ts = sign * su;
      auto gap = [&](double phi4) {
        double c0, c1, c2;
        knob_condition(r_phi(pi / 2.0, phi4).adjoint() * ts, c0, c1, c2);
        return std::abs(c0) - std::hypot(c1, c2);
      };
      const int grid = 256;
      std::vector<double> candidates;
      double best_phi = 0.0, best_gap = gap(0.0);
      for (int i = 0; i < grid; ++i) {
        double phi4 = 2.0 * pi * i / grid;
        double g = gap(phi4);
        if (g < -1e-6) candidates.push_back(phi4);
        if (g < best_gap) {
          best_gap = g;
          best_phi = phi4;
        }
      }
      if (candidates.empty() && best_gap < 1e-8) candidates.push_back(best_phi);
      for (double phi4 : candidates) {
        std::vector<double> phis;
        if (!try_three(r_phi(pi / 2.0, phi4).adjoint() * ts, phis)) continue;
        phis.push_back(phi4);
        if (good(phis)) return finish(phis);
      }
    }
  }

  throw NumericalError("decompose_pi2: no pulse sequence found within the budget");
}

}  // namespace iontrap
