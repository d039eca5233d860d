#include "iontrap/ms.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "iontrap/pauli.hpp"

namespace iontrap {

namespace {

// X on one qubit embedded in the spin register
Mat x_on(int ion, int n) {
  std::string label(n, 'I');
  label[ion] = 'X';
  return pauli_string(label);
}

}  // namespace

Mat ms_propagator(double area, const RVec& c) {
  const int n = static_cast<int>(c.size());
  if (n < 1 || n > 10) throw InputError("ms_propagator: bad coupling vector");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Mat u = Mat::Identity(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double theta = 2.0 * area * c(i) * c(j);
      if (std::abs(theta) < 1e-300) continue;
      Mat xx = x_on(i, n) * x_on(j, n);
      u = (std::cos(theta) * Mat::Identity(dim, dim) - ii * std::sin(theta) * xx) * u;
    }
  }
  return u;
}

std::vector<int> echo_flip_schedule(const std::vector<int>& decouple) {
  const int d = static_cast<int>(decouple.size());
  if (d == 0) return {};
  if (d > 16) throw InputError("echo_flip_schedule: too many decoupled ions");
  std::vector<int> flips;
  const int segs = 1 << d;
  for (int k = 0; k < segs; ++k) {
    // reflected Gray code is cyclic with single-bit steps
    int g0 = k ^ (k >> 1);
    int g1 = ((k + 1) % segs) ^ (((k + 1) % segs) >> 1);
    int diff = g0 ^ g1;
    int bit = 0;
    while (!((diff >> bit) & 1)) ++bit;
    flips.push_back(decouple[bit]);
  }
  return flips;
}

Mat echoed_propagator(double area, const RVec& c, const std::vector<int>& decouple) {
  const int n = static_cast<int>(c.size());
  const int d = static_cast<int>(decouple.size());
  for (int ion : decouple)
    if (ion < 0 || ion >= n) throw InputError("echoed_propagator: ion out of range");
  const int segs = 1 << d;
  const double seg_area = area / segs;
  Mat u = Mat::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int k = 0; k < segs; ++k) {
    int g = k ^ (k >> 1);
    RVec cs = c;
    for (int b = 0; b < d; ++b)
      if ((g >> b) & 1) cs(decouple[b]) = -cs(decouple[b]);
    u = ms_propagator(seg_area, cs) * u;
  }
  return u;
}

Mat ms_oracle_propagator(const RVec& c, double rabi_eta, double loop_freq, int loops,
                         int fock_dim) {
  const int n = static_cast<int>(c.size());
  if (fock_dim < 2) throw InputError("ms_oracle_propagator: fock_dim too small");
  if (loop_freq <= 0 || loops < 1) throw InputError("ms_oracle_propagator: bad drive");
  const Eigen::Index spin_dim = Eigen::Index{1} << n;
  const Eigen::Index dim = spin_dim * fock_dim;

  Mat jx = Mat::Zero(spin_dim, spin_dim);
  for (int i = 0; i < n; ++i) jx += c(i) * x_on(i, n);

  Mat a = Mat::Zero(fock_dim, fock_dim);
  for (int m = 1; m < fock_dim; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  Mat xop = (a + a.adjoint()) / std::sqrt(2.0);
  Mat pop = ii * (a.adjoint() - a) / std::sqrt(2.0);

  const double lam = std::sqrt(2.0) * rabi_eta;
  Mat hx = lam * tensor(jx, xop);
  Mat hp = lam * tensor(jx, pop);

  auto rhs = [&](const Mat& u, Mat& dudt, double t) {
    dudt = -ii * ((std::cos(loop_freq * t) * hx + std::sin(loop_freq * t) * hp) * u);
  };

  Mat u = Mat::Identity(dim, dim);
  const double t_end = 2.0 * pi * loops / loop_freq;
  // the drive is smooth and strictly periodic, so a fixed fine step is both
  // simpler and more predictable than error-controlled stepping here
  const int steps = 2048 * loops;
  namespace ode = boost::numeric::odeint;
  ode::runge_kutta4<Mat, double, Mat, double, ode::vector_space_algebra> stepper;
  ode::integrate_const(stepper, rhs, u, 0.0, t_end, t_end / steps);
  if (!is_unitary(u, 1e-6))
    throw NumericalError("ms_oracle_propagator: integration lost unitarity");
  return u;
}

double ms_area_from_drive(double rabi_eta, double loop_freq, int loops) {
  const double t_end = 2.0 * pi * loops / loop_freq;
  return -rabi_eta * rabi_eta * t_end / loop_freq;
}

Mat spin_block_ground(const Mat& u, int n_spin_dim, int fock_dim) {
  if (u.rows() != Eigen::Index{n_spin_dim} * fock_dim)
    throw InputError("spin_block_ground: dimension mismatch");
  Mat s(n_spin_dim, n_spin_dim);
  for (int r = 0; r < n_spin_dim; ++r)
    for (int cidx = 0; cidx < n_spin_dim; ++cidx)
      s(r, cidx) = u(Eigen::Index{r} * fock_dim, Eigen::Index{cidx} * fock_dim);
  return s;
}

double motional_leakage(const Mat& u, int n_spin_dim, int fock_dim) {
  double worst = 0.0;
  for (int cidx = 0; cidx < n_spin_dim; ++cidx) {
    double leak = 0.0;
    for (int r = 0; r < n_spin_dim; ++r)
      for (int m = 1; m < fock_dim; ++m)
        leak += std::norm(u(Eigen::Index{r} * fock_dim + m, Eigen::Index{cidx} * fock_dim));
    worst = std::max(worst, leak);
  }
  return std::sqrt(worst);
}

}  // namespace iontrap
