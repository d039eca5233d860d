#include "iontrap/chain.hpp"

#include <algorithm>
#include <cmath>

namespace iontrap {

namespace {
constexpr double k_hbar = 1.054571817e-34;
constexpr double k_elem_charge = 1.602176634e-19;
constexpr double k_eps0 = 8.8541878128e-12;
constexpr double k_amu = 1.66053906660e-27;
}  // namespace

double TrapConfig::axial_for(WellMode mode) const {
  switch (mode) {
    case WellMode::cooling:
    case WellMode::detection: return axial_freq;
    case WellMode::single_qubit: return axial_freq * single_qubit_scale;
    case WellMode::two_qubit: return axial_freq * two_qubit_scale;
  }
  throw InputError("axial_for: unknown well mode");
}

double BeamProfile::w_eff_um() const {
  return 1.0 / std::sqrt(1.0 / (waist1_um * waist1_um) + 1.0 / (waist2_um * waist2_um));
}

double BeamProfile::amplitude(double dx_um) const {
  const double w = w_eff_um();
  const double r = dx_um / w;
  double a = std::exp(-r * r) * (1.0 + coma * r * r * r);
  return std::max(a, 0.0);
}

double BeamProfile::phase(double dx_um) const {
  return phase_tilt * dx_um + phase_curvature * dx_um * dx_um;
}

RVec scaled_equilibrium(int n_ions) {
  if (n_ions < 1) throw InputError("scaled_equilibrium: need at least one ion");
  if (n_ions == 1) return RVec::Zero(1);
  RVec u(n_ions);
  for (int i = 0; i < n_ions; ++i) u(i) = 1.2 * (i - 0.5 * (n_ions - 1));

  auto force = [&](const RVec& x) {
    RVec f = x;
    for (int i = 0; i < n_ions; ++i)
      for (int j = 0; j < n_ions; ++j) {
        if (j == i) continue;
        double d = x(i) - x(j);
        f(i) -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
    return f;
  };

  for (int it = 0; it < 200; ++it) {
    RVec f = force(u);
    if (f.cwiseAbs().maxCoeff() < 1e-13) return u;
    RMat jac = RMat::Identity(n_ions, n_ions);
    for (int i = 0; i < n_ions; ++i)
      for (int j = 0; j < n_ions; ++j) {
        if (j == i) continue;
        double d3 = std::pow(std::abs(u(i) - u(j)), 3);
        jac(i, i) += 2.0 / d3;
        jac(i, j) -= 2.0 / d3;
      }
    RVec step = jac.partialPivLu().solve(f);
    double t = 1.0;
    double f0 = f.norm();
    for (int bt = 0; bt < 30; ++bt) {
      RVec trial = u - t * step;
      bool ordered = true;
      for (int i = 1; i < n_ions; ++i)
        if (trial(i) <= trial(i - 1)) ordered = false;
      if (ordered && force(trial).norm() < f0) {
        u = trial;
        break;
      }
      t *= 0.5;
    }
  }
  if (force(u).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("scaled_equilibrium: Newton iteration did not converge");
  return u;
}

double length_scale_m(double axial_freq, double mass_amu) {
  if (axial_freq <= 0 || mass_amu <= 0) throw InputError("length_scale_m: bad arguments");
  const double m = mass_amu * k_amu;
  const double c = k_elem_charge * k_elem_charge / (4.0 * pi * k_eps0);
  return std::cbrt(c / (m * axial_freq * axial_freq));
}

RMat radial_hessian(const RVec& u, double r2) {
  const int n = static_cast<int>(u.size());
  RMat a = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = r2;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double d3 = std::pow(std::abs(u(i) - u(j)), 3);
      a(i, i) -= 1.0 / d3;
      a(i, j) = 1.0 / d3;
    }
  }
  return a;
}

ChainModel ChainModel::build(int n_ions, WellMode well, const TrapConfig& trap,
                             const BeamProfile& beam) {
  if (n_ions < 1 || n_ions > 16) throw InputError("ChainModel: ion count out of range");
  ChainModel m;
  m.n_ = n_ions;
  m.well_ = well;
  m.trap_ = trap;
  m.beam_ = beam;

  const double wz = trap.axial_for(well);
  RVec u = scaled_equilibrium(n_ions);
  m.pos_um_ = u * length_scale_m(wz, trap.mass_amu) * 1e6;

  // stability first: the softer radial direction buckles first
  const double wr_low = std::min(trap.radial_freq, trap.radial_freq_high);
  {
    RMat a_low = radial_hessian(u, (wr_low / wz) * (wr_low / wz));
    Eigen::SelfAdjointEigenSolver<RMat> es(a_low);
    if (es.eigenvalues()(0) <= 0.0)
      throw InputError("ChainModel: chain buckles in this well, raise the radial confinement");
  }

  RMat a = radial_hessian(u, (trap.radial_freq / wz) * (trap.radial_freq / wz));
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  m.mode_freqs_ = RVec(n_ions);
  m.mode_vecs_ = RMat(n_ions, n_ions);
  for (int k = 0; k < n_ions; ++k) {
    // descending frequency order puts the in-phase mode first
    const int src = n_ions - 1 - k;
    m.mode_freqs_(k) = wz * std::sqrt(es.eigenvalues()(src));
    RVec v = es.eigenvectors().col(src);
    int imax = 0;
    for (int i = 1; i < n_ions; ++i)
      if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
    if (v(imax) < 0) v = -v;
    m.mode_vecs_.col(k) = v;
  }

  const double mass = trap.mass_amu * k_amu;
  const double dk = std::sqrt(2.0) * 2.0 * pi / (beam.wavelength_nm * 1e-9);
  const double x0 = std::sqrt(k_hbar / (2.0 * mass * m.mode_freqs_(0)));
  m.eta_com_ = dk * x0 * m.mode_vecs_.col(0);
  return m;
}

double ChainModel::balance_offset_um(int pair_first) const {
  if (pair_first < 0 || pair_first + 1 >= n_)
    throw InputError("balance_offset_um: pair index out of range");
  const double xi = pos_um_(pair_first), xj = pos_um_(pair_first + 1);
  const double mid = 0.5 * (xi + xj);
  auto diff = [&](double c) { return beam_.amplitude(xi - c) - beam_.amplitude(xj - c); };
  double lo = mid - 0.45 * (xj - xi), hi = mid + 0.45 * (xj - xi);
  double flo = diff(lo), fhi = diff(hi);
  if (flo * fhi > 0) throw NumericalError("balance_offset_um: no balanced beam position");
  for (int it = 0; it < 200; ++it) {
    double c = 0.5 * (lo + hi);
    double fc = diff(c);
    if (std::abs(fc) < 1e-15 || hi - lo < 1e-13) return c - mid;
    if (flo * fc <= 0) {
      hi = c;
      fhi = fc;
    } else {
      lo = c;
      flo = fc;
    }
  }
  return 0.5 * (lo + hi) - mid;
}

double ChainModel::beam_center_um(int pair_first) const {
  const double mid = 0.5 * (pos_um_(pair_first) + pos_um_(pair_first + 1));
  return mid + balance_offset_um(pair_first);
}

double ChainModel::step_center_um(int primary, int dir) const {
  if (dir != 1 && dir != -1) throw InputError("step_center_um: dir must be +1 or -1");
  if (primary < 0 || primary >= n_) throw InputError("step_center_um: primary out of range");
  const int partner = primary + dir;
  if (partner >= 0 && partner < n_) return beam_center_um(std::min(primary, partner));
  double s = (n_ >= 2) ? std::abs(pos_um_(primary) - pos_um_(primary - dir)) : 0.0;
  return pos_um_(primary) + dir * 0.5 * s;
}

std::vector<IonDrive> ChainModel::pair_drive(int pair_first) const {
  const double xc = beam_center_um(pair_first);
  const double a_ref = beam_.amplitude(pos_um_(pair_first) - xc);
  std::vector<IonDrive> d(n_);
  for (int j = 0; j < n_; ++j) {
    d[j].kappa = beam_.amplitude(pos_um_(j) - xc) / a_ref;
    d[j].psi = beam_.phase(pos_um_(j) - xc);
  }
  return d;
}

std::vector<IonDrive> ChainModel::step_drive(int primary, int dir) const {
  if (dir != 1 && dir != -1) throw InputError("step_drive: dir must be +1 or -1");
  if (primary < 0 || primary >= n_) throw InputError("step_drive: primary out of range");
  std::vector<IonDrive> d(n_);

  const int partner = primary + dir;
  if (partner < 0 || partner >= n_) {
    // final solo step: the chain has moved one spacing past the last pair
    // slot, leaving only the primary ion inside the beam
    double xc = step_center_um(primary, dir);
    d[primary].kappa = 1.0;
    d[primary].psi = beam_.phase(pos_um_(primary) - xc);
    return d;
  }

  const int lo = std::min(primary, partner);
  std::vector<IonDrive> raw = pair_drive(lo);
  const int upcoming = primary + 2 * dir;
  d[primary] = {1.0, raw[primary].psi};
  d[partner] = {1.0, raw[partner].psi};
  if (upcoming >= 0 && upcoming < n_) d[upcoming] = raw[upcoming];
  // ions already finished, and anything beyond next-nearest, stay at zero:
  // the composite pulses respond only quadratically at small drive, and the
  // residual falls below everything else modeled here
  return d;
}

RVec ChainModel::ms_couplings(int pair_first) const {
  std::vector<IonDrive> raw = pair_drive(pair_first);
  RVec c(n_);
  const double ref = eta_com_(pair_first);
  for (int j = 0; j < n_; ++j) c(j) = 0.5 * raw[j].kappa * eta_com_(j) / ref;
  return c;
}

RVec ChainModel::ms_phases(int pair_first) const {
  std::vector<IonDrive> raw = pair_drive(pair_first);
  RVec p(n_);
  for (int j = 0; j < n_; ++j) p(j) = raw[j].psi;
  return p;
}

}  // namespace iontrap
