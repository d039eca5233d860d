#pragma once

// static model of the ion chain: equilibrium geometry, transverse normal
// modes, and the laser coupling seen by each ion for a given beam placement
//
// everything downstream (compiler and simulator alike) reads beam response
// through the kernels defined here, so the two always agree on crosstalk

#include <vector>

#include "iontrap/linalg.hpp"

namespace iontrap {

// axial confinement presets used at different stages of a sequence
enum class WellMode { cooling, single_qubit, two_qubit, detection };

struct TrapConfig {
  double axial_freq = 2.0 * pi * 0.5e6;        // rad/s, cooling well
  double radial_freq = 2.0 * pi * 1.8e6;       // addressed radial direction
  double radial_freq_high = 2.0 * pi * 2.1e6;  // orthogonal radial direction
  double mass_amu = 171.0;
  // axial frequency rescaling per well preset
  double single_qubit_scale = 0.70710678118654752;  // 1/sqrt(2)
  double two_qubit_scale = 1.2247448713915890;      // sqrt(3/2)

  double axial_for(WellMode mode) const;
};

struct BeamProfile {
  // two Raman beams overlap at the ion; their Gaussian envelopes multiply,
  // so the effective 1/e waist along the chain is (w1^-2 + w2^-2)^-1/2
  double waist1_um = 7.0;
  double waist2_um = 13.5;
  double peak_rabi = 2.0 * pi * 62.5e3;  // rad/s at beam center
  // cubic envelope distortion (odd in the offset, breaks left/right symmetry)
  double coma = 0.08;
  // phase front seen along the chain axis
  double phase_tilt = 0.01;       // rad per um
  double phase_curvature = 0.02;  // rad per um^2
  double wavelength_nm = 355.0;

  double w_eff_um() const;
  // relative Rabi amplitude at axial offset dx from beam center, clipped at 0
  double amplitude(double dx_um) const;
  // optical phase (rad) at axial offset dx
  double phase(double dx_um) const;
};

// scaled equilibrium positions (unit length (q^2 / 4 pi eps0 M w^2)^(1/3)),
// sorted ascending
RVec scaled_equilibrium(int n_ions);
double length_scale_m(double axial_freq, double mass_amu);

// transverse Hessian in units of M w_z^2, for radial/axial ratio squared r2
RMat radial_hessian(const RVec& u, double r2);

// relative pulse strength and optical phase at one ion for a beam placement
struct IonDrive {
  double kappa = 0.0;  // rotation-angle scale relative to the addressed ion(s)
  double psi = 0.0;    // optical phase offset (rad)
};

class ChainModel {
 public:
  static ChainModel build(int n_ions, WellMode well, const TrapConfig& trap,
                          const BeamProfile& beam);

  int n_ions() const { return n_; }
  WellMode well() const { return well_; }
  const TrapConfig& trap() const { return trap_; }
  const BeamProfile& beam() const { return beam_; }

  const RVec& positions_um() const { return pos_um_; }
  // radial mode angular frequencies, descending (in-phase mode first)
  const RVec& mode_freqs() const { return mode_freqs_; }
  // columns are normalized mode vectors, same order as mode_freqs
  const RMat& mode_vectors() const { return mode_vecs_; }
  // Lamb-Dicke parameter of each ion for the in-phase radial mode
  const RVec& eta_com() const { return eta_com_; }

  // beam-center offset from the midpoint of pair (first, first+1) that
  // equalizes the Rabi rate on the two ions
  double balance_offset_um(int pair_first) const;
  // beam center (chain coordinates) addressing the given pair, balanced
  double beam_center_um(int pair_first) const;
  // beam center for one cascade step, including the final solo step where
  // the beam sits half a spacing beyond the last ion
  double step_center_um(int primary, int dir) const;

  // raw drive (relative amplitude and optical phase) at every ion for a beam
  // centered on the given pair, normalized so the addressed ions sit at 1
  std::vector<IonDrive> pair_drive(int pair_first) const;

  // addressing kernel for one cascade step: the addressed pair at strength 1,
  // the not-yet-addressed neighbor at its calibrated crosstalk strength, and
  // ions already finished (or farther than next-nearest) at exactly zero.
  // dir=+1 walks the chain 0..n-1 with `primary` the lower pair index;
  // dir=-1 mirrors it (primary the higher index, partner below)
  std::vector<IonDrive> step_drive(int primary, int dir) const;

  // spin-dependent force couplings c_i for an entangling drive centered on
  // the given pair: c_i = (Omega_i eta_i) / (2 max |Omega eta|), so the
  // addressed ions sit at 1/2 and spectators below
  RVec ms_couplings(int pair_first) const;
  // optical phase at each ion for the same beam placement
  RVec ms_phases(int pair_first) const;

 private:
  int n_ = 0;
  WellMode well_ = WellMode::single_qubit;
  TrapConfig trap_;
  BeamProfile beam_;
  RVec pos_um_;
  RVec mode_freqs_;
  RMat mode_vecs_;
  RVec eta_com_;
};

}  // namespace iontrap
