#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iontrap/chain.hpp"

using namespace iontrap;

TEST_CASE("two and three ion equilibria match the closed forms") {
  RVec u2 = scaled_equilibrium(2);
  // +-(1/2)^(2/3)
  CHECK(u2(0) == doctest::Approx(-0.6299605249474366).epsilon(1e-12));
  CHECK(u2(1) == doctest::Approx(0.6299605249474366).epsilon(1e-12));

  RVec u3 = scaled_equilibrium(3);
  // +-(5/4)^(1/3), 0
  CHECK(u3(0) == doctest::Approx(-1.0772173450159418).epsilon(1e-12));
  CHECK(std::abs(u3(1)) < 1e-12);
  CHECK(u3(2) == doctest::Approx(1.0772173450159418).epsilon(1e-12));
}

TEST_CASE("equilibrium force balance and symmetry for larger chains") {
  for (int n : {4, 5, 7}) {
    RVec u = scaled_equilibrium(n);
    for (int i = 0; i < n; ++i) {
      double f = u(i);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double d = u(i) - u(j);
        f -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      CHECK(std::abs(f) < 1e-10);
      CHECK(std::abs(u(i) + u(n - 1 - i)) < 1e-10);  // mirror symmetric
      if (i > 0) CHECK(u(i) > u(i - 1));
    }
  }
}

TEST_CASE("length scale for Yb-171") {
  // (e^2 / 4 pi eps0 M w^2)^(1/3) at 2 pi x 0.5 MHz
  CHECK(length_scale_m(2 * pi * 0.5e6, 171.0) * 1e6 ==
        doctest::Approx(4.3501651692).epsilon(1e-9));
  // scales as w^(-2/3)
  double r = length_scale_m(2 * pi * 0.5e6, 171.0) / length_scale_m(2 * pi * 1.0e6, 171.0);
  CHECK(r == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("radial modes: in-phase mode is exact and highest") {
  TrapConfig trap;
  BeamProfile beam;
  for (int n : {2, 3, 4}) {
    ChainModel m = ChainModel::build(n, WellMode::single_qubit, trap, beam);
    // in-phase mode frequency equals the radial confinement exactly
    CHECK(m.mode_freqs()(0) == doctest::Approx(trap.radial_freq).epsilon(1e-12));
    for (int k = 1; k < n; ++k) CHECK(m.mode_freqs()(k) < m.mode_freqs()(k - 1));
    // and its vector is uniform
    for (int i = 0; i < n; ++i)
      CHECK(m.mode_vectors()(i, 0) == doctest::Approx(1.0 / std::sqrt(n)).epsilon(1e-9));
    // orthonormal mode basis
    RMat g = m.mode_vectors().transpose() * m.mode_vectors();
    CHECK((g - RMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hessian matches its definition entry by entry") {
  RVec u = scaled_equilibrium(4);
  double r2 = 7.3;
  RMat a = radial_hessian(u, r2);
  for (int i = 0; i < 4; ++i) {
    double diag = r2;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      double d3 = std::pow(std::abs(u(i) - u(j)), 3);
      diag -= 1.0 / d3;
      CHECK(a(i, j) == doctest::Approx(1.0 / d3).epsilon(1e-12));
    }
    CHECK(a(i, i) == doctest::Approx(diag).epsilon(1e-12));
  }
}

TEST_CASE("soft radial confinement buckles the chain") {
  TrapConfig trap;
  trap.radial_freq = 2 * pi * 0.52e6;
  trap.radial_freq_high = 2 * pi * 0.55e6;
  BeamProfile beam;
  CHECK_THROWS_AS(ChainModel::build(5, WellMode::two_qubit, trap, beam), InputError);
  // two ions at the same settings are still fine
  CHECK_NOTHROW(ChainModel::build(2, WellMode::cooling, trap, beam));
}

TEST_CASE("beam envelope") {
  BeamProfile beam;
  CHECK(beam.w_eff_um() == doctest::Approx(6.2142817201).epsilon(1e-9));
  CHECK(beam.amplitude(0.0) == doctest::Approx(1.0));
  // coma makes the envelope asymmetric; at one waist the ratio is set by
  // (1 + coma) / (1 - coma)
  double ratio = beam.amplitude(beam.w_eff_um()) / beam.amplitude(-beam.w_eff_um());
  CHECK(ratio == doctest::Approx(1.08 / 0.92).epsilon(1e-12));
  // amplitude clips at zero far out on the depleted side
  BeamProfile strong = beam;
  strong.coma = 0.5;
  CHECK(strong.amplitude(-2.0 * strong.w_eff_um()) == 0.0);
  // phase front
  CHECK(beam.phase(2.0) == doctest::Approx(beam.phase_tilt * 2.0 + beam.phase_curvature * 4.0));
}

TEST_CASE("pair balancing equalizes the two addressed ions") {
  TrapConfig trap;
  BeamProfile beam;
  ChainModel m = ChainModel::build(3, WellMode::single_qubit, trap, beam);
  for (int p : {0, 1}) {
    double xc = m.beam_center_um(p);
    double ai = beam.amplitude(m.positions_um()(p) - xc);
    double aj = beam.amplitude(m.positions_um()(p + 1) - xc);
    CHECK(ai == doctest::Approx(aj).epsilon(1e-10));
  }
  // without coma the balanced center is the midpoint
  BeamProfile sym = beam;
  sym.coma = 0.0;
  ChainModel ms = ChainModel::build(3, WellMode::single_qubit, trap, sym);
  CHECK(std::abs(ms.balance_offset_um(0)) < 1e-9);
  // with coma it is not
  CHECK(std::abs(m.balance_offset_um(0)) > 1e-3);
}

TEST_CASE("step kernel: pair at unity, one tracked neighbor, rest silent") {
  TrapConfig trap;
  BeamProfile beam;
  ChainModel m = ChainModel::build(4, WellMode::single_qubit, trap, beam);

  auto d = m.step_drive(1, +1);  // pair (1,2), upcoming 3, finished 0
  CHECK(d[1].kappa == 1.0);
  CHECK(d[2].kappa == 1.0);
  CHECK(d[0].kappa == 0.0);
  CHECK(d[3].kappa > 0.05);
  CHECK(d[3].kappa < 0.5);

  // the pure-Gaussian value for the next-nearest ion is exp(-2 s^2 / w^2);
  // coma and the balance offset move it only slightly
  BeamProfile sym = beam;
  sym.coma = 0.0;
  ChainModel m3 = ChainModel::build(3, WellMode::single_qubit, trap, sym);
  auto d3 = m3.step_drive(0, +1);
  double s = m3.positions_um()(1) - m3.positions_um()(0);
  double w = sym.w_eff_um();
  CHECK(d3[2].kappa == doctest::Approx(std::exp(-2.0 * s * s / (w * w))).epsilon(1e-6));
  CHECK(d3[2].kappa == doctest::Approx(0.164).epsilon(0.03));

  // mirrored walk: pair (2,1), upcoming 0, finished 3
  auto dm = m.step_drive(2, -1);
  CHECK(dm[2].kappa == 1.0);
  CHECK(dm[1].kappa == 1.0);
  CHECK(dm[3].kappa == 0.0);
  CHECK(dm[0].kappa > 0.05);

  // solo final step
  auto dl = m.step_drive(3, +1);
  CHECK(dl[3].kappa == 1.0);
  CHECK(dl[0].kappa == 0.0);
  CHECK(dl[1].kappa == 0.0);
  CHECK(dl[2].kappa == 0.0);
}

TEST_CASE("entangling couplings sit at one half for the pair") {
  TrapConfig trap;
  BeamProfile beam;
  ChainModel m2 = ChainModel::build(2, WellMode::two_qubit, trap, beam);
  RVec c2 = m2.ms_couplings(0);
  CHECK(c2(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c2(1) == doctest::Approx(0.5).epsilon(1e-9));
  // Lamb-Dicke parameter for the in-phase mode, uniform across the chain
  CHECK(m2.eta_com()(0) == doctest::Approx(0.0717176098).epsilon(1e-6));
  CHECK(m2.eta_com()(1) == doctest::Approx(m2.eta_com()(0)).epsilon(1e-12));

  ChainModel m3 = ChainModel::build(3, WellMode::two_qubit, trap, beam);
  RVec c3 = m3.ms_couplings(0);
  CHECK(c3(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c3(1) == doctest::Approx(0.5).epsilon(1e-9));
  // the spectator rides along at a sizable fraction
  CHECK(c3(2) > 0.1);
  CHECK(c3(2) < 0.35);
  for (int i = 0; i < 3; ++i) {
    CHECK(c3(i) >= 0.0);
    CHECK(c3(i) <= 0.5 + 1e-9);
  }
}

TEST_CASE("well presets rescale the axial frequency") {
  TrapConfig trap;
  CHECK(trap.axial_for(WellMode::cooling) == doctest::Approx(2 * pi * 0.5e6));
  CHECK(trap.axial_for(WellMode::single_qubit) ==
        doctest::Approx(2 * pi * 0.5e6 / std::sqrt(2.0)));
  CHECK(trap.axial_for(WellMode::two_qubit) ==
        doctest::Approx(2 * pi * 0.5e6 * std::sqrt(1.5)));
  // tighter wells squeeze the ions together
  BeamProfile beam;
  ChainModel a = ChainModel::build(2, WellMode::single_qubit, trap, beam);
  ChainModel b = ChainModel::build(2, WellMode::two_qubit, trap, beam);
  CHECK(b.positions_um()(1) < a.positions_um()(1));
}
