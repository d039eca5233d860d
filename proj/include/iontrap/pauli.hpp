#pragma once

// Pauli matrices, common gates, and Pauli-basis expansion of small operators

#include <array>
#include <string>
#include <vector>

#include "iontrap/linalg.hpp"

namespace iontrap {

Mat2 pauli_i();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
// index 0..3 -> I, X, Y, Z
Mat2 pauli(int idx);

Mat2 gate_h();
Mat2 gate_s();
// control = first (most significant) qubit
Mat4 gate_cnot();

// rotation about the equatorial axis at azimuth phi:
//   R_phi(theta) = exp(-i theta/2 (X cos phi + Y sin phi))
Mat2 r_phi(double theta, double phi);
Mat2 r_x(double theta);
Mat2 r_y(double theta);
Mat2 r_z(double theta);

// tensor product of single-qubit Paulis, label like "XY" (first char = qubit 0)
Mat pauli_string(const std::string& label);

// coefficients a_P = tr(P^dag u) / dim over the Pauli basis; for dim 4 the
// entry order is 4*p0 + p1 with p in {I,X,Y,Z}
std::vector<cxd> pauli_expand(const Mat& u);
std::string pauli_label(int index, int n_qubits);

// the 24-element single-qubit Clifford group mod global phase, generated
// breadth-first from H and S so the indexing is stable; index 0 is the
// identity.  compose[a][b] is the index of u[a]*u[b], inverse[a] of u[a]^-1
struct CliffordTable {
  std::array<Mat2, 24> u;
  std::array<std::array<int, 24>, 24> compose;
  std::array<int, 24> inverse;
};

const CliffordTable& clifford_table();

// index of v in the table up to global phase; throws InputError if v is not
// a Clifford operation
int clifford_index(const Mat2& v, double tol = 1e-6);

}  // namespace iontrap
