#include "iontrap/pauli.hpp"

#include <cmath>

namespace iontrap {

Mat2 pauli_i() { return Mat2::Identity(); }

Mat2 pauli_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0, -ii, ii, 0;
  return m;
}

Mat2 pauli_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 pauli(int idx) {
  switch (idx) {
    case 0: return pauli_i();
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
  }
  throw InputError("pauli: index must be 0..3");
}

Mat2 gate_h() {
  Mat2 m;
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}

Mat2 gate_s() {
  Mat2 m;
  m << 1, 0, 0, ii;
  return m;
}

Mat4 gate_cnot() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

Mat2 r_phi(double theta, double phi) {
  Mat2 m;
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  m << c, -ii * std::exp(-ii * phi) * s, -ii * std::exp(ii * phi) * s, c;
  return m;
}

Mat2 r_x(double theta) { return r_phi(theta, 0.0); }
Mat2 r_y(double theta) { return r_phi(theta, pi / 2.0); }

Mat2 r_z(double theta) {
  Mat2 m;
  m << std::exp(-ii * theta / 2.0), 0, 0, std::exp(ii * theta / 2.0);
  return m;
}

Mat pauli_string(const std::string& label) {
  Mat out = Mat::Identity(1, 1);
  for (char c : label) {
    int idx;
    switch (c) {
      case 'I': idx = 0; break;
      case 'X': idx = 1; break;
      case 'Y': idx = 2; break;
      case 'Z': idx = 3; break;
      default: throw InputError("pauli_string: label chars must be I/X/Y/Z");
    }
    out = tensor(out, Mat(pauli(idx)));
  }
  return out;
}

std::vector<cxd> pauli_expand(const Mat& u) {
  int n;
  if (u.rows() == 2 && u.cols() == 2)
    n = 1;
  else if (u.rows() == 4 && u.cols() == 4)
    n = 2;
  else
    throw InputError("pauli_expand: expected a 2x2 or 4x4 operator");
  const int terms = (n == 1) ? 4 : 16;
  std::vector<cxd> coeff(terms);
  for (int t = 0; t < terms; ++t) {
    Mat p = pauli_string(pauli_label(t, n));
    coeff[t] = (p.adjoint() * u).trace() / static_cast<double>(u.rows());
  }
  return coeff;
}

std::string pauli_label(int index, int n_qubits) {
  static const char names[] = {'I', 'X', 'Y', 'Z'};
  std::string s(n_qubits, 'I');
  for (int q = n_qubits - 1; q >= 0; --q) {
    s[q] = names[index % 4];
    index /= 4;
  }
  if (index != 0) throw InputError("pauli_label: index out of range");
  return s;
}

namespace {

CliffordTable build_clifford_table() {
  CliffordTable t;
  const Mat2 gen[2] = {gate_h(), gate_s()};
  std::vector<Mat2> found;
  found.push_back(Mat2::Identity());
  // breadth-first closure; the group has exactly 24 elements mod phase
  for (std::size_t head = 0; head < found.size(); ++head) {
    for (const Mat2& g : gen) {
      const Mat2 cand = g * found[head];
      bool known = false;
      for (const Mat2& f : found)
        if (phase_dist(cand, f) < 1e-9) {
          known = true;
          break;
        }
      if (!known) found.push_back(cand);
    }
  }
  if (found.size() != 24)
    throw NumericalError("clifford_table: closure did not reach 24 elements");
  for (int a = 0; a < 24; ++a) t.u[a] = found[a];

  auto lookup = [&](const Mat2& v) {
    for (int j = 0; j < 24; ++j)
      if (phase_dist(v, t.u[j]) < 1e-9) return j;
    throw NumericalError("clifford_table: product left the group");
  };
  for (int a = 0; a < 24; ++a) {
    t.inverse[a] = lookup(t.u[a].adjoint());
    for (int b = 0; b < 24; ++b) t.compose[a][b] = lookup((t.u[a] * t.u[b]).eval());
  }
  return t;
}

}  // namespace

const CliffordTable& clifford_table() {
  static const CliffordTable table = build_clifford_table();
  return table;
}

int clifford_index(const Mat2& v, double tol) {
  const CliffordTable& t = clifford_table();
  for (int j = 0; j < 24; ++j)
    if (phase_dist(v, t.u[j]) < tol) return j;
  throw InputError("clifford_index: operation is not a Clifford");
}

}  // namespace iontrap
