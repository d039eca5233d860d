#pragma once

// pure-state register: n qubits plus an optional single boson mode
//
// index layout: qubit 0 is the leftmost ket label and the most significant
// bit, so |q0 q1 ... q_{n-1}> has basis index sum_i q_i << (n-1-i).  The
// boson mode, when present, is the least significant factor: full index
// = qubit_index * boson_dim + fock_level.

#include <vector>

#include "iontrap/linalg.hpp"

namespace iontrap {

class QuantumState {
 public:
  QuantumState(int n_qubits, int boson_dim = 1);

  static QuantumState zero(int n_qubits, int boson_dim = 1);
  // computational basis state from bits (bits[0] = qubit 0)
  static QuantumState basis(const std::vector<int>& bits, int boson_dim = 1);

  int n_qubits() const { return n_qubits_; }
  int boson_dim() const { return boson_dim_; }
  Eigen::Index dim() const { return amp_.size(); }

  const Vec& amplitudes() const { return amp_; }
  Vec& amplitudes() { return amp_; }

  // apply a 2^k dimensional unitary to the listed qubits; targets[0] is the
  // most significant index of u
  void apply(const Mat& u, const std::vector<int>& targets);
  // apply an operator on the full register (qubits and boson mode)
  void apply_full(const Mat& u);

  double norm() const { return amp_.norm(); }
  void normalize();

  // probability of each of the 2^n qubit configurations (boson traced out)
  RVec probabilities() const;

  // reduced density matrix over the kept qubits, in the order given
  Mat reduced_qubits(const std::vector<int>& keep) const;
  // reduced density matrix of the boson mode
  Mat reduced_boson() const;

 private:
  int n_qubits_;
  int boson_dim_;
  Vec amp_;
};

}  // namespace iontrap
