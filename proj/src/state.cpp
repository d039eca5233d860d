#include "iontrap/state.hpp"

namespace iontrap {

QuantumState::QuantumState(int n_qubits, int boson_dim)
    : n_qubits_(n_qubits), boson_dim_(boson_dim) {
  if (n_qubits < 1 || n_qubits > 20) throw InputError("QuantumState: bad qubit count");
  if (boson_dim < 1) throw InputError("QuantumState: bad boson dimension");
  amp_ = Vec::Zero((Eigen::Index{1} << n_qubits) * boson_dim);
}

QuantumState QuantumState::zero(int n_qubits, int boson_dim) {
  QuantumState s(n_qubits, boson_dim);
  s.amp_(0) = 1.0;
  return s;
}

QuantumState QuantumState::basis(const std::vector<int>& bits, int boson_dim) {
  QuantumState s(static_cast<int>(bits.size()), boson_dim);
  Eigen::Index idx = 0;
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw InputError("QuantumState::basis: bits must be 0/1");
    idx |= Eigen::Index{bits[i]} << (bits.size() - 1 - i);
  }
  s.amp_(idx * boson_dim) = 1.0;
  return s;
}

void QuantumState::apply(const Mat& u, const std::vector<int>& targets) {
  const int k = static_cast<int>(targets.size());
  const Eigen::Index du = Eigen::Index{1} << k;
  if (u.rows() != du || u.cols() != du) throw InputError("apply: operator size mismatch");
  for (int t : targets)
    if (t < 0 || t >= n_qubits_) throw InputError("apply: target out of range");

  // bit position (within the qubit integer) of each target, msb first in u
  std::vector<int> tpos(k);
  for (int t = 0; t < k; ++t) tpos[t] = n_qubits_ - 1 - targets[t];

  std::vector<int> rest;
  for (int q = 0; q < n_qubits_; ++q) {
    bool is_t = false;
    for (int t : targets)
      if (t == q) is_t = true;
    if (!is_t) rest.push_back(n_qubits_ - 1 - q);
  }

  const Eigen::Index n_rest = Eigen::Index{1} << rest.size();
  Vec scratch(du);
  for (Eigen::Index r = 0; r < n_rest; ++r) {
    Eigen::Index base = 0;
    for (size_t b = 0; b < rest.size(); ++b)
      base |= ((r >> b) & 1) << rest[b];
    for (int m = 0; m < boson_dim_; ++m) {
      for (Eigen::Index j = 0; j < du; ++j) {
        Eigen::Index idx = base;
        for (int t = 0; t < k; ++t) idx |= ((j >> (k - 1 - t)) & 1) << tpos[t];
        scratch(j) = amp_(idx * boson_dim_ + m);
      }
      Vec out = u * scratch;
      for (Eigen::Index j = 0; j < du; ++j) {
        Eigen::Index idx = base;
        for (int t = 0; t < k; ++t) idx |= ((j >> (k - 1 - t)) & 1) << tpos[t];
        amp_(idx * boson_dim_ + m) = out(j);
      }
    }
  }
}

void QuantumState::apply_full(const Mat& u) {
  if (u.rows() != amp_.size() || u.cols() != amp_.size())
    throw InputError("apply_full: operator size mismatch");
  amp_ = u * amp_;
}

void QuantumState::normalize() {
  double n = amp_.norm();
  if (n < 1e-300) throw NumericalError("normalize: zero state");
  amp_ /= n;
}

RVec QuantumState::probabilities() const {
  const Eigen::Index nq = Eigen::Index{1} << n_qubits_;
  RVec p = RVec::Zero(nq);
  for (Eigen::Index b = 0; b < nq; ++b)
    for (int m = 0; m < boson_dim_; ++m) p(b) += std::norm(amp_(b * boson_dim_ + m));
  return p;
}

Mat QuantumState::reduced_qubits(const std::vector<int>& keep) const {
  const int k = static_cast<int>(keep.size());
  for (int q : keep)
    if (q < 0 || q >= n_qubits_) throw InputError("reduced_qubits: index out of range");
  const Eigen::Index dk = Eigen::Index{1} << k;
  Mat rho = Mat::Zero(dk, dk);
  const Eigen::Index nq = Eigen::Index{1} << n_qubits_;
  auto sub_index = [&](Eigen::Index b) {
    Eigen::Index s = 0;
    for (int t = 0; t < k; ++t) s |= ((b >> (n_qubits_ - 1 - keep[t])) & 1) << (k - 1 - t);
    return s;
  };
  // rho[s,s'] = sum over environment configs and boson of psi psi*
  for (Eigen::Index b = 0; b < nq; ++b) {
    for (Eigen::Index b2 = 0; b2 < nq; ++b2) {
      // environment bits (everything not kept) must agree
      Eigen::Index envmask = nq - 1;
      for (int t = 0; t < k; ++t) envmask &= ~(Eigen::Index{1} << (n_qubits_ - 1 - keep[t]));
      if ((b & envmask) != (b2 & envmask)) continue;
      cxd acc = 0.0;
      for (int m = 0; m < boson_dim_; ++m)
        acc += amp_(b * boson_dim_ + m) * std::conj(amp_(b2 * boson_dim_ + m));
      rho(sub_index(b), sub_index(b2)) += acc;
    }
  }
  return rho;
}

Mat QuantumState::reduced_boson() const {
  Mat rho = Mat::Zero(boson_dim_, boson_dim_);
  const Eigen::Index nq = Eigen::Index{1} << n_qubits_;
  for (Eigen::Index b = 0; b < nq; ++b)
    for (int m = 0; m < boson_dim_; ++m)
      for (int m2 = 0; m2 < boson_dim_; ++m2)
        rho(m, m2) += amp_(b * boson_dim_ + m) * std::conj(amp_(b * boson_dim_ + m2));
  return rho;
}

}  // namespace iontrap
