#include "iontrap/linalg.hpp"

#include <sstream>

namespace iontrap {

Mat tensor(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec tensor(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

bool is_unitary(const Mat& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < tol;
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() < tol;
}

double phase_dist(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("phase_dist: dimension mismatch");
  return 1.0 - std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

double phase_inv_max_err(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("phase_inv_max_err: dimension mismatch");
  cxd tr = (a.adjoint() * b).trace();
  cxd ph = (std::abs(tr) > 1e-300) ? tr / std::abs(tr) : cxd(1.0, 0.0);
  return (a * ph - b).cwiseAbs().maxCoeff();
}

Mat haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = cxd(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix the phase ambiguity so the distribution is Haar, not just uniform-ish
  for (int j = 0; j < dim; ++j) {
    cxd d = r(j, j);
    q.col(j) *= (std::abs(d) > 1e-300) ? d / std::abs(d) : cxd(1.0, 0.0);
  }
  return q;
}

std::string mat_to_string(const Mat& m, int prec) {
  std::ostringstream os;
  os.precision(prec);
  os << m;
  return os.str();
}

}  // namespace iontrap
