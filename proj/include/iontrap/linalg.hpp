#pragma once

// dense complex linear algebra helpers shared across the library

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace iontrap {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

constexpr double pi = 3.14159265358979323846;
constexpr cxd ii{0.0, 1.0};

// thrown on malformed inputs (bad dimensions, bad arguments)
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// thrown when a numerical routine fails to converge or loses validity
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kronecker product, row-major qubit convention (first factor = qubit 0 = most
// significant block index)
Mat tensor(const Mat& a, const Mat& b);
Vec tensor(const Vec& a, const Vec& b);

inline Mat dag(const Mat& m) { return m.adjoint(); }

bool is_unitary(const Mat& u, double tol = 1e-12);
bool is_hermitian(const Mat& m, double tol = 1e-12);

// 1 - |tr(a^dag b)| / dim, zero iff a == b up to a global phase
double phase_dist(const Mat& a, const Mat& b);

// largest |entry| of a - b, ignoring any global phase on b
double phase_inv_max_err(const Mat& a, const Mat& b);

// Haar-random unitary via QR of a complex Ginibre matrix
Mat haar_unitary(int dim, std::mt19937_64& rng);

// identity shorthand
inline Mat eye(int d) { return Mat::Identity(d, d); }

std::string mat_to_string(const Mat& m, int prec = 4);

}  // namespace iontrap
