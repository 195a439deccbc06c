#pragma once

#include <complex>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace qdob {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kHermTol = 1e-10;

// sum of singular values
double trace_norm(const Mat& m);

// largest singular value
double operator_norm(const Mat& m);

double max_abs(const Mat& m);

bool is_hermitian(const Mat& m, double tol = kHermTol);

Mat hermitian_part(const Mat& m);

// X = X+ - X-, both PSD with orthogonal supports. Throws on non-Hermitian
// input. X = 0 gives two zero matrices.
std::pair<Mat, Mat> positive_negative_split(const Mat& x);

// eigenvalue clipping onto the PSD cone
Mat psd_part(const Mat& x);

double min_eigenvalue(const Mat& hermitian);

Mat kron(const Mat& a, const Mat& b);

enum class TraceOut { first, second };

// partial trace of a (d1*d2)x(d1*d2) matrix over the named tensor factor
Mat partial_trace(const Mat& m, int d1, int d2, TraceOut which);

// Square matrices only below; callers validate dimensions.

// Hermitian within tolerance, eigenvalues >= -tol, trace 1 within tol.
struct DensityMatrix {
  Mat rho;

  static DensityMatrix make(const Mat& m, double tol = kHermTol);
  int dim() const { return static_cast<int>(rho.rows()); }
};

DensityMatrix maximally_mixed(int d);

// Hermitian and trace-zero within tolerance (zero matrix admitted).
struct HermitianTraceless {
  Mat x;

  static HermitianTraceless make(const Mat& m, double tol = kHermTol);
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace qdob
