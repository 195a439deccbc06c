#include "qdob/matrix_kernel.hpp"

#include <cmath>

namespace qdob {

double trace_norm(const Mat& m) {
  require(m.rows() == m.cols(), "trace_norm: matrix must be square");
  if (m.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

std::pair<Mat, Mat> positive_negative_split(const Mat& x) {
  require(x.rows() == x.cols(), "positive_negative_split: non-square input");
  require(is_hermitian(x, 1e-9), "positive_negative_split: non-Hermitian input");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x));
  const auto& vals = es.eigenvalues();
  const Mat& vecs = es.eigenvectors();
  const int d = static_cast<int>(x.rows());
  Mat plus = Mat::Zero(d, d);
  Mat minus = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    Mat proj = vecs.col(k) * vecs.col(k).adjoint();
    if (vals(k) > 0)
      plus += vals(k) * proj;
    else
      minus -= vals(k) * proj;
  }
  return {plus, minus};
}

Mat psd_part(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x));
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eigenvalue(const Mat& hermitian) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(hermitian));
  return es.eigenvalues()(0);
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat partial_trace(const Mat& m, int d1, int d2, TraceOut which) {
  require(d1 >= 1 && d2 >= 1, "partial_trace: bad dimensions");
  require(m.rows() == m.cols() && m.rows() == static_cast<long>(d1) * d2,
          "partial_trace: dimension mismatch");
  if (which == TraceOut::second) {
    Mat out = Mat::Zero(d1, d1);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d1; ++j) {
        cplx s = 0.0;
        for (int k = 0; k < d2; ++k) s += m(i * d2 + k, j * d2 + k);
        out(i, j) = s;
      }
    return out;
  }
  Mat out = Mat::Zero(d2, d2);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < d1; ++k) s += m(k * d2 + i, k * d2 + j);
      out(i, j) = s;
    }
  return out;
}

DensityMatrix DensityMatrix::make(const Mat& m, double tol) {
  require(m.rows() == m.cols(), "DensityMatrix: non-square input");
  require(is_hermitian(m, tol), "DensityMatrix: non-Hermitian input");
  require(std::abs(m.trace().real() - 1.0) <= tol && std::abs(m.trace().imag()) <= tol,
          "DensityMatrix: trace must be 1");
  require(min_eigenvalue(m) >= -tol, "DensityMatrix: negative eigenvalue");
  return DensityMatrix{hermitian_part(m)};
}

DensityMatrix maximally_mixed(int d) {
  return DensityMatrix{Mat::Identity(d, d) / static_cast<double>(d)};
}

HermitianTraceless HermitianTraceless::make(const Mat& m, double tol) {
  require(m.rows() == m.cols(), "HermitianTraceless: non-square input");
  require(is_hermitian(m, tol), "HermitianTraceless: non-Hermitian input");
  double tn = trace_norm(m);
  require(std::abs(m.trace()) <= tol * std::max(1.0, tn),
          "HermitianTraceless: nonzero trace");
  return HermitianTraceless{hermitian_part(m)};
}

}  // namespace qdob
