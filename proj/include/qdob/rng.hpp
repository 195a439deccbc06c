#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qdob {

// splitmix64 step; the generator behind all sampling in this library.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: every (seed, a, b) triple owns an independent
// deterministic stream, so trials indexed by (sample, time) can be drawn
// in any order, including concurrently, with identical results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s = mixed ^ (0x6a09e667f3bcc909ULL + a);
    mixed = splitmix64(s);
    s = mixed ^ (0xbb67ae8584caa73bULL + b);
    splitmix64(s);
    state_ = s;
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (no cached spare, keeps the stream
  // position a pure function of the draw count)
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::complex<double> gaussian_complex() {
    return {gaussian(), gaussian()};
  }

  // index in [0, n) from a discrete distribution given by cumulative weights
  int categorical(const std::vector<double>& cumulative) {
    double u = uniform();
    for (std::size_t k = 0; k < cumulative.size(); ++k)
      if (u < cumulative[k]) return static_cast<int>(k);
    return static_cast<int>(cumulative.size()) - 1;
  }

  Eigen::VectorXcd gaussian_vector(int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = gaussian_complex();
    return v;
  }

  Eigen::MatrixXcd gaussian_matrix(int rows, int cols) {
    Eigen::MatrixXcd g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = gaussian_complex();
    return g;
  }

  Eigen::VectorXcd unit_vector(int n) {
    Eigen::VectorXcd v = gaussian_vector(n);
    double nv = v.norm();
    while (nv < 1e-12) {
      v = gaussian_vector(n);
      nv = v.norm();
    }
    return v / nv;
  }

  // orthonormal pair (u, v), Haar on the flag of 2-frames
  std::pair<Eigen::VectorXcd, Eigen::VectorXcd> orthonormal_pair(int n) {
    Eigen::VectorXcd u = unit_vector(n);
    Eigen::VectorXcd w = gaussian_vector(n);
    w -= (u.adjoint() * w)(0) * u;
    double nw = w.norm();
    while (nw < 1e-12) {
      w = gaussian_vector(n);
      w -= (u.adjoint() * w)(0) * u;
      nw = w.norm();
    }
    return {u, w / nw};
  }

 private:
  std::uint64_t state_;
};

// Haar-distributed isometry C^cols -> C^rows (rows >= cols) via QR of a
// Gaussian matrix with the R-diagonal phase fixed, so the draw is a
// deterministic function of the stream.
inline Eigen::MatrixXcd haar_isometry(RngStream& rng, int rows, int cols) {
  Eigen::MatrixXcd g = rng.gaussian_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  Eigen::MatrixXcd r = q.adjoint() * g;
  for (int j = 0; j < cols; ++j) {
    std::complex<double> rjj = r(j, j);
    double m = std::abs(rjj);
    std::complex<double> phase = (m < 1e-300) ? 1.0 : rjj / m;
    q.col(j) *= phase;
  }
  return q;
}

inline Eigen::MatrixXcd haar_unitary(RngStream& rng, int d) {
  return haar_isometry(rng, d, d);
}

// random density matrix with full-rank-almost-surely Hilbert-Schmidt law
inline Eigen::MatrixXcd random_density(RngStream& rng, int d) {
  Eigen::MatrixXcd g = rng.gaussian_matrix(d, d);
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Eigen::MatrixXcd random_pure_density(RngStream& rng, int d) {
  Eigen::VectorXcd psi = rng.unit_vector(d);
  return psi * psi.adjoint();
}

}  // namespace qdob
