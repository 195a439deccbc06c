#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qdob/channel.hpp"
#include "qdob/matrix_kernel.hpp"

namespace qdob {

enum class KappaMode { exact_closed_form, optimized_lower, certified_upper };

struct ContractionReport {
  double value = 0.0;
  KappaMode mode = KappaMode::optimized_lower;
  // orthonormal pair (u, v) for kappa searches, independent unit pair for
  // 1->1 searches
  std::optional<std::pair<Vec, Vec>> witness;
  int restarts_used = 0;
  double residual = 0.0;
};

inline constexpr std::uint64_t kDefaultSeed = 0xD0B0;

// Centered trace-Dobrushin coefficient. d = 2 uses the exact closed form
// (largest singular value of the real 3x3 Bloch linear part); d >= 3 runs a
// multi-start projected-gradient ascent over orthonormal pairs and reports
// an optimized lower bound.
ContractionReport kappa_tr(const QuantumChannel& phi, int restarts = 64, double tol = 1e-8,
                           std::uint64_t seed = kDefaultSeed);

// Same, but straight from a superoperator (validated Hermiticity-preserving
// trace-preserving action is the caller's responsibility). Used on window
// products where building a full channel per prefix would be wasteful.
ContractionReport kappa_tr_superop(const Mat& superop, int restarts = 64, double tol = 1e-8,
                                   std::uint64_t seed = kDefaultSeed);

// Multi-start ascent regardless of dimension; cross-validates the qubit
// closed form.
ContractionReport kappa_tr_multistart(const Mat& superop, int restarts = 64, double tol = 1e-8,
                                      std::uint64_t seed = kDefaultSeed);

// Real 3x3 Bloch linear part of a qubit map, M_ij = Re tr(sigma_i Phi(sigma_j))/2.
Eigen::Matrix3d bloch_linear_part(const Mat& superop);

// Largest singular value of the superoperator compressed to the complex
// trace-zero subspace (Hilbert-Schmidt geometry). Exact via SVD.
double s0(const QuantumChannel& phi);
double s0_superop(const Mat& superop, int d);

// Induced 1->1 norm of a linear map given as a superoperator, maximized over
// rank-one inputs u v*. Optional seed pairs are run as extra restarts.
ContractionReport induced_11_norm(const Mat& superop, int restarts = 64, double tol = 1e-8,
                                  std::uint64_t seed = kDefaultSeed,
                                  const std::vector<std::pair<Vec, Vec>>& seed_pairs = {});

// Cheap certified cap: sqrt(d) times the Hilbert-Schmidt operator norm.
double induced_11_upper(const Mat& superop, int d);

struct ReplacementDistanceReport {
  double dist = 0.0;
  ContractionReport kappa;
  bool sandwich_ok = false;
};

// dist = ||Phi - R||_{1->1} with R(X) = tr(X) Phi(tau); checks the
// kappa <= dist <= 4 kappa sandwich.
ReplacementDistanceReport replacement_distance(const QuantumChannel& phi_prod,
                                               const DensityMatrix& tau,
                                               int restarts = 64,
                                               std::uint64_t seed = kDefaultSeed);

// min{1, 1 - alpha_MD certificate, sqrt(d) * s0}; a certified upper bound
// on kappa_tr.
double kappa_upper_aggregate(const QuantumChannel& phi, std::uint64_t seed = kDefaultSeed);

// ||(Phi ⊗ id_2)(rho ⊗ diag(1,-1))||_1 / ||rho ⊗ diag(1,-1)||_1; equals 1
// for every channel because the deviation lives in the untouched reference
// factor.
double diamond_witness(const QuantumChannel& phi, std::uint64_t seed = kDefaultSeed);

}  // namespace qdob
