#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qdob/channel.hpp"
#include "qdob/matrix_kernel.hpp"

namespace qdob {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Verified lower-bound certificate for the Markov-Dobrushin coefficient:
// B is a common PSD lower bound for all pure-state outputs, alpha = tr B.
struct MinorizationCertificate {
  Mat B;
  double alpha = 0.0;
  bool verified = false;
  // min over searched pure states of lambda_min(Phi(P) - B)
  double worst_violation = 0.0;
};

// Candidate from bisection on t = tr B with Dykstra alternating projections
// between {B >= 0, tr B = t} and the sampled caps {B <= Phi(P_i)}, then a
// global verification pass over pure states; any violation shrinks B and
// re-verifies. Never over-claims: the result is feasible up to 1e-8.
MinorizationCertificate alpha_md(const QuantumChannel& phi, int sample_count = 256,
                                 int restarts = 64, std::uint64_t seed = 0xD0B0);

struct DoeblinResult {
  double alpha = 0.0;
  Mat tau_hat;
  // set when no strictly feasible interior point exists and the value comes
  // from the best feasible scaling of I/d instead of the barrier solve
  bool approximate = false;
};

// CP-order Doeblin coefficient: max tr tau_hat s.t. tau_hat >= 0 and
// tau_hat ⊗ I/d <= J(Phi), solved by a log-det barrier Newton method on the
// d^2-real-dimensional Hermitian variable.
DoeblinResult alpha_doeblin(const QuantumChannel& phi, double tol = 1e-8);

// Hilbert projective metric h(A,B) = log(sup(A/B) sup(B/A)); infinity when
// the supports differ (rank decided at 1e-10 * lambda_max).
double hilbert_metric(const Mat& a, const Mat& b);

// Sampled lower bound on the projective contraction coefficient c(Phi):
// max over state pairs of d_proj of the normalized outputs.
double projective_contraction_c(const QuantumChannel& phi, int n_pairs = 256,
                                std::uint64_t seed = 0xD0B0);

// Sampled lower bound on the projective diameter Delta(Phi); may be infinite.
double projective_diameter_lower(const QuantumChannel& phi, int n_pairs = 256,
                                 std::uint64_t seed = 0xD0B0);

// m(A,B) = sup{lambda >= 0 : lambda B <= A}; zero on support mismatch.
double projective_m(const Mat& a, const Mat& b);

}  // namespace qdob
