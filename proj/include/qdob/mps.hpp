#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "qdob/channel.hpp"
#include "qdob/contraction.hpp"
#include "qdob/random_cocycle.hpp"

namespace qdob {

// Site-indexed left-canonical tensor chain. Site indices start at 1; each
// site holds d_K bond-space matrices with sum_i K_i* K_i = I.
class MpsChain {
 public:
  MpsChain(int d_k, int d_h, int n_max, std::function<std::vector<Mat>(int)> sites);

  static MpsChain from_sites(std::vector<std::vector<Mat>> sites);

  int physical_dim() const { return d_k_; }
  int bond_dim() const { return d_h_; }
  int n_max() const { return n_max_; }
  // validated tensors of site n (1-based)
  std::vector<Mat> site(int n) const;

 private:
  int d_k_, d_h_, n_max_;
  std::function<std::vector<Mat>(int)> sites_;
};

struct LocalObservable {
  int a = 1, b = 1;  // support [a, b], 1-based
  Mat x;             // side d_K^(b-a+1)

  static LocalObservable on(int a, int b, Mat x, int d_k);
  int length() const { return b - a + 1; }
};

// CPTP transfer channel of one site
QuantumChannel transfer_channel(const MpsChain& chain, int n);

// Theta_{m,n} = Phi_{m+1} ∘ ... ∘ Phi_n (identity when m = n)
Mat theta_superop(const MpsChain& chain, int m, int n);
QuantumChannel theta_product(const MpsChain& chain, int m, int n);

// inserted map X_hat(Y) = sum <i|X|j> K_j Y K_i* over the support block
Mat inserted_transfer_superop(const MpsChain& chain, const LocalObservable& obs);

// trace of a bond superoperator in the Hilbert-Schmidt sense
cplx superoperator_trace(const Mat& superop);

inline constexpr std::int64_t kDenseCap = 1 << 20;

// trace-closed coefficients tr(K_{i1} ... K_{in}) as a dense vector
Vec finite_volume_vector(const MpsChain& chain, int n);

enum class ExpectationMethod { dense, transfer };

cplx finite_volume_expectation(const MpsChain& chain, const LocalObservable& obs, int n,
                               ExpectationMethod method);

struct LimitHistoryRow {
  int n = 0;
  cplx phi_n;
  double z_abs_err = 0.0;   // |Z_n - 1|
  double phi_err = 0.0;     // |phi_n - phi_inf|
  double kappa_tail = 0.0;  // kappa of Theta_{m,n}
  bool z_bound_ok = false;
  bool phi_bound_ok = false;
};

struct LimitReport {
  cplx phi_inf;
  DensityMatrix boundary;  // rho_{m+1}
  double kappa_tail = 0.0;
  double error_bound = 0.0;  // 16 D_H^2 ||X||_inf kappa_tail
  std::vector<LimitHistoryRow> history;
  bool converged = false;
  bool boundary_recursion_ok = false;
  int n_used = 0;
};

LimitReport thermodynamic_limit(const MpsChain& chain, const LocalObservable& obs, double tol,
                                int max_n);

struct CorrelationReport {
  double connected = 0.0;
  double bound = 0.0;
  bool pass = false;
  cplx phi_ab, phi_a, phi_b;
};

CorrelationReport correlation_bound_check(const MpsChain& chain, const LocalObservable& a,
                                          const LocalObservable& b, double tol = 1e-6,
                                          int max_n = 400);

// chain realized from a stationary tensor cocycle: site n carries the tensor
// drawn at fiber time -n
MpsChain chain_from_fiber(const CocycleTrajectory& traj, int n_max);

struct RandomMpsFiberRow {
  bool limit_converged = false;
  double lambda_hat = 0.0;  // (1/n) log kappa of the deepest tail product
  double fit_beta = 0.0;    // fitted decay slope of |phi_n - phi_inf|
  double fit_c = 0.0;
  bool errors_under_envelope = false;
};

struct RandomMpsReport {
  std::vector<RandomMpsFiberRow> fibers;
  double lambda_hat_mean = 0.0;
  bool lambda_negative = false;
  bool all_limits_converged = false;
  bool identity_check_ok = false;  // Theta_{omega;m,n} vs pullback bookkeeping
  // gap sweep: per gap L, exceedance frequency of the connected correlation
  // over the fitted threshold C e^{-gamma L}, plus the claim level e^{-gamma L}
  std::vector<int> gaps;
  std::vector<double> exceedance_freq;
  std::vector<double> claim_level;
  std::vector<double> binom_stderr;
  bool tail_consistent = false;
  double gamma = 0.0;
  double threshold_c = 0.0;
};

RandomMpsReport random_mps_experiment(const EnvironmentBase& base, int m,
                                      const LocalObservable& obs, int n_max, int samples,
                                      std::uint64_t seed);

}  // namespace qdob
