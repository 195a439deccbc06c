#pragma once

#include <cstdint>
#include <vector>

#include "qdob/channel.hpp"
#include "qdob/contraction.hpp"
#include "qdob/products.hpp"

namespace qdob {

// Mean of extended-nonpositive values: any -infinity sample forces the mean
// to -infinity and is reported through its count.
struct ExtendedMean {
  double value = 0.0;
  int minus_inf_count = 0;
  bool is_minus_inf() const { return minus_inf_count > 0; }
};

inline constexpr double kKappaZeroThreshold = 1e-14;

// Stationary channel environment over an invertible base: a single channel,
// an iid draw from weighted atoms, or a stationary finite Markov chain over
// atoms. Atoms may be stochastic families (haar_random / haar_unitary); those
// redraw at every time index.
struct EnvironmentBase {
  enum class Kind { deterministic, iid, markov };

  Kind kind = Kind::deterministic;
  int d = 2;
  std::uint64_t seed = 0;
  std::vector<ChannelLabel> atoms;
  std::vector<double> weights;  // iid
  Eigen::MatrixXd P;            // markov transition matrix, row-stochastic
  Eigen::VectorXd pi;           // stationary distribution

  static EnvironmentBase deterministic_base(ChannelLabel atom, std::uint64_t seed);
  static EnvironmentBase iid_base(std::vector<ChannelLabel> atoms, std::vector<double> weights,
                                  std::uint64_t seed);
  static EnvironmentBase markov_base(std::vector<ChannelLabel> atoms, Eigen::MatrixXd P,
                                     Eigen::VectorXd pi, std::uint64_t seed);

  void validate() const;
};

// One sampled two-sided realization over j in [-N, N]; a deterministic
// function of (base, fiber seed, N).
class CocycleTrajectory {
 public:
  CocycleTrajectory(const EnvironmentBase& base, std::uint64_t fiber_seed, std::int64_t n_window);

  int dim() const { return base_.d; }
  std::int64_t window() const { return n_window_; }
  const EnvironmentBase& base() const { return base_; }
  std::uint64_t fiber_seed() const { return fiber_seed_; }

  const QuantumChannel& at(std::int64_t j) const;  // j in [-N, N]
  int atom_index(std::int64_t j) const;

  // superoperator of Phi_{omega; t:s} along this fiber
  Mat product_superop(std::int64_t s, std::int64_t t) const;

 private:
  EnvironmentBase base_;
  std::uint64_t fiber_seed_;
  std::int64_t n_window_;
  std::vector<int> atom_index_;
  std::vector<QuantumChannel> channels_;
};

CocycleTrajectory sample_fiber(const EnvironmentBase& base, std::uint64_t seed,
                               std::int64_t n_window);

// kappa of Phi_{omega; n:0} resp. Phi_{omega; 0:-n}
ContractionReport forward_kappa(const CocycleTrajectory& traj, std::int64_t n,
                                int restarts = 64, std::uint64_t seed = kDefaultSeed);
ContractionReport pullback_kappa(const CocycleTrajectory& traj, std::int64_t n,
                                 int restarts = 64, std::uint64_t seed = kDefaultSeed);

struct LyapunovEstimate {
  int n = 0;
  int samples = 0;
  double mean_log_kappa_over_n = 0.0;  // -inf reported via minus_inf flag
  double ci_halfwidth = 0.0;           // 95%, normal approximation
  int minus_inf_count = 0;
  bool minus_inf = false;
  std::vector<std::pair<int, double>> kingman_curve;  // (n', mean of log kappa_{n'} / n')
};

LyapunovEstimate lyapunov_estimate(const EnvironmentBase& base, int n, int samples,
                                   std::uint64_t seed);

struct StationaryStateField {
  DensityMatrix rho_at_zero;
  std::vector<double> residual_chain;
  int depth_used = 0;
  bool converged = false;
  double last_kappa = 1.0;
  bool spot_checks_ok = false;
};

StationaryStateField stationary_state(const CocycleTrajectory& traj, double tol, int max_depth);

struct QuenchedRateFit {
  double c_plus = 1.0;
  double c_minus = 1.0;
  bool inequalities_ok = false;
  bool convergent = false;
};

QuenchedRateFit quenched_rate_fit(const CocycleTrajectory& traj, double beta, int n_max);

enum class NegativeExponentMethod { contracting_block, doeblin_block, strict_positive_block };

struct NegativeExponentCertificate {
  NegativeExponentMethod method{};
  int block_len = 0;
  double contracting_probability = 0.0;  // P{kappa_L < 1 - 1e-6}
  ExtendedMean log_mean;                 // E[log kappa_L] or E[log(1 - eps)]
  double implied_lambda_bound = 0.0;     // (1/L) * log_mean, -inf aware
  bool certified = false;
};

NegativeExponentCertificate certify_negative_exponent(const EnvironmentBase& base, int block_len,
                                                      int samples, NegativeExponentMethod method,
                                                      std::uint64_t seed);

struct AnnealedRow {
  int n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct AnnealedReport {
  std::vector<AnnealedRow> table;
  double fit_log_a = 0.0;
  double fit_eta = 0.0;
  bool fit_valid = false;
  bool recursion_ok = true;  // a_{r+s+t} <= a_r a_t + rho_s sqrt(a_r a_t) within noise
};

AnnealedReport annealed_mean_kappa(const EnvironmentBase& base, const std::vector<int>& n_list,
                                   int samples, std::uint64_t seed);

struct MixingRow {
  int m = 0;
  double phi_m = 0.0;
  double rho_bound = 0.0;  // 2 sqrt(phi_m)
};

std::vector<MixingRow> markov_mixing_profile(const EnvironmentBase& base, int m_max);

struct HsCriterionReport {
  bool product_bounds_ok = true;   // kappa_n <= sqrt(d) prod s0 per fiber
  ExtendedMean log_s0_mean;        // E[log s0(Phi_omega)]
  ExtendedMean block_log_mean;     // (1/L) E[log s0(Phi_{omega;L:0})]
  double implied_lambda_bound = 0.0;
  bool lambda_negative = false;
  bool stationary_unif_ok = true;  // convergence to R_{I/d} within the 4 kappa envelope
};

HsCriterionReport bistochastic_hs_report(const EnvironmentBase& base, int n, int samples, int block_len,
                                         std::uint64_t seed);

}  // namespace qdob
