#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qdob/channel.hpp"
#include "qdob/contraction.hpp"

namespace qdob {

inline constexpr std::int64_t kMinusInfinity = std::numeric_limits<std::int64_t>::min();
inline constexpr std::int64_t kPlusInfinity = std::numeric_limits<std::int64_t>::max();

// Deterministic inhomogeneous sequence (Phi_n). The provider must be a pure
// function of the index; windows use indices [s, t).
class ChannelSequence {
 public:
  ChannelSequence(int d, std::int64_t lo, std::int64_t hi,
                  std::function<QuantumChannel(std::int64_t)> provider)
      : d_(d), lo_(lo), hi_(hi), provider_(std::move(provider)) {}

  static ChannelSequence from_list(std::int64_t start, std::vector<QuantumChannel> channels);
  static ChannelSequence constant(const QuantumChannel& phi);
  // periodic repetition of the list over all integers, list[0] at index 0
  static ChannelSequence cycle(std::vector<QuantumChannel> channels);

  int dim() const { return d_; }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  QuantumChannel at(std::int64_t n) const;

 private:
  int d_;
  std::int64_t lo_, hi_;
  std::function<QuantumChannel(std::int64_t)> provider_;
};

// superoperator of Phi_{t:s} = Phi_{t-1} ∘ ... ∘ Phi_s, with Choi
// re-symmetrization when the accumulated CPTP defect exceeds 1e-8
Mat window_superop(const ChannelSequence& seq, std::int64_t s, std::int64_t t);
QuantumChannel window_product(const ChannelSequence& seq, std::int64_t s, std::int64_t t);

ContractionReport window_kappa(const ChannelSequence& seq, std::int64_t s, std::int64_t t,
                               int restarts = 64, std::uint64_t seed = kDefaultSeed);

struct PullbackBoundary {
  std::int64_t t = 0;
  DensityMatrix rho;
  int depth_used = 0;
  double residual = 0.0;
  bool converged = false;
};

// rho_t as the limit of Phi_{t:t-n}(tau); stops on a state-Cauchy step or on
// 2 kappa <= tol (kappa probed every 8 depths since it costs more).
PullbackBoundary pullback_boundary(const ChannelSequence& seq, std::int64_t t,
                                   const DensityMatrix& tau, double tol, int max_depth);

struct ForwardReplacementReport {
  ContractionReport kappa;
  double dist = 0.0;
  double center_drift = 0.0;
  bool sandwich_ok = false;
  bool drift_ok = false;
};

// kappa/replacement sandwich for the window plus the reference-state drift
// ||Phi_{t:s}(tau) - Phi_{t:s}(tau')||_1 <= 2 kappa
ForwardReplacementReport forward_replacement_check(const ChannelSequence& seq, std::int64_t s,
                                                   std::int64_t t, const DensityMatrix& tau,
                                                   const DensityMatrix& tau_prime,
                                                   int restarts = 64,
                                                   std::uint64_t seed = kDefaultSeed);

struct ClockBounds {
  double product_bound = 1.0;
  double exp_bound = 1.0;
  double threshold_bound = 1.0;
  int good_steps = 0;  // count of a_j >= r
};

// one-step contraction clocks from certified per-step bounds kappa_j <= 1 - a_j
ClockBounds contraction_clock_bound(const std::vector<double>& a, double r);

struct GoodBlockReport {
  bool holds = false;
  double bound = 1.0;
  // false when a block decision relied on an optimized lower bound rather
  // than an exact closed form
  bool certified = true;
};

// uniform (l, M, q)-good-block scan over [s, t)
GoodBlockReport good_block_bound(const ChannelSequence& seq, std::int64_t s, std::int64_t t,
                                 int block_len, int window_len, double q,
                                 int restarts = 64, std::uint64_t seed = kDefaultSeed);

}  // namespace qdob
