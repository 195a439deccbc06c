#include "qdob/products.hpp"

#include <cmath>
#include <map>
#include <memory>

namespace qdob {

ChannelSequence ChannelSequence::from_list(std::int64_t start,
                                           std::vector<QuantumChannel> channels) {
  require(!channels.empty(), "sequence: empty channel list");
  const int d = channels.front().dim();
  for (const auto& c : channels) require(c.dim() == d, "sequence: mixed dimensions");
  auto shared = std::make_shared<std::vector<QuantumChannel>>(std::move(channels));
  std::int64_t hi = start + static_cast<std::int64_t>(shared->size()) - 1;
  return ChannelSequence(d, start, hi, [shared, start](std::int64_t n) {
    return (*shared)[static_cast<std::size_t>(n - start)];
  });
}

ChannelSequence ChannelSequence::constant(const QuantumChannel& phi) {
  auto shared = std::make_shared<QuantumChannel>(phi);
  return ChannelSequence(phi.dim(), kMinusInfinity, kPlusInfinity,
                         [shared](std::int64_t) { return *shared; });
}

ChannelSequence ChannelSequence::cycle(std::vector<QuantumChannel> channels) {
  require(!channels.empty(), "sequence: empty channel list");
  const int d = channels.front().dim();
  for (const auto& c : channels) require(c.dim() == d, "sequence: mixed dimensions");
  auto shared = std::make_shared<std::vector<QuantumChannel>>(std::move(channels));
  const std::int64_t period = static_cast<std::int64_t>(shared->size());
  return ChannelSequence(d, kMinusInfinity, kPlusInfinity, [shared, period](std::int64_t n) {
    std::int64_t r = n % period;
    if (r < 0) r += period;
    return (*shared)[static_cast<std::size_t>(r)];
  });
}

QuantumChannel ChannelSequence::at(std::int64_t n) const {
  require(n >= lo_ && n <= hi_, "sequence: index outside interval");
  QuantumChannel phi = provider_(n);
  require(phi.dim() == d_, "sequence: provider dimension mismatch");
  return phi;
}

namespace {

double superop_tp_defect(const Mat& s, int d) {
  Vec vec_id = vectorize(Mat::Identity(d, d));
  return (s.adjoint() * vec_id - vec_id).cwiseAbs().maxCoeff();
}

Mat resymmetrize(const Mat& s, int d) {
  Mat choi = psd_part(hermitian_part(choi_from_superop(s, d)));
  double tr = choi.trace().real();
  if (tr > 1e-12) choi /= tr;
  return superop_from_choi(choi, d);
}

}  // namespace

Mat window_superop(const ChannelSequence& seq, std::int64_t s, std::int64_t t) {
  require(s <= t, "window: need s <= t");
  const int d = seq.dim();
  Mat acc = Mat::Identity(d * d, d * d);
  for (std::int64_t n = s; n < t; ++n) {
    acc = seq.at(n).superop() * acc;
    if (superop_tp_defect(acc, d) > 1e-8) acc = resymmetrize(acc, d);
  }
  return acc;
}

QuantumChannel window_product(const ChannelSequence& seq, std::int64_t s, std::int64_t t) {
  return QuantumChannel::from_superop(window_superop(seq, s, t));
}

ContractionReport window_kappa(const ChannelSequence& seq, std::int64_t s, std::int64_t t,
                               int restarts, std::uint64_t seed) {
  return kappa_tr_superop(window_superop(seq, s, t), restarts, 1e-8, seed);
}

PullbackBoundary pullback_boundary(const ChannelSequence& seq, std::int64_t t,
                                   const DensityMatrix& tau, double tol, int max_depth) {
  const int d = seq.dim();
  require(tau.dim() == d, "pullback: reference state dimension mismatch");
  PullbackBoundary out;
  out.t = t;
  Mat acc = Mat::Identity(d * d, d * d);
  Mat rho_prev = tau.rho;
  Mat rho = tau.rho;
  double residual = 2.0;
  int depth = 0;
  bool converged = false;
  for (int n = 1; n <= max_depth; ++n) {
    std::int64_t idx = t - n;
    if (idx < seq.lo()) break;
    acc = acc * seq.at(idx).superop();
    rho = hermitian_part(apply_superop(acc, tau.rho));
    residual = trace_norm(rho - rho_prev);
    depth = n;
    if (residual <= tol) {
      converged = true;
      break;
    }
    if (n % 8 == 0) {
      double kap = kappa_tr_superop(acc).value;
      if (2.0 * kap <= tol) {
        residual = std::min(residual, 2.0 * kap);
        converged = true;
        break;
      }
    }
    rho_prev = rho;
  }
  // clean tiny numerical negativity before constructing the state
  Mat cleaned = psd_part(rho);
  cleaned /= cleaned.trace().real();
  out.rho = DensityMatrix::make(cleaned);
  out.depth_used = depth;
  out.residual = residual;
  out.converged = converged;
  return out;
}

ForwardReplacementReport forward_replacement_check(const ChannelSequence& seq, std::int64_t s,
                                                   std::int64_t t, const DensityMatrix& tau,
                                                   const DensityMatrix& tau_prime, int restarts,
                                                   std::uint64_t seed) {
  QuantumChannel prod = window_product(seq, s, t);
  ReplacementDistanceReport rd = replacement_distance(prod, tau, restarts, seed);
  ForwardReplacementReport rep;
  rep.kappa = rd.kappa;
  rep.dist = rd.dist;
  rep.sandwich_ok = rd.sandwich_ok;
  rep.center_drift = trace_norm(prod.apply(tau.rho) - prod.apply(tau_prime.rho));
  rep.drift_ok = rep.center_drift <= 2.0 * rep.kappa.value + 1e-6;
  return rep;
}

ClockBounds contraction_clock_bound(const std::vector<double>& a, double r) {
  require(r > 0.0 && r < 1.0, "clock: r must lie in (0,1)");
  ClockBounds out;
  double sum = 0.0;
  for (double aj : a) {
    require(aj >= 0.0 && aj <= 1.0, "clock: a_j out of [0,1]");
    out.product_bound *= 1.0 - aj;
    sum += aj;
    if (aj >= r) ++out.good_steps;
  }
  out.exp_bound = std::exp(-sum);
  out.threshold_bound = std::pow(1.0 - r, out.good_steps);
  require(out.product_bound <= out.exp_bound + 1e-12, "clock: product bound must not exceed exp bound");
  return out;
}

GoodBlockReport good_block_bound(const ChannelSequence& seq, std::int64_t s, std::int64_t t,
                                 int block_len, int window_len, double q, int restarts,
                                 std::uint64_t seed) {
  require(block_len >= 1 && window_len >= block_len, "good_block: need M >= l >= 1");
  require(q > 0.0 && q < 1.0, "good_block: q must lie in (0,1)");
  require(s < t, "good_block: empty window");

  GoodBlockReport rep;
  std::map<std::int64_t, std::pair<double, bool>> kappa_cache;  // u -> (value, exact)
  auto block_kappa = [&](std::int64_t u) {
    auto it = kappa_cache.find(u);
    if (it != kappa_cache.end()) return it->second;
    ContractionReport kr = window_kappa(seq, u, u + block_len, restarts, seed);
    auto val = std::make_pair(kr.value, kr.mode == KappaMode::exact_closed_form);
    kappa_cache.emplace(u, val);
    return val;
  };

  rep.holds = true;
  for (std::int64_t r = s; r + window_len <= t; ++r) {
    bool found = false;
    for (std::int64_t u = r; u + block_len <= r + window_len; ++u) {
      auto [value, exact] = block_kappa(u);
      if (value <= q) {
        found = true;
        if (!exact) rep.certified = false;
        break;
      }
    }
    if (!found) {
      rep.holds = false;
      break;
    }
  }
  if (rep.holds) {
    rep.bound = std::pow(q, static_cast<double>((t - s) / window_len));
    double whole = window_kappa(seq, s, t, restarts, seed).value;
    require(whole <= rep.bound + 1e-4, "good_block: window kappa exceeds certified bound");
  }
  return rep;
}

}  // namespace qdob
