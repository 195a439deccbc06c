#include "qdob/mps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "qdob/coefficients.hpp"
#include "qdob/parallel.hpp"

namespace qdob {

namespace {

long long int_pow(int base, int exp) {
  long long out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

double canonical_defect(const std::vector<Mat>& tensors, int d_h) {
  Mat acc = Mat::Zero(d_h, d_h);
  for (const Mat& k : tensors) acc += k.adjoint() * k;
  return max_abs(acc - Mat::Identity(d_h, d_h));
}

}  // namespace

MpsChain::MpsChain(int d_k, int d_h, int n_max, std::function<std::vector<Mat>(int)> sites)
    : d_k_(d_k), d_h_(d_h), n_max_(n_max), sites_(std::move(sites)) {
  require(d_k >= 1 && d_h >= 1 && n_max >= 1, "chain: bad dimensions");
}

MpsChain MpsChain::from_sites(std::vector<std::vector<Mat>> sites) {
  require(!sites.empty(), "chain: no sites");
  const int d_k = static_cast<int>(sites.front().size());
  const int d_h = static_cast<int>(sites.front().front().rows());
  const int n_max = static_cast<int>(sites.size());
  auto shared = std::make_shared<std::vector<std::vector<Mat>>>(std::move(sites));
  return MpsChain(d_k, d_h, n_max,
                  [shared](int n) { return (*shared)[static_cast<std::size_t>(n - 1)]; });
}

std::vector<Mat> MpsChain::site(int n) const {
  require(n >= 1 && n <= n_max_, "chain: site index out of range");
  std::vector<Mat> tensors = sites_(n);
  require(static_cast<int>(tensors.size()) == d_k_, "chain: wrong tensor count at site");
  for (const Mat& k : tensors)
    require(k.rows() == d_h_ && k.cols() == d_h_, "chain: tensor shape mismatch");
  require(canonical_defect(tensors, d_h_) <= 1e-9, "chain: left-canonical condition violated");
  return tensors;
}

LocalObservable LocalObservable::on(int a, int b, Mat x, int d_k) {
  require(1 <= a && a <= b, "observable: bad support");
  long long side = int_pow(d_k, b - a + 1);
  require(x.rows() == side && x.cols() == side, "observable: side must match support length");
  require(x.allFinite(), "observable: non-finite entries");
  return LocalObservable{a, b, std::move(x)};
}

QuantumChannel transfer_channel(const MpsChain& chain, int n) {
  return QuantumChannel::from_kraus(chain.site(n));
}

Mat theta_superop(const MpsChain& chain, int m, int n) {
  require(0 <= m && m <= n && n <= chain.n_max(), "theta: index out of range");
  const int dh = chain.bond_dim();
  Mat acc = Mat::Identity(dh * dh, dh * dh);
  for (int k = m + 1; k <= n; ++k) acc = acc * superop_from_kraus(chain.site(k));
  return acc;
}

QuantumChannel theta_product(const MpsChain& chain, int m, int n) {
  return QuantumChannel::from_superop(theta_superop(chain, m, n));
}

namespace {

// all block products K_{i_a} ... K_{i_b}, indexed with i_a most significant
std::vector<Mat> block_products(const MpsChain& chain, int a, int b) {
  const int dh = chain.bond_dim();
  std::vector<Mat> acc{Mat::Identity(dh, dh)};
  for (int site_idx = a; site_idx <= b; ++site_idx) {
    std::vector<Mat> tensors = chain.site(site_idx);
    std::vector<Mat> next;
    next.reserve(acc.size() * tensors.size());
    for (const Mat& prefix : acc)
      for (const Mat& k : tensors) next.push_back(prefix * k);
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

Mat inserted_transfer_superop(const MpsChain& chain, const LocalObservable& obs) {
  require(obs.b <= chain.n_max(), "inserted transfer: support exceeds chain");
  long long side = int_pow(chain.physical_dim(), obs.length());
  require(obs.x.rows() == side, "inserted transfer: support mismatch");
  const int dh = chain.bond_dim();
  std::vector<Mat> blocks = block_products(chain, obs.a, obs.b);
  Mat s = Mat::Zero(dh * dh, dh * dh);
  for (long long i = 0; i < side; ++i)
    for (long long j = 0; j < side; ++j) {
      cplx c = obs.x(i, j);
      if (std::abs(c) < 1e-300) continue;
      // Y -> K_j Y K_i* contributes kron(conj(K_i), K_j)
      s += c * kron(blocks[static_cast<std::size_t>(i)].conjugate(),
                    blocks[static_cast<std::size_t>(j)]);
    }
  return s;
}

cplx superoperator_trace(const Mat& superop) {
  require(superop.rows() == superop.cols(), "superoperator_trace: non-square input");
  return superop.trace();
}

Vec finite_volume_vector(const MpsChain& chain, int n) {
  require(n >= 1 && n <= chain.n_max(), "finite volume: n out of range");
  long long total = int_pow(chain.physical_dim(), n);
  require(total <= kDenseCap, "finite volume: dense cap exceeded");
  const int dh = chain.bond_dim();

  Vec psi(total);
  std::vector<std::vector<Mat>> sites(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) sites[static_cast<std::size_t>(k - 1)] = chain.site(k);
  const int d_k = chain.physical_dim();

  // depth-first over multi-indices, prefix products shared; first site index
  // is the most significant digit
  std::function<void(int, long long, const Mat&)> descend = [&](int depth, long long idx,
                                                                const Mat& prefix) {
    if (depth == n) {
      psi(idx) = prefix.trace();
      return;
    }
    for (int i = 0; i < d_k; ++i)
      descend(depth + 1, idx * d_k + i,
              prefix * sites[static_cast<std::size_t>(depth)][static_cast<std::size_t>(i)]);
  };
  descend(0, 0, Mat::Identity(dh, dh));
  return psi;
}

cplx finite_volume_expectation(const MpsChain& chain, const LocalObservable& obs, int n,
                               ExpectationMethod method) {
  require(obs.a == 1, "finite volume expectation: observable must start at site 1");
  const int m = obs.b;
  require(m <= n, "finite volume expectation: support exceeds volume");

  if (method == ExpectationMethod::dense) {
    Vec psi = finite_volume_vector(chain, n);
    double norm2 = psi.squaredNorm();
    require(norm2 > 1e-12, "finite volume expectation: degenerate state (zero normalization)");
    long long rows = int_pow(chain.physical_dim(), m);
    long long cols = int_pow(chain.physical_dim(), n - m);
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
        psi.data(), rows, cols);
    Mat gram = block * block.adjoint();
    return (obs.x * gram).trace() / norm2;
  }

  Mat s_obs = inserted_transfer_superop(chain, obs);
  Mat s_theta = theta_superop(chain, m, n);
  LocalObservable id_obs{1, m, Mat::Identity(obs.x.rows(), obs.x.cols())};
  Mat s_id = inserted_transfer_superop(chain, id_obs);
  cplx z = (s_id * s_theta).trace();
  require(std::abs(z) > 1e-12, "finite volume expectation: degenerate state (zero normalization)");
  return (s_obs * s_theta).trace() / z;
}

namespace {

// pullback boundary rho_{r} = lim_n Theta_{r-1, n}(tau) on the chain tail
struct TailBoundary {
  Mat rho;
  double kappa = 1.0;
  int n_used = 0;
  bool converged = false;
};

TailBoundary tail_boundary(const MpsChain& chain, int r, double kappa_target, int max_n) {
  const int dh = chain.bond_dim();
  Mat tau = Mat::Identity(dh, dh) / static_cast<double>(dh);
  TailBoundary out;
  Mat acc = Mat::Identity(dh * dh, dh * dh);
  out.rho = tau;
  for (int n = r; n <= std::min(max_n, chain.n_max()); ++n) {
    acc = acc * superop_from_kraus(chain.site(n));
    out.n_used = n;
    if ((n - r) % 4 == 3 || n == max_n || n == chain.n_max()) {
      out.kappa = kappa_tr_superop(acc).value;
      if (out.kappa <= kappa_target) {
        out.converged = true;
        break;
      }
    }
  }
  Mat rho = psd_part(hermitian_part(apply_superop(acc, tau)));
  double tr = rho.trace().real();
  if (tr > 1e-300) rho /= tr;
  out.rho = rho;
  return out;
}

}  // namespace

LimitReport thermodynamic_limit(const MpsChain& chain, const LocalObservable& obs, double tol,
                                int max_n) {
  require(obs.a == 1, "thermodynamic limit: observable must start at site 1");
  const int m = obs.b;
  const int dh = chain.bond_dim();
  const double dh2 = static_cast<double>(dh) * dh;
  const double xnorm = operator_norm(obs.x);
  max_n = std::min(max_n, chain.n_max());
  require(m < max_n, "thermodynamic limit: no tail available");

  LimitReport rep;
  Mat s_obs = inserted_transfer_superop(chain, obs);
  LocalObservable id_obs{1, m, Mat::Identity(obs.x.rows(), obs.x.cols())};
  Mat s_id = inserted_transfer_superop(chain, id_obs);

  // grow the tail until the quantitative envelope is below tolerance
  Mat tau = Mat::Identity(dh, dh) / static_cast<double>(dh);
  Mat acc = Mat::Identity(dh * dh, dh * dh);
  struct Snapshot {
    int n;
    cplx phi_n;
    double z_abs_err;
    double kappa;
  };
  std::vector<Snapshot> snaps;
  double kappa_tail = 1.0;
  int n_used = m;
  for (int n = m + 1; n <= max_n; ++n) {
    acc = acc * superop_from_kraus(chain.site(n));
    kappa_tail = kappa_tr_superop(acc).value;
    cplx z = (s_id * acc).trace();
    cplx phi_n = std::abs(z) > 1e-12 ? (s_obs * acc).trace() / z : cplx(0, 0);
    snaps.push_back({n, phi_n, std::abs(z - 1.0), kappa_tail});
    n_used = n;
    if (16.0 * dh2 * std::max(xnorm, 1.0) * kappa_tail <= tol && 4.0 * dh2 * kappa_tail <= 0.5)
      break;
  }
  rep.kappa_tail = kappa_tail;
  rep.n_used = n_used;
  rep.converged = 16.0 * dh2 * std::max(xnorm, 1.0) * kappa_tail <= tol;
  rep.error_bound = (4.0 * dh2 * kappa_tail <= 0.5) ? 16.0 * dh2 * xnorm * kappa_tail : kInf;

  Mat rho = psd_part(hermitian_part(apply_superop(acc, tau)));
  rho /= rho.trace().real();
  rep.boundary = DensityMatrix::make(rho);
  rep.phi_inf = apply_superop(s_obs, rho).trace();

  if (!rep.converged) return rep;

  // per-n history with both quantitative claims; the measured phi_inf carries
  // a boundary-truncation error of order 2 ||X|| kappa_final
  double slack = 2.0 * std::max(xnorm, 1.0) * kappa_tail + 1e-10;
  for (const auto& s : snaps) {
    LimitHistoryRow row;
    row.n = s.n;
    row.phi_n = s.phi_n;
    row.z_abs_err = s.z_abs_err;
    row.kappa_tail = s.kappa;
    row.phi_err = std::abs(s.phi_n - rep.phi_inf);
    row.z_bound_ok = s.z_abs_err <= 4.0 * dh2 * s.kappa + slack;
    row.phi_bound_ok = row.phi_err <= 16.0 * dh2 * xnorm * s.kappa + slack;
    rep.history.push_back(row);
  }

  // boundary recursion rho_r = Phi_r(rho_{r+1}) along the observable block
  double kappa_target = tol / (16.0 * dh2 * std::max(xnorm, 1.0));
  bool recursion_ok = true;
  Mat rho_next = tail_boundary(chain, m + 2, kappa_target, max_n).rho;
  for (int r = m + 1; r >= 1; --r) {
    Mat rho_r = tail_boundary(chain, r, kappa_target, max_n).rho;
    Mat pushed = apply_superop(superop_from_kraus(chain.site(r)), rho_next);
    if (trace_norm(rho_r - pushed) > 3.0 * std::max(tol, 1e-9)) recursion_ok = false;
    rho_next = rho_r;
  }
  rep.boundary_recursion_ok = recursion_ok;
  return rep;
}

CorrelationReport correlation_bound_check(const MpsChain& chain, const LocalObservable& a,
                                          const LocalObservable& b, double tol, int max_n) {
  require(a.b + 1 < b.a, "correlation: supports must be separated by a nonempty gap");
  require(b.b < chain.n_max(), "correlation: chain too short for the right observable");

  // boundary rho_{s+1} via the tail pullback; rho_r follows from the
  // boundary recursion through the inserted identity product, so trivial
  // observables cancel exactly
  double kappa_target = tol;
  TailBoundary after_b = tail_boundary(chain, b.b + 1, kappa_target, max_n);
  if (!after_b.converged)
    throw std::runtime_error("correlation: right tail shows no memory loss at this depth");
  Mat rho_r = apply_superop(theta_superop(chain, b.a - 1, b.b), after_b.rho);

  // left observable anchored at site 1
  long long pad = int_pow(chain.physical_dim(), a.a - 1);
  LocalObservable a_anchored{1, a.b,
                             kron(Mat::Identity(pad, pad), a.x)};
  Mat s_a = inserted_transfer_superop(chain, a_anchored);
  Mat s_b = inserted_transfer_superop(chain, b);
  Mat gap = theta_superop(chain, a.b, b.a - 1);

  Mat y_b = apply_superop(s_b, after_b.rho);
  cplx z_b = y_b.trace();

  CorrelationReport rep;
  rep.phi_b = z_b;
  rep.phi_ab = apply_superop(s_a, apply_superop(gap, y_b)).trace();
  rep.phi_a = apply_superop(s_a, apply_superop(gap, rho_r)).trace();
  rep.connected = std::abs(rep.phi_ab - rep.phi_a * rep.phi_b);
  double kappa_gap = kappa_tr_superop(gap).value;
  rep.bound = 4.0 * operator_norm(a.x) * operator_norm(b.x) * kappa_gap;
  rep.pass = rep.connected <= rep.bound + 1e-8;
  return rep;
}

MpsChain chain_from_fiber(const CocycleTrajectory& traj, int n_max) {
  require(n_max <= traj.window(), "chain_from_fiber: fiber window too small");
  const int dh = traj.dim();
  auto traj_copy = std::make_shared<CocycleTrajectory>(traj);
  int d_k = static_cast<int>(traj.at(-1).kraus().size());
  return MpsChain(d_k, dh, n_max, [traj_copy](int n) { return traj_copy->at(-n).kraus(); });
}

RandomMpsReport random_mps_experiment(const EnvironmentBase& base, int m,
                                      const LocalObservable& obs, int n_max, int samples,
                                      std::uint64_t seed) {
  require(obs.a == 1 && obs.b == m, "random mps: observable must occupy [1, m]");
  base.validate();

  RandomMpsReport rep;
  rep.fibers.resize(static_cast<std::size_t>(samples));
  rep.gaps = {1, 2, 3, 4, 5, 6};

  // boundary pullbacks need far more depth than the reported history: slowly
  // contracting fibers take hundreds of sites to flush the right tail
  const int max_gap = rep.gaps.back();
  const int window = std::max(2 * n_max, 260) + 2 * m + max_gap + 4;
  std::vector<double> lambda_hats(static_cast<std::size_t>(samples));
  std::vector<char> identity_ok(static_cast<std::size_t>(samples), 1);
  std::vector<std::vector<double>> gap_kappa(static_cast<std::size_t>(samples));
  std::vector<std::vector<double>> gap_gamma_values(static_cast<std::size_t>(samples));

  par::run_indexed(static_cast<std::size_t>(samples), [&](std::size_t s) {
    std::uint64_t fiber_seed = RngStream(base.seed ^ seed, 0x3B5, s).next_u64();
    CocycleTrajectory traj(base, fiber_seed, window);
    MpsChain chain = chain_from_fiber(traj, window);

    // right-tail bookkeeping identity against the pullback product
    int n_probe = std::min(n_max, m + 6);
    Mat lhs = theta_superop(chain, m, n_probe);
    Mat rhs = traj.product_superop(-n_probe, -m);
    if (max_abs(lhs - rhs) > 1e-12) identity_ok[s] = 0;

    RandomMpsFiberRow row;
    LimitReport limit = thermodynamic_limit(chain, obs, 1e-6, window - 2);
    row.limit_converged = limit.converged;

    double kappa_deep = kappa_tr_superop(theta_superop(chain, 0, n_max)).value;
    lambda_hats[s] = kappa_deep <= kKappaZeroThreshold ? -kInf : std::log(kappa_deep) / n_max;
    row.lambda_hat = lambda_hats[s];

    // decay fit of the error sequence
    if (limit.converged && limit.history.size() >= 3) {
      std::vector<double> xs, ys;
      for (const auto& h : limit.history)
        if (h.phi_err > 1e-13) {
          xs.push_back(h.n - m);
          ys.push_back(std::log(h.phi_err));
        }
      if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          mx += xs[i];
          my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          sxx += (xs[i] - mx) * (xs[i] - mx);
          sxy += (xs[i] - mx) * (ys[i] - my);
        }
        row.fit_beta = sxx > 0 ? sxy / sxx : 0.0;
        double c = 1.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          c = std::max(c, std::exp(ys[i] - row.fit_beta * xs[i]));
        row.fit_c = c;
        bool ok = true;
        for (const auto& h : limit.history)
          if (h.phi_err > row.fit_c * std::exp(row.fit_beta * (h.n - m)) + 1e-12) ok = false;
        row.errors_under_envelope = ok && row.fit_beta < 0;
      }
    }
    rep.fibers[s] = row;

    // clustering sweep across gaps
    std::vector<double> kappas, gammas;
    for (int gap_len : rep.gaps) {
      LocalObservable b_obs{m + 1 + gap_len, 2 * m + gap_len, obs.x};
      CorrelationReport corr = correlation_bound_check(chain, obs, b_obs, 1e-6, window);
      double kappa_gap_val = kappa_tr_superop(theta_superop(chain, m, m + gap_len)).value;
      kappas.push_back(kappa_gap_val);
      gammas.push_back(corr.connected);
    }
    gap_kappa[s] = std::move(kappas);
    gap_gamma_values[s] = std::move(gammas);
  });

  int converged = 0;
  std::vector<double> finite_lambdas;
  for (const auto& row : rep.fibers) {
    if (row.limit_converged) ++converged;
    if (!std::isinf(row.lambda_hat)) finite_lambdas.push_back(row.lambda_hat);
  }
  rep.all_limits_converged = converged == samples;
  double lm = 0.0;
  for (double v : finite_lambdas) lm += v;
  rep.lambda_hat_mean = finite_lambdas.empty() ? -kInf : lm / finite_lambdas.size();
  rep.lambda_negative = rep.lambda_hat_mean < 0.0;
  rep.identity_check_ok = std::all_of(identity_ok.begin(), identity_ok.end(),
                                      [](char c) { return c != 0; });

  // annealed gap fit E[kappa_L] ~ A e^{-eta L}; the high-probability claim is
  // tested at gamma = eta / 2 with threshold 4 ||A|| ||B|| A_fit e^{-gamma L}
  std::vector<double> mean_kappa(rep.gaps.size(), 0.0);
  for (std::size_t g = 0; g < rep.gaps.size(); ++g) {
    for (std::size_t s = 0; s < static_cast<std::size_t>(samples); ++s)
      mean_kappa[g] += gap_kappa[s][g];
    mean_kappa[g] /= samples;
  }
  double mx = 0, my = 0;
  int cnt = 0;
  for (std::size_t g = 0; g < rep.gaps.size(); ++g)
    if (mean_kappa[g] > 1e-14) {
      mx += rep.gaps[g];
      my += std::log(mean_kappa[g]);
      ++cnt;
    }
  double eta = 0.0, log_a = 0.0;
  if (cnt >= 2) {
    mx /= cnt;
    my /= cnt;
    double sxx = 0, sxy = 0;
    for (std::size_t g = 0; g < rep.gaps.size(); ++g)
      if (mean_kappa[g] > 1e-14) {
        sxx += (rep.gaps[g] - mx) * (rep.gaps[g] - mx);
        sxy += (rep.gaps[g] - mx) * (std::log(mean_kappa[g]) - my);
      }
    eta = -sxy / sxx;
    log_a = my + eta * mx;
  }
  rep.gamma = 0.5 * eta;
  double xnorm = operator_norm(obs.x);
  rep.threshold_c = 4.0 * xnorm * xnorm * std::exp(log_a);

  rep.tail_consistent = true;
  for (std::size_t g = 0; g < rep.gaps.size(); ++g) {
    double threshold = rep.threshold_c * std::exp(-rep.gamma * rep.gaps[g]);
    int exceed = 0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(samples); ++s)
      if (gap_gamma_values[s][g] > threshold) ++exceed;
    double freq = static_cast<double>(exceed) / samples;
    double claim = std::exp(-rep.gamma * rep.gaps[g]);
    double se = std::sqrt(std::max(claim * (1.0 - claim), 1e-12) / samples);
    rep.exceedance_freq.push_back(freq);
    rep.claim_level.push_back(claim);
    rep.binom_stderr.push_back(se);
    if (freq > claim + 3.0 * se) rep.tail_consistent = false;
  }
  return rep;
}

}  // namespace qdob
