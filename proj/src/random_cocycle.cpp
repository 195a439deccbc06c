#include "qdob/random_cocycle.hpp"

#include <algorithm>
#include <cmath>

#include "qdob/coefficients.hpp"
#include "qdob/parallel.hpp"

namespace qdob {

namespace {

std::vector<double> cumulative_weights(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    c[i] = acc;
  }
  return c;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s2 = 0.0;
  for (double x : v) s2 += (x - mean) * (x - mean);
  s2 /= static_cast<double>(v.size() - 1);
  return std::sqrt(s2 / static_cast<double>(v.size()));
}

ExtendedMean extended_mean(const std::vector<double>& logs) {
  ExtendedMean m;
  double sum = 0.0;
  int finite = 0;
  for (double x : logs) {
    if (std::isinf(x) && x < 0) {
      ++m.minus_inf_count;
    } else {
      sum += x;
      ++finite;
    }
  }
  m.value = m.is_minus_inf() ? -kInf : (finite ? sum / finite : 0.0);
  return m;
}

double log_or_minus_inf(double kappa) {
  return kappa <= kKappaZeroThreshold ? -kInf : std::log(kappa);
}

}  // namespace

EnvironmentBase EnvironmentBase::deterministic_base(ChannelLabel atom, std::uint64_t seed) {
  EnvironmentBase b;
  b.kind = Kind::deterministic;
  b.d = atom.dimension();
  b.seed = seed;
  b.atoms.push_back(std::move(atom));
  b.validate();
  return b;
}

EnvironmentBase EnvironmentBase::iid_base(std::vector<ChannelLabel> atoms,
                                          std::vector<double> weights, std::uint64_t seed) {
  EnvironmentBase b;
  b.kind = Kind::iid;
  require(!atoms.empty(), "base: no atoms");
  b.d = atoms.front().dimension();
  b.seed = seed;
  b.atoms = std::move(atoms);
  b.weights = std::move(weights);
  b.validate();
  return b;
}

EnvironmentBase EnvironmentBase::markov_base(std::vector<ChannelLabel> atoms, Eigen::MatrixXd P,
                                             Eigen::VectorXd pi, std::uint64_t seed) {
  EnvironmentBase b;
  b.kind = Kind::markov;
  require(!atoms.empty(), "base: no atoms");
  b.d = atoms.front().dimension();
  b.seed = seed;
  b.atoms = std::move(atoms);
  b.P = std::move(P);
  b.pi = std::move(pi);
  b.validate();
  return b;
}

void EnvironmentBase::validate() const {
  require(!atoms.empty(), "base: no atoms");
  for (const auto& a : atoms) {
    a.validate();
    require(a.dimension() == d, "base: atom dimension mismatch");
  }
  if (kind == Kind::iid) {
    require(weights.size() == atoms.size(), "base: weights/atoms length mismatch");
    double s = 0.0;
    for (double w : weights) {
      require(w >= 0.0, "base: negative weight");
      s += w;
    }
    require(std::abs(s - 1.0) <= 1e-12, "base: weights must sum to 1");
  } else if (kind == Kind::markov) {
    const int m = static_cast<int>(atoms.size());
    require(P.rows() == m && P.cols() == m, "base: transition matrix shape mismatch");
    require(pi.size() == m, "base: stationary distribution length mismatch");
    for (int i = 0; i < m; ++i) {
      double row = 0.0;
      for (int j = 0; j < m; ++j) {
        require(P(i, j) >= -1e-15, "base: negative transition probability");
        row += P(i, j);
      }
      require(std::abs(row - 1.0) <= 1e-12, "base: rows must sum to 1");
    }
    Eigen::VectorXd piP = P.transpose() * pi;
    require((piP - pi).cwiseAbs().maxCoeff() <= 1e-10, "base: pi is not stationary");
    require(std::abs(pi.sum() - 1.0) <= 1e-10, "base: pi must sum to 1");
  } else {
    require(atoms.size() == 1, "base: deterministic base takes one atom");
  }
}

CocycleTrajectory::CocycleTrajectory(const EnvironmentBase& base, std::uint64_t fiber_seed,
                                     std::int64_t n_window)
    : base_(base), fiber_seed_(fiber_seed), n_window_(n_window) {
  require(n_window >= 1, "fiber: window must be >= 1");
  base_.validate();
  const std::size_t count = static_cast<std::size_t>(2 * n_window + 1);
  atom_index_.resize(count);

  switch (base_.kind) {
    case EnvironmentBase::Kind::deterministic:
      std::fill(atom_index_.begin(), atom_index_.end(), 0);
      break;
    case EnvironmentBase::Kind::iid: {
      auto cum = cumulative_weights(base_.weights);
      for (std::int64_t j = -n_window; j <= n_window; ++j) {
        RngStream rng(fiber_seed_, 0xA70, static_cast<std::uint64_t>(j));
        atom_index_[static_cast<std::size_t>(j + n_window)] = rng.categorical(cum);
      }
      break;
    }
    case EnvironmentBase::Kind::markov: {
      // stationary start at j = -N, then chain forward
      const int m = static_cast<int>(base_.atoms.size());
      std::vector<double> start_cum(m);
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += base_.pi(i);
        start_cum[i] = acc;
      }
      RngStream rng0(fiber_seed_, 0xA70, 0);
      int state = rng0.categorical(start_cum);
      atom_index_[0] = state;
      for (std::int64_t j = -n_window + 1; j <= n_window; ++j) {
        RngStream rng(fiber_seed_, 0xA71, static_cast<std::uint64_t>(j));
        std::vector<double> row_cum(m);
        double racc = 0.0;
        for (int k = 0; k < m; ++k) {
          racc += base_.P(state, k);
          row_cum[k] = racc;
        }
        state = rng.categorical(row_cum);
        atom_index_[static_cast<std::size_t>(j + n_window)] = state;
      }
      break;
    }
  }

  channels_.reserve(count);
  for (std::int64_t j = -n_window; j <= n_window; ++j) {
    const ChannelLabel& atom = base_.atoms[static_cast<std::size_t>(
        atom_index_[static_cast<std::size_t>(j + n_window)])];
    RngStream draw(fiber_seed_, 0xA72, static_cast<std::uint64_t>(j));
    channels_.push_back(realize(atom, draw));
  }
}

const QuantumChannel& CocycleTrajectory::at(std::int64_t j) const {
  require(j >= -n_window_ && j <= n_window_, "fiber: depth exceeds window");
  return channels_[static_cast<std::size_t>(j + n_window_)];
}

int CocycleTrajectory::atom_index(std::int64_t j) const {
  require(j >= -n_window_ && j <= n_window_, "fiber: depth exceeds window");
  return atom_index_[static_cast<std::size_t>(j + n_window_)];
}

Mat CocycleTrajectory::product_superop(std::int64_t s, std::int64_t t) const {
  require(s <= t, "fiber: need s <= t");
  const int d = base_.d;
  Mat acc = Mat::Identity(d * d, d * d);
  for (std::int64_t j = s; j < t; ++j) acc = at(j).superop() * acc;
  return acc;
}

CocycleTrajectory sample_fiber(const EnvironmentBase& base, std::uint64_t seed,
                               std::int64_t n_window) {
  return CocycleTrajectory(base, seed, n_window);
}

ContractionReport forward_kappa(const CocycleTrajectory& traj, std::int64_t n, int restarts,
                                std::uint64_t seed) {
  require(n >= 0 && n <= traj.window(), "forward_kappa: depth exceeds fiber");
  if (n == 0) {
    ContractionReport r;
    r.value = 1.0;
    r.mode = KappaMode::exact_closed_form;
    return r;
  }
  return kappa_tr_superop(traj.product_superop(0, n), restarts, 1e-8, seed);
}

ContractionReport pullback_kappa(const CocycleTrajectory& traj, std::int64_t n, int restarts,
                                 std::uint64_t seed) {
  require(n >= 0 && n <= traj.window(), "pullback_kappa: depth exceeds fiber");
  if (n == 0) {
    ContractionReport r;
    r.value = 1.0;
    r.mode = KappaMode::exact_closed_form;
    return r;
  }
  return kappa_tr_superop(traj.product_superop(-n, 0), restarts, 1e-8, seed);
}

LyapunovEstimate lyapunov_estimate(const EnvironmentBase& base, int n, int samples,
                                   std::uint64_t seed) {
  require(n >= 1 && samples >= 1, "lyapunov: need n >= 1 and samples >= 1");
  base.validate();
  const int d = base.d;

  // per-sample log kappa at every depth 1..n
  std::vector<std::vector<double>> logs(static_cast<std::size_t>(samples));
  par::run_indexed(static_cast<std::size_t>(samples), [&](std::size_t s) {
    std::uint64_t fiber_seed = RngStream(base.seed ^ seed, 0xF1B, s).next_u64();
    CocycleTrajectory traj(base, fiber_seed, n);
    std::vector<double> row(static_cast<std::size_t>(n));
    Mat acc = Mat::Identity(d * d, d * d);
    for (int k = 1; k <= n; ++k) {
      acc = traj.at(k - 1).superop() * acc;
      double kappa = kappa_tr_superop(acc).value;
      row[static_cast<std::size_t>(k - 1)] = log_or_minus_inf(kappa);
    }
    logs[s] = std::move(row);
  });

  LyapunovEstimate est;
  est.n = n;
  est.samples = samples;

  std::vector<double> finals;
  finals.reserve(static_cast<std::size_t>(samples));
  for (const auto& row : logs) {
    double lk = row.back() / n;
    if (std::isinf(lk) && lk < 0)
      ++est.minus_inf_count;
    else
      finals.push_back(lk);
  }
  est.minus_inf = est.minus_inf_count > 0;
  if (est.minus_inf) {
    est.mean_log_kappa_over_n = -kInf;
    est.ci_halfwidth = 0.0;
  } else {
    est.mean_log_kappa_over_n = mean_of(finals);
    est.ci_halfwidth = 1.96 * stderr_of(finals, est.mean_log_kappa_over_n);
  }

  for (int k = 1; k <= n; ++k) {
    std::vector<double> level;
    bool any_inf = false;
    for (const auto& row : logs) {
      double v = row[static_cast<std::size_t>(k - 1)] / k;
      if (std::isinf(v) && v < 0)
        any_inf = true;
      else
        level.push_back(v);
    }
    est.kingman_curve.push_back({k, any_inf ? -kInf : mean_of(level)});
  }
  return est;
}

StationaryStateField stationary_state(const CocycleTrajectory& traj, double tol, int max_depth) {
  const int d = traj.dim();
  StationaryStateField field;
  Mat tau = Mat::Identity(d, d) / static_cast<double>(d);

  // pullback limit at fiber time j, depth limited by the fiber window. The
  // stopping rule is kappa-based: a state-Cauchy plateau alone can be a
  // spurious fixed point of a non-contracting product.
  auto pullback_at = [&](std::int64_t j, bool* ok, double* kappa_out) {
    Mat acc = Mat::Identity(d * d, d * d);
    Mat rho = tau;
    bool converged = false;
    double kap = 1.0;
    int depth = 0;
    for (int n = 1; n <= max_depth && j - n >= -traj.window(); ++n) {
      acc = acc * traj.at(j - n).superop();
      depth = n;
      if (n % 8 == 0 || n == max_depth) {
        kap = kappa_tr_superop(acc).value;
        if (2.0 * kap <= tol) {
          converged = true;
          break;
        }
      }
    }
    kap = kappa_tr_superop(acc).value;
    converged = converged || 2.0 * kap <= tol;
    rho = hermitian_part(apply_superop(acc, tau));
    if (ok) *ok = converged;
    if (kappa_out) *kappa_out = kap;
    field.depth_used = std::max(field.depth_used, depth);
    Mat cleaned = psd_part(rho);
    cleaned /= cleaned.trace().real();
    return cleaned;
  };

  bool ok0 = false;
  double kappa0 = 1.0;
  Mat rho0 = pullback_at(0, &ok0, &kappa0);
  field.rho_at_zero = DensityMatrix::make(rho0);
  field.converged = ok0;
  field.last_kappa = kappa0;
  if (!ok0) return field;

  // stationarity residuals along a stretch of the fiber
  const std::int64_t j_max = std::min<std::int64_t>(4, traj.window() / 4);
  Mat prev = pullback_at(-j_max, nullptr, nullptr);
  for (std::int64_t j = -j_max; j < j_max; ++j) {
    Mat pushed = traj.at(j).apply(prev);
    Mat next = pullback_at(j + 1, nullptr, nullptr);
    field.residual_chain.push_back(trace_norm(pushed - next));
    prev = next;
  }

  // reference-state independence spot checks at the deepest pullback
  RngStream rng(traj.fiber_seed(), 0x5707);
  Mat acc = traj.product_superop(-std::min<std::int64_t>(max_depth, traj.window()), 0);
  double kap = kappa_tr_superop(acc).value;
  bool spot_ok = true;
  for (int k = 0; k < 8; ++k) {
    Mat sigma = random_density(rng, d);
    double dist = trace_norm(hermitian_part(apply_superop(acc, sigma)) - rho0);
    if (dist > 2.0 * kap + 3.0 * tol) spot_ok = false;
  }
  field.spot_checks_ok = spot_ok;
  return field;
}

QuenchedRateFit quenched_rate_fit(const CocycleTrajectory& traj, double beta, int n_max) {
  require(beta < 0.0, "quenched_rate_fit: beta must be negative");
  require(n_max >= 1 && n_max <= traj.window(), "quenched_rate_fit: n_max exceeds fiber window");
  const int d = traj.dim();

  QuenchedRateFit fit;
  int arg_plus = 0, arg_minus = 0;
  {
    Mat acc = Mat::Identity(d * d, d * d);
    for (int n = 1; n <= n_max; ++n) {
      acc = traj.at(n - 1).superop() * acc;
      double v = std::exp(-beta * n) * kappa_tr_superop(acc).value;
      if (v > fit.c_plus) {
        fit.c_plus = v;
        arg_plus = n;
      }
    }
  }
  {
    Mat acc = Mat::Identity(d * d, d * d);
    for (int n = 1; n <= n_max; ++n) {
      acc = acc * traj.at(-n).superop();
      double v = std::exp(-beta * n) * kappa_tr_superop(acc).value;
      if (v > fit.c_minus) {
        fit.c_minus = v;
        arg_minus = n;
      }
    }
  }
  fit.convergent = arg_plus < n_max && arg_minus < n_max;

  // verify the replacement inequalities at a logarithmic sample of depths,
  // with centers from the stationary field along the fiber
  double tol = 1e-7;
  bool ok = true;
  for (int n = 1; n <= n_max; n = (n < 4 ? n + 1 : n * 2)) {
    if (n > traj.window()) break;
    // forward: center rho_{theta^n omega} via pullback ending at fiber time n
    Mat acc_fwd = traj.product_superop(0, n);
    StationaryStateField f = stationary_state(traj, 1e-9, static_cast<int>(traj.window()) - n);
    if (!f.converged) continue;
    // pull the center to time n
    Mat center = hermitian_part(apply_superop(acc_fwd, f.rho_at_zero.rho));
    Mat repl = replacement_channel(DensityMatrix::make(psd_part(center) / psd_part(center).trace().real())).superop();
    double dist = induced_11_norm(acc_fwd - repl, 16).value;
    if (dist > 4.0 * fit.c_plus * std::exp(beta * n) + tol) ok = false;

    Mat acc_pull = traj.product_superop(-n, 0);
    Mat repl0 = replacement_channel(f.rho_at_zero).superop();
    double dist0 = induced_11_norm(acc_pull - repl0, 16).value;
    if (dist0 > 4.0 * fit.c_minus * std::exp(beta * n) + tol) ok = false;
  }
  fit.inequalities_ok = ok;
  return fit;
}

NegativeExponentCertificate certify_negative_exponent(const EnvironmentBase& base, int block_len,
                                                      int samples, NegativeExponentMethod method,
                                                      std::uint64_t seed) {
  require(block_len >= 1, "certify: block length must be >= 1");
  base.validate();
  NegativeExponentCertificate cert;
  cert.method = method;
  cert.block_len = block_len;

  std::vector<double> logs(static_cast<std::size_t>(samples));
  std::vector<int> contracting(static_cast<std::size_t>(samples), 0);

  par::run_indexed(static_cast<std::size_t>(samples), [&](std::size_t s) {
    std::uint64_t fiber_seed = RngStream(base.seed ^ seed, 0xCE7, s).next_u64();
    CocycleTrajectory traj(base, fiber_seed, block_len);
    Mat block = traj.product_superop(0, block_len);
    switch (method) {
      case NegativeExponentMethod::contracting_block: {
        double kappa = kappa_tr_superop(block).value;
        contracting[s] = kappa < 1.0 - 1e-6 ? 1 : 0;
        logs[s] = log_or_minus_inf(kappa);
        break;
      }
      case NegativeExponentMethod::doeblin_block: {
        QuantumChannel prod = QuantumChannel::from_superop(block);
        MinorizationCertificate md = alpha_md(prod, 96, 32, seed + s);
        double eps = md.verified ? md.alpha : 0.0;
        contracting[s] = eps > 1e-9 ? 1 : 0;
        logs[s] = eps >= 1.0 - 1e-12 ? -kInf : std::log(1.0 - eps);
        break;
      }
      case NegativeExponentMethod::strict_positive_block: {
        QuantumChannel prod = QuantumChannel::from_superop(block);
        auto [flag, a] = is_strictly_positive(prod, 48, seed + s);
        double eps = std::min(1.0, static_cast<double>(base.d) * a);
        contracting[s] = flag ? 1 : 0;
        logs[s] = eps >= 1.0 - 1e-12 ? -kInf : std::log(1.0 - eps);
        break;
      }
    }
  });

  int hits = 0;
  for (int c : contracting) hits += c;
  cert.contracting_probability = static_cast<double>(hits) / samples;
  cert.log_mean = extended_mean(logs);
  cert.implied_lambda_bound =
      cert.log_mean.is_minus_inf() ? -kInf : cert.log_mean.value / block_len;
  cert.certified = cert.contracting_probability > 0.0 &&
                   (cert.log_mean.is_minus_inf() || cert.log_mean.value < 0.0);
  return cert;
}

AnnealedReport annealed_mean_kappa(const EnvironmentBase& base, const std::vector<int>& n_list,
                                   int samples, std::uint64_t seed) {
  require(!n_list.empty(), "annealed: empty depth list");
  base.validate();
  const int d = base.d;
  int n_max = *std::max_element(n_list.begin(), n_list.end());

  std::vector<std::vector<double>> kappas(static_cast<std::size_t>(samples));
  par::run_indexed(static_cast<std::size_t>(samples), [&](std::size_t s) {
    std::uint64_t fiber_seed = RngStream(base.seed ^ seed, 0xA22, s).next_u64();
    CocycleTrajectory traj(base, fiber_seed, n_max);
    std::vector<double> row;
    row.reserve(n_list.size());
    Mat acc = Mat::Identity(d * d, d * d);
    for (int n = 1; n <= n_max; ++n) {
      acc = traj.at(n - 1).superop() * acc;
      if (std::find(n_list.begin(), n_list.end(), n) != n_list.end())
        row.push_back(kappa_tr_superop(acc).value);
    }
    kappas[s] = std::move(row);
  });

  AnnealedReport rep;
  std::vector<int> sorted_n = n_list;
  std::sort(sorted_n.begin(), sorted_n.end());
  sorted_n.erase(std::unique(sorted_n.begin(), sorted_n.end()), sorted_n.end());
  for (std::size_t k = 0; k < sorted_n.size(); ++k) {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(samples));
    for (const auto& row : kappas) vals.push_back(row[k]);
    AnnealedRow r;
    r.n = sorted_n[k];
    r.mean = mean_of(vals);
    r.stderr_ = stderr_of(vals, r.mean);
    rep.table.push_back(r);
  }

  // least-squares fit of log a_n = log A - eta n over rows with positive mean
  {
    std::vector<double> xs, ys;
    for (const auto& r : rep.table)
      if (r.mean > 1e-14) {
        xs.push_back(r.n);
        ys.push_back(std::log(r.mean));
      }
    if (xs.size() >= 2) {
      double mx = mean_of(xs), my = mean_of(ys);
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      double slope = sxy / sxx;
      rep.fit_eta = -slope;
      rep.fit_log_a = my - slope * mx;
      rep.fit_valid = true;
    }
  }

  // recursion a_{r+t} <= a_r a_t (+ mixing slack) within combined 3 sigma
  auto row_at = [&](int n) -> const AnnealedRow* {
    for (const auto& r : rep.table)
      if (r.n == n) return &r;
    return nullptr;
  };
  std::vector<double> rho_bound;  // rho_s upper bounds for markov slack
  if (base.kind == EnvironmentBase::Kind::markov) {
    for (const auto& row : markov_mixing_profile(base, n_max)) rho_bound.push_back(row.rho_bound);
  }
  for (const auto& ra : rep.table)
    for (const auto& rt : rep.table) {
      int s_gap = (base.kind == EnvironmentBase::Kind::markov) ? 1 : 0;
      const AnnealedRow* sum = row_at(ra.n + s_gap + rt.n);
      if (!sum) continue;
      double rho_s = 0.0;
      if (base.kind == EnvironmentBase::Kind::markov)
        rho_s = rho_bound.empty() ? 1.0 : rho_bound[static_cast<std::size_t>(s_gap - 1)];
      double rhs = ra.mean * rt.mean + rho_s * std::sqrt(ra.mean * rt.mean);
      double sigma = std::sqrt(sum->stderr_ * sum->stderr_ +
                               std::pow(ra.stderr_ * rt.mean, 2) +
                               std::pow(rt.stderr_ * ra.mean, 2));
      if (sum->mean > rhs + 3.0 * sigma) rep.recursion_ok = false;
    }
  return rep;
}

std::vector<MixingRow> markov_mixing_profile(const EnvironmentBase& base, int m_max) {
  require(base.kind == EnvironmentBase::Kind::markov, "mixing profile: markov base required");
  base.validate();
  std::vector<MixingRow> rows;
  Eigen::MatrixXd power = base.P;
  for (int m = 1; m <= m_max; ++m) {
    double worst = 0.0;
    for (int i = 0; i < power.rows(); ++i) {
      double tv = 0.5 * (power.row(i).transpose() - base.pi).cwiseAbs().sum();
      worst = std::max(worst, tv);
    }
    rows.push_back({m, worst, 2.0 * std::sqrt(worst)});
    power = power * base.P;
  }
  return rows;
}

HsCriterionReport bistochastic_hs_report(const EnvironmentBase& base, int n, int samples,
                                         int block_len, std::uint64_t seed) {
  require(n >= 1 && samples >= 1 && block_len >= 1, "hs report: bad parameters");
  base.validate();
  const int d = base.d;

  struct FiberResult {
    bool bounds_ok = true;
    bool unif_ok = true;
    std::vector<double> log_s0_steps;
    std::vector<double> log_s0_blocks;
  };
  std::vector<FiberResult> results(static_cast<std::size_t>(samples));

  par::run_indexed(static_cast<std::size_t>(samples), [&](std::size_t s) {
    std::uint64_t fiber_seed = RngStream(base.seed ^ seed, 0x45B, s).next_u64();
    std::int64_t window = std::max<std::int64_t>(n, block_len);
    CocycleTrajectory traj(base, fiber_seed, window);
    FiberResult fr;

    double log_prod = 0.0;
    bool prod_inf = false;
    Mat acc = Mat::Identity(d * d, d * d);
    for (int j = 0; j < n; ++j) {
      const QuantumChannel& step = traj.at(j);
      require(is_bistochastic(step), "hs report: non-bistochastic sample");
      double s0j = s0(step);
      fr.log_s0_steps.push_back(log_or_minus_inf(s0j));
      if (s0j <= kKappaZeroThreshold)
        prod_inf = true;
      else
        log_prod += std::log(s0j);
      acc = step.superop() * acc;
      double kappa = kappa_tr_superop(acc).value;
      double bound = prod_inf ? 0.0 : std::sqrt(static_cast<double>(d)) * std::exp(log_prod);
      if (kappa > bound + 1e-8) fr.bounds_ok = false;
    }

    for (std::int64_t r = 0; (r + 1) * block_len <= window; ++r) {
      Mat block = traj.product_superop(r * block_len, (r + 1) * block_len);
      fr.log_s0_blocks.push_back(log_or_minus_inf(s0_superop(block, d)));
    }

    // convergence toward the depolarizing replacement within the 4 kappa envelope
    double kappa_n = kappa_tr_superop(acc).value;
    Mat r_unif = replacement_channel(maximally_mixed(d)).superop();
    double dist = induced_11_norm(acc - r_unif, 16).value;
    if (dist > 4.0 * kappa_n + 1e-6) fr.unif_ok = false;

    results[s] = std::move(fr);
  });

  HsCriterionReport rep;
  std::vector<double> all_steps, all_blocks;
  for (const auto& fr : results) {
    rep.product_bounds_ok = rep.product_bounds_ok && fr.bounds_ok;
    rep.stationary_unif_ok = rep.stationary_unif_ok && fr.unif_ok;
    all_steps.insert(all_steps.end(), fr.log_s0_steps.begin(), fr.log_s0_steps.end());
    all_blocks.insert(all_blocks.end(), fr.log_s0_blocks.begin(), fr.log_s0_blocks.end());
  }
  rep.log_s0_mean = extended_mean(all_steps);
  ExtendedMean block_mean = extended_mean(all_blocks);
  rep.block_log_mean = block_mean;
  if (!block_mean.is_minus_inf()) rep.block_log_mean.value /= block_len;

  double one_step = rep.log_s0_mean.is_minus_inf() ? -kInf : rep.log_s0_mean.value;
  double blocky = rep.block_log_mean.is_minus_inf() ? -kInf : rep.block_log_mean.value;
  rep.implied_lambda_bound = std::min(one_step, blocky);
  rep.lambda_negative = rep.implied_lambda_bound < 0.0;
  return rep;
}

}  // namespace qdob
