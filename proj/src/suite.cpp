#include "qdob/suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "qdob/coefficients.hpp"
#include "qdob/contraction.hpp"
#include "qdob/mps.hpp"
#include "qdob/products.hpp"
#include "qdob/random_cocycle.hpp"

namespace qdob {

namespace {

constexpr std::uint64_t kSuiteSeed = 0xD0B0;

struct Collector {
  std::vector<CheckResult> results;
  std::string filter;

  void run(const std::string& tag, const std::string& description,
           const std::function<bool(std::string&)>& body, double time_budget = 0.0) {
    if (!filter.empty() && tag.find(filter) == std::string::npos) return;
    CheckResult r;
    r.tag = tag;
    r.description = description;
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.pass = body(r.detail);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_budget > 0.0 && r.seconds > time_budget) {
      r.pass = false;
      r.detail += " [over time budget of " + std::to_string(time_budget) + "s]";
    }
    results.push_back(std::move(r));
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// left-canonical site tensors from a Haar isometry draw
std::vector<Mat> random_site(RngStream& rng, int d_k, int d_h) {
  Mat v = haar_isometry(rng, d_k * d_h, d_h);
  std::vector<Mat> tensors(static_cast<std::size_t>(d_k));
  for (int i = 0; i < d_k; ++i) tensors[static_cast<std::size_t>(i)] = v.block(i * d_h, 0, d_h, d_h);
  return tensors;
}

MpsChain random_chain(std::uint64_t seed, int d_k, int d_h, int n_sites) {
  RngStream rng(seed, 0xC4A1);
  std::vector<std::vector<Mat>> sites;
  sites.reserve(static_cast<std::size_t>(n_sites));
  for (int n = 0; n < n_sites; ++n) sites.push_back(random_site(rng, d_k, d_h));
  return MpsChain::from_sites(std::move(sites));
}

Mat random_hermitian(RngStream& rng, int n) {
  Mat g = rng.gaussian_matrix(n, n);
  return hermitian_part(g);
}

std::vector<Mat> dephasing_z_tensors() {
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return {p0, p1};
}

std::vector<Mat> dephasing_x_tensors() {
  Mat pp(2, 2), pm(2, 2);
  pp << 0.5, 0.5, 0.5, 0.5;
  pm << 0.5, -0.5, -0.5, 0.5;
  return {pp, pm};
}

void check_amplitude_damping(Collector& c) {
  c.run("kappa-amplitude-damping-closed-form",
        "kappa_tr of amplitude damping equals sqrt(1-gamma), closed form and optimizer", [](std::string& detail) {
          bool ok = true;
          for (double gamma : {0.19, 0.36, 0.75}) {
            auto t0 = std::chrono::steady_clock::now();
            QuantumChannel t = make_named(ChannelLabel::amplitude_damping(gamma));
            double expected = std::sqrt(1.0 - gamma);
            ContractionReport closed = kappa_tr(t);
            ContractionReport opt = kappa_tr_multistart(t.superop(), 64, 1e-9, kSuiteSeed);
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            detail += "gamma=" + fmt(gamma) + " closed=" + fmt(closed.value) +
                      " opt=" + fmt(opt.value) + "; ";
            ok = ok && closed.mode == KappaMode::exact_closed_form &&
                 near(closed.value, expected, 1e-9) && near(opt.value, expected, 1e-6) &&
                 secs < 1.0;
          }
          return ok;
        });
}

void check_alternating_dephasing(Collector& c) {
  c.run("alternating-dephasing", "dephasing channels have kappa 1 but compose to replacement",
        [](std::string& detail) {
          QuantumChannel dz = make_named(ChannelLabel::dephasing_z());
          QuantumChannel dx = make_named(ChannelLabel::dephasing_x());
          double kz = kappa_tr(dz).value;
          double kx = kappa_tr(dx).value;
          double kzx = kappa_tr(compose(dx, dz)).value;
          MinorizationCertificate md = alpha_md(dz, 128, 48, kSuiteSeed);
          detail = "kappa(Dz)=" + fmt(kz) + " kappa(Dx)=" + fmt(kx) + " kappa(DxDz)=" + fmt(kzx) +
                   " alpha_md(Dz)=" + fmt(md.alpha);
          return near(kz, 1.0, 1e-9) && near(kx, 1.0, 1e-9) && kzx <= 1e-9 &&
                 md.verified && md.alpha <= 1e-6;
        });
}

void check_depolarizing_family(Collector& c) {
  c.run("depolarizing-coefficient-chain",
        "depolarizing family: kappa = 1-p, alpha_md = alpha_doeb = p, chain inequality",
        [](std::string& detail) {
          bool ok = true;
          for (int d : {2, 3}) {
            for (double p : {0.25, 0.5}) {
              QuantumChannel dep = make_named(ChannelLabel::depolarizing(p, d));
              double kappa = kappa_tr(dep).value;
              MinorizationCertificate md = alpha_md(dep, 192, 48, kSuiteSeed);
              DoeblinResult doeb = alpha_doeblin(dep);
              detail += "d=" + std::to_string(d) + " p=" + fmt(p) + ": kappa=" + fmt(kappa) +
                        " md=" + fmt(md.alpha) + " doeb=" + fmt(doeb.alpha) + "; ";
              double kappa_tol = d == 2 ? 1e-9 : 1e-6;
              ok = ok && near(kappa, 1.0 - p, kappa_tol);
              ok = ok && md.verified && near(md.alpha, p, 1e-5);
              ok = ok && near(doeb.alpha, p, 1e-5);
              ok = ok && doeb.alpha <= md.alpha + 1e-5 && kappa <= 1.0 - md.alpha + 1e-5;
            }
          }
          return ok;
        });
}

void check_werner_holevo(Collector& c) {
  c.run("werner-holevo-doeblin-gap",
        "transpose-type map: alpha_md >= d/(d+1) with B near I/(d+1), alpha_doeb = 0",
        [](std::string& detail) {
          bool ok = true;
          for (int d : {2, 3}) {
            QuantumChannel wh = make_named(ChannelLabel::werner_holevo_like(d));
            MinorizationCertificate md = alpha_md(wh, 192, 48, kSuiteSeed);
            DoeblinResult doeb = alpha_doeblin(wh);
            double b_err = max_abs(md.B - Mat::Identity(d, d) / (d + 1.0));
            detail += "d=" + std::to_string(d) + ": md=" + fmt(md.alpha) +
                      " |B - I/(d+1)|=" + fmt(b_err) + " doeb=" + fmt(doeb.alpha) + "; ";
            ok = ok && md.verified && md.alpha >= d / (d + 1.0) - 1e-5;
            ok = ok && b_err <= 1e-2;
            ok = ok && doeb.alpha <= 1e-5;
          }
          return ok;
        });
}

void check_replacement_sandwich(Collector& c) {
  c.run("replacement-sandwich",
        "random qubit products: kappa <= ||Phi - R|| <= 4 kappa and center drift <= 2 kappa",
        [](std::string& detail) {
          RngStream rng(kSuiteSeed, 0x5A17);
          int failures = 0;
          double worst_low = kInf, worst_high = -kInf;
          for (int trial = 0; trial < 50; ++trial) {
            int len = 1 + static_cast<int>(rng.next_u64() % 6);
            std::vector<QuantumChannel> steps;
            for (int i = 0; i < len; ++i)
              steps.push_back(random_channel(2, 1 + static_cast<int>(rng.next_u64() % 4),
                                             rng.next_u64()));
            ChannelSequence seq = ChannelSequence::from_list(0, steps);
            DensityMatrix tau = DensityMatrix::make(random_density(rng, 2));
            DensityMatrix tau2 = DensityMatrix::make(random_density(rng, 2));
            ForwardReplacementReport rep =
                forward_replacement_check(seq, 0, len, tau, tau2, 48, rng.next_u64());
            double kappa = rep.kappa.value;
            bool sandwich = kappa - 1e-5 <= rep.dist && rep.dist <= 4.0 * kappa + 1e-5;
            bool drift = rep.center_drift <= 2.0 * kappa + 1e-5;
            if (!(sandwich && drift)) ++failures;
            if (kappa > 1e-9) {
              worst_low = std::min(worst_low, rep.dist / kappa);
              worst_high = std::max(worst_high, rep.dist / kappa);
            }
          }
          detail = "failures=" + std::to_string(failures) + " ratio range [" + fmt(worst_low) +
                   ", " + fmt(worst_high) + "]";
          return failures == 0;
        },
        60.0);
}

void check_submultiplicativity(Collector& c) {
  c.run("kappa-submultiplicativity", "kappa(A o B) <= kappa(A) kappa(B) on random channel pairs",
        [](std::string& detail) {
          RngStream rng(kSuiteSeed, 0x50B3);
          int failures = 0;
          double worst_gap = 0.0;
          for (int trial = 0; trial < 200; ++trial) {
            int d = trial % 2 == 0 ? 2 : 3;
            QuantumChannel a = random_channel(d, 1 + static_cast<int>(rng.next_u64() % 3),
                                              rng.next_u64());
            QuantumChannel b = random_channel(d, 1 + static_cast<int>(rng.next_u64() % 3),
                                              rng.next_u64());
            double ka = kappa_tr(a, 48).value;
            double kb = kappa_tr(b, 48).value;
            double kab = kappa_tr(compose(a, b), 48).value;
            double gap = kab - ka * kb;
            worst_gap = std::max(worst_gap, gap);
            if (gap > 2e-6) ++failures;
          }
          detail = "failures=" + std::to_string(failures) + " worst gap=" + fmt(worst_gap);
          return failures == 0;
        });
}

EnvironmentBase iid_ad_base() {
  return EnvironmentBase::iid_base(
      {ChannelLabel::amplitude_damping(0.3), ChannelLabel::amplitude_damping(0.6)}, {0.5, 0.5},
      0x1A2B);
}

void check_lyapunov(Collector& c) {
  c.run("lyapunov-iid-amplitude-damping",
        "iid amplitude-damping mixture: Lyapunov estimate matches the closed-form exponent",
        [](std::string& detail) {
          EnvironmentBase base = iid_ad_base();
          const double exact = 0.25 * (std::log(0.7) + std::log(0.4));
          LyapunovEstimate est = lyapunov_estimate(base, 40, 400, kSuiteSeed);
          double tol = std::max(3.0 * est.ci_halfwidth / 1.96, 0.005);
          bool mean_ok = !est.minus_inf && near(est.mean_log_kappa_over_n, exact, tol);

          // per-fiber product law kappa_n = prod sqrt(1 - gamma_j)
          bool fibers_ok = true;
          for (int s = 0; s < 5; ++s) {
            std::uint64_t fiber_seed = RngStream(base.seed ^ kSuiteSeed, 0xF1B, s).next_u64();
            CocycleTrajectory traj(base, fiber_seed, 40);
            double expected = 1.0;
            for (int j = 0; j < 40; ++j)
              expected *= std::sqrt(1.0 - (traj.atom_index(j) == 0 ? 0.3 : 0.6));
            double kappa = forward_kappa(traj, 40).value;
            if (!near(kappa, expected, 1e-9)) fibers_ok = false;
          }
          detail = "estimate=" + fmt(est.mean_log_kappa_over_n) + " exact=" + fmt(exact) +
                   " ci=" + fmt(est.ci_halfwidth) + " fibers_ok=" + std::to_string(fibers_ok);
          return mean_ok && fibers_ok;
        },
        30.0);
}

void check_annealed(Collector& c) {
  c.run("annealed-decay-iid",
        "iid amplitude-damping mixture: annealed means match m^n with the fitted rate",
        [](std::string& detail) {
          EnvironmentBase base = iid_ad_base();
          const double m = 0.5 * (std::sqrt(0.7) + std::sqrt(0.4));
          AnnealedReport rep = annealed_mean_kappa(base, {5, 10, 15, 20}, 400, kSuiteSeed);
          bool ok = rep.fit_valid && rep.recursion_ok;
          for (const auto& row : rep.table) {
            if (row.n != 5 && row.n != 10 && row.n != 20) continue;
            double expected = std::pow(m, row.n);
            if (std::abs(row.mean - expected) > 3.0 * row.stderr_ + 1e-12) ok = false;
            detail += "a_" + std::to_string(row.n) + "=" + fmt(row.mean) + "~" + fmt(expected) + "; ";
          }
          detail += "eta=" + fmt(rep.fit_eta);
          ok = ok && near(rep.fit_eta, 0.30843, 0.02);
          return ok;
        });
}

void check_bit_swap(Collector& c) {
  c.run("bit-swap-zero-exponent",
        "bit-swap channel: kappa stays 1, unique fixed state I/2, stationary field fails",
        [](std::string& detail) {
          Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
          k0(1, 0) = 1.0;
          k1(0, 1) = 1.0;
          QuantumChannel swap = QuantumChannel::from_kraus({k0, k1});
          ChannelSequence seq = ChannelSequence::constant(swap);
          bool kappas_ok = true;
          for (int n = 1; n <= 20; ++n)
            if (!near(window_kappa(seq, 0, n).value, 1.0, 1e-9)) kappas_ok = false;

          LyapunovEstimate est = lyapunov_estimate(
              EnvironmentBase::deterministic_base(
                  ChannelLabel::custom_kraus({k0, k1}), 7),
              20, 1, kSuiteSeed);
          bool lambda_zero = !est.minus_inf && near(est.mean_log_kappa_over_n, 0.0, 1e-12);

          // fixed-state analysis on the superoperator spectrum
          Eigen::ComplexEigenSolver<Mat> es(swap.superop());
          int fixed_count = 0;
          Mat fixed_state;
          for (int k = 0; k < es.eigenvalues().size(); ++k) {
            if (std::abs(es.eigenvalues()(k) - 1.0) < 1e-9) {
              ++fixed_count;
              Mat cand = unvectorize(es.eigenvectors().col(k), 2);
              fixed_state = hermitian_part(cand) / hermitian_part(cand).trace().real();
            }
          }
          bool unique_fixed =
              fixed_count == 1 && max_abs(fixed_state - 0.5 * Mat::Identity(2, 2)) <= 1e-9;

          CocycleTrajectory traj(
              EnvironmentBase::deterministic_base(ChannelLabel::custom_kraus({k0, k1}), 7),
              11, 64);
          StationaryStateField field = stationary_state(traj, 1e-8, 64);
          detail = "fixed_count=" + std::to_string(fixed_count) +
                   " lambda=" + fmt(est.mean_log_kappa_over_n) +
                   " stationary_converged=" + std::to_string(field.converged);
          return kappas_ok && lambda_zero && unique_fixed && !field.converged;
        });
}

void check_unitary_cocycle(Collector& c) {
  c.run("unitary-cocycle-isometry", "iid Haar-unitary conjugations keep kappa_n = 1",
        [](std::string& detail) {
          EnvironmentBase base = EnvironmentBase::iid_base(
              {ChannelLabel::haar_unitary_channel(2)}, {1.0}, 0xFACE);
          CocycleTrajectory traj(base, 123, 20);
          double worst = 1.0;
          for (int n = 1; n <= 20; ++n)
            worst = std::min(worst, forward_kappa(traj, n).value);
          detail = "min kappa over n<=20: " + fmt(worst);
          return worst >= 1.0 - 1e-8;
        });
}

void check_mps_dense_transfer(Collector& c) {
  c.run("mps-dense-transfer-equivalence",
        "random left-canonical chains: dense and transfer expectations agree",
        [](std::string& detail) {
          RngStream rng(kSuiteSeed, 0x3D7);
          double worst = 0.0, worst_norm = 0.0;
          for (int trial = 0; trial < 50; ++trial) {
            int n = 4 + static_cast<int>(rng.next_u64() % 5);  // up to 8
            int m = 1 + static_cast<int>(rng.next_u64() % 3);
            MpsChain chain = random_chain(rng.next_u64(), 2, 2, n);
            long long side = 1 << m;
            LocalObservable obs = LocalObservable::on(
                1, m, random_hermitian(rng, static_cast<int>(side)), 2);
            cplx dense = finite_volume_expectation(chain, obs, n, ExpectationMethod::dense);
            cplx transfer = finite_volume_expectation(chain, obs, n, ExpectationMethod::transfer);
            worst = std::max(worst, std::abs(dense - transfer));
            double norm2 = finite_volume_vector(chain, n).squaredNorm();
            cplx trs = superoperator_trace(theta_superop(chain, 0, n));
            worst_norm = std::max(worst_norm, std::abs(norm2 - trs));
          }
          detail = "worst |dense-transfer|=" + fmt(worst) + " worst norm gap=" + fmt(worst_norm);
          return worst <= 1e-9 && worst_norm <= 1e-9;
        },
        60.0);
}

void check_mps_thermodynamic_limit(Collector& c) {
  c.run("mps-thermodynamic-limit-rate",
        "strictly positive transfer chain: quantitative envelope holds at every depth",
        [](std::string& detail) {
          MpsChain chain = random_chain(0xBEEF, 4, 2, 80);
          double a_min = kInf;
          for (int site = 1; site <= 4; ++site) {
            auto [flag, a] = is_strictly_positive(transfer_channel(chain, site), 48, kSuiteSeed);
            (void)flag;
            a_min = std::min(a_min, a);
          }
          RngStream rng(kSuiteSeed, 0x77);
          LocalObservable obs = LocalObservable::on(1, 2, random_hermitian(rng, 16), 4);
          LimitReport rep = thermodynamic_limit(chain, obs, 1e-6, 80);
          bool rows_ok = true;
          for (const auto& row : rep.history) rows_ok = rows_ok && row.z_bound_ok && row.phi_bound_ok;
          double final_err = rep.history.empty() ? kInf : rep.history.back().phi_err;
          detail = "a_min=" + fmt(a_min) + " n_used=" + std::to_string(rep.n_used) +
                   " final_err=" + fmt(final_err) +
                   " recursion_ok=" + std::to_string(rep.boundary_recursion_ok);
          return a_min > 0 && rep.converged && rows_ok && final_err <= 1e-6 &&
                 rep.boundary_recursion_ok;
        });
}

void check_mps_clustering(Collector& c) {
  c.run("mps-clustering-bound",
        "connected correlations across gaps obey the 4|A||B|kappa bound; dephasing gap kills them",
        [](std::string& detail) {
          // contractive chains: per-site transfer kappa kept below 0.75
          auto contractive_site = [](RngStream& rng) {
            for (;;) {
              std::vector<Mat> site = random_site(rng, 3, 2);
              if (kappa_tr(QuantumChannel::from_kraus(site)).value <= 0.75) return site;
            }
          };
          RngStream rng(kSuiteSeed, 0xC0B);
          int failures = 0;
          for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::vector<Mat>> sites;
            for (int n = 0; n < 80; ++n) sites.push_back(contractive_site(rng));
            MpsChain chain = MpsChain::from_sites(std::move(sites));
            LocalObservable a = LocalObservable::on(1, 2, random_hermitian(rng, 9), 3);
            for (int gap = 1; gap <= 6; ++gap) {
              LocalObservable b =
                  LocalObservable::on(3 + gap, 4 + gap, random_hermitian(rng, 9), 3);
              CorrelationReport rep = correlation_bound_check(chain, a, b, 1e-6, 80);
              if (!rep.pass) ++failures;
            }
          }

          // a dephasing pair in the gap makes the gap product a replacement
          auto contractive_qubit_site = [](RngStream& r2) {
            for (;;) {
              std::vector<Mat> site = random_site(r2, 2, 2);
              if (kappa_tr(QuantumChannel::from_kraus(site)).value <= 0.75) return site;
            }
          };
          RngStream rng2(kSuiteSeed, 0xC0C);
          std::vector<std::vector<Mat>> sites;
          for (int n = 0; n < 80; ++n) sites.push_back(contractive_qubit_site(rng2));
          sites[4] = dephasing_z_tensors();
          sites[5] = dephasing_x_tensors();
          MpsChain gapped = MpsChain::from_sites(std::move(sites));
          LocalObservable a2 = LocalObservable::on(1, 2, random_hermitian(rng2, 4), 2);
          LocalObservable b2 = LocalObservable::on(8, 9, random_hermitian(rng2, 4), 2);
          CorrelationReport dz = correlation_bound_check(gapped, a2, b2, 1e-6, 80);
          detail = "bound failures=" + std::to_string(failures) +
                   " dephased-gap corr=" + fmt(dz.connected);
          return failures == 0 && dz.connected <= 1e-8;
        });
}

void check_random_mps(Collector& c) {
  c.run("random-mps-quenched",
        "iid Haar tensor cocycle: negative exponent, quenched limits, clustering tails",
        [](std::string& detail) {
          EnvironmentBase base = EnvironmentBase::iid_base(
              {ChannelLabel::haar_random_channel(2, 2)}, {1.0}, 0x9E77);
          RngStream rng(kSuiteSeed, 0xAB);
          LocalObservable obs = LocalObservable::on(1, 2, random_hermitian(rng, 4), 2);
          RandomMpsReport rep = random_mps_experiment(base, 2, obs, 28, 50, kSuiteSeed);
          int envelopes = 0;
          for (const auto& f : rep.fibers)
            if (f.errors_under_envelope) ++envelopes;
          detail = "lambda_hat=" + fmt(rep.lambda_hat_mean) +
                   " converged=" + std::to_string(rep.all_limits_converged) +
                   " envelopes=" + std::to_string(envelopes) +
                   " tail_consistent=" + std::to_string(rep.tail_consistent) +
                   " identity=" + std::to_string(rep.identity_check_ok);
          return rep.lambda_negative && rep.all_limits_converged && rep.identity_check_ok &&
                 envelopes == static_cast<int>(rep.fibers.size()) && rep.tail_consistent;
        });
}

void check_hs_criterion(Collector& c) {
  c.run("bistochastic-hs-criterion",
        "s0 of depolarizing, the sqrt(d) product bound, and the dephasing block certificate",
        [](std::string& detail) {
          bool s0_ok = true;
          for (double p : {0.2, 0.25, 0.4, 0.5}) {
            double v = s0(make_named(ChannelLabel::depolarizing(p, 2)));
            if (!near(v, 1.0 - p, 1e-9)) s0_ok = false;
          }

          EnvironmentBase dep_base = EnvironmentBase::iid_base(
              {ChannelLabel::depolarizing(0.2, 2), ChannelLabel::depolarizing(0.4, 2)},
              {0.5, 0.5}, 0x7711);
          HsCriterionReport dep = bistochastic_hs_report(dep_base, 12, 50, 2, kSuiteSeed);
          double expected_mean = 0.5 * (std::log(0.8) + std::log(0.6));

          EnvironmentBase deph_base = EnvironmentBase::iid_base(
              {ChannelLabel::dephasing_z(), ChannelLabel::dephasing_x()}, {0.5, 0.5}, 0x7722);
          HsCriterionReport deph = bistochastic_hs_report(deph_base, 8, 50, 2, kSuiteSeed);

          detail = "s0_ok=" + std::to_string(s0_ok) +
                   " dep log s0 mean=" + fmt(dep.log_s0_mean.value) + "~" + fmt(expected_mean) +
                   " dephasing block certificate=" + std::to_string(deph.lambda_negative) +
                   " -inf blocks=" + std::to_string(deph.block_log_mean.minus_inf_count);
          bool dep_ok = dep.product_bounds_ok && dep.stationary_unif_ok &&
                        near(dep.log_s0_mean.value, expected_mean, 0.05) && dep.lambda_negative;
          bool deph_ok = deph.product_bounds_ok && deph.block_log_mean.is_minus_inf() &&
                         deph.lambda_negative;
          return s0_ok && dep_ok && deph_ok;
        });
}

void check_diamond(Collector& c) {
  c.run("diamond-witness-unity", "reference-factor witness keeps the amplified ratio at 1",
        [](std::string& detail) {
          RngStream rng(kSuiteSeed, 0xD1A);
          double worst = 0.0;
          for (int trial = 0; trial < 20; ++trial) {
            int d = trial % 2 == 0 ? 2 : 3;
            QuantumChannel phi = random_channel(d, 1 + static_cast<int>(rng.next_u64() % 4),
                                                rng.next_u64());
            worst = std::max(worst, std::abs(diamond_witness(phi, rng.next_u64()) - 1.0));
          }
          detail = "worst |ratio-1|=" + fmt(worst);
          return worst <= 1e-12;
        });
}

}  // namespace

std::vector<CheckResult> run_paper_suite(const std::string& filter) {
  Collector c;
  c.filter = filter;
  check_amplitude_damping(c);
  check_alternating_dephasing(c);
  check_depolarizing_family(c);
  check_werner_holevo(c);
  check_replacement_sandwich(c);
  check_submultiplicativity(c);
  check_lyapunov(c);
  check_annealed(c);
  check_bit_swap(c);
  check_unitary_cocycle(c);
  check_mps_dense_transfer(c);
  check_mps_thermodynamic_limit(c);
  check_mps_clustering(c);
  check_random_mps(c);
  check_hs_criterion(c);
  check_diamond(c);
  return c.results;
}

int print_suite_results(const std::vector<CheckResult>& results, std::ostream& os) {
  int failures = 0;
  for (const auto& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(36) << r.tag << " "
       << std::fixed << std::setprecision(2) << std::setw(7) << r.seconds << "s  " << r.detail
       << "\n";
    if (!r.pass) ++failures;
  }
  os << results.size() - failures << "/" << results.size() << " checks passed\n";
  return failures;
}

}  // namespace qdob
