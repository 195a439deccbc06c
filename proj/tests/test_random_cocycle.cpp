#include <doctest.h>

#include "qdob/random_cocycle.hpp"
#include "qdob/serialization.hpp"

using namespace qdob;

namespace {

EnvironmentBase ad_mixture(std::uint64_t seed = 0x1A2B) {
  return EnvironmentBase::iid_base(
      {ChannelLabel::amplitude_damping(0.3), ChannelLabel::amplitude_damping(0.6)}, {0.5, 0.5},
      seed);
}

EnvironmentBase bit_swap_base() {
  Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
  k0(1, 0) = 1.0;
  k1(0, 1) = 1.0;
  return EnvironmentBase::deterministic_base(ChannelLabel::custom_kraus({k0, k1}), 3);
}

}  // namespace

TEST_CASE("fiber sampling") {
  EnvironmentBase det = EnvironmentBase::deterministic_base(
      ChannelLabel::amplitude_damping(0.3), 1);
  CocycleTrajectory t1(det, 10, 5);
  for (std::int64_t j = -5; j <= 5; ++j)
    CHECK(max_abs(t1.at(j).superop() - t1.at(0).superop()) == 0.0);

  EnvironmentBase iid = ad_mixture();
  CocycleTrajectory fa(iid, 77, 8);
  CocycleTrajectory fb(iid, 77, 8);
  for (std::int64_t j = -8; j <= 8; ++j) CHECK(fa.atom_index(j) == fb.atom_index(j));

  // absorbing markov chain stays at its start state
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  EnvironmentBase markov = EnvironmentBase::markov_base(
      {ChannelLabel::amplitude_damping(0.3), ChannelLabel::amplitude_damping(0.6)}, p, pi, 5);
  CocycleTrajectory fm(markov, 9, 6);
  int start = fm.atom_index(-6);
  for (std::int64_t j = -6; j <= 6; ++j) CHECK(fm.atom_index(j) == start);

  CHECK_THROWS_AS(fa.at(9), std::invalid_argument);
}

TEST_CASE("environment validation") {
  CHECK_THROWS_AS(EnvironmentBase::iid_base({ChannelLabel::amplitude_damping(0.3)}, {0.7}, 1),
                  std::invalid_argument);
  Eigen::MatrixXd bad(2, 2);
  bad << 0.7, 0.2, 0.3, 0.7;
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  CHECK_THROWS_AS(
      EnvironmentBase::markov_base(
          {ChannelLabel::amplitude_damping(0.3), ChannelLabel::amplitude_damping(0.6)}, bad, pi, 1),
      std::invalid_argument);
}

TEST_CASE("forward and pullback kappas on fibers") {
  RngStream rng(60);
  EnvironmentBase unitary = EnvironmentBase::iid_base({ChannelLabel::haar_unitary_channel(2)},
                                                      {1.0}, 0xFACE);
  CocycleTrajectory fu(unitary, 4, 12);
  for (int n : {1, 4, 9, 12}) {
    CHECK(forward_kappa(fu, n).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pullback_kappa(fu, n).value == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(forward_kappa(fu, 0).value == doctest::Approx(1.0));

  EnvironmentBase iid = ad_mixture();
  CocycleTrajectory fad(iid, 21, 16);
  double expected_fwd = 1.0, expected_pull = 1.0;
  for (int j = 0; j < 16; ++j)
    expected_fwd *= std::sqrt(1.0 - (fad.atom_index(j) == 0 ? 0.3 : 0.6));
  for (int j = -16; j < 0; ++j)
    expected_pull *= std::sqrt(1.0 - (fad.atom_index(j) == 0 ? 0.3 : 0.6));
  CHECK(forward_kappa(fad, 16).value == doctest::Approx(expected_fwd).epsilon(1e-9));
  CHECK(pullback_kappa(fad, 16).value == doctest::Approx(expected_pull).epsilon(1e-9));
  CHECK_THROWS_AS(forward_kappa(fad, 17), std::invalid_argument);
  CHECK_THROWS_AS(pullback_kappa(fad, 20), std::invalid_argument);

  // shift consistency: the window [s, t) equals the explicit channel product
  Mat manual = Mat::Identity(4, 4);
  for (std::int64_t j = 2; j < 7; ++j) manual = fad.at(j).superop() * manual;
  CHECK(max_abs(fad.product_superop(2, 7) - manual) == 0.0);
}

TEST_CASE("lyapunov estimates") {
  EnvironmentBase iid = ad_mixture();
  const double exact = 0.25 * (std::log(0.7) + std::log(0.4));
  LyapunovEstimate est = lyapunov_estimate(iid, 30, 120, 0xD0B0);
  CHECK_FALSE(est.minus_inf);
  CHECK(std::abs(est.mean_log_kappa_over_n - exact) <=
        std::max(3.0 * est.ci_halfwidth / 1.96, 0.01));
  CHECK(est.kingman_curve.size() == 30);

  LyapunovEstimate swap_est = lyapunov_estimate(bit_swap_base(), 20, 1, 1);
  CHECK(swap_est.mean_log_kappa_over_n == doctest::Approx(0.0));

  RngStream rng(61);
  EnvironmentBase repl = EnvironmentBase::deterministic_base(
      ChannelLabel::replacement(random_density(rng, 2)), 2);
  LyapunovEstimate rest = lyapunov_estimate(repl, 5, 3, 1);
  CHECK(rest.minus_inf);
  CHECK(rest.minus_inf_count == 3);
  CHECK(std::isinf(rest.mean_log_kappa_over_n));
}

TEST_CASE("pullback and forward exponents agree for the mixture") {
  EnvironmentBase iid = ad_mixture();
  const int n = 30, samples = 80;
  double fwd = 0.0, pull = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::uint64_t fs = RngStream(iid.seed, 0xE1, s).next_u64();
    CocycleTrajectory traj(iid, fs, n);
    fwd += std::log(forward_kappa(traj, n).value) / n;
    pull += std::log(pullback_kappa(traj, n).value) / n;
  }
  fwd /= samples;
  pull /= samples;
  CHECK(std::abs(fwd - pull) <= 0.02);
}

TEST_CASE("stationary random states") {
  EnvironmentBase iid = ad_mixture();
  CocycleTrajectory traj(iid, 5, 96);
  StationaryStateField field = stationary_state(traj, 1e-9, 90);
  CHECK(field.converged);
  Mat ground = Mat::Zero(2, 2);
  ground(0, 0) = 1.0;
  CHECK(max_abs(field.rho_at_zero.rho - ground) <= 1e-7);
  for (double r : field.residual_chain) CHECK(r <= 3e-9);
  CHECK(field.spot_checks_ok);

  EnvironmentBase dep = EnvironmentBase::deterministic_base(ChannelLabel::depolarizing(0.5, 2), 4);
  CocycleTrajectory td(dep, 6, 64);
  StationaryStateField fd = stationary_state(td, 1e-9, 60);
  CHECK(fd.converged);
  CHECK(max_abs(fd.rho_at_zero.rho - 0.5 * Mat::Identity(2, 2)) <= 1e-8);

  CocycleTrajectory ts(bit_swap_base(), 7, 64);
  StationaryStateField fs = stationary_state(ts, 1e-6, 60);
  CHECK_FALSE(fs.converged);
  CHECK(fs.last_kappa == doctest::Approx(1.0));
}

TEST_CASE("quenched rate constants") {
  EnvironmentBase iid = ad_mixture();
  CocycleTrajectory traj(iid, 8, 80);
  QuenchedRateFit fit = quenched_rate_fit(traj, -0.15, 40);
  CHECK(fit.convergent);
  CHECK(fit.inequalities_ok);
  CHECK(fit.c_plus >= 1.0);
  CHECK(fit.c_minus >= 1.0);

  QuenchedRateFit steep = quenched_rate_fit(traj, -0.5, 40);
  CHECK_FALSE(steep.convergent);
  CHECK(steep.inequalities_ok);

  RngStream rng(62);
  EnvironmentBase repl = EnvironmentBase::deterministic_base(
      ChannelLabel::replacement(random_density(rng, 2)), 2);
  CocycleTrajectory tr(repl, 9, 30);
  QuenchedRateFit rf = quenched_rate_fit(tr, -0.3, 20);
  CHECK(rf.c_plus == doctest::Approx(1.0));
  CHECK(rf.c_minus == doctest::Approx(1.0));

  CHECK_THROWS_AS(quenched_rate_fit(traj, 0.1, 10), std::invalid_argument);
}

TEST_CASE("negative exponent certificates") {
  EnvironmentBase iid = ad_mixture();
  NegativeExponentCertificate block = certify_negative_exponent(
      iid, 1, 60, NegativeExponentMethod::contracting_block, 0xD0B0);
  CHECK(block.contracting_probability == doctest::Approx(1.0));
  CHECK(block.certified);
  CHECK(block.implied_lambda_bound < 0.0);

  EnvironmentBase unitary = EnvironmentBase::iid_base({ChannelLabel::haar_unitary_channel(2)},
                                                      {1.0}, 0xFACE);
  NegativeExponentCertificate none = certify_negative_exponent(
      unitary, 1, 40, NegativeExponentMethod::contracting_block, 0xD0B0);
  CHECK(none.contracting_probability == doctest::Approx(0.0));
  CHECK_FALSE(none.certified);

  EnvironmentBase dep_mix = EnvironmentBase::iid_base(
      {ChannelLabel::depolarizing(0.0, 2), ChannelLabel::depolarizing(0.4, 2)}, {0.5, 0.5},
      0x99);
  NegativeExponentCertificate doeb = certify_negative_exponent(
      dep_mix, 1, 80, NegativeExponentMethod::doeblin_block, 0xD0B0);
  CHECK(doeb.certified);
  // eps = p per the depolarizing minorization, so E[log(1-eps)] = log(0.6)/2
  CHECK(doeb.log_mean.value == doctest::Approx(0.5 * std::log(0.6)).epsilon(0.05));

  NegativeExponentCertificate strict = certify_negative_exponent(
      dep_mix, 1, 40, NegativeExponentMethod::strict_positive_block, 0xD0B0);
  CHECK(strict.contracting_probability == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("annealed means") {
  EnvironmentBase iid = ad_mixture();
  AnnealedReport rep = annealed_mean_kappa(iid, {5, 10}, 150, 0xD0B0);
  const double m = 0.5 * (std::sqrt(0.7) + std::sqrt(0.4));
  for (const auto& row : rep.table) {
    double expected = std::pow(m, row.n);
    CHECK(std::abs(row.mean - expected) <= 3.0 * row.stderr_ + 1e-12);
  }
  CHECK(rep.recursion_ok);
  CHECK(rep.fit_valid);

  RngStream rng(63);
  EnvironmentBase repl = EnvironmentBase::deterministic_base(
      ChannelLabel::replacement(random_density(rng, 2)), 2);
  AnnealedReport rrep = annealed_mean_kappa(repl, {1, 3}, 4, 1);
  for (const auto& row : rrep.table) CHECK(row.mean <= 1e-12);

  EnvironmentBase unitary = EnvironmentBase::iid_base({ChannelLabel::haar_unitary_channel(2)},
                                                      {1.0}, 0xFACE);
  AnnealedReport urep = annealed_mean_kappa(unitary, {2, 4}, 10, 1);
  for (const auto& row : urep.table) CHECK(row.mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("markov mixing profile") {
  auto atoms = std::vector<ChannelLabel>{ChannelLabel::amplitude_damping(0.3),
                                         ChannelLabel::amplitude_damping(0.6)};
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;

  // independent rows: P(i, .) = pi
  Eigen::MatrixXd indep(2, 2);
  indep << 0.5, 0.5, 0.5, 0.5;
  auto rows = markov_mixing_profile(EnvironmentBase::markov_base(atoms, indep, pi, 1), 3);
  for (const auto& r : rows) CHECK(r.phi_m <= 1e-15);

  Eigen::MatrixXd flip(2, 2);
  flip << 0.7, 0.3, 0.3, 0.7;
  auto frows = markov_mixing_profile(EnvironmentBase::markov_base(atoms, flip, pi, 1), 3);
  CHECK(frows[0].phi_m == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(frows[0].rho_bound == doctest::Approx(2.0 * std::sqrt(0.2)).epsilon(1e-12));

  Eigen::MatrixXd frozen = Eigen::MatrixXd::Identity(2, 2);
  auto irows = markov_mixing_profile(EnvironmentBase::markov_base(atoms, frozen, pi, 1), 4);
  for (const auto& r : irows) CHECK(r.phi_m == doctest::Approx(0.5));

  CHECK_THROWS_AS(markov_mixing_profile(ad_mixture(), 2), std::invalid_argument);
}

TEST_CASE("bistochastic HS reports") {
  EnvironmentBase dep = EnvironmentBase::iid_base(
      {ChannelLabel::depolarizing(0.2, 2), ChannelLabel::depolarizing(0.4, 2)}, {0.5, 0.5},
      0x7711);
  HsCriterionReport rep = bistochastic_hs_report(dep, 10, 30, 2, 0xD0B0);
  CHECK(rep.product_bounds_ok);
  CHECK(rep.stationary_unif_ok);
  CHECK(rep.lambda_negative);
  CHECK(rep.log_s0_mean.value ==
        doctest::Approx(0.5 * (std::log(0.8) + std::log(0.6))).epsilon(0.1));

  EnvironmentBase deph = EnvironmentBase::iid_base(
      {ChannelLabel::dephasing_z(), ChannelLabel::dephasing_x()}, {0.5, 0.5}, 0x7722);
  HsCriterionReport drep = bistochastic_hs_report(deph, 6, 30, 2, 0xD0B0);
  CHECK(drep.block_log_mean.is_minus_inf());
  CHECK(drep.lambda_negative);

  EnvironmentBase ad = ad_mixture();
  CHECK_THROWS_AS(bistochastic_hs_report(ad, 4, 4, 2, 1), std::invalid_argument);
}

TEST_CASE("base JSON round trip") {
  EnvironmentBase iid = ad_mixture();
  EnvironmentBase back = base_from_json(base_to_json(iid));
  CHECK(back.kind == EnvironmentBase::Kind::iid);
  CHECK(back.atoms.size() == 2);
  CHECK(back.weights[0] == 0.5);

  Eigen::MatrixXd p(2, 2);
  p << 0.7, 0.3, 0.3, 0.7;
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  EnvironmentBase markov = EnvironmentBase::markov_base(
      {ChannelLabel::dephasing_z(), ChannelLabel::dephasing_x()}, p, pi, 2);
  EnvironmentBase mback = base_from_json(base_to_json(markov));
  CHECK(mback.kind == EnvironmentBase::Kind::markov);
  CHECK(max_abs(Mat(mback.P.cast<cplx>()) - Mat(markov.P.cast<cplx>())) == 0.0);
}
