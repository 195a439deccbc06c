#include <doctest.h>

#include "qdob/channel.hpp"
#include "qdob/serialization.hpp"

using namespace qdob;

namespace {

Mat ket_bra(int i, int j, int d) {
  Mat m = Mat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

// direct Kraus-sum action, independent of the superoperator cache
Mat kraus_apply(const std::vector<Mat>& kraus, const Mat& x) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (const Mat& k : kraus) out += k * x * k.adjoint();
  return out;
}

}  // namespace

TEST_CASE("from_kraus validation and amplitude damping action") {
  QuantumChannel id = QuantumChannel::from_kraus({Mat::Identity(3, 3)});
  CHECK(max_abs(id.superop() - Mat::Identity(9, 9)) <= 1e-12);

  QuantumChannel ad = make_named(ChannelLabel::amplitude_damping(0.36));
  Mat out = ad.apply(ket_bra(1, 1, 2));
  Mat expected(2, 2);
  expected << 0.36, 0, 0, 0.64;
  CHECK(max_abs(out - expected) <= 1e-12);

  CHECK_THROWS_AS(QuantumChannel::from_kraus({Mat::Identity(2, 2), Mat::Identity(2, 2)}),
                  std::invalid_argument);
}

TEST_CASE("apply basics") {
  RngStream rng(11);
  DensityMatrix tau = DensityMatrix::make(random_density(rng, 2));
  QuantumChannel repl = replacement_channel(tau);
  Mat rho = random_density(rng, 2);
  CHECK(max_abs(repl.apply(rho) - tau.rho) <= 1e-12);

  QuantumChannel dz = make_named(ChannelLabel::dephasing_z());
  QuantumChannel dx = make_named(ChannelLabel::dephasing_x());
  Mat out = compose(dx, dz).apply(ket_bra(0, 0, 2));
  CHECK(max_abs(out - 0.5 * Mat::Identity(2, 2)) <= 1e-12);

  QuantumChannel random = random_channel(3, 2, 123);
  Mat x = rng.gaussian_matrix(3, 3);
  CHECK(std::abs(random.apply(x).trace() - x.trace()) <= 1e-12);
  CHECK_THROWS_AS(random.apply(Mat::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("compose matches closed forms") {
  QuantumChannel id = QuantumChannel::identity(2);
  QuantumChannel ad = make_named(ChannelLabel::amplitude_damping(0.4));
  CHECK(max_abs(compose(id, ad).superop() - ad.superop()) <= 1e-12);

  double g1 = 0.3, g2 = 0.5;
  QuantumChannel a1 = make_named(ChannelLabel::amplitude_damping(g1));
  QuantumChannel a2 = make_named(ChannelLabel::amplitude_damping(g2));
  QuantumChannel both = compose(a1, a2);
  QuantumChannel direct = make_named(ChannelLabel::amplitude_damping(1.0 - (1.0 - g1) * (1.0 - g2)));
  RngStream rng(12);
  for (int i = 0; i < 8; ++i) {
    Mat rho = random_density(rng, 2);
    CHECK(max_abs(both.apply(rho) - direct.apply(rho)) <= 1e-10);
  }

  QuantumChannel dzx = compose(make_named(ChannelLabel::dephasing_x()),
                               make_named(ChannelLabel::dephasing_z()));
  QuantumChannel repl = replacement_channel(maximally_mixed(2));
  CHECK(max_abs(dzx.superop() - repl.superop()) <= 1e-12);
}

TEST_CASE("compose is associative on superoperators") {
  RngStream rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    QuantumChannel a = random_channel(2, 2, rng.next_u64());
    QuantumChannel b = random_channel(2, 3, rng.next_u64());
    QuantumChannel c = random_channel(2, 2, rng.next_u64());
    Mat left = compose(compose(a, b), c).superop();
    Mat right = compose(a, compose(b, c)).superop();
    CHECK(max_abs(left - right) <= 1e-10);
  }
}

TEST_CASE("named channels") {
  // transpose-type map: Choi is the symmetric projector over d(d+1)/2
  for (int d : {2, 3}) {
    QuantumChannel wh = make_named(ChannelLabel::werner_holevo_like(d));
    Mat flip = Mat::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) flip(i * d + j, j * d + i) = 1.0;
    Mat expected = (Mat::Identity(d * d, d * d) + flip) / (d * (d + 1.0));
    CHECK(max_abs(wh.choi() - expected) <= 1e-10);
    CHECK(min_eigenvalue(wh.choi()) >= -1e-12);
  }

  QuantumChannel dep1 = make_named(ChannelLabel::depolarizing(1.0, 3));
  QuantumChannel repl = replacement_channel(maximally_mixed(3));
  CHECK(max_abs(dep1.superop() - repl.superop()) <= 1e-12);

  RngStream rng(14);
  Mat u = haar_unitary(rng, 3);
  QuantumChannel uc = make_named(ChannelLabel::unitary_conjugation(u));
  Mat x = rng.gaussian_matrix(3, 3);
  CHECK(std::abs(trace_norm(uc.apply(x)) - trace_norm(x)) <= 1e-10);

  CHECK_THROWS_AS(make_named(ChannelLabel::amplitude_damping(1.5)), std::invalid_argument);
  CHECK_THROWS_AS(make_named(ChannelLabel::depolarizing(-0.1, 2)), std::invalid_argument);
}

TEST_CASE("random channels are reproducible and CPTP") {
  QuantumChannel a = random_channel(3, 2, 999);
  QuantumChannel b = random_channel(3, 2, 999);
  REQUIRE(a.kraus().size() == b.kraus().size());
  for (std::size_t i = 0; i < a.kraus().size(); ++i)
    CHECK(max_abs(a.kraus()[i] - b.kraus()[i]) == 0.0);

  CHECK(a.tp_defect() <= 1e-12);

  QuantumChannel u = random_channel(3, 1, 1000);
  Mat k = u.kraus().front();
  CHECK(max_abs(k.adjoint() * k - Mat::Identity(3, 3)) <= 1e-12);
}

TEST_CASE("kraus, superoperator, and Choi stay consistent") {
  RngStream rng(15);
  for (int trial = 0; trial < 6; ++trial) {
    QuantumChannel phi = random_channel(3, 1 + static_cast<int>(rng.next_u64() % 3),
                                        rng.next_u64());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Mat e = ket_bra(i, j, 3);
        CHECK(max_abs(phi.apply(e) - kraus_apply(phi.kraus(), e)) <= 1e-10);
      }
    // rebuilding from the superoperator preserves the action
    QuantumChannel rebuilt = QuantumChannel::from_superop(phi.superop());
    Mat x = rng.gaussian_matrix(3, 3);
    CHECK(max_abs(rebuilt.apply(x) - phi.apply(x)) <= 1e-9);
  }
}

TEST_CASE("transposition alone fails complete positivity") {
  const int d = 2;
  Mat s(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat e = ket_bra(i, j, d);
      s.col(j * d + i) = vectorize(Mat(e.transpose()));
    }
  CHECK_THROWS_AS(QuantumChannel::from_superop(s), std::invalid_argument);
}

TEST_CASE("strict positivity estimates") {
  auto [flag_dep, a_dep] = is_strictly_positive(make_named(ChannelLabel::depolarizing(0.5, 2)));
  CHECK(flag_dep);
  CHECK(a_dep == doctest::Approx(0.25).epsilon(1e-6));

  auto [flag_ad, a_ad] = is_strictly_positive(make_named(ChannelLabel::amplitude_damping(0.5)));
  CHECK_FALSE(flag_ad);
  CHECK(a_ad <= 1e-9);

  RngStream rng(16);
  auto [flag_u, a_u] =
      is_strictly_positive(make_named(ChannelLabel::unitary_conjugation(haar_unitary(rng, 2))));
  CHECK_FALSE(flag_u);
  CHECK(a_u <= 1e-9);
}

TEST_CASE("bistochasticity") {
  CHECK(is_bistochastic(make_named(ChannelLabel::dephasing_z())));
  CHECK(is_bistochastic(make_named(ChannelLabel::depolarizing(0.3, 3))));
  CHECK_FALSE(is_bistochastic(make_named(ChannelLabel::amplitude_damping(0.3))));
}

TEST_CASE("channel JSON round trip is value-exact") {
  QuantumChannel phi = random_channel(2, 3, 4242);
  json j = channel_to_json(phi);
  QuantumChannel back = channel_from_json(j);
  REQUIRE(back.kraus().size() == phi.kraus().size());
  for (std::size_t i = 0; i < phi.kraus().size(); ++i)
    CHECK(max_abs(back.kraus()[i] - phi.kraus()[i]) == 0.0);

  ChannelLabel label = ChannelLabel::depolarizing(0.25, 3);
  ChannelLabel parsed = label_from_json(label_to_json(label));
  CHECK(parsed.kind == ChannelLabel::Kind::depolarizing);
  CHECK(parsed.p == 0.25);
  CHECK(parsed.d == 3);
}
