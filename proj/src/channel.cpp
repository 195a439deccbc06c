#include "qdob/channel.hpp"

#include <cmath>

#include "qdob/parallel.hpp"

namespace qdob {

Vec vectorize(const Mat& x) {
  Vec v(x.size());
  int idx = 0;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i) v(idx++) = x(i, j);
  return v;
}

Mat unvectorize(const Vec& v, int d) {
  Mat x(d, d);
  int idx = 0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) x(i, j) = v(idx++);
  return x;
}

Mat superop_from_kraus(const std::vector<Mat>& kraus) {
  const int d = static_cast<int>(kraus.front().rows());
  Mat s = Mat::Zero(d * d, d * d);
  for (const Mat& k : kraus) s += kron(k.conjugate(), k);
  return s;
}

Mat apply_superop(const Mat& superop, const Mat& x) {
  const int d = static_cast<int>(x.rows());
  return unvectorize(superop * vectorize(x), d);
}

Mat choi_from_superop(const Mat& superop, int d) {
  // J[(a,i),(b,j)] = Phi(E_ij)[a,b] / d
  Mat j = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj) {
      Mat e = Mat::Zero(d, d);
      e(i, jj) = 1.0;
      Mat out = apply_superop(superop, e);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) j(a * d + i, b * d + jj) = out(a, b) / static_cast<double>(d);
    }
  return j;
}

Mat superop_from_choi(const Mat& choi, int d) {
  Mat s(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj) {
      Mat out(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) out(a, b) = choi(a * d + i, b * d + jj) * static_cast<double>(d);
      s.col(jj * d + i) = vectorize(out);
    }
  return s;
}

std::vector<Mat> kraus_from_choi(const Mat& choi, int d, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(choi));
  std::vector<Mat> kraus;
  for (int k = d * d - 1; k >= 0; --k) {
    double lam = es.eigenvalues()(k);
    if (lam <= tol) continue;
    Vec v = es.eigenvectors().col(k);
    Mat kk(d, d);
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i) kk(a, i) = std::sqrt(lam * d) * v(a * d + i);
    kraus.push_back(std::move(kk));
  }
  if (kraus.empty()) kraus.push_back(Mat::Zero(d, d));
  return kraus;
}

namespace {

void check_kraus_family(const std::vector<Mat>& kraus) {
  require(!kraus.empty(), "channel: empty Kraus list");
  const auto rows = kraus.front().rows();
  require(rows >= 1 && kraus.front().cols() == rows, "channel: Kraus matrices must be square");
  for (const Mat& k : kraus)
    require(k.rows() == rows && k.cols() == rows, "channel: Kraus dimension mismatch");
}

double tp_defect_of(const std::vector<Mat>& kraus, int d) {
  Mat acc = Mat::Zero(d, d);
  for (const Mat& k : kraus) acc += k.adjoint() * k;
  return max_abs(acc - Mat::Identity(d, d));
}

}  // namespace

QuantumChannel QuantumChannel::from_kraus(std::vector<Mat> kraus) {
  check_kraus_family(kraus);
  const int d = static_cast<int>(kraus.front().rows());
  double defect = tp_defect_of(kraus, d);
  require(defect <= kTpTol, "channel: trace preservation violated");
  Mat superop = superop_from_kraus(kraus);
  Mat choi = choi_from_superop(superop, d);
  require(min_eigenvalue(choi) >= -kCpTol, "channel: Choi matrix not PSD");
  return QuantumChannel(d, std::move(kraus), std::move(superop), std::move(choi));
}

QuantumChannel QuantumChannel::from_superop(Mat superop) {
  require(superop.rows() == superop.cols(), "channel: superoperator must be square");
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(superop.rows()))));
  require(static_cast<long>(d) * d == superop.rows(), "channel: superoperator side must be d^2");
  Mat choi = choi_from_superop(superop, d);
  require(max_abs(choi - choi.adjoint()) <= 1e-8, "channel: map is not Hermiticity-preserving");
  require(min_eigenvalue(choi) >= -kCpTol, "channel: Choi matrix not PSD");
  std::vector<Mat> kraus = kraus_from_choi(choi, d);
  double defect = tp_defect_of(kraus, d);
  require(defect <= kTpTol, "channel: trace preservation violated");
  return QuantumChannel(d, std::move(kraus), std::move(superop), std::move(choi));
}

QuantumChannel QuantumChannel::identity(int d) {
  std::vector<Mat> kraus{Mat::Identity(d, d)};
  return from_kraus(std::move(kraus));
}

Mat QuantumChannel::apply(const Mat& x) const {
  require(x.rows() == d_ && x.cols() == d_, "channel apply: dimension mismatch");
  return apply_superop(superop_, x);
}

double QuantumChannel::tp_defect() const { return tp_defect_of(kraus_, d_); }

QuantumChannel compose(const QuantumChannel& a, const QuantumChannel& b) {
  require(a.dim() == b.dim(), "compose: dimension mismatch");
  return QuantumChannel::from_superop(a.superop() * b.superop());
}

QuantumChannel replacement_channel(const DensityMatrix& tau) {
  const int d = tau.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(tau.rho);
  std::vector<Mat> kraus;
  kraus.reserve(static_cast<std::size_t>(d) * d);
  for (int k = 0; k < d; ++k) {
    double lam = std::max(0.0, es.eigenvalues()(k));
    if (lam <= 1e-15) continue;
    for (int j = 0; j < d; ++j) {
      // K = sqrt(lam) |v_k><e_j|
      Mat kk = std::sqrt(lam) * es.eigenvectors().col(k) * Vec::Unit(d, j).adjoint();
      kraus.push_back(std::move(kk));
    }
  }
  if (kraus.empty()) kraus.push_back(Mat::Zero(d, d));
  return QuantumChannel::from_kraus(std::move(kraus));
}

ChannelLabel ChannelLabel::amplitude_damping(double gamma) {
  ChannelLabel l;
  l.kind = Kind::amplitude_damping;
  l.gamma = gamma;
  l.d = 2;
  return l;
}

ChannelLabel ChannelLabel::dephasing_z() {
  ChannelLabel l;
  l.kind = Kind::dephasing_z;
  l.d = 2;
  return l;
}

ChannelLabel ChannelLabel::dephasing_x() {
  ChannelLabel l;
  l.kind = Kind::dephasing_x;
  l.d = 2;
  return l;
}

ChannelLabel ChannelLabel::depolarizing(double p, int d) {
  ChannelLabel l;
  l.kind = Kind::depolarizing;
  l.p = p;
  l.d = d;
  return l;
}

ChannelLabel ChannelLabel::unitary_conjugation(Mat u) {
  ChannelLabel l;
  l.kind = Kind::unitary;
  l.d = static_cast<int>(u.rows());
  l.unitary = std::move(u);
  return l;
}

ChannelLabel ChannelLabel::werner_holevo_like(int d) {
  ChannelLabel l;
  l.kind = Kind::werner_holevo_like;
  l.d = d;
  return l;
}

ChannelLabel ChannelLabel::replacement(Mat tau) {
  ChannelLabel l;
  l.kind = Kind::replacement;
  l.d = static_cast<int>(tau.rows());
  l.tau = std::move(tau);
  return l;
}

ChannelLabel ChannelLabel::haar_random_channel(int d, int kraus_rank) {
  ChannelLabel l;
  l.kind = Kind::haar_random;
  l.d = d;
  l.kraus_rank = kraus_rank;
  return l;
}

ChannelLabel ChannelLabel::haar_unitary_channel(int d) {
  ChannelLabel l;
  l.kind = Kind::haar_unitary;
  l.d = d;
  return l;
}

ChannelLabel ChannelLabel::custom_kraus(std::vector<Mat> kraus) {
  ChannelLabel l;
  l.kind = Kind::custom;
  l.d = kraus.empty() ? 0 : static_cast<int>(kraus.front().rows());
  l.kraus = std::move(kraus);
  return l;
}

int ChannelLabel::dimension() const { return d; }

void ChannelLabel::validate() const {
  switch (kind) {
    case Kind::amplitude_damping:
      require(gamma >= 0.0 && gamma <= 1.0, "label: gamma out of [0,1]");
      break;
    case Kind::depolarizing:
      require(p >= 0.0 && p <= 1.0, "label: p out of [0,1]");
      require(d >= 2, "label: d must be >= 2");
      break;
    case Kind::unitary: {
      require(unitary.rows() == unitary.cols() && unitary.rows() >= 1, "label: U must be square");
      Mat should_be_id = unitary.adjoint() * unitary;
      require(max_abs(should_be_id - Mat::Identity(unitary.rows(), unitary.cols())) <= 1e-10,
              "label: U not unitary");
      break;
    }
    case Kind::werner_holevo_like:
      require(d >= 2, "label: d must be >= 2");
      break;
    case Kind::replacement:
      DensityMatrix::make(tau);
      break;
    case Kind::haar_random:
      require(d >= 2 && kraus_rank >= 1, "label: bad haar_random parameters");
      break;
    case Kind::haar_unitary:
      require(d >= 2, "label: d must be >= 2");
      break;
    case Kind::custom:
      require(!kraus.empty(), "label: empty Kraus list");
      break;
    case Kind::dephasing_z:
    case Kind::dephasing_x:
      break;
  }
}

QuantumChannel make_named(const ChannelLabel& label) {
  label.validate();
  switch (label.kind) {
    case ChannelLabel::Kind::amplitude_damping: {
      Mat k0(2, 2), k1(2, 2);
      k0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - label.gamma);
      k1 << 0.0, std::sqrt(label.gamma), 0.0, 0.0;
      return QuantumChannel::from_kraus({k0, k1});
    }
    case ChannelLabel::Kind::dephasing_z: {
      Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
      p0(0, 0) = 1.0;
      p1(1, 1) = 1.0;
      return QuantumChannel::from_kraus({p0, p1});
    }
    case ChannelLabel::Kind::dephasing_x: {
      Mat pp(2, 2), pm(2, 2);
      pp << 0.5, 0.5, 0.5, 0.5;
      pm << 0.5, -0.5, -0.5, 0.5;
      return QuantumChannel::from_kraus({pp, pm});
    }
    case ChannelLabel::Kind::depolarizing: {
      // (1-p) X + p tr(X) I/d, assembled at the superoperator level
      const int d = label.d;
      Mat id_s = Mat::Identity(d * d, d * d);
      DensityMatrix mixed = maximally_mixed(d);
      Mat repl = replacement_channel(mixed).superop();
      return QuantumChannel::from_superop((1.0 - label.p) * id_s + label.p * repl);
    }
    case ChannelLabel::Kind::unitary:
      return QuantumChannel::from_kraus({label.unitary});
    case ChannelLabel::Kind::werner_holevo_like: {
      // X -> (tr X I + X^T) / (d+1)
      const int d = label.d;
      Mat s = Mat::Zero(d * d, d * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Mat e = Mat::Zero(d, d);
          e(i, j) = 1.0;
          Mat out = (e.trace() * Mat::Identity(d, d) + e.transpose()) / (d + 1.0);
          s.col(j * d + i) = vectorize(out);
        }
      return QuantumChannel::from_superop(s);
    }
    case ChannelLabel::Kind::replacement:
      return replacement_channel(DensityMatrix::make(label.tau));
    case ChannelLabel::Kind::custom:
      return QuantumChannel::from_kraus(label.kraus);
    case ChannelLabel::Kind::haar_random:
    case ChannelLabel::Kind::haar_unitary:
      throw std::invalid_argument("make_named: stochastic label needs realize()");
  }
  throw std::logic_error("make_named: unreachable");
}

QuantumChannel realize(const ChannelLabel& label, RngStream& rng) {
  label.validate();
  switch (label.kind) {
    case ChannelLabel::Kind::haar_random: {
      Mat v = haar_isometry(rng, label.d * label.kraus_rank, label.d);
      std::vector<Mat> kraus(label.kraus_rank);
      for (int i = 0; i < label.kraus_rank; ++i) kraus[i] = v.block(i * label.d, 0, label.d, label.d);
      return QuantumChannel::from_kraus(std::move(kraus));
    }
    case ChannelLabel::Kind::haar_unitary:
      return QuantumChannel::from_kraus({haar_unitary(rng, label.d)});
    default:
      return make_named(label);
  }
}

QuantumChannel random_channel(int d, int kraus_rank, std::uint64_t seed) {
  require(d >= 2 && kraus_rank >= 1, "random_channel: bad parameters");
  RngStream rng(seed);
  ChannelLabel l = ChannelLabel::haar_random_channel(d, kraus_rank);
  return realize(l, rng);
}

std::pair<bool, double> is_strictly_positive(const QuantumChannel& phi, int restarts,
                                             std::uint64_t seed) {
  const int d = phi.dim();
  // lambda_min(Phi(psi psi*)) is concave in the state, so pure states
  // suffice. Projected gradient descent on the unit sphere; the Wirtinger
  // gradient of psi* Phi_adj(vv*) psi is Phi_adj(vv*) psi with v the
  // bottom eigenvector of Phi(psi psi*).
  Mat adj_superop = phi.superop().adjoint();
  auto objective = [&](const Vec& psi, Vec* grad) {
    Mat out = phi.apply(psi * psi.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(out));
    double lam = es.eigenvalues()(0);
    if (grad) {
      Vec v = es.eigenvectors().col(0);
      Mat m = apply_superop(adj_superop, v * v.adjoint());
      *grad = m * psi;
    }
    return lam;
  };

  std::vector<double> results(static_cast<std::size_t>(restarts) + d);
  auto run_one = [&](std::size_t r) {
    RngStream rng(seed, 0x5791, r);
    Vec psi = r < static_cast<std::size_t>(d) ? Vec::Unit(d, static_cast<int>(r))
                                              : rng.unit_vector(d);
    double value = objective(psi, nullptr);
    double step = 0.5;
    for (int it = 0; it < 200; ++it) {
      Vec grad;
      objective(psi, &grad);
      // descend, project back to the sphere
      Vec cand = psi - step * grad;
      double n = cand.norm();
      if (n < 1e-12) break;
      cand /= n;
      double cand_val = objective(cand, nullptr);
      if (cand_val < value - 1e-14) {
        psi = cand;
        value = cand_val;
        step = std::min(1.0, step * 1.3);
      } else {
        step *= 0.5;
        if (step < 1e-10) break;
      }
    }
    results[r] = value;
  };
  par::run_indexed(results.size(), run_one);

  double a = results.empty() ? 0.0 : results[0];
  for (double v : results) a = std::min(a, v);
  a = std::max(a, 0.0);
  return {a > 1e-9, a};
}

bool is_bistochastic(const QuantumChannel& phi, double tol) {
  const int d = phi.dim();
  Mat out = phi.apply(Mat::Identity(d, d));
  return max_abs(out - Mat::Identity(d, d)) <= tol;
}

}  // namespace qdob
