#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdob/matrix_kernel.hpp"
#include "qdob/rng.hpp"

namespace qdob {

// Column-stacking vectorization. vec(AXB*) = (conj(B) ⊗ A) vec(X), so the
// superoperator of X -> sum_i K_i X K_i* is sum_i conj(K_i) ⊗ K_i. Every
// module relies on this convention.
Vec vectorize(const Mat& x);
Mat unvectorize(const Vec& v, int d);

Mat superop_from_kraus(const std::vector<Mat>& kraus);
Mat apply_superop(const Mat& superop, const Mat& x);

// Normalized Choi matrix J(Phi) = (Phi ⊗ id)(|Omega><Omega|) with
// |Omega> = d^{-1/2} sum_i |i>|i>; tr J = 1 for trace-preserving maps.
Mat choi_from_superop(const Mat& superop, int d);
Mat superop_from_choi(const Mat& choi, int d);
std::vector<Mat> kraus_from_choi(const Mat& choi, int d, double tol = 1e-12);

inline constexpr double kTpTol = 1e-9;
inline constexpr double kCpTol = 1e-9;

// CPTP map in Kraus form with eagerly cached superoperator and normalized
// Choi representations. Immutable after construction.
class QuantumChannel {
 public:
  static QuantumChannel from_kraus(std::vector<Mat> kraus);
  // validates CPTP; the Kraus family is regenerated from the Choi
  // eigendecomposition, which keeps the rank at most d^2 for long products
  static QuantumChannel from_superop(Mat superop);
  static QuantumChannel identity(int d);

  int dim() const { return d_; }
  const std::vector<Mat>& kraus() const { return kraus_; }
  const Mat& superop() const { return superop_; }
  const Mat& choi() const { return choi_; }

  Mat apply(const Mat& x) const;

  double tp_defect() const;  // ||sum K*K - I||_inf

 private:
  QuantumChannel(int d, std::vector<Mat> kraus, Mat superop, Mat choi)
      : d_(d), kraus_(std::move(kraus)), superop_(std::move(superop)), choi_(std::move(choi)) {}

  int d_ = 0;
  std::vector<Mat> kraus_;
  Mat superop_;
  Mat choi_;
};

// result = a after b
QuantumChannel compose(const QuantumChannel& a, const QuantumChannel& b);

QuantumChannel replacement_channel(const DensityMatrix& tau);

struct ChannelLabel {
  enum class Kind {
    amplitude_damping,   // gamma
    dephasing_z,
    dephasing_x,
    depolarizing,        // p, d
    unitary,             // U
    werner_holevo_like,  // d
    replacement,         // tau
    haar_random,         // d, kraus_rank (stochastic family)
    haar_unitary,        // d (stochastic family)
    custom,              // explicit Kraus list
  };

  Kind kind = Kind::custom;
  double gamma = 0.0;
  double p = 0.0;
  int d = 2;
  int kraus_rank = 1;
  Mat unitary;
  Mat tau;
  std::vector<Mat> kraus;

  static ChannelLabel amplitude_damping(double gamma);
  static ChannelLabel dephasing_z();
  static ChannelLabel dephasing_x();
  static ChannelLabel depolarizing(double p, int d);
  static ChannelLabel unitary_conjugation(Mat u);
  static ChannelLabel werner_holevo_like(int d);
  static ChannelLabel replacement(Mat tau);
  static ChannelLabel haar_random_channel(int d, int kraus_rank);
  static ChannelLabel haar_unitary_channel(int d);
  static ChannelLabel custom_kraus(std::vector<Mat> kraus);

  // true when the label names a distribution rather than a single channel
  bool stochastic() const {
    return kind == Kind::haar_random || kind == Kind::haar_unitary;
  }
  int dimension() const;
  void validate() const;
};

// Deterministic labels only; throws on stochastic families.
QuantumChannel make_named(const ChannelLabel& label);

// Any label; stochastic families draw from the stream.
QuantumChannel realize(const ChannelLabel& label, RngStream& rng);

// Haar-like random channel: Kraus blocks of a haar_isometry(d*r, d).
QuantumChannel random_channel(int d, int kraus_rank, std::uint64_t seed);

// a = min over pure states of lambda_min(Phi(P)), estimated by multi-start
// projected gradient descent over unit vectors; flag = (a > 1e-9).
std::pair<bool, double> is_strictly_positive(const QuantumChannel& phi,
                                             int restarts = 64,
                                             std::uint64_t seed = 0xD0B0);

bool is_bistochastic(const QuantumChannel& phi, double tol = 1e-9);

}  // namespace qdob
