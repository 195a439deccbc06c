// Timing comparison of the serial reference kernels against the OpenMP path
// on the two hot loops: multi-start contraction search and Monte Carlo
// Lyapunov sampling.

#include <cstdio>

#include <omp.h>

#include "qdob/contraction.hpp"
#include "qdob/parallel.hpp"
#include "qdob/random_cocycle.hpp"

using namespace qdob;

namespace {

double time_kappa(par::Policy policy, const Mat& superop, int restarts) {
  double t0 = omp_get_wtime();
  // route every run_indexed call through the requested policy
  int saved = par::thread_override();
  par::set_threads(policy == par::Policy::serial ? 1 : 0);
  volatile double sink = kappa_tr_multistart(superop, restarts, 1e-8, 0xBE7C).value;
  (void)sink;
  par::set_threads(saved);
  return omp_get_wtime() - t0;
}

double time_lyapunov(par::Policy policy, const EnvironmentBase& base, int n, int samples) {
  double t0 = omp_get_wtime();
  int saved = par::thread_override();
  par::set_threads(policy == par::Policy::serial ? 1 : 0);
  volatile double sink = lyapunov_estimate(base, n, samples, 0xBE7C).mean_log_kappa_over_n;
  (void)sink;
  par::set_threads(saved);
  return omp_get_wtime() - t0;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());

  QuantumChannel phi = random_channel(4, 3, 0x1234);
  double serial_kappa = time_kappa(par::Policy::serial, phi.superop(), 128);
  double parallel_kappa = time_kappa(par::Policy::openmp, phi.superop(), 128);
  std::printf("kappa multistart (d=4, 128 restarts): serial %.3fs  openmp %.3fs  speedup %.2fx\n",
              serial_kappa, parallel_kappa, serial_kappa / parallel_kappa);

  EnvironmentBase base = EnvironmentBase::iid_base(
      {ChannelLabel::amplitude_damping(0.3), ChannelLabel::amplitude_damping(0.6)}, {0.5, 0.5},
      0x1A2B);
  double serial_mc = time_lyapunov(par::Policy::serial, base, 40, 400);
  double parallel_mc = time_lyapunov(par::Policy::openmp, base, 40, 400);
  std::printf("lyapunov MC (n=40, 400 samples):      serial %.3fs  openmp %.3fs  speedup %.2fx\n",
              serial_mc, parallel_mc, serial_mc / parallel_mc);
  return 0;
}
