// Timing comparison between the OpenMP compute kernels and the plain serial
// reference implementations the tests use as oracles. Run manually:
//   bench_kernels [reps]
// Each row prints both times, the speedup, and the worst element difference
// so a reported speedup can never hide a divergence.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nameres/kernels.hpp"
#include "nameres/mat.hpp"
#include "nameres/rng.hpp"
#include "ref/reference.hpp"

using namespace nameres;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

Mat<double> random_unit_rows(int rows, int cols, Rng& rng) {
  Mat<double> m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    double norm2 = 0.0;
    double* r = m.row(i);
    for (int j = 0; j < cols; ++j) {
      r[j] = rng.uniform(-1.0, 1.0);
      norm2 += r[j] * r[j];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < cols; ++j) r[j] *= inv;
  }
  return m;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  double max_diff;
};

void print_row(const Row& r) {
  std::printf("%-24s %10.2f %12.2f %9.2fx %12.3g\n", r.name, r.serial_ms, r.parallel_ms,
              r.serial_ms / r.parallel_ms, r.max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 50;
  const int rows = 60, cols = 400, dim = 100;
  Rng rng(7);

  const Mat<double> A = random_unit_rows(rows, dim, rng);
  const Mat<double> B = random_unit_rows(cols, dim, rng);
  const KernelBank bank = KernelBank::standard();

#ifdef _OPENMP
  std::printf("threads: %d, reps: %d, similarity %dx%d over dim %d\n", omp_get_max_threads(),
              reps, rows, cols, dim);
#else
  std::printf("threads: 1 (no OpenMP), reps: %d\n", reps);
#endif
  std::printf("%-24s %10s %12s %9s %12s\n", "kernel", "serial ms", "parallel ms", "speedup",
              "max |diff|");

  {
    Mat<double> Sp;
    double t0 = now_ms();
    for (int r = 0; r < reps; ++r) Sp = similarity_from_units(A, B);
    const double par = now_ms() - t0;
    Mat<double> Ss;
    t0 = now_ms();
    for (int r = 0; r < reps; ++r) Ss = ref::cosine_scalar(A, B);
    const double ser = now_ms() - t0;
    double diff = 0.0;
    for (size_t i = 0; i < Sp.a.size(); ++i) diff = std::max(diff, std::abs(Sp.a[i] - Ss.a[i]));
    print_row({"similarity", ser, par, diff});
  }

  {
    const Mat<double> S = similarity_from_units(A, B);
    std::vector<double> pp;
    double t0 = now_ms();
    for (int r = 0; r < reps; ++r) pp = kernel_pool(S, bank);
    const double par = now_ms() - t0;
    std::vector<double> ps;
    t0 = now_ms();
    for (int r = 0; r < reps; ++r) ps = ref::kernel_pool_scalar(S, bank.mu, bank.sigma, {}, {}, kPoolEpsilon);
    const double ser = now_ms() - t0;
    double diff = 0.0;
    for (size_t k = 0; k < pp.size(); ++k) diff = std::max(diff, std::abs(pp[k] - ps[k]));
    print_row({"kernel pooling", ser, par, diff});
  }

  return 0;
}
