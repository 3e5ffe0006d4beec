#pragma once

#include "fmsolve/masks.hpp"
#include "fmsolve/solver.hpp"
#include "fmsolve/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace fmsolve {

enum class Precision { F32, F64 };

inline const char* to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

/// Shared configuration of the benchmark harness commands.
struct BenchConfig {
  int k_start = 20;
  int k_stop = 300;
  int k_step = 10;
  int d = 0;  // descriptor channels; 0 means 2k
  int batch = 1;
  double lambda = 100.0;
  MaskKind mask = MaskKind::Commutativity;
  double sigma = 0.5;
  int repetitions = 10;
  int warmup = 3;
  std::uint64_t seed = 42;
  Precision precision = Precision::F64;
  std::size_t mem_cap_bytes = std::size_t(1) << 30;
  unsigned threads = 0;
  bool inject_fault = false;

  void validate() const;
  std::vector<int> resolutions() const;
  int channels_for(int k) const { return d > 0 ? d : 2 * k; }
};

/// Synthetic stand-in for one shape pair: Laplacian-like spectra plus
/// spectral descriptors.
template <typename Scalar>
struct SyntheticInstance {
  Spectrum<Scalar> spectrum1;
  Spectrum<Scalar> spectrum2;
  MatrixX<Scalar> a;
  MatrixX<Scalar> b;
};

/// Deterministic synthetic instance: eigenvalues are cumulative sums of
/// positive increments starting at 0 (first eigenvalue exactly zero, strictly
/// ascending); descriptors are standard normal scaled by 1/sqrt(d). With
/// d >= k the gram matrix A*A^T is nonsingular with probability 1.
template <typename Scalar>
SyntheticInstance<Scalar> generate_instance(int k, int d, std::uint64_t seed) {
  detail::require(k >= 1, "k must be at least 1");
  detail::require(d >= 1, "d must be at least 1");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(d)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> increment(0.05, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Draw in double regardless of Scalar so both precision modes see the same
  // instance.
  auto draw_spectrum = [&] {
    Vectord ev(k);
    ev[0] = 0.0;
    for (int i = 1; i < k; ++i) ev[i] = ev[i - 1] + increment(rng);
    return ev;
  };
  const Vectord ev1 = draw_spectrum();
  const Vectord ev2 = draw_spectrum();

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrixd a(k, d), b(k, d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = gauss(rng) * scale;
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) b(i, j) = gauss(rng) * scale;
  }

  SyntheticInstance<Scalar> inst;
  inst.spectrum1.eigenvalues = ev1.cast<Scalar>();
  inst.spectrum2.eigenvalues = ev2.cast<Scalar>();
  inst.a = a.cast<Scalar>();
  inst.b = b.cast<Scalar>();
  return inst;
}

/// Builds the regularized problem (mask + normal equations) for one
/// synthetic instance under the configured mask family.
template <typename Scalar>
RegularizedProblem<Scalar> problem_from_instance(const SyntheticInstance<Scalar>& inst,
                                                 MaskKind kind, Scalar sigma) {
  const MatrixX<Scalar> mask =
      build_mask<Scalar>(kind, inst.spectrum1.eigenvalues, inst.spectrum2.eigenvalues, sigma);
  return make_problem(inst.a, inst.b, mask);
}

struct VerifyRow {
  int k = 0;
  double diff_rowwise_batched = 0;
  double diff_rowwise_oracle = 0;  // NaN when the oracle was skipped
  double diff_batched_oracle = 0;  // NaN when the oracle was skipped
  bool oracle_ran = false;
  double max_residual = 0;
  double residual_bound = 0;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  double tolerance = 0;
  bool ok = false;
};

/// Cross-checks rowwise/batched (and the k^2 x k^2 oracle for k <= 32)
/// across the configured resolution range. Tolerance is 1e-8 in f64 mode and
/// 1e-3 in f32 mode.
VerifyReport verify_sweep(const BenchConfig& config);

struct BenchRow {
  int k = 0;
  std::string solver;
  double median_ms = 0;           // NaN when the row was skipped
  double max_abs_diff = 0;        // vs the rowwise reference; NaN when skipped
  std::size_t peak_extra_bytes = 0;
  double speedup_vs_rowwise = 0;  // NaN when skipped
  bool mem_cap_skipped = false;
};

/// Times both solvers across the resolution range: median wall time over the
/// configured repetitions after warmup. Instance generation, mask
/// construction and the shared gram products are excluded from the timed
/// region.
std::vector<BenchRow> bench_sweep(const BenchConfig& config);

struct MemoryRow {
  int k = 0;
  Precision precision = Precision::F64;
  std::size_t batched_extra_bytes = 0;
  std::size_t loop_working_set_bytes = 0;
  std::size_t ratio = 0;
};

/// Analytic transient-allocation sizes per resolution: batched extra is
/// b*k^3 elements, the loop working set is b*k^2, ratio is exactly k. Rows at
/// or under the memory cap are cross-checked against the sizes the solvers
/// actually report.
std::vector<MemoryRow> memory_sweep(const BenchConfig& config);

// CLI entry points; each prints its report/CSV to `out` and returns a
// process exit code.
int run_verify(const BenchConfig& config, std::ostream& out);
int run_bench(const BenchConfig& config, std::ostream& out);
int run_memory(const BenchConfig& config, std::ostream& out);
int run_metrics_sweep(double total, int steps, std::ostream& out);
int run_gradfeat_check(int channels, int vertices, std::uint64_t seed, std::ostream& out);

}  // namespace fmsolve
