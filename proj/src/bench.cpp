#include "fmsolve/bench.hpp"

#include "fmsolve/csv.hpp"
#include "fmsolve/overlap.hpp"
#include "fmsolve/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace fmsolve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int significant_digits(Precision p) { return p == Precision::F64 ? 17 : 9; }

double verify_tolerance(Precision p) { return p == Precision::F64 ? 1e-8 : 1e-3; }

template <typename Scalar>
std::vector<RegularizedProblem<Scalar>> build_problems(const BenchConfig& config, int k) {
  const int d = config.channels_for(k);
  std::vector<RegularizedProblem<Scalar>> problems;
  problems.reserve(static_cast<std::size_t>(config.batch));
  for (int q = 0; q < config.batch; ++q) {
    const auto inst = generate_instance<Scalar>(k, d, config.seed + static_cast<std::uint64_t>(q));
    problems.push_back(
        problem_from_instance(inst, config.mask, static_cast<Scalar>(config.sigma)));
  }
  return problems;
}

template <typename Scalar>
SolverOptions<Scalar> solver_options(const BenchConfig& config, bool with_fault) {
  SolverOptions<Scalar> opts;
  opts.memory_cap_bytes = config.mem_cap_bytes;
  opts.threads = config.threads;
  opts.inject_fault = with_fault;
  return opts;
}

template <typename Scalar>
double max_abs_diff(const std::vector<MatrixX<Scalar>>& lhs,
                    const std::vector<MatrixX<Scalar>>& rhs) {
  double diff = 0;
  for (std::size_t q = 0; q < lhs.size(); ++q) {
    diff = std::max(diff, static_cast<double>((lhs[q] - rhs[q]).cwiseAbs().maxCoeff()));
  }
  return diff;
}

template <typename Scalar>
VerifyReport verify_impl(const BenchConfig& config) {
  VerifyReport report;
  report.tolerance = verify_tolerance(config.precision);
  report.ok = true;
  const Scalar lambda = static_cast<Scalar>(config.lambda);

  for (int k : config.resolutions()) {
    try {
      const auto problems = build_problems<Scalar>(config, k);
      const std::span<const RegularizedProblem<Scalar>> view(problems.data(), problems.size());
      const auto rowwise = solve_rowwise_many(view, lambda, solver_options<Scalar>(config, false));
      const auto batched = solve_batched_many(view, lambda,
                                              solver_options<Scalar>(config, config.inject_fault));

      VerifyRow row;
      row.k = k;
      row.diff_rowwise_batched = max_abs_diff(rowwise.maps, batched.maps);
      row.diff_rowwise_oracle = kNaN;
      row.diff_batched_oracle = kNaN;
      if (k <= 32) {
        std::vector<MatrixX<Scalar>> oracle_maps;
        oracle_maps.reserve(problems.size());
        for (const auto& p : problems) oracle_maps.push_back(solve_full_oracle(p, lambda));
        row.diff_rowwise_oracle = max_abs_diff(rowwise.maps, oracle_maps);
        row.diff_batched_oracle = max_abs_diff(batched.maps, oracle_maps);
        row.oracle_ran = true;
      }

      double rhs_norm = 0;
      for (const auto& p : problems) {
        rhs_norm = std::max(rhs_norm, static_cast<double>(p.neq.rhs.norm()));
      }
      row.max_residual = std::max(static_cast<double>(rowwise.max_residual_norm),
                                  static_cast<double>(batched.max_residual_norm));
      row.residual_bound = report.tolerance * (1.0 + rhs_norm);

      double worst = row.diff_rowwise_batched;
      if (row.oracle_ran) {
        worst = std::max({worst, row.diff_rowwise_oracle, row.diff_batched_oracle});
      }
      if (!(worst <= report.tolerance)) report.ok = false;
      report.rows.push_back(row);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "k=" << k << " seed=" << config.seed << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return report;
}

template <typename Scalar>
std::vector<BenchRow> bench_impl(const BenchConfig& config) {
  std::vector<BenchRow> rows;
  const Scalar lambda = static_cast<Scalar>(config.lambda);
  BatchedWorkspace<Scalar> workspace;

  for (int k : config.resolutions()) {
    const auto problems = build_problems<Scalar>(config, k);
    const std::span<const RegularizedProblem<Scalar>> view(problems.data(), problems.size());
    const auto opts = solver_options<Scalar>(config, false);

    const std::size_t batched_bytes = static_cast<std::size_t>(config.batch) *
                                      static_cast<std::size_t>(k) * k * k * sizeof(Scalar);
    const bool batched_fits = batched_bytes <= config.mem_cap_bytes;

    std::vector<double> rowwise_ms, batched_ms;
    BatchSolveReport<Scalar> rowwise_last, batched_last;
    for (int rep = 0; rep < config.warmup + config.repetitions; ++rep) {
      rowwise_last = solve_rowwise_many(view, lambda, opts);
      if (rep >= config.warmup) {
        rowwise_ms.push_back(rowwise_last.wall_time.count() * 1e3);
      }
    }
    if (batched_fits) {
      for (int rep = 0; rep < config.warmup + config.repetitions; ++rep) {
        batched_last = solve_batched_many(view, lambda, opts, &workspace);
        if (rep >= config.warmup) {
          batched_ms.push_back(batched_last.wall_time.count() * 1e3);
        }
      }
    }

    BenchRow rowwise_row;
    rowwise_row.k = k;
    rowwise_row.solver = "rowwise";
    rowwise_row.median_ms = median(rowwise_ms);
    rowwise_row.max_abs_diff = 0.0;
    rowwise_row.peak_extra_bytes = rowwise_last.peak_extra_bytes;
    rowwise_row.speedup_vs_rowwise = 1.0;
    rows.push_back(rowwise_row);

    BenchRow batched_row;
    batched_row.k = k;
    batched_row.solver = "batched";
    batched_row.peak_extra_bytes = batched_bytes;
    if (batched_fits) {
      batched_row.median_ms = median(batched_ms);
      batched_row.max_abs_diff = max_abs_diff(rowwise_last.maps, batched_last.maps);
      batched_row.speedup_vs_rowwise = rowwise_row.median_ms / batched_row.median_ms;
    } else {
      batched_row.median_ms = kNaN;
      batched_row.max_abs_diff = kNaN;
      batched_row.speedup_vs_rowwise = kNaN;
      batched_row.mem_cap_skipped = true;
    }
    rows.push_back(batched_row);
  }
  return rows;
}

template <typename Scalar>
std::vector<MemoryRow> memory_impl(const BenchConfig& config) {
  std::vector<MemoryRow> rows;
  const Scalar lambda = static_cast<Scalar>(config.lambda);

  for (int k : config.resolutions()) {
    MemoryRow row;
    row.k = k;
    row.precision = config.precision;
    row.batched_extra_bytes = static_cast<std::size_t>(config.batch) *
                              static_cast<std::size_t>(k) * k * k * sizeof(Scalar);
    row.loop_working_set_bytes =
        static_cast<std::size_t>(config.batch) * static_cast<std::size_t>(k) * k * sizeof(Scalar);
    row.ratio = static_cast<std::size_t>(k);

    // Cross-check the analytic model against what the solvers report.
    if (row.batched_extra_bytes <= config.mem_cap_bytes) {
      const auto problems = build_problems<Scalar>(config, k);
      const std::span<const RegularizedProblem<Scalar>> view(problems.data(), problems.size());
      const auto opts = solver_options<Scalar>(config, false);
      const auto rowwise = solve_rowwise_many(view, lambda, opts);
      const auto batched = solve_batched_many(view, lambda, opts);
      if (rowwise.peak_extra_bytes != row.loop_working_set_bytes ||
          batched.peak_extra_bytes != row.batched_extra_bytes) {
        std::ostringstream msg;
        msg << "memory model mismatch at k=" << k << ": solver reported loop="
            << rowwise.peak_extra_bytes << " batched=" << batched.peak_extra_bytes
            << ", model says loop=" << row.loop_working_set_bytes
            << " batched=" << row.batched_extra_bytes;
        throw std::runtime_error(msg.str());
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string describe(const BenchConfig& config) {
  std::ostringstream out;
  out << "k=" << config.k_start << ".." << config.k_stop << " step " << config.k_step << ", d=";
  if (config.d > 0) {
    out << config.d;
  } else {
    out << "2k";
  }
  out << ", batch=" << config.batch << ", lambda=" << config.lambda
      << ", mask=" << to_string(config.mask);
  if (config.mask == MaskKind::Resolvent) out << ", sigma=" << config.sigma;
  out << ", precision=" << to_string(config.precision) << ", seed=" << config.seed;
  return out.str();
}

unsigned effective_threads(const BenchConfig& config) {
  if (config.threads != 0) return config.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

void BenchConfig::validate() const {
  detail::require(k_start >= 1, "k-start must be at least 1");
  detail::require(k_start <= k_stop, "k-start must not exceed k-stop");
  detail::require(k_step >= 1, "k-step must be at least 1");
  detail::require(d >= 0, "d must be non-negative (0 means 2k)");
  detail::require(batch >= 1, "batch must be at least 1");
  detail::require(lambda >= 0.0, "lambda must be non-negative");
  detail::require(sigma > 0.0, "sigma must be positive");
  detail::require(repetitions >= 1, "repetitions must be at least 1");
  detail::require(warmup >= 0, "warmup must be non-negative");
}

std::vector<int> BenchConfig::resolutions() const {
  std::vector<int> ks;
  for (int k = k_start; k <= k_stop; k += k_step) ks.push_back(k);
  return ks;
}

VerifyReport verify_sweep(const BenchConfig& config) {
  config.validate();
  return config.precision == Precision::F64 ? verify_impl<double>(config)
                                            : verify_impl<float>(config);
}

std::vector<BenchRow> bench_sweep(const BenchConfig& config) {
  config.validate();
  return config.precision == Precision::F64 ? bench_impl<double>(config) : bench_impl<float>(config);
}

std::vector<MemoryRow> memory_sweep(const BenchConfig& config) {
  config.validate();
  return config.precision == Precision::F64 ? memory_impl<double>(config)
                                            : memory_impl<float>(config);
}

int run_verify(const BenchConfig& config, std::ostream& out) {
  out << "verify: rowwise vs batched";
  if (config.k_start <= 32) out << " vs full oracle (k <= 32)";
  out << "\n  " << describe(config) << "\n";
  try {
    const VerifyReport report = verify_sweep(config);
    for (const auto& row : report.rows) {
      out << "  k=" << row.k;
      out << "  rowwise~batched=" << format_value(row.diff_rowwise_batched, 3);
      if (row.oracle_ran) {
        out << "  rowwise~oracle=" << format_value(row.diff_rowwise_oracle, 3)
            << "  batched~oracle=" << format_value(row.diff_batched_oracle, 3);
      }
      out << "  residual=" << format_value(row.max_residual, 3) << " (bound "
          << format_value(row.residual_bound, 3) << ")\n";
    }
    if (report.ok) {
      out << "verify: PASS (all pairwise diffs <= " << format_value(report.tolerance, 3) << ")\n";
      return 0;
    }
    out << "verify: FAIL (a pairwise diff exceeded " << format_value(report.tolerance, 3) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    out << "verify: ERROR at " << e.what() << "\n";
    return 2;
  }
}

int run_bench(const BenchConfig& config, std::ostream& out) {
  config.validate();
  const int digits = significant_digits(config.precision);
  out << "# functional-map solver benchmark\n";
  out << "# config: " << describe(config) << "\n";
  out << "# timing: steady_clock; median of " << config.repetitions << " repetitions after "
      << config.warmup << " warmup runs per solver\n";
  out << "# timed region: per-system assembly + factorization + solve; instance generation, "
         "mask construction and the shared gram products are excluded\n";
  out << "# batched dispatch: " << effective_threads(config)
      << " worker thread(s); lhs arena reused across repetitions; results are bitwise "
         "independent of the thread count\n";
  out << "# reference points (reported on i9-9900K + RTX 2080 Ti): k=200 rowwise=233.6 ms, "
         "batched=7.1 ms, speedup=33x\n";
  out << "k,solver,median_ms,max_abs_diff_vs_rowwise,peak_extra_bytes,speedup_vs_rowwise,flag\n";
  try {
    for (const auto& row : bench_sweep(config)) {
      out << row.k << ',' << row.solver << ',';
      if (row.mem_cap_skipped) {
        out << ",,"
            << row.peak_extra_bytes << ",,mem-cap-skipped\n";
      } else {
        out << format_value(row.median_ms, digits) << ','
            << format_value(row.max_abs_diff, digits) << ',' << row.peak_extra_bytes << ','
            << format_value(row.speedup_vs_rowwise, digits) << ",ok\n";
      }
    }
  } catch (const std::exception& e) {
    out << "# bench: ERROR " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run_memory(const BenchConfig& config, std::ostream& out) {
  config.validate();
  out << "# transient allocation model: batched extra = batch*k^3*elemsize, loop working set = "
         "batch*k^2*elemsize, ratio = k\n";
  out << "# config: " << describe(config) << "\n";
  out << "# rows at or under the memory cap (" << config.mem_cap_bytes
      << " bytes) are cross-checked against solver-reported peak_extra_bytes\n";
  out << "k,precision,batched_extra_bytes,loop_working_set_bytes,ratio\n";
  try {
    for (const auto& row : memory_sweep(config)) {
      out << row.k << ',' << to_string(row.precision) << ',' << row.batched_extra_bytes << ','
          << row.loop_working_set_bytes << ',' << row.ratio << "\n";
    }
  } catch (const std::exception& e) {
    out << "# memory: ERROR " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run_metrics_sweep(double total, int steps, std::ostream& out) {
  const std::vector<PredictorSpec> predictors = {
      {PredictorKind::Zeros, 0.5}, {PredictorKind::Ones, 0.5}, {PredictorKind::Random, 0.5}};
  out << "r,predictor,metric,value,degenerate_flag\n";
  for (const auto& row : sweep_ratio(predictors, total, steps)) {
    out << format_value(row.ratio, 17) << ',' << to_string(row.predictor) << ','
        << to_string(row.metric) << ',' << format_value(row.value, 17) << ','
        << (row.degenerate ? 1 : 0) << "\n";
  }
  return 0;
}

namespace {

// Independent per-channel evaluation of the 2x2 block form; the CLI check
// compares the vectorized implementations against it.
Matrixd block_form_reference(GradientVariant variant, const GradientTransform& w,
                             const TangentField& z) {
  const Eigen::Index vertices = z.vertices();
  const Eigen::Index channels = z.channels();
  Matrixd out(vertices, channels);
  for (Eigen::Index v = 0; v < vertices; ++v) {
    for (Eigen::Index i = 0; i < channels; ++i) {
      Eigen::Vector2d vi(z.x(v, i), z.y(v, i));
      double sum = 0;
      for (Eigen::Index j = 0; j < channels; ++j) {
        Eigen::Vector2d vj(z.x(v, j), z.y(v, j));
        sum += vi.dot(block_matrix(variant, w.a_re(i, j), w.a_im(i, j)) * vj);
      }
      out(v, i) = sum;
    }
  }
  return out;
}

struct GradFeatDraw {
  GradientTransform w;
  TangentField z;
};

GradFeatDraw draw_gradfeat(std::mt19937_64& rng, int channels, int vertices) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  GradFeatDraw draw;
  draw.w.a_re = Matrixd::NullaryExpr(channels, channels, [&](Eigen::Index, Eigen::Index) {
    return gauss(rng);
  });
  draw.w.a_im = Matrixd::NullaryExpr(channels, channels, [&](Eigen::Index, Eigen::Index) {
    return gauss(rng);
  });
  draw.z.x = Matrixd::NullaryExpr(vertices, channels, [&](Eigen::Index, Eigen::Index) {
    return gauss(rng);
  });
  draw.z.y = Matrixd::NullaryExpr(vertices, channels, [&](Eigen::Index, Eigen::Index) {
    return gauss(rng);
  });
  return draw;
}

}  // namespace

int run_gradfeat_check(int channels, int vertices, std::uint64_t seed, std::ostream& out) {
  detail::require(channels >= 1 && vertices >= 1, "channels and vertices must be at least 1");
  std::mt19937_64 rng(seed);
  bool ok = true;
  out << "gradient-feature checks (D=" << channels << ", V=" << vertices << ", seed=" << seed
      << ")\n";

  {
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const auto draw = draw_gradfeat(rng, channels, vertices);
      for (GradientVariant variant : {GradientVariant::A, GradientVariant::B}) {
        const Matrixd fast = apply_gradient_features(variant, draw.w, draw.z);
        const Matrixd ref = block_form_reference(variant, draw.w, draw.z);
        worst = std::max(worst, (fast - ref).cwiseAbs().maxCoeff());
      }
    }
    const bool pass = worst <= 1e-12;
    ok = ok && pass;
    out << "  block-form equivalence (100 draws, both variants)  max|delta|="
        << format_value(worst, 3) << "  " << (pass ? "PASS" : "FAIL") << "\n";
  }

  {
    const auto draw = draw_gradfeat(rng, channels, vertices);
    const Matrixd base = apply_variant_a(draw.w, draw.z);
    double worst = 0;
    for (int t = 1; t <= 8; ++t) {
      const double theta = t * std::atan(1.0);  // t * pi/4
      const auto rotated = frame_rotation_diagnostic(draw.w, draw.z, theta);
      worst = std::max(worst, (rotated.variant_a - base).cwiseAbs().maxCoeff());
    }
    const bool pass = worst <= 1e-10;
    ok = ok && pass;
    out << "  variant-A invariance under global frame rotation (8 angles)  max|delta|="
        << format_value(worst, 3) << "  " << (pass ? "PASS" : "FAIL") << "\n";

    std::uniform_real_distribution<double> angle(0.0, 8.0 * std::atan(1.0));
    Vectord per_vertex(vertices);
    for (int v = 0; v < vertices; ++v) per_vertex[v] = angle(rng);
    const auto rotated = frame_rotation_diagnostic(draw.w, draw.z, per_vertex);
    const double pv_worst = (rotated.variant_a - base).cwiseAbs().maxCoeff();
    const bool pv_pass = pv_worst <= 1e-10;
    ok = ok && pv_pass;
    out << "  variant-A invariance under per-vertex frame rotation  max|delta|="
        << format_value(pv_worst, 3) << "  " << (pv_pass ? "PASS" : "FAIL") << "\n";
  }

  {
    const double theta = std::atan(1.0) * 2.0 / 3.0;  // 30 degrees
    int moved = 0;
    for (int t = 0; t < 100; ++t) {
      const auto draw = draw_gradfeat(rng, channels, vertices);
      const Matrixd base = apply_variant_b(draw.w, draw.z);
      const auto rotated = frame_rotation_diagnostic(draw.w, draw.z, theta);
      if ((rotated.variant_b - base).cwiseAbs().maxCoeff() > 1e-6) ++moved;
    }
    const bool pass = moved >= 99;
    ok = ok && pass;
    out << "  variant-B sensitivity to frame rotation (theta=30deg)  " << moved
        << "/100 draws moved > 1e-6  " << (pass ? "PASS" : "FAIL") << "\n";
  }

  {
    auto draw = draw_gradfeat(rng, channels, vertices);
    draw.w.a_im.setZero();
    draw.z.y.setZero();
    const double delta =
        (apply_variant_a(draw.w, draw.z) - apply_variant_b(draw.w, draw.z)).cwiseAbs().maxCoeff();
    const bool pass = delta <= 1e-12;
    ok = ok && pass;
    out << "  coincidence set (a_im=0, y=0)  max|delta|=" << format_value(delta, 3) << "  "
        << (pass ? "PASS" : "FAIL") << "\n";
  }

  out << "gradfeat-check: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace fmsolve
