#pragma once

#include "fmsolve/types.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <chrono>
#include <optional>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

namespace fmsolve {

template <typename Scalar>
constexpr Scalar default_rcond_threshold() {
  // Below these the factorization is reported singular rather than returning
  // a solution with no trustworthy digits.
  if constexpr (sizeof(Scalar) == sizeof(double)) {
    return Scalar(1e-14);
  } else {
    return Scalar(1e-7);
  }
}

template <typename Scalar>
struct SolverOptions {
  // Opt-in Tikhonov term: adds ridge * I to every row system. Off by default;
  // a singular system is a hard error, not something to paper over silently.
  Scalar ridge = Scalar(0);

  // Reciprocal-condition estimate below which a row system is reported
  // singular.
  Scalar rcond_threshold = default_rcond_threshold<Scalar>();

  // Batched path only: refuse to materialize the [b,k,k,k] tensor past this
  // many bytes. Checked before allocating.
  std::optional<std::size_t> memory_cap_bytes;

  // Batched dispatch width. 0 = one worker per hardware thread. Results are
  // bitwise independent of this setting: workers own disjoint systems.
  unsigned threads = 0;

  // Test hook for non-vacuity checks: flips the sign of one assembled entry
  // in the batched tensor so downstream equivalence checks must fail.
  bool inject_fault = false;
};

/// Result of one functional-map solve.
template <typename Scalar>
struct SolveReport {
  MatrixX<Scalar> map;                    // C, k x k
  Scalar residual_norm = Scalar(0);       // ||C*AA^T + lambda*(M .* C) - BA^T||_F
  std::chrono::duration<double> wall_time{0};
  std::size_t peak_extra_bytes = 0;       // transient working memory of the solve path
};

/// Result of solving a batch of shape pairs in one call.
template <typename Scalar>
struct BatchSolveReport {
  std::vector<MatrixX<Scalar>> maps;
  Scalar max_residual_norm = Scalar(0);
  std::chrono::duration<double> wall_time{0};
  std::size_t peak_extra_bytes = 0;
};

/// Shared precomputation for all solver routes: gram = A*A^T, rhs = B*A^T.
template <typename Scalar>
struct NormalEquations {
  MatrixX<Scalar> gram;
  MatrixX<Scalar> rhs;
};

/// One shape pair, reduced to the data every solver route consumes.
template <typename Scalar>
struct RegularizedProblem {
  NormalEquations<Scalar> neq;
  MatrixX<Scalar> mask;

  Eigen::Index resolution() const { return mask.rows(); }
};

/// Reusable arena for the batched path. Capacity grows monotonically and is
/// kept across calls, playing the role a caching allocator plays in tensor
/// frameworks.
template <typename Scalar>
struct BatchedWorkspace {
  std::vector<Scalar> lhs;
  std::vector<Scalar> rhs;
};

template <typename Scalar>
NormalEquations<Scalar> normal_equations(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require(a.rows() >= 1 && a.cols() >= 1, "descriptor A must be non-empty");
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(),
                  "descriptors A and B must have identical shape");
  detail::require_finite(a, "A");
  detail::require_finite(b, "B");
  return {MatrixX<Scalar>(a * a.transpose()), MatrixX<Scalar>(b * a.transpose())};
}

template <typename Scalar>
RegularizedProblem<Scalar> make_problem(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                        const MatrixX<Scalar>& mask) {
  auto neq = normal_equations(a, b);
  detail::require(mask.rows() == mask.cols(), "penalty mask must be square");
  detail::require(mask.rows() == a.rows(), "penalty mask size must match descriptor row count");
  detail::require_finite(mask, "mask");
  detail::require((mask.array() >= Scalar(0)).all(), "penalty mask entries must be non-negative");
  return {std::move(neq), mask};
}

/// Frobenius norm of the stationarity residual C*AA^T + lambda*(M .* C) - BA^T.
/// Any solver output keeps this below 1e-8 * (1 + ||BA^T||_F) in double
/// precision.
template <typename Scalar>
Scalar check_stationarity(const MatrixX<Scalar>& c, const MatrixX<Scalar>& a,
                          const MatrixX<Scalar>& b, const MatrixX<Scalar>& mask, Scalar lambda) {
  auto problem = make_problem(a, b, mask);
  detail::require(lambda >= Scalar(0), "lambda must be non-negative");
  detail::require(c.rows() == mask.rows() && c.cols() == mask.cols(),
                  "map C must match the penalty mask shape");
  return (c * problem.neq.gram + lambda * (mask.array() * c.array()).matrix() - problem.neq.rhs)
      .norm();
}

namespace detail {

template <typename Scalar>
void validate_problem(const RegularizedProblem<Scalar>& p, Scalar lambda) {
  const Eigen::Index k = p.mask.rows();
  require(k >= 1, "problem is empty");
  require(p.mask.cols() == k, "penalty mask must be square");
  require(p.neq.gram.rows() == k && p.neq.gram.cols() == k,
          "gram matrix must be k x k");
  require(p.neq.rhs.rows() == k && p.neq.rhs.cols() == k, "rhs matrix must be k x k");
  require(lambda >= Scalar(0), "lambda must be non-negative");
  require((p.mask.array() >= Scalar(0)).all(), "penalty mask entries must be non-negative");
  require_finite(p.neq.gram, "gram");
  require_finite(p.neq.rhs, "rhs");
  require_finite(p.mask, "mask");
}

// Factors `lhs` in place with partially pivoted LU and overwrites `rhs` with
// the solution. Both solver routes funnel through this, so their outputs are
// bitwise identical. `system` is the global system index used in error
// reports.
//
// Singularity is flagged three ways: an exact zero pivot (the rcond
// estimator returns garbage there), a reciprocal-condition estimate below
// the threshold, or a non-finite solution.
template <typename Scalar>
void factor_solve_inplace(Eigen::Ref<MatrixX<Scalar>> lhs, Eigen::Ref<VectorX<Scalar>> rhs,
                          Eigen::Index system, Scalar rcond_threshold) {
  Eigen::PartialPivLU<Eigen::Ref<MatrixX<Scalar>>> lu(lhs);
  const auto fail = [&](const char* why, Scalar value) {
    std::ostringstream msg;
    msg << "row system " << system << " is numerically singular (" << why << " " << value << ")";
    throw SingularSystemError(system, msg.str());
  };
  if ((lu.matrixLU().diagonal().array() == Scalar(0)).any()) fail("zero pivot,", Scalar(0));
  const Scalar rcond = lu.rcond();
  if (!(rcond >= rcond_threshold)) fail("rcond estimate", rcond);  // also catches NaN
  VectorX<Scalar> x = lu.solve(rhs);
  if (!x.allFinite()) fail("non-finite solution, rcond estimate", rcond);
  rhs = x;
}

}  // namespace detail

/// Row-wise solver: iterates the k independent k x k systems
/// (AA^T + lambda*diag(m_i)) c_i = (BA^T)_i one at a time, reusing a single
/// embedded-diagonal left-hand side. Working memory is b * k^2 elements.
template <typename Scalar>
BatchSolveReport<Scalar> solve_rowwise_many(std::span<const RegularizedProblem<Scalar>> problems,
                                            Scalar lambda, const SolverOptions<Scalar>& opts = {}) {
  detail::require(!problems.empty(), "no problems to solve");
  const Eigen::Index k = problems.front().resolution();
  for (const auto& p : problems) {
    detail::validate_problem(p, lambda);
    detail::require(p.resolution() == k, "all problems in a batch must share the spectral resolution");
  }
  const std::size_t b = problems.size();

  BatchSolveReport<Scalar> report;
  report.maps.reserve(b);
  for (std::size_t q = 0; q < b; ++q) report.maps.emplace_back(k, k);
  report.peak_extra_bytes = b * static_cast<std::size_t>(k) * k * sizeof(Scalar);

  const auto t0 = std::chrono::steady_clock::now();
  MatrixX<Scalar> lhs(k, k);
  VectorX<Scalar> rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (std::size_t q = 0; q < b; ++q) {
      const auto& p = problems[q];
      lhs = p.neq.gram;
      lhs.diagonal() += lambda * p.mask.row(i).transpose();
      if (opts.ridge != Scalar(0)) lhs.diagonal().array() += opts.ridge;
      rhs = p.neq.rhs.row(i).transpose();
      detail::factor_solve_inplace<Scalar>(lhs, rhs, static_cast<Eigen::Index>(q) * k + i,
                                           opts.rcond_threshold);
      report.maps[q].row(i) = rhs.transpose();
    }
  }
  report.wall_time = std::chrono::steady_clock::now() - t0;

  for (std::size_t q = 0; q < b; ++q) {
    const auto& p = problems[q];
    const Scalar res = (report.maps[q] * p.neq.gram +
                        lambda * (p.mask.array() * report.maps[q].array()).matrix() - p.neq.rhs)
                           .norm();
    report.max_residual_norm = std::max(report.max_residual_norm, res);
  }
  return report;
}

/// Batched solver: materializes the diagonal-embedded left-hand-side tensor
/// of b*k^3 elements in one contiguous arena and dispatches a single batched
/// factor-and-solve over all b*k systems. Mathematically identical to the
/// row-wise route (same per-system factorization); the dispatch parallelizes
/// across systems when more than one hardware thread is available.
template <typename Scalar>
BatchSolveReport<Scalar> solve_batched_many(std::span<const RegularizedProblem<Scalar>> problems,
                                            Scalar lambda, const SolverOptions<Scalar>& opts = {},
                                            BatchedWorkspace<Scalar>* workspace = nullptr) {
  detail::require(!problems.empty(), "no problems to solve");
  const Eigen::Index k = problems.front().resolution();
  for (const auto& p : problems) {
    detail::validate_problem(p, lambda);
    detail::require(p.resolution() == k, "all problems in a batch must share the spectral resolution");
  }
  const std::size_t b = problems.size();
  const std::size_t nsys = b * static_cast<std::size_t>(k);
  const std::size_t lhs_elems = nsys * static_cast<std::size_t>(k) * k;
  const std::size_t lhs_bytes = lhs_elems * sizeof(Scalar);
  if (opts.memory_cap_bytes && lhs_bytes > *opts.memory_cap_bytes) {
    std::ostringstream msg;
    msg << "batched left-hand-side tensor needs " << lhs_bytes << " bytes, above the cap of "
        << *opts.memory_cap_bytes;
    throw MemoryCapExceeded(lhs_bytes, *opts.memory_cap_bytes, msg.str());
  }

  BatchSolveReport<Scalar> report;
  report.maps.reserve(b);
  for (std::size_t q = 0; q < b; ++q) report.maps.emplace_back(k, k);
  report.peak_extra_bytes = lhs_bytes;

  const auto t0 = std::chrono::steady_clock::now();

  BatchedWorkspace<Scalar> local;
  BatchedWorkspace<Scalar>& ws = workspace ? *workspace : local;
  ws.lhs.resize(lhs_elems);
  ws.rhs.resize(nsys * static_cast<std::size_t>(k));

  // Each worker owns a contiguous range of systems: assemble the block,
  // factor it in place, write the solution. Disjoint memory, no locks.
  auto process_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const std::size_t q = s / static_cast<std::size_t>(k);
      const Eigen::Index i = static_cast<Eigen::Index>(s % static_cast<std::size_t>(k));
      const auto& p = problems[q];
      Eigen::Map<MatrixX<Scalar>> block(ws.lhs.data() + s * static_cast<std::size_t>(k) * k, k, k);
      block = p.neq.gram;
      block.diagonal() += lambda * p.mask.row(i).transpose();
      if (opts.ridge != Scalar(0)) block.diagonal().array() += opts.ridge;
      if (opts.inject_fault && s == 0) {
        Eigen::Index worst;
        block.row(0).cwiseAbs().maxCoeff(&worst);
        block(0, worst) = -block(0, worst);
      }
      Eigen::Map<VectorX<Scalar>> rhs(ws.rhs.data() + s * static_cast<std::size_t>(k), k);
      rhs = p.neq.rhs.row(i).transpose();
      detail::factor_solve_inplace<Scalar>(block, rhs, static_cast<Eigen::Index>(s),
                                           opts.rcond_threshold);
      report.maps[q].row(i) = rhs.transpose();
    }
  };

  unsigned threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, nsys));

  if (threads <= 1) {
    process_range(0, nsys);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    const std::size_t chunk = (nsys + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = std::min<std::size_t>(t * chunk, nsys);
      const std::size_t hi = std::min<std::size_t>(lo + chunk, nsys);
      pool.emplace_back([&, t, lo, hi] {
        try {
          process_range(lo, hi);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    // chunks cover ascending system ranges, so the first recorded error is
    // the lowest failing system index
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  report.wall_time = std::chrono::steady_clock::now() - t0;

  for (std::size_t q = 0; q < b; ++q) {
    const auto& p = problems[q];
    const Scalar res = (report.maps[q] * p.neq.gram +
                        lambda * (p.mask.array() * report.maps[q].array()).matrix() - p.neq.rhs)
                           .norm();
    report.max_residual_norm = std::max(report.max_residual_norm, res);
  }
  return report;
}

namespace detail {

template <typename Scalar>
SolveReport<Scalar> to_single(BatchSolveReport<Scalar>&& batch) {
  SolveReport<Scalar> report;
  report.map = std::move(batch.maps.front());
  report.residual_norm = batch.max_residual_norm;
  report.wall_time = batch.wall_time;
  report.peak_extra_bytes = batch.peak_extra_bytes;
  return report;
}

}  // namespace detail

template <typename Scalar>
SolveReport<Scalar> solve_rowwise(const RegularizedProblem<Scalar>& problem, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {}) {
  return detail::to_single(
      solve_rowwise_many(std::span<const RegularizedProblem<Scalar>>(&problem, 1), lambda, opts));
}

template <typename Scalar>
SolveReport<Scalar> solve_rowwise(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                  const MatrixX<Scalar>& mask, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {}) {
  return solve_rowwise(make_problem(a, b, mask), lambda, opts);
}

template <typename Scalar>
SolveReport<Scalar> solve_batched(const RegularizedProblem<Scalar>& problem, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {},
                                  BatchedWorkspace<Scalar>* workspace = nullptr) {
  return detail::to_single(solve_batched_many(
      std::span<const RegularizedProblem<Scalar>>(&problem, 1), lambda, opts, workspace));
}

template <typename Scalar>
SolveReport<Scalar> solve_batched(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                  const MatrixX<Scalar>& mask, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {},
                                  BatchedWorkspace<Scalar>* workspace = nullptr) {
  return solve_batched(make_problem(a, b, mask), lambda, opts, workspace);
}

inline constexpr Eigen::Index kFullOracleMaxResolution = 64;

/// Correctness oracle: assembles the full k^2 x k^2 linear system for vec(C)
/// from the normal equations (gram Kronecker identity plus the diagonal
/// penalty) and hands it to a generic sparse direct solver. Deliberately a
/// separate route from the per-row factorizations; guarded to k <= 64.
template <typename Scalar>
MatrixX<Scalar> solve_full_oracle(const RegularizedProblem<Scalar>& problem, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {}) {
  detail::validate_problem(problem, lambda);
  const Eigen::Index k = problem.resolution();
  if (k > kFullOracleMaxResolution) {
    std::ostringstream msg;
    msg << "full oracle is guarded to k <= " << kFullOracleMaxResolution << " (got k = " << k
        << "); the assembled system has k^4 entries";
    throw std::invalid_argument(msg.str());
  }

  const MatrixX<Scalar>& gram = problem.neq.gram;
  const MatrixX<Scalar>& rhs = problem.neq.rhs;
  const MatrixX<Scalar>& mask = problem.mask;

  // Stationarity entry (i,j): sum_q C(i,q) gram(q,j) + lambda M(i,j) C(i,j) = rhs(i,j).
  // Column-major vec ordering: C(i,j) lives at index i + j*k.
  using Triplet = Eigen::Triplet<Scalar>;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(k) * k * k + static_cast<std::size_t>(k) * k);
  VectorX<Scalar> vec_rhs(k * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index row = i + j * k;
      for (Eigen::Index q = 0; q < k; ++q) {
        triplets.emplace_back(row, i + q * k, gram(q, j));
      }
      const Scalar diag = lambda * mask(i, j) + opts.ridge;
      if (diag != Scalar(0)) triplets.emplace_back(row, row, diag);
      vec_rhs[row] = rhs(i, j);
    }
  }

  Eigen::SparseMatrix<Scalar> system(k * k, k * k);
  system.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw SingularSystemError(0, "k^2 x k^2 oracle system is numerically singular");
  }
  VectorX<Scalar> x = lu.solve(vec_rhs);
  if (!x.allFinite()) {
    throw SingularSystemError(0, "k^2 x k^2 oracle solve produced non-finite values");
  }
  // SparseLU happily factors numerically singular systems into finite
  // garbage, so require the solution to actually satisfy the equations.
  const Scalar consistency = (system * x - vec_rhs).norm() / (Scalar(1) + vec_rhs.norm());
  const Scalar consistency_tol = sizeof(Scalar) == sizeof(double) ? Scalar(1e-7) : Scalar(1e-2);
  if (!(consistency <= consistency_tol)) {
    std::ostringstream msg;
    msg << "k^2 x k^2 oracle solution is inconsistent (relative residual " << consistency
        << "); the system is numerically singular";
    throw SingularSystemError(0, msg.str());
  }

  MatrixX<Scalar> c(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      c(i, j) = x[i + j * k];
    }
  }
  return c;
}

template <typename Scalar>
MatrixX<Scalar> solve_full_oracle(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                  const MatrixX<Scalar>& mask, Scalar lambda,
                                  const SolverOptions<Scalar>& opts = {}) {
  return solve_full_oracle(make_problem(a, b, mask), lambda, opts);
}

}  // namespace fmsolve
