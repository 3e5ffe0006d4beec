#pragma once

#include "fmsolve/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <optional>
#include <sstream>

namespace fmsolve {

/// Truncated Laplacian spectrum of one shape: eigenvalues sorted ascending
/// (first one >= 0) and, optionally, the corresponding eigenfunction basis
/// as columns. The basis may be absent when only the spectral domain is
/// exercised.
template <typename Scalar>
struct Spectrum {
  VectorX<Scalar> eigenvalues;
  std::optional<MatrixX<Scalar>> basis;  // V x k when present

  Eigen::Index resolution() const { return eigenvalues.size(); }

  void validate() const {
    detail::require(eigenvalues.size() >= 1, "spectrum must hold at least one eigenvalue");
    detail::require_finite(eigenvalues, "eigenvalues");
    detail::require(eigenvalues[0] >= Scalar(0), "eigenvalues must be non-negative");
    for (Eigen::Index i = 1; i < eigenvalues.size(); ++i) {
      detail::require(eigenvalues[i - 1] <= eigenvalues[i], "eigenvalues must be sorted ascending");
    }
    if (basis) {
      detail::require(basis->cols() == eigenvalues.size(),
                      "basis column count must equal the number of eigenvalues");
      detail::require_finite(*basis, "basis");
    }
  }
};

template <typename Scalar>
struct ProjectionOptions {
  // Above this condition number of the basis, the normal-equations path is
  // abandoned for a rank-revealing factorization.
  Scalar condition_threshold = Scalar(1e10);
};

/// Least-squares coefficients of per-vertex features in a truncated basis:
/// returns pinv(basis) * features. Well-conditioned bases go through the
/// normal equations; ill-conditioned ones fall back to a rank-revealing
/// complete orthogonal decomposition. A basis without full column rank is an
/// error (the exception names the detected rank).
template <typename Scalar>
MatrixX<Scalar> project_to_spectral(const MatrixX<Scalar>& basis, const MatrixX<Scalar>& features,
                                    const ProjectionOptions<Scalar>& opts = {}) {
  detail::require(basis.rows() >= 1 && basis.cols() >= 1, "basis must be non-empty");
  detail::require(features.rows() >= 1 && features.cols() >= 1, "features must be non-empty");
  if (features.rows() != basis.rows()) {
    std::ostringstream msg;
    msg << "feature row count (" << features.rows() << ") does not match basis vertex count ("
        << basis.rows() << ")";
    throw std::invalid_argument(msg.str());
  }
  detail::require_finite(basis, "basis");
  detail::require_finite(features, "features");

  const Eigen::Index k = basis.cols();

  auto rank_revealing = [&]() -> MatrixX<Scalar> {
    Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(basis);
    if (cod.rank() < k) {
      std::ostringstream msg;
      msg << "basis is rank deficient: rank " << cod.rank() << " < " << k << " columns";
      throw RankDeficientError(cod.rank(), k, msg.str());
    }
    return cod.solve(features);
  };

  if (basis.rows() < k) return rank_revealing();  // cannot have full column rank; report it

  const MatrixX<Scalar> gram = basis.transpose() * basis;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(gram, Eigen::EigenvaluesOnly);
  const Scalar ev_min = es.eigenvalues().minCoeff();
  const Scalar ev_max = es.eigenvalues().maxCoeff();
  // cond(basis) = sqrt(cond(gram)) for the spectral norm
  const bool well_conditioned =
      ev_min > Scalar(0) &&
      std::sqrt(ev_max / ev_min) <= opts.condition_threshold;
  if (!well_conditioned) return rank_revealing();

  Eigen::LLT<MatrixX<Scalar>> llt(gram);
  if (llt.info() != Eigen::Success) return rank_revealing();
  return llt.solve(basis.transpose() * features);
}

/// Energy of a candidate map: ||C*A - B||_F^2 + lambda * sum_ij M(i,j)*C(i,j)^2.
template <typename Scalar>
Scalar energy(const MatrixX<Scalar>& c, const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
              const MatrixX<Scalar>& mask, Scalar lambda) {
  detail::require(c.rows() == c.cols(), "map C must be square");
  detail::require(a.rows() == c.cols(), "descriptor A row count must equal the map size");
  detail::require(b.rows() == c.rows() && b.cols() == a.cols(),
                  "descriptors A and B must have identical shape");
  detail::require(mask.rows() == c.rows() && mask.cols() == c.cols(),
                  "penalty mask must match the map shape");
  detail::require(lambda >= Scalar(0), "lambda must be non-negative");
  detail::require((mask.array() >= Scalar(0)).all(), "penalty mask entries must be non-negative");
  detail::require_finite(c, "C");
  detail::require_finite(a, "A");
  detail::require_finite(b, "B");
  detail::require_finite(mask, "mask");

  const Scalar data = (c * a - b).squaredNorm();
  const Scalar reg = (mask.array() * c.array().square()).sum();
  return data + lambda * reg;
}

/// Gradient of `energy` with respect to C: 2(C*A*A^T - B*A^T) + 2*lambda*(M .* C).
template <typename Scalar>
MatrixX<Scalar> energy_gradient(const MatrixX<Scalar>& c, const MatrixX<Scalar>& a,
                                const MatrixX<Scalar>& b, const MatrixX<Scalar>& mask,
                                Scalar lambda) {
  const MatrixX<Scalar> gram = a * a.transpose();
  const MatrixX<Scalar> rhs = b * a.transpose();
  return Scalar(2) * (c * gram - rhs) + Scalar(2) * lambda * (mask.array() * c.array()).matrix();
}

}  // namespace fmsolve
