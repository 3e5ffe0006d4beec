#pragma once

#include "fmsolve/types.hpp"

namespace fmsolve {

enum class MaskKind { Commutativity, Resolvent };

inline const char* to_string(MaskKind kind) {
  return kind == MaskKind::Commutativity ? "commutativity" : "resolvent";
}

/// Laplacian-commutativity penalty mask: M(i,j) = (ev2(i) - ev1(j))^2.
/// Identical spectra give an all-zero diagonal, so the regularizer leaves
/// the diagonal of C free.
template <typename Scalar>
MatrixX<Scalar> mask_commutativity(const VectorX<Scalar>& ev1, const VectorX<Scalar>& ev2) {
  detail::require(ev1.size() == ev2.size(), "eigenvalue vectors must have equal length");
  detail::require(ev1.size() >= 1, "eigenvalue vectors must be non-empty");
  detail::require_finite(ev1, "ev1");
  detail::require_finite(ev2, "ev2");
  detail::require((ev1.array() >= Scalar(0)).all() && (ev2.array() >= Scalar(0)).all(),
                  "eigenvalues must be non-negative");

  const Eigen::Index k = ev1.size();
  MatrixX<Scalar> mask(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Scalar d = ev2[i] - ev1[j];
      mask(i, j) = d * d;
    }
  }
  return mask;
}

/// Resolvent-difference penalty mask. Eigenvalues are first normalized by
/// the larger of the two spectral maxima (mu = ev / ev_max); each entry is
/// the squared modulus of the difference of complex resolvents evaluated at
/// i*sigma:
///
///   re(i,j) = mu2(i)/(mu2(i)^2 + s^2) - mu1(j)/(mu1(j)^2 + s^2)
///   im(i,j) = s/(mu2(i)^2 + s^2)      - s/(mu1(j)^2 + s^2)
///   M(i,j)  = re^2 + im^2
///
/// Identical spectra give an all-zero diagonal, same as the commutativity
/// mask.
template <typename Scalar>
MatrixX<Scalar> mask_resolvent(const VectorX<Scalar>& ev1, const VectorX<Scalar>& ev2,
                               Scalar sigma) {
  detail::require(ev1.size() == ev2.size(), "eigenvalue vectors must have equal length");
  detail::require(ev1.size() >= 1, "eigenvalue vectors must be non-empty");
  detail::require_finite(ev1, "ev1");
  detail::require_finite(ev2, "ev2");
  detail::require((ev1.array() >= Scalar(0)).all() && (ev2.array() >= Scalar(0)).all(),
                  "eigenvalues must be non-negative");
  detail::require(sigma > Scalar(0), "sigma must be positive");

  const Scalar ev_max = std::max(ev1.maxCoeff(), ev2.maxCoeff());
  detail::require(ev_max > Scalar(0), "resolvent mask needs a non-zero spectrum to normalize by");

  const Eigen::Index k = ev1.size();
  const Scalar s2 = sigma * sigma;
  VectorX<Scalar> re1(k), im1(k), re2(k), im2(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Scalar mu1 = ev1[j] / ev_max;
    const Scalar mu2 = ev2[j] / ev_max;
    re1[j] = mu1 / (mu1 * mu1 + s2);
    im1[j] = sigma / (mu1 * mu1 + s2);
    re2[j] = mu2 / (mu2 * mu2 + s2);
    im2[j] = sigma / (mu2 * mu2 + s2);
  }

  MatrixX<Scalar> mask(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Scalar re = re2[i] - re1[j];
      const Scalar im = im2[i] - im1[j];
      mask(i, j) = re * re + im * im;
    }
  }
  return mask;
}

template <typename Scalar>
MatrixX<Scalar> build_mask(MaskKind kind, const VectorX<Scalar>& ev1, const VectorX<Scalar>& ev2,
                           Scalar sigma = Scalar(0.5)) {
  return kind == MaskKind::Commutativity ? mask_commutativity<Scalar>(ev1, ev2)
                                         : mask_resolvent<Scalar>(ev1, ev2, sigma);
}

}  // namespace fmsolve
