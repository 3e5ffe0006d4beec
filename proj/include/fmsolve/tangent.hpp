#pragma once

#include "fmsolve/types.hpp"

namespace fmsolve {

/// Per-vertex, per-channel tangent vectors stored as split planes: the
/// complex vector z = x + i*y at vertex v, channel j is (x(v,j), y(v,j)).
struct TangentField {
  Matrixd x;  // V x D
  Matrixd y;  // V x D

  Eigen::Index vertices() const { return x.rows(); }
  Eigen::Index channels() const { return x.cols(); }
  void validate() const;
};

/// Complex channel-mixing transform A = a_re + i*a_im acting on tangent
/// fields.
struct GradientTransform {
  Matrixd a_re;  // D x D
  Matrixd a_im;  // D x D

  Eigen::Index channels() const { return a_re.rows(); }
  void validate() const;
};

enum class GradientVariant { A, B };

inline const char* to_string(GradientVariant v) { return v == GradientVariant::A ? "A" : "B"; }

/// Real gradient features g = x .* (Az)_re + y .* (Az)_im, where the two
/// variants differ only in how the imaginary part of Az is assembled:
///
///   variant A:  (Az)_im = A_re y + A_im x   (rotation + isotropic scaling blocks)
///   variant B:  (Az)_im = A_re x + A_im y   (fixed 45-degree, anisotropic scaling blocks)
///
/// Both share (Az)_re = A_re x - A_im y. Output is V x D.
Matrixd apply_gradient_features(GradientVariant variant, const GradientTransform& w,
                                const TangentField& z);

Matrixd apply_variant_a(const GradientTransform& w, const TangentField& z);
Matrixd apply_variant_b(const GradientTransform& w, const TangentField& z);

/// The 2x2 tangent-plane block acting between a channel pair:
/// variant A -> [[a, -b], [b, a]], variant B -> [[a, -b], [a, b]].
Eigen::Matrix2d block_matrix(GradientVariant variant, double a, double b);

/// Rotates every tangent vector by the same angle, modeling a coherent
/// change of the arbitrary per-vertex reference frame.
TangentField rotate_frames(const TangentField& z, double theta);

/// Independent per-vertex frame rotations; `theta` holds one angle per vertex.
TangentField rotate_frames(const TangentField& z, const Vectord& theta);

struct FrameRotationOutputs {
  Matrixd variant_a;
  Matrixd variant_b;
};

/// Applies both variants to a globally rotated copy of the field. Variant A
/// is invariant under this rotation; variant B generically is not.
FrameRotationOutputs frame_rotation_diagnostic(const GradientTransform& w, const TangentField& z,
                                               double theta);

/// Same diagnostic under independent per-vertex rotations.
FrameRotationOutputs frame_rotation_diagnostic(const GradientTransform& w, const TangentField& z,
                                               const Vectord& theta);

}  // namespace fmsolve
