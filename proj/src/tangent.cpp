#include "fmsolve/tangent.hpp"

#include <cmath>

namespace fmsolve {

void TangentField::validate() const {
  detail::require(x.rows() >= 1 && x.cols() >= 1, "tangent field must be non-empty");
  detail::require(x.rows() == y.rows() && x.cols() == y.cols(),
                  "tangent field planes x and y must share shape");
  detail::require_finite(x, "x");
  detail::require_finite(y, "y");
}

void GradientTransform::validate() const {
  detail::require(a_re.rows() >= 1, "gradient transform must be non-empty");
  detail::require(a_re.rows() == a_re.cols(), "gradient transform must be square");
  detail::require(a_im.rows() == a_re.rows() && a_im.cols() == a_re.cols(),
                  "a_re and a_im must share shape");
  detail::require_finite(a_re, "a_re");
  detail::require_finite(a_im, "a_im");
}

Matrixd apply_gradient_features(GradientVariant variant, const GradientTransform& w,
                                const TangentField& z) {
  w.validate();
  z.validate();
  detail::require(z.channels() == w.channels(),
                  "tangent field channel count must match the transform size");

  // Rows are per-vertex channel vectors, so the channel mix A*v becomes a
  // right-multiplication by A^T.
  const Matrixd az_re = z.x * w.a_re.transpose() - z.y * w.a_im.transpose();
  Matrixd az_im;
  if (variant == GradientVariant::A) {
    az_im = z.y * w.a_re.transpose() + z.x * w.a_im.transpose();
  } else {
    az_im = z.x * w.a_re.transpose() + z.y * w.a_im.transpose();
  }
  return (z.x.array() * az_re.array() + z.y.array() * az_im.array()).matrix();
}

Matrixd apply_variant_a(const GradientTransform& w, const TangentField& z) {
  return apply_gradient_features(GradientVariant::A, w, z);
}

Matrixd apply_variant_b(const GradientTransform& w, const TangentField& z) {
  return apply_gradient_features(GradientVariant::B, w, z);
}

Eigen::Matrix2d block_matrix(GradientVariant variant, double a, double b) {
  Eigen::Matrix2d m;
  if (variant == GradientVariant::A) {
    m << a, -b, b, a;
  } else {
    m << a, -b, a, b;
  }
  return m;
}

TangentField rotate_frames(const TangentField& z, double theta) {
  z.validate();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * z.x - s * z.y, s * z.x + c * z.y};
}

TangentField rotate_frames(const TangentField& z, const Vectord& theta) {
  z.validate();
  detail::require(theta.size() == z.vertices(), "need one rotation angle per vertex");
  const Eigen::ArrayXd c = theta.array().cos();
  const Eigen::ArrayXd s = theta.array().sin();
  TangentField out{Matrixd(z.x.rows(), z.x.cols()), Matrixd(z.y.rows(), z.y.cols())};
  out.x = (z.x.array().colwise() * c - z.y.array().colwise() * s).matrix();
  out.y = (z.x.array().colwise() * s + z.y.array().colwise() * c).matrix();
  return out;
}

FrameRotationOutputs frame_rotation_diagnostic(const GradientTransform& w, const TangentField& z,
                                               double theta) {
  const TangentField rotated = rotate_frames(z, theta);
  return {apply_variant_a(w, rotated), apply_variant_b(w, rotated)};
}

FrameRotationOutputs frame_rotation_diagnostic(const GradientTransform& w, const TangentField& z,
                                               const Vectord& theta) {
  const TangentField rotated = rotate_frames(z, theta);
  return {apply_variant_a(w, rotated), apply_variant_b(w, rotated)};
}

}  // namespace fmsolve
