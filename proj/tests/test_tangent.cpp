#include "fmsolve/tangent.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fmsolve;

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrixd randn(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrixd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

// Test-side oracle: evaluate the 2x2 block form channel pair by channel pair.
Matrixd block_oracle(GradientVariant variant, const GradientTransform& w, const TangentField& z) {
  Matrixd out(z.vertices(), z.channels());
  for (Eigen::Index v = 0; v < z.vertices(); ++v) {
    for (Eigen::Index i = 0; i < z.channels(); ++i) {
      double sum = 0;
      const Eigen::Vector2d vi(z.x(v, i), z.y(v, i));
      for (Eigen::Index j = 0; j < z.channels(); ++j) {
        const double a = w.a_re(i, j);
        const double b = w.a_im(i, j);
        const Eigen::Vector2d vj(z.x(v, j), z.y(v, j));
        Eigen::Matrix2d block;
        if (variant == GradientVariant::A) {
          block << a, -b, b, a;
        } else {
          block << a, -b, a, b;
        }
        sum += vi.dot(block * vj);
      }
      out(v, i) = sum;
    }
  }
  return out;
}

GradientTransform random_transform(int channels, std::uint64_t seed) {
  return {randn(channels, channels, seed), randn(channels, channels, seed + 1)};
}

TangentField random_field(int vertices, int channels, std::uint64_t seed) {
  return {randn(vertices, channels, seed), randn(vertices, channels, seed + 1)};
}

}  // namespace

TEST_CASE("identity transform yields the squared norm") {
  GradientTransform w{Matrixd::Constant(1, 1, 1.0), Matrixd::Constant(1, 1, 0.0)};
  TangentField z{Matrixd::Constant(1, 1, 3.0), Matrixd::Constant(1, 1, 4.0)};
  CHECK(apply_variant_a(w, z)(0, 0) == doctest::Approx(25.0));
}

TEST_CASE("pure rotation is orthogonal to the input under variant A") {
  GradientTransform w{Matrixd::Constant(1, 1, 0.0), Matrixd::Constant(1, 1, 1.0)};
  TangentField z{Matrixd::Constant(1, 1, 1.7), Matrixd::Constant(1, 1, -0.3)};
  CHECK(apply_variant_a(w, z)(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("variant B hand example") {
  GradientTransform w{Matrixd::Constant(1, 1, 1.0), Matrixd::Constant(1, 1, 0.0)};
  TangentField z{Matrixd::Constant(1, 1, 3.0), Matrixd::Constant(1, 1, 4.0)};
  // (Az)_re = 3, (Az)_im = 3, g = 3*3 + 4*3 = 21
  CHECK(apply_variant_b(w, z)(0, 0) == doctest::Approx(21.0));
}

TEST_CASE("variants coincide when a_im = 0 and y = 0") {
  auto w = random_transform(4, 300);
  auto z = random_field(6, 4, 310);
  w.a_im.setZero();
  z.y.setZero();
  const Matrixd ga = apply_variant_a(w, z);
  const Matrixd gb = apply_variant_b(w, z);
  CHECK((ga - gb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vectorized variants match the block-form oracle") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto w = random_transform(4, 320 + 10 * seed);
    const auto z = random_field(5, 4, 330 + 10 * seed);
    for (GradientVariant variant : {GradientVariant::A, GradientVariant::B}) {
      const Matrixd fast = apply_gradient_features(variant, w, z);
      const Matrixd slow = block_oracle(variant, w, z);
      CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("block matrices") {
  const Eigen::Matrix2d rot90 = block_matrix(GradientVariant::A, 0.0, 1.0);
  Eigen::Matrix2d expected;
  expected << 0, -1, 1, 0;
  CHECK((rot90 - expected).cwiseAbs().maxCoeff() == 0.0);

  // the variant-A family is exactly scaling times rotation
  for (double theta : {0.3, 1.2, 2.9}) {
    for (double s : {0.5, 2.0}) {
      const Eigen::Matrix2d m =
          block_matrix(GradientVariant::A, s * std::cos(theta), s * std::sin(theta));
      Eigen::Matrix2d rot;
      rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      CHECK((m - s * rot).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  // block_matrix(B, 1, 1) factors as sqrt(2) times a 45-degree rotation
  const Eigen::Matrix2d b11 = block_matrix(GradientVariant::B, 1.0, 1.0);
  Eigen::Matrix2d r45;
  r45 << std::cos(kPi / 4), -std::sin(kPi / 4), std::sin(kPi / 4), std::cos(kPi / 4);
  CHECK((b11 - std::sqrt(2.0) * r45).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("variant A is invariant under global frame rotations") {
  const auto w = random_transform(4, 340);
  const auto z = random_field(8, 4, 350);
  const Matrixd base = apply_variant_a(w, z);
  for (double theta : {0.0, 0.4, kPi / 3, kPi, 5.1}) {
    const auto rotated = frame_rotation_diagnostic(w, z, theta);
    CHECK((rotated.variant_a - base).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("theta = 0 leaves both variants untouched") {
  const auto w = random_transform(3, 360);
  const auto z = random_field(5, 3, 370);
  const auto rotated = frame_rotation_diagnostic(w, z, 0.0);
  CHECK((rotated.variant_a - apply_variant_a(w, z)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rotated.variant_b - apply_variant_b(w, z)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("variant B is sensitive to the frame for generic transforms") {
  int moved = 0;
  for (int t = 0; t < 100; ++t) {
    const auto w = random_transform(3, 400 + 2 * t);
    const auto z = random_field(4, 3, 600 + 2 * t);
    const Matrixd base = apply_variant_b(w, z);
    const auto rotated = frame_rotation_diagnostic(w, z, kPi / 6);
    if ((rotated.variant_b - base).cwiseAbs().maxCoeff() > 1e-6) ++moved;
  }
  CHECK(moved >= 99);
}

TEST_CASE("variant A is invariant under independent per-vertex rotations") {
  const auto w = random_transform(4, 380);
  const auto z = random_field(8, 4, 390);
  const Matrixd base = apply_variant_a(w, z);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  Vectord theta(8);
  for (int v = 0; v < 8; ++v) theta[v] = angle(rng);
  const auto rotated = frame_rotation_diagnostic(w, z, theta);
  CHECK((rotated.variant_a - base).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("both variants are linear in the transform") {
  const auto w1 = random_transform(4, 500);
  const auto w2 = random_transform(4, 510);
  const auto z = random_field(6, 4, 520);
  const double alpha = 0.6, beta = -1.9;
  const GradientTransform mix{alpha * w1.a_re + beta * w2.a_re, alpha * w1.a_im + beta * w2.a_im};
  for (GradientVariant variant : {GradientVariant::A, GradientVariant::B}) {
    const Matrixd lhs = apply_gradient_features(variant, mix, z);
    const Matrixd rhs = alpha * apply_gradient_features(variant, w1, z) +
                        beta * apply_gradient_features(variant, w2, z);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("shape mismatches are rejected") {
  const auto w = random_transform(3, 530);
  const auto z = random_field(4, 2, 540);
  CHECK_THROWS_AS(apply_variant_a(w, z), std::invalid_argument);

  TangentField ragged{randn(4, 3, 550), randn(4, 2, 551)};
  CHECK_THROWS_AS(apply_variant_a(w, ragged), std::invalid_argument);

  const auto z3 = random_field(4, 3, 560);
  Vectord wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(rotate_frames(z3, wrong), std::invalid_argument);
}
