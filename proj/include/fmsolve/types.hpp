#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmsolve {

// All dense matrices in this library are row-major: the solvers hand out
// per-row views of C and per-system blocks of the batched tensor, and both
// want contiguous rows.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrixd = MatrixX<double>;
using Matrixf = MatrixX<float>;
using Vectord = VectorX<double>;
using Vectorf = VectorX<float>;

/// A linear system was numerically singular. `system()` identifies which of
/// the independent row systems failed (0-based).
class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(Eigen::Index system, const std::string& what)
      : std::runtime_error(what), system_(system) {}

  Eigen::Index system() const { return system_; }

private:
  Eigen::Index system_;
};

/// A basis handed to the spectral projection did not have full column rank.
/// `rank()` is the numerically detected rank.
class RankDeficientError : public std::runtime_error {
public:
  RankDeficientError(Eigen::Index rank, Eigen::Index expected, const std::string& what)
      : std::runtime_error(what), rank_(rank), expected_(expected) {}

  Eigen::Index rank() const { return rank_; }
  Eigen::Index expected() const { return expected_; }

private:
  Eigen::Index rank_;
  Eigen::Index expected_;
};

/// The batched solver refused to materialize its left-hand-side tensor
/// because the configured memory cap would be exceeded. Thrown before any
/// allocation happens.
class MemoryCapExceeded : public std::runtime_error {
public:
  MemoryCapExceeded(std::size_t required, std::size_t cap, const std::string& what)
      : std::runtime_error(what), required_(required), cap_(cap) {}

  std::size_t required_bytes() const { return required_; }
  std::size_t cap_bytes() const { return cap_; }

private:
  std::size_t required_;
  std::size_t cap_;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + " contains non-finite entries");
  }
}

inline void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

}  // namespace detail

}  // namespace fmsolve
