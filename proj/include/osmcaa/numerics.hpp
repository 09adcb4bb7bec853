#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "osmcaa/matrix.hpp"

namespace osmcaa {

// Norms below this are treated as zero when normalizing rows.
inline constexpr double kEpsNorm = 1e-12;

// Symmetric m x m Euclidean distance matrix with zero diagonal.
struct DistanceMatrix {
  std::size_t m = 0;
  std::vector<double> d;  // row-major m x m

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t m_) : m(m_), d(m_ * m_, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return d[i * m + j]; }
  double& operator()(std::size_t i, std::size_t j) { return d[i * m + j]; }
};

// Scales every row to unit Euclidean norm. Throws ZeroNormRowError if a row
// norm is at or below kEpsNorm.
Matrix l2_normalize_rows(const Matrix& x);

// d[i][j] = ||f_i - f_j||_2 via the clamped quadratic expansion
// sqrt(max(0, |f_i|^2 + |f_j|^2 - 2 f_i.f_j)). Throws on non-finite input.
DistanceMatrix pairwise_distances(const Matrix& f);

// Central finite differences (fn(x + h e_i) - fn(x - h e_i)) / (2h) per
// coordinate. Verification oracle for every analytic gradient in the
// project. Throws NonFiniteEvaluationError if fn returns a non-finite value.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& fn,
                        const Matrix& x, double h);

// Guarded relative error |a - b| / max(1, |a|, |b|); behaves as absolute
// error for small magnitudes so near-zero gradients do not blow it up.
double relative_error(double a, double b);

// Max guarded relative error over all coordinates of two equally shaped
// matrices.
double max_relative_error(const Matrix& a, const Matrix& b);

}  // namespace osmcaa
