#include "osmcaa/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "osmcaa/errors.hpp"

namespace osmcaa {

Matrix l2_normalize_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double norm = std::sqrt(squared_norm(x.row(i)));
    if (!(norm > kEpsNorm)) throw ZeroNormRowError(i);
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) / norm;
  }
  return out;
}

DistanceMatrix pairwise_distances(const Matrix& f) {
  if (f.rows() < 2) throw ValidationError("pairwise_distances needs at least 2 rows");
  if (!all_finite(f)) throw NonFiniteEvaluationError("non-finite input row");
  const std::size_t m = f.rows();
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) sq[i] = squared_norm(f.row(i));
  DistanceMatrix dist(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      // clamp guards against negative round-off in the expansion
      const double d2 = std::max(0.0, sq[i] + sq[j] - 2.0 * dot(f.row(i), f.row(j)));
      const double d = std::sqrt(d2);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& fn,
                        const Matrix& x, double h) {
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double orig = probe(i, j);
      probe(i, j) = orig + h;
      const double fp = fn(probe);
      probe(i, j) = orig - h;
      const double fm = fn(probe);
      probe(i, j) = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NonFiniteEvaluationError("objective returned a non-finite value");
      grad(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return grad;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      worst = std::max(worst, relative_error(a(i, j), b(i, j)));
  return worst;
}

}  // namespace osmcaa
