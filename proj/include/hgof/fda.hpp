#ifndef HGOF_FDA_HPP
#define HGOF_FDA_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "hgof/common.hpp"

namespace hgof {

/*
 * Discretized model of L^2([0,1]): curves are tabulated on a fixed grid of
 * abscissae with positive quadrature weights, and every inner product and
 * operator action routes through the weights. Curves are stored as raw
 * values, never pre-multiplied by weights.
 */

enum class GridScheme { trapezoid, midpoint };

template <typename Scalar>
struct GridT {
  VectorX<Scalar> points;   // strictly increasing, in [0,1]
  VectorX<Scalar> weights;  // positive, same length

  Index size() const { return points.size(); }
};
using Grid = GridT<double>;

template <typename Scalar>
bool same_grid(const GridT<Scalar>& a, const GridT<Scalar>& b) {
  return a.points.size() == b.points.size() && a.points == b.points &&
         a.weights == b.weights;
}

namespace detail {
template <typename Scalar>
void require_aligned(const GridT<Scalar>& grid, const VectorX<Scalar>& curve,
                     const char* what) {
  if (curve.size() != grid.size())
    throw std::invalid_argument(std::string(what) + ": curve length " +
                                std::to_string(curve.size()) +
                                " does not match grid size " +
                                std::to_string(grid.size()));
}
template <typename Scalar>
void require_same_grid(const GridT<Scalar>& a, const GridT<Scalar>& b,
                       const char* what) {
  if (!same_grid(a, b))
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
}
}  // namespace detail

/// Equispaced grid on [0,1] with trapezoid or midpoint quadrature weights.
template <typename Scalar = double>
GridT<Scalar> make_grid(Index m, GridScheme scheme = GridScheme::trapezoid) {
  if (m < 2) throw std::invalid_argument("make_grid: need m >= 2");
  GridT<Scalar> grid;
  grid.points.resize(m);
  grid.weights.resize(m);
  if (scheme == GridScheme::trapezoid) {
    const Scalar h = Scalar(1) / Scalar(m - 1);
    for (Index i = 0; i < m; ++i) {
      grid.points[i] = Scalar(i) / Scalar(m - 1);
      grid.weights[i] = (i == 0 || i == m - 1) ? h / 2 : h;
    }
  } else {
    const Scalar h = Scalar(1) / Scalar(m);
    for (Index i = 0; i < m; ++i) {
      grid.points[i] = (Scalar(2 * i) + 1) / (Scalar(2) * Scalar(m));
      grid.weights[i] = h;
    }
  }
  return grid;
}

/// Quadrature approximation of the L^2 inner product <f,g>.
template <typename Scalar>
Scalar inner_product(const VectorX<Scalar>& f, const VectorX<Scalar>& g,
                     const GridT<Scalar>& grid) {
  detail::require_aligned(grid, f, "inner_product");
  detail::require_aligned(grid, g, "inner_product");
  return (grid.weights.array() * f.array() * g.array()).sum();
}

/// n curves tabulated on a shared grid; row j is the j-th curve.
template <typename Scalar>
struct FunctionalSampleT {
  GridT<Scalar> grid;
  MatrixX<Scalar> curves;  // n x m

  Index n() const { return curves.rows(); }
  Index m() const { return curves.cols(); }
};
using FunctionalSample = FunctionalSampleT<double>;

template <typename Scalar>
VectorX<Scalar> sample_mean(const FunctionalSampleT<Scalar>& sample) {
  if (sample.n() < 1) throw std::invalid_argument("sample_mean: empty sample");
  return sample.curves.colwise().mean().transpose();
}

/// Discretized covariance kernel c(t_i, t_k) plus its grid; realizes the
/// covariance operator through cov_bilinear / cov_quad_form.
template <typename Scalar>
struct CovarianceOperatorT {
  GridT<Scalar> grid;
  MatrixX<Scalar> kernel;  // m x m, symmetric, near-PSD
};
using CovarianceOperator = CovarianceOperatorT<double>;

/*
 * Sample covariance kernel with divisor n (not n-1), matching the plug-in
 * estimator the test statistic is built around. Statistics computed from it
 * differ at small n from the unbiased version; this is intentional.
 */
template <typename Scalar>
CovarianceOperatorT<Scalar> sample_covariance(
    const FunctionalSampleT<Scalar>& sample) {
  const Index n = sample.n();
  if (n < 2) throw std::invalid_argument("sample_covariance: need n >= 2");
  MatrixX<Scalar> centered =
      sample.curves.rowwise() - sample.curves.colwise().mean();
  CovarianceOperatorT<Scalar> op;
  op.grid = sample.grid;
  op.kernel.noalias() = centered.transpose() * centered / Scalar(n);
  return op;
}

/// <C f, g> in quadrature form: sum_{i,k} w_i f_i K_ik w_k g_k.
template <typename Scalar>
Scalar cov_bilinear(const CovarianceOperatorT<Scalar>& op,
                    const VectorX<Scalar>& f, const VectorX<Scalar>& g) {
  detail::require_aligned(op.grid, f, "cov_bilinear");
  detail::require_aligned(op.grid, g, "cov_bilinear");
  VectorX<Scalar> wf = op.grid.weights.array() * f.array();
  VectorX<Scalar> wg = op.grid.weights.array() * g.array();
  return wf.dot(op.kernel * wg);
}

/// sigma_f^2 = <C f, f>.
template <typename Scalar>
Scalar cov_quad_form(const CovarianceOperatorT<Scalar>& op,
                     const VectorX<Scalar>& f) {
  return cov_bilinear(op, f, f);
}

/*
 * Checks the kernel invariants: symmetry to 1e-10 relative, and no
 * eigenvalue of W^{1/2} K W^{1/2} below -1e-8 * lambda_max. Throws
 * std::invalid_argument on violation.
 */
template <typename Scalar>
void validate_covariance(const CovarianceOperatorT<Scalar>& op) {
  const Index m = op.kernel.rows();
  if (op.kernel.cols() != m || m != op.grid.size())
    throw std::invalid_argument("covariance: kernel shape does not match grid");
  const Scalar scale = std::max(op.kernel.template lpNorm<Eigen::Infinity>(),
                                Scalar(1e-300));
  const Scalar asym =
      (op.kernel - op.kernel.transpose()).template lpNorm<Eigen::Infinity>();
  if (asym > Scalar(1e-10) * scale)
    throw std::invalid_argument("covariance: kernel not symmetric");
  VectorX<Scalar> sqrt_w = op.grid.weights.array().sqrt();
  MatrixX<Scalar> weighted =
      sqrt_w.asDiagonal() * op.kernel * sqrt_w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(weighted,
                                                     Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw numeric_error("covariance: eigendecomposition failed");
  const Scalar lambda_max = std::max(eig.eigenvalues().maxCoeff(), Scalar(0));
  if (eig.eigenvalues().minCoeff() < -Scalar(1e-8) * lambda_max)
    throw std::invalid_argument("covariance: kernel not positive semidefinite");
}

}  // namespace hgof

#endif  // HGOF_FDA_HPP
