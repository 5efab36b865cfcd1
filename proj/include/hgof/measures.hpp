#ifndef HGOF_MEASURES_HPP
#define HGOF_MEASURES_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/rng.hpp"

namespace hgof {

/*
 * Centred Gaussian measures on the discretized function space. They serve
 * two roles: the probe measure Q the statistic integrates against, and the
 * bootstrap null N(0, C_n). Being Gaussian, every family here has full
 * topological support, which is what makes the test consistent; this is a
 * property of the construction, not something checked at runtime.
 */

enum class KernelFamily { wiener, ornstein_uhlenbeck, brownian_bridge, custom };

inline const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::wiener: return "wiener";
    case KernelFamily::ornstein_uhlenbeck: return "ou";
    case KernelFamily::brownian_bridge: return "bridge";
    case KernelFamily::custom: return "custom";
  }
  return "?";
}

/// Pointwise covariance kernel of the named family on `grid`.
/// wiener: param * min(s,t); ou: exp(-|s-t| / param); bridge:
/// param * (min(s,t) - s t). param defaults to 1, the forms the test uses.
template <typename Scalar>
MatrixX<Scalar> family_kernel(KernelFamily family, const GridT<Scalar>& grid,
                              Scalar param) {
  if (!(param > Scalar(0)))
    throw std::invalid_argument("family_kernel: param must be positive");
  const Index m = grid.size();
  MatrixX<Scalar> kernel(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const Scalar s = grid.points[i];
      const Scalar t = grid.points[j];
      Scalar v;
      switch (family) {
        case KernelFamily::wiener:
          v = param * std::min(s, t);
          break;
        case KernelFamily::ornstein_uhlenbeck:
          v = std::exp(-std::abs(s - t) / param);
          break;
        case KernelFamily::brownian_bridge:
          v = param * (std::min(s, t) - s * t);
          break;
        default:
          throw std::invalid_argument("family_kernel: custom has no formula");
      }
      kernel(i, j) = v;
      kernel(j, i) = v;
    }
  }
  return kernel;
}

template <typename Scalar>
struct GaussianMeasureT {
  KernelFamily family = KernelFamily::wiener;
  Scalar param = 1;
  GridT<Scalar> grid;
  MatrixX<Scalar> custom;  // used only when family == custom

  static GaussianMeasureT wiener(GridT<Scalar> grid, Scalar scale = 1) {
    return {KernelFamily::wiener, scale, std::move(grid), {}};
  }
  static GaussianMeasureT ornstein_uhlenbeck(GridT<Scalar> grid,
                                             Scalar length = 1) {
    return {KernelFamily::ornstein_uhlenbeck, length, std::move(grid), {}};
  }
  static GaussianMeasureT brownian_bridge(GridT<Scalar> grid,
                                          Scalar scale = 1) {
    return {KernelFamily::brownian_bridge, scale, std::move(grid), {}};
  }
  /// Caller-supplied kernel; validated against the covariance invariants.
  static GaussianMeasureT custom_kernel(GridT<Scalar> grid,
                                        MatrixX<Scalar> kernel) {
    GaussianMeasureT measure{KernelFamily::custom, 1, std::move(grid),
                             std::move(kernel)};
    validate_covariance(kernel_matrix(measure));
    return measure;
  }
};
using GaussianMeasure = GaussianMeasureT<double>;

template <typename Scalar>
CovarianceOperatorT<Scalar> kernel_matrix(
    const GaussianMeasureT<Scalar>& measure) {
  CovarianceOperatorT<Scalar> op;
  op.grid = measure.grid;
  op.kernel = measure.family == KernelFamily::custom
                  ? measure.custom
                  : family_kernel(measure.family, measure.grid, measure.param);
  return op;
}

/*
 * Spectral factor of a pointwise covariance kernel, for sampling the
 * Gaussian process at the grid points. Negative eigenvalues (numerical
 * noise of near-PSD sample kernels) are clipped to zero rather than
 * shifted, which leaves the dominant spectrum untouched. The clipped mass
 * is kept for diagnostics; anything above 1e-6 of the trace deserves a
 * warning upstream.
 */
template <typename Scalar>
class GpFactorT {
 public:
  explicit GpFactorT(const CovarianceOperatorT<Scalar>& cov) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(cov.kernel);
    if (eig.info() != Eigen::Success)
      throw numeric_error(
          "gaussian process factor: eigendecomposition of the covariance "
          "kernel failed");
    VectorX<Scalar> values = eig.eigenvalues();
    clipped_mass_ = -values.cwiseMin(Scalar(0)).sum();
    trace_ = values.sum();
    factor_.noalias() =
        eig.eigenvectors() *
        values.cwiseMax(Scalar(0)).cwiseSqrt().asDiagonal();
  }

  /// n iid draws as rows of an n x m matrix.
  MatrixX<Scalar> sample(Index n, std::mt19937_64& engine) const {
    MatrixX<Scalar> z = standard_normal_matrix<Scalar>(n, factor_.cols(), engine);
    return z * factor_.transpose();
  }

  Scalar clipped_mass() const { return clipped_mass_; }
  Scalar trace() const { return trace_; }
  Scalar clipped_fraction() const {
    return trace_ > Scalar(0) ? clipped_mass_ / trace_ : Scalar(0);
  }

 private:
  MatrixX<Scalar> factor_;  // m x m, kernel = factor factor^T
  Scalar clipped_mass_ = 0;
  Scalar trace_ = 0;
};
using GpFactor = GpFactorT<double>;

/// n iid draws from the centred Gaussian process with the given pointwise
/// covariance kernel; deterministic given seed.
template <typename Scalar>
FunctionalSampleT<Scalar> sample_gaussian_process(
    const CovarianceOperatorT<Scalar>& cov, Index n, std::uint64_t seed) {
  GpFactorT<Scalar> factor(cov);
  auto engine = make_engine(seed, stream::process, 0);
  return {cov.grid, factor.sample(n, engine)};
}

/// Exact Wiener paths on the grid via cumulative increments, O(m) per path;
/// W(0) = 0 exactly when the grid starts at 0. `scale` multiplies the
/// covariance, so paths are scaled by sqrt(scale).
template <typename Scalar>
MatrixX<Scalar> wiener_paths(Index n, const GridT<Scalar>& grid,
                             std::mt19937_64& engine, Scalar scale = 1) {
  const Index m = grid.size();
  std::normal_distribution<Scalar> normal;
  MatrixX<Scalar> paths(n, m);
  const Scalar sd0 = std::sqrt(scale * grid.points[0]);
  for (Index j = 0; j < n; ++j) {
    paths(j, 0) = sd0 * normal(engine);
    for (Index i = 1; i < m; ++i) {
      const Scalar sd = std::sqrt(scale * (grid.points[i] - grid.points[i - 1]));
      paths(j, i) = paths(j, i - 1) + sd * normal(engine);
    }
  }
  return paths;
}

/// M sampled probe curves f_1..f_M ~ Q with the seed record that produced
/// them; rerunning with the same record reproduces the set bit for bit.
template <typename Scalar>
struct ProbeSetT {
  GridT<Scalar> grid;
  MatrixX<Scalar> probes;  // M x m
  std::uint64_t master_seed = 0;
  std::uint64_t stream_tag = stream::probes;
  std::uint64_t stream_index = 0;

  Index count() const { return probes.rows(); }
};
using ProbeSet = ProbeSetT<double>;

template <typename Scalar>
ProbeSetT<Scalar> sample_probes(const GaussianMeasureT<Scalar>& measure,
                                Index M, std::uint64_t seed,
                                std::uint64_t stream_index = 0) {
  if (M < 1) throw std::invalid_argument("sample_probes: need M >= 1");
  ProbeSetT<Scalar> set;
  set.grid = measure.grid;
  set.master_seed = seed;
  set.stream_index = stream_index;
  auto engine = make_engine(seed, stream::probes, stream_index);
  if (measure.family == KernelFamily::wiener) {
    set.probes = wiener_paths(M, measure.grid, engine, measure.param);
  } else {
    GpFactorT<Scalar> factor(kernel_matrix(measure));
    set.probes = factor.sample(M, engine);
  }
  return set;
}

}  // namespace hgof

#endif  // HGOF_MEASURES_HPP
