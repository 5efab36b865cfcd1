#ifndef HGOF_STATISTIC_HPP
#define HGOF_STATISTIC_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/measures.hpp"

namespace hgof {

/*
 * The test statistic nT_n = integral of V_n(f)^2 over the probe measure Q,
 * where V_n aggregates the deviation between the empirical characteristic
 * functional of the sample and the Gaussian characteristic functional fitted
 * by plug-in. Two evaluation routes are provided: Monte Carlo over sampled
 * probes, and a closed form that evaluates the Q-integrals exactly for
 * Gaussian Q via determinants and quadratic forms in the discretized space.
 * The two routes are each other's oracle and the tests hold them together.
 */

enum class StatMethod { monte_carlo, closed_form };

inline const char* to_string(StatMethod method) {
  return method == StatMethod::monte_carlo ? "mc" : "closed";
}

template <typename Scalar>
struct StatisticValueT {
  Scalar n_T_n = 0;  // statistic on the nT_n scale
  StatMethod method = StatMethod::closed_form;
  Index M = 0;  // probe count when monte_carlo
  std::optional<Scalar> mc_std_error;
};
using StatisticValue = StatisticValueT<double>;

/// Empirical characteristic functional at f: n^{-1} sum_j exp(i <f, X_j>).
template <typename Scalar>
std::complex<Scalar> ecf(const FunctionalSampleT<Scalar>& sample,
                         const VectorX<Scalar>& f) {
  detail::require_aligned(sample.grid, f, "ecf");
  VectorX<Scalar> wf = sample.grid.weights.array() * f.array();
  VectorX<Scalar> angles = sample.curves * wf;
  return {angles.array().cos().mean(), angles.array().sin().mean()};
}

/// Gaussian characteristic functional exp(i <mean,f> - <C f,f>/2).
template <typename Scalar>
std::complex<Scalar> gaussian_cf(const VectorX<Scalar>& mean,
                                 const CovarianceOperatorT<Scalar>& cov,
                                 const VectorX<Scalar>& f) {
  detail::require_aligned(cov.grid, mean, "gaussian_cf");
  const Scalar amp = safe_exp(-cov_quad_form(cov, f) / 2);
  const Scalar phase = inner_product(mean, f, cov.grid);
  return {amp * std::cos(phase), amp * std::sin(phase)};
}

/*
 * V_n(f) = n^{-1/2} sum_j { cos<f, X_j - center> + sin<f, X_j - center>
 *                           - exp(-<cov f, f>/2) }.
 * center and cov are passed in rather than recomputed so the bootstrap can
 * supply resample-specific estimates; the canonical statistic uses
 * sample_mean and sample_covariance of `sample`.
 */
template <typename Scalar>
Scalar v_n(const FunctionalSampleT<Scalar>& sample, const VectorX<Scalar>& f,
           const VectorX<Scalar>& center,
           const CovarianceOperatorT<Scalar>& cov) {
  detail::require_aligned(sample.grid, f, "v_n");
  detail::require_aligned(sample.grid, center, "v_n");
  detail::require_same_grid(sample.grid, cov.grid, "v_n");
  const Index n = sample.n();
  VectorX<Scalar> wf = sample.grid.weights.array() * f.array();
  VectorX<Scalar> angles = (sample.curves.rowwise() - center.transpose()) * wf;
  const Scalar gauss = safe_exp(-cov_quad_form(cov, f) / 2);
  const Scalar sum =
      angles.array().cos().sum() + angles.array().sin().sum() - Scalar(n) * gauss;
  return sum / std::sqrt(Scalar(n));
}

namespace detail {

/*
 * Batched z(f_a) = V_n(f_a)/sqrt(n) over a probe set, blocked so memory
 * stays bounded for very large M. sigma_f^2 is computed once per probe via
 * the identity <C_n f, f> = n^{-1} sum_j <f, X_j - mean>^2.
 */
template <typename Scalar>
VectorX<Scalar> z_values(const FunctionalSampleT<Scalar>& sample,
                         const ProbeSetT<Scalar>& probes) {
  require_same_grid(sample.grid, probes.grid, "statistic");
  const Index n = sample.n();
  if (n < 1) throw std::invalid_argument("statistic: empty sample");
  const Index M = probes.count();
  MatrixX<Scalar> centered =
      sample.curves.rowwise() - sample.curves.colwise().mean();
  VectorX<Scalar> z(M);
  const Index block = 8192;
  for (Index start = 0; start < M; start += block) {
    const Index len = std::min(block, M - start);
    MatrixX<Scalar> weighted = probes.probes.middleRows(start, len).array()
                                   .rowwise() *
                               sample.grid.weights.transpose().array();
    MatrixX<Scalar> angles(n, len);
    angles.noalias() = centered * weighted.transpose();
    for (Index a = 0; a < len; ++a) {
      const Scalar sigma2 = angles.col(a).squaredNorm() / Scalar(n);
      const Scalar mean_trig = (angles.col(a).array().cos().sum() +
                                angles.col(a).array().sin().sum()) /
                               Scalar(n);
      z[start + a] = mean_trig - safe_exp(-sigma2 / 2);
    }
  }
  return z;
}

}  // namespace detail

/// Monte Carlo statistic: nT_n = M^{-1} sum_a V_n(f_a)^2, with the Monte
/// Carlo standard error of that average.
template <typename Scalar>
StatisticValueT<Scalar> nT_mc(const FunctionalSampleT<Scalar>& sample,
                              const ProbeSetT<Scalar>& probes) {
  const Index M = probes.count();
  if (M < 2) throw std::invalid_argument("nT_mc: need M >= 2");
  if (sample.n() < 2) throw std::invalid_argument("nT_mc: need n >= 2");
  VectorX<Scalar> z = detail::z_values(sample, probes);
  VectorX<Scalar> v2 = Scalar(sample.n()) * z.array().square();
  const Scalar value = v2.mean();
  const Scalar var = (v2.array() - value).square().sum() / Scalar(M - 1);
  return {value, StatMethod::monte_carlo, M,
          std::sqrt(var / Scalar(M))};
}

/// Plug-in estimate of z(f) = E cos<f,X-mu> + E sin<f,X-mu> - e^{-sigma_f^2/2};
/// identically V_n(f)/sqrt(n) with the canonical center and covariance.
template <typename Scalar>
Scalar z_hat(const FunctionalSampleT<Scalar>& sample,
             const VectorX<Scalar>& f) {
  detail::require_aligned(sample.grid, f, "z_hat");
  const Index n = sample.n();
  if (n < 2) throw std::invalid_argument("z_hat: need n >= 2");
  VectorX<Scalar> wf = sample.grid.weights.array() * f.array();
  VectorX<Scalar> angles =
      (sample.curves.rowwise() - sample.curves.colwise().mean()) * wf;
  const Scalar sigma2 = angles.squaredNorm() / Scalar(n);
  return (angles.array().cos().sum() + angles.array().sin().sum()) / Scalar(n) -
         safe_exp(-sigma2 / 2);
}

/// Plug-in estimate of tau_Q = ||z||_Q^2, the almost-sure limit of T_n.
template <typename Scalar>
Scalar tau_hat(const FunctionalSampleT<Scalar>& sample,
               const ProbeSetT<Scalar>& probes) {
  if (probes.count() < 1) throw std::invalid_argument("tau_hat: need M >= 1");
  if (sample.n() < 2) throw std::invalid_argument("tau_hat: need n >= 2");
  return detail::z_values(sample, probes).array().square().mean();
}

/*
 * Exact evaluation of the three Q-integrals of the statistic for Gaussian Q.
 * Everything is expressed through S = R_Q W^{1/2} with R_Q the symmetric
 * square root of W^{1/2} K_Q W^{1/2}: writing z_j = S (X_j - mean) and
 * J = I + Z Z'/n,
 *
 *   int cos<f, X_j - X_k> Q(df)                     = exp(-|z_j - z_k|^2 / 2)
 *   int cos<f, X_j - mean> e^{-<C_n f,f>/2} Q(df)   = det(J)^{-1/2}
 *                                        * exp(-z_j' J^{-1} z_j / 2)
 *   int e^{-<C_n f,f>} Q(df)                        = det(2J - I)^{-1/2}
 *
 * J is symmetric with spectrum >= 1, so the Cholesky route is stable and the
 * probe kernel K_Q may be singular (the Wiener kernel is, at t = 0).
 */
template <typename Scalar>
class ClosedFormEvaluatorT {
 public:
  explicit ClosedFormEvaluatorT(const GaussianMeasureT<Scalar>& measure)
      : grid_(measure.grid) {
    MatrixX<Scalar> kq = kernel_matrix(measure).kernel;
    VectorX<Scalar> sqrt_w = grid_.weights.array().sqrt();
    MatrixX<Scalar> weighted =
        sqrt_w.asDiagonal() * kq * sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(weighted);
    if (eig.info() != Eigen::Success)
      throw numeric_error("closed form: probe kernel eigendecomposition failed");
    MatrixX<Scalar> root =
        eig.eigenvectors() *
        eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt().asDiagonal() *
        eig.eigenvectors().transpose();
    transform_.noalias() = root * sqrt_w.asDiagonal();
  }

  const GridT<Scalar>& grid() const { return grid_; }

  /// int cos<f, d> Q(df) = exp(-d' W K_Q W d / 2).
  Scalar integral_cos(const VectorX<Scalar>& d) const {
    detail::require_aligned(grid_, d, "integral_cos");
    return safe_exp(-(transform_ * d).squaredNorm() / 2);
  }

  /// Factorization pieces shared by the covariance-dependent integrals.
  struct Prepared {
    Eigen::LLT<MatrixX<Scalar>> llt;    // of J = I + S C S'
    Eigen::LLT<MatrixX<Scalar>> llt2;   // of I + 2 S C S'
    Scalar log_det = 0;                 // log det J
    Scalar log_det2 = 0;                // log det (I + 2 S C S')
  };

  Prepared prepare(const CovarianceOperatorT<Scalar>& cov) const {
    detail::require_same_grid(grid_, cov.grid, "closed form");
    MatrixX<Scalar> b =
        transform_ * cov.kernel * transform_.transpose();
    return prepare_from_quadratic(b);
  }

  /// int cos<f, d> exp(-<C f, f>/2) Q(df).
  Scalar integral_cos_exp(const Prepared& prepared,
                          const VectorX<Scalar>& d) const {
    detail::require_aligned(grid_, d, "integral_cos_exp");
    VectorX<Scalar> c = transform_ * d;
    VectorX<Scalar> y = prepared.llt.matrixL().solve(c);
    return safe_exp(-(y.squaredNorm() + prepared.log_det) / 2);
  }

  /// int exp(-<C f, f>) Q(df).
  Scalar integral_exp(const Prepared& prepared) const {
    return safe_exp(-prepared.log_det2 / 2);
  }

  /// nT_n evaluated exactly, batched over the sample.
  StatisticValueT<Scalar> evaluate(const FunctionalSampleT<Scalar>& sample) const {
    detail::require_same_grid(grid_, sample.grid, "closed form");
    const Index n = sample.n();
    if (n < 2) throw std::invalid_argument("closed form: need n >= 2");

    MatrixX<Scalar> centered =
        sample.curves.rowwise() - sample.curves.colwise().mean();
    MatrixX<Scalar> z(transform_.rows(), n);
    z.noalias() = transform_ * centered.transpose();
    MatrixX<Scalar> b(z.rows(), z.rows());
    b.noalias() = z * z.transpose() / Scalar(n);
    Prepared prepared = prepare_from_quadratic(b);

    // pairwise cosine integrals via the Gram matrix of the z_j
    MatrixX<Scalar> gram(n, n);
    gram.noalias() = z.transpose() * z;
    Scalar pair_sum = 0;
    for (Index j = 0; j < n; ++j)
      for (Index k = j + 1; k < n; ++k)
        pair_sum += safe_exp(-(gram(j, j) - 2 * gram(j, k) + gram(k, k)) / 2);

    MatrixX<Scalar> y = prepared.llt.matrixL().solve(z);
    Scalar mid_sum = 0;
    for (Index j = 0; j < n; ++j)
      mid_sum += safe_exp(-(y.col(j).squaredNorm() + prepared.log_det) / 2);

    const Scalar t =
        Scalar(1) / Scalar(n) + Scalar(2) / (Scalar(n) * Scalar(n)) * pair_sum -
        Scalar(2) / Scalar(n) * mid_sum + safe_exp(-prepared.log_det2 / 2);
    return {Scalar(n) * t, StatMethod::closed_form, 0, std::nullopt};
  }

 private:
  Prepared prepare_from_quadratic(const MatrixX<Scalar>& b) const {
    Prepared prepared;
    MatrixX<Scalar> j = b;
    j.diagonal().array() += 1;
    prepared.llt.compute(j);
    if (prepared.llt.info() != Eigen::Success)
      throw numeric_error("closed form: Cholesky of I + S C S' failed");
    prepared.log_det =
        2 * prepared.llt.matrixLLT().diagonal().array().log().sum();
    MatrixX<Scalar> j2 = 2 * b;
    j2.diagonal().array() += 1;
    prepared.llt2.compute(j2);
    if (prepared.llt2.info() != Eigen::Success)
      throw numeric_error("closed form: Cholesky of I + 2 S C S' failed");
    prepared.log_det2 =
        2 * prepared.llt2.matrixLLT().diagonal().array().log().sum();
    return prepared;
  }

  GridT<Scalar> grid_;
  MatrixX<Scalar> transform_;  // S = R_Q W^{1/2}
};
using ClosedFormEvaluator = ClosedFormEvaluatorT<double>;

template <typename Scalar>
StatisticValueT<Scalar> nT_closed_form(const FunctionalSampleT<Scalar>& sample,
                                       const GaussianMeasureT<Scalar>& measure) {
  return ClosedFormEvaluatorT<Scalar>(measure).evaluate(sample);
}

namespace detail {
// exp(x) - 1 - x - x^2/2 without cancellation for small |x|.
template <typename Scalar>
Scalar exp_tail3(Scalar x) {
  if (std::abs(x) < Scalar(0.01)) {
    // x^3/6 * (1 + x/4 + x^2/20 + x^3/120)
    return x * x * x / 6 *
           (1 + x / 4 + x * x / 20 + x * x * x / 120);
  }
  return std::exp(x) - 1 - x - x * x / 2;
}
}  // namespace detail

/// Covariance kernel of the limiting Gaussian element of the statistic under
/// the null: exp(-(s_f^2+s_g^2)/2) { e^{s_fg} - 1 - s_fg - s_fg^2/2 }.
template <typename Scalar>
Scalar null_cov_kernel(const CovarianceOperatorT<Scalar>& cov,
                       const VectorX<Scalar>& f, const VectorX<Scalar>& g) {
  const Scalar sf2 = cov_quad_form(cov, f);
  const Scalar sg2 = cov_quad_form(cov, g);
  const Scalar sfg = cov_bilinear(cov, f, g);
  return safe_exp(-(sf2 + sg2) / 2) * detail::exp_tail3(sfg);
}

/// Influence function of the null limit: with cov = C this is Psi(f,x), with
/// cov = C_n its plug-in version driving the bootstrap limit.
template <typename Scalar>
Scalar influence_null(const VectorX<Scalar>& f, const VectorX<Scalar>& x,
                      const CovarianceOperatorT<Scalar>& cov) {
  detail::require_aligned(cov.grid, f, "influence_null");
  detail::require_aligned(cov.grid, x, "influence_null");
  const Scalar t = inner_product(f, x, cov.grid);
  const Scalar sigma2 = cov_quad_form(cov, f);
  return std::cos(t) + std::sin(t) -
         safe_exp(-sigma2 / 2) * (1 + t - (t * t - sigma2) / 2);
}

/// Plug-in influence function of the alternative limit (xi-hat); expectations
/// are replaced by sample means over the centred data.
template <typename Scalar>
Scalar influence_alt(const VectorX<Scalar>& f, const VectorX<Scalar>& x,
                     const FunctionalSampleT<Scalar>& sample) {
  detail::require_aligned(sample.grid, f, "influence_alt");
  detail::require_aligned(sample.grid, x, "influence_alt");
  const Index n = sample.n();
  if (n < 2) throw std::invalid_argument("influence_alt: need n >= 2");
  VectorX<Scalar> wf = sample.grid.weights.array() * f.array();
  VectorX<Scalar> angles =
      (sample.curves.rowwise() - sample.curves.colwise().mean()) * wf;
  const Scalar mean_cos = angles.array().cos().mean();
  const Scalar mean_sin = angles.array().sin().mean();
  const Scalar sigma2 = angles.squaredNorm() / Scalar(n);
  const Scalar txf = inner_product(f, x, sample.grid);
  return std::cos(txf) - mean_cos + std::sin(txf) - mean_sin +
         txf * (mean_sin - mean_cos) +
         safe_exp(-sigma2 / 2) * (txf * txf - sigma2) / 2;
}

/*
 * Monte Carlo double integral for the alternative-limit variance
 * sigma^2 = 4 int int K*(f,g) z(f) z(g) dQ dQ, with the plug-in kernel
 * K*(f,g) = n^{-1} sum_j xi(f, X_j - mean) xi(g, X_j - mean). Collapses to
 * 4 |Xi z|^2 / (n M^2), which is nonnegative by construction.
 */
template <typename Scalar>
Scalar sigma2_hat(const FunctionalSampleT<Scalar>& sample,
                  const ProbeSetT<Scalar>& probes) {
  detail::require_same_grid(sample.grid, probes.grid, "sigma2_hat");
  const Index n = sample.n();
  const Index M = probes.count();
  if (n < 2) throw std::invalid_argument("sigma2_hat: need n >= 2");
  if (M < 2) throw std::invalid_argument("sigma2_hat: need M >= 2");

  MatrixX<Scalar> centered =
      sample.curves.rowwise() - sample.curves.colwise().mean();
  MatrixX<Scalar> weighted = probes.probes.array().rowwise() *
                             sample.grid.weights.transpose().array();
  MatrixX<Scalar> angles(n, M);
  angles.noalias() = centered * weighted.transpose();

  VectorX<Scalar> g = VectorX<Scalar>::Zero(n);
  for (Index a = 0; a < M; ++a) {
    const auto col = angles.col(a).array();
    const Scalar sigma2 = angles.col(a).squaredNorm() / Scalar(n);
    const Scalar mean_cos = col.cos().mean();
    const Scalar mean_sin = col.sin().mean();
    const Scalar damp = safe_exp(-sigma2 / 2);
    const Scalar z = mean_cos + mean_sin - damp;
    // xi-hat(f_a, X_j - mean), all j at once
    g.array() += z * (col.cos() - mean_cos + col.sin() - mean_sin +
                      col * (mean_sin - mean_cos) +
                      damp * (col.square() - sigma2) / 2);
  }
  return 4 * g.squaredNorm() / (Scalar(n) * Scalar(M) * Scalar(M));
}

}  // namespace hgof

#endif  // HGOF_STATISTIC_HPP
