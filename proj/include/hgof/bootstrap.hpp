#ifndef HGOF_BOOTSTRAP_HPP
#define HGOF_BOOTSTRAP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/measures.hpp"
#include "hgof/parallel.hpp"
#include "hgof/statistic.hpp"

namespace hgof {

/*
 * Parametric bootstrap calibration: B resamples from N(0, C_n), each scored
 * with the same statistic recomputed from the resample's own mean and
 * covariance. The resamples are centred Gaussian with no re-centering at the
 * sample mean; the statistic is translation invariant so nothing is lost.
 */

struct BootstrapOptions {
  Index M = 1000;               // probe count (monte_carlo method)
  Index B = 200;                // bootstrap resamples
  double alpha = 0.05;          // nominal level
  std::uint64_t seed = 0;       // master seed
  StatMethod method = StatMethod::closed_form;
  bool fresh_probes = false;    // draw new probes per resample (mc only)
  unsigned threads = 1;
};

/// Everything needed to reproduce a TestResult bit for bit.
struct ConfigRecord {
  Index n = 0;
  Index m = 0;
  Index M = 0;
  Index B = 0;
  double alpha = 0.05;
  KernelFamily measure = KernelFamily::wiener;
  double measure_param = 1.0;
  std::uint64_t seed = 0;
  StatMethod method = StatMethod::closed_form;
  bool fresh_probes = false;
  double clipped_fraction = 0.0;  // negative-eigenvalue mass clipped in C_n
};

struct TestResult {
  StatisticValue observed;
  std::vector<double> boot_stats;  // nT_n^{*1}, ..., nT_n^{*B}
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  ConfigRecord config;
};

/// Monte Carlo exact p-value: (1 + #{b : boot[b] >= observed}) / (B + 1).
inline double bootstrap_p_value(std::span<const double> boot_stats,
                                double observed) {
  if (boot_stats.empty())
    throw std::invalid_argument("bootstrap_p_value: empty bootstrap sample");
  std::size_t count = 0;
  for (double s : boot_stats)
    if (s >= observed) ++count;
  return double(1 + count) / double(boot_stats.size() + 1);
}

/// Upper alpha-percentile of the bootstrap distribution: the k-th order
/// statistic with k = ceil((1-alpha)(B+1)), clamped to [1, B].
inline double percentile(std::span<const double> boot_stats, double alpha) {
  if (boot_stats.empty())
    throw std::invalid_argument("percentile: empty list");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("percentile: alpha must be in (0,1)");
  const std::size_t b = boot_stats.size();
  double raw = (1.0 - alpha) * double(b + 1);
  // snap ranks that are integers up to roundoff, e.g. (1 - 0.95) * 20
  const double rounded = std::round(raw);
  double rank = std::abs(raw - rounded) < 1e-9 ? rounded : std::ceil(raw);
  std::size_t k = rank < 1.0 ? 1 : static_cast<std::size_t>(rank);
  if (k > b) k = b;
  std::vector<double> sorted(boot_stats.begin(), boot_stats.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return sorted[k - 1];
}

template <typename Scalar>
TestResult bootstrap_test(const FunctionalSampleT<Scalar>& sample,
                          const GaussianMeasureT<Scalar>& measure,
                          const BootstrapOptions& options) {
  static_assert(std::is_same_v<Scalar, double>,
                "bootstrap_test records are double precision");
  const Index n = sample.n();
  if (n < 2) throw std::invalid_argument("bootstrap_test: need n >= 2");
  if (options.B < 19)
    throw std::invalid_argument(
        "bootstrap_test: need B >= 19 to resolve alpha = 0.05");
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw std::invalid_argument("bootstrap_test: alpha must be in (0,1)");
  detail::require_same_grid(sample.grid, measure.grid, "bootstrap_test");

  const bool mc = options.method == StatMethod::monte_carlo;

  // Shared machinery: the closed-form evaluator or the observed probe set.
  // Probes are reused across observed and bootstrap statistics (unless
  // fresh_probes), which couples the Monte Carlo error and sharply reduces
  // p-value noise.
  std::optional<ClosedFormEvaluatorT<Scalar>> evaluator;
  std::optional<ProbeSetT<Scalar>> probes;
  if (mc)
    probes = sample_probes(measure, options.M, options.seed, 0);
  else
    evaluator.emplace(measure);

  TestResult result;
  result.observed = mc ? nT_mc(sample, *probes) : evaluator->evaluate(sample);

  CovarianceOperatorT<Scalar> cov = sample_covariance(sample);
  GpFactorT<Scalar> factor(cov);

  result.boot_stats.resize(options.B);
  parallel_for(static_cast<std::size_t>(options.B), options.threads,
               [&](std::size_t b) {
                 auto engine =
                     make_engine(options.seed, stream::bootstrap, b + 1);
                 FunctionalSampleT<Scalar> resample{sample.grid,
                                                    factor.sample(n, engine)};
                 StatisticValueT<Scalar> stat;
                 if (mc) {
                   if (options.fresh_probes) {
                     auto own = sample_probes(measure, options.M, options.seed,
                                              b + 1);
                     stat = nT_mc(resample, own);
                   } else {
                     stat = nT_mc(resample, *probes);
                   }
                 } else {
                   stat = evaluator->evaluate(resample);
                 }
                 result.boot_stats[b] = stat.n_T_n;
               });

  result.p_value = bootstrap_p_value(result.boot_stats, result.observed.n_T_n);
  result.alpha = options.alpha;
  result.reject = result.p_value <= options.alpha;
  result.config = ConfigRecord{n,
                               sample.m(),
                               mc ? options.M : 0,
                               options.B,
                               options.alpha,
                               measure.family,
                               measure.param,
                               options.seed,
                               options.method,
                               options.fresh_probes,
                               factor.clipped_fraction()};
  return result;
}

}  // namespace hgof

#endif  // HGOF_BOOTSTRAP_HPP
