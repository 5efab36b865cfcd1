#ifndef HGOF_SIMULATION_HPP
#define HGOF_SIMULATION_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hgof/bootstrap.hpp"
#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/measures.hpp"
#include "hgof/parallel.hpp"
#include "hgof/rng.hpp"

namespace hgof {

/*
 * Data-generating processes for the power study: Wiener and
 * Ornstein-Uhlenbeck nulls, and the Fourier-coefficient alternatives
 *   Z(t) = A0 + sqrt(2) sum_{j=1..5} C_j cos(2 pi j t)
 *             + sqrt(2) sum_{j=1..5} S_j sin(2 pi j t),
 * where a model/variant pair selects which coefficients leave the standard
 * normal law. The OU null is the stationary kernel exp(-|s-t|) with unit
 * marginal variance.
 */

enum class NullProcess { wiener, ornstein_uhlenbeck };

enum class AltModel { alt1, alt2, alt3 };
enum class AltVariant { base, mixture, laplace };

struct AlternativeSpec {
  AltModel model = AltModel::alt1;
  AltVariant variant = AltVariant::base;
};

using DgpSpec = std::variant<NullProcess, AlternativeSpec>;

inline const char* to_string(NullProcess process) {
  return process == NullProcess::wiener ? "wiener" : "ou";
}
inline const char* to_string(AltModel model) {
  switch (model) {
    case AltModel::alt1: return "alt1";
    case AltModel::alt2: return "alt2";
    case AltModel::alt3: return "alt3";
  }
  return "?";
}
inline const char* to_string(AltVariant variant) {
  switch (variant) {
    case AltVariant::base: return "base";
    case AltVariant::mixture: return "mixture";
    case AltVariant::laplace: return "laplace";
  }
  return "?";
}
inline std::string to_string(const DgpSpec& dgp) {
  if (const auto* process = std::get_if<NullProcess>(&dgp))
    return to_string(*process);
  const auto& alt = std::get<AlternativeSpec>(dgp);
  return std::string(to_string(alt.model)) + "/" + to_string(alt.variant);
}

template <typename Scalar>
FunctionalSampleT<Scalar> gen_null(NullProcess process, Index n,
                                   const GridT<Scalar>& grid,
                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_null: need n >= 1");
  if (process == NullProcess::wiener) {
    auto engine = make_engine(seed, stream::process, 0);
    return {grid, wiener_paths(n, grid, engine)};
  }
  CovarianceOperatorT<Scalar> cov{
      grid, family_kernel(KernelFamily::ornstein_uhlenbeck, grid, Scalar(1))};
  return sample_gaussian_process(cov, n, seed);
}

namespace detail {

inline constexpr Index kAltCoefficients = 11;  // A0, C1..C5, S1..S5

// Columns of the coefficient matrix that take the variant law; the rest
// stay standard normal.
inline bool is_variant_coefficient(AltModel model, Index k) {
  switch (model) {
    case AltModel::alt1:
      return true;
    case AltModel::alt2:  // A0, C1..C3, S1..S3
      return k == 0 || (k >= 1 && k <= 3) || (k >= 6 && k <= 8);
    case AltModel::alt3:  // A0, C1, S1
      return k == 0 || k == 1 || k == 6;
  }
  return false;
}

template <typename Scalar>
Scalar draw_variant(AltVariant variant, std::mt19937_64& engine) {
  std::normal_distribution<Scalar> normal;
  switch (variant) {
    case AltVariant::base:
      return std::abs(normal(engine));
    case AltVariant::mixture: {
      std::uniform_real_distribution<Scalar> uniform;
      const bool half = uniform(engine) < Scalar(0.5);
      const Scalar z = normal(engine);
      return half ? std::abs(z) : z;
    }
    case AltVariant::laplace: {
      std::uniform_real_distribution<Scalar> uniform;
      std::exponential_distribution<Scalar> exponential(Scalar(1));
      const Scalar sign = uniform(engine) < Scalar(0.5) ? Scalar(-1) : Scalar(1);
      return sign * exponential(engine);
    }
  }
  return 0;
}

}  // namespace detail

/*
 * n x 11 coefficient draws for the alternative model. Each (curve, slot)
 * owns a private stream, so two models under the same seed differ exactly
 * in the coefficients whose law switches and nowhere else.
 */
template <typename Scalar = double>
MatrixX<Scalar> alt_coefficient_matrix(const AlternativeSpec& spec, Index n,
                                       std::uint64_t seed) {
  MatrixX<Scalar> coefficients(n, detail::kAltCoefficients);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < detail::kAltCoefficients; ++k) {
      auto engine = make_engine(seed, stream::coefficient,
                                static_cast<std::uint64_t>(j) * 16 + k);
      if (detail::is_variant_coefficient(spec.model, k)) {
        coefficients(j, k) = detail::draw_variant<Scalar>(spec.variant, engine);
      } else {
        std::normal_distribution<Scalar> normal;
        coefficients(j, k) = normal(engine);
      }
    }
  }
  return coefficients;
}

/// Tabulates Z(t) on the grid from an n x 11 coefficient matrix.
template <typename Scalar>
FunctionalSampleT<Scalar> curves_from_coefficients(
    const MatrixX<Scalar>& coefficients, const GridT<Scalar>& grid) {
  if (coefficients.cols() != detail::kAltCoefficients)
    throw std::invalid_argument("curves_from_coefficients: need 11 columns");
  const Index m = grid.size();
  const Scalar root2 = std::sqrt(Scalar(2));
  MatrixX<Scalar> basis(detail::kAltCoefficients, m);
  basis.row(0).setOnes();
  for (Index j = 1; j <= 5; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Scalar arg = 2 * std::numbers::pi_v<Scalar> * Scalar(j) * grid.points[i];
      basis(j, i) = root2 * std::cos(arg);
      basis(5 + j, i) = root2 * std::sin(arg);
    }
  }
  return {grid, coefficients * basis};
}

template <typename Scalar>
FunctionalSampleT<Scalar> gen_alternative(const AlternativeSpec& spec, Index n,
                                          const GridT<Scalar>& grid,
                                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_alternative: need n >= 1");
  return curves_from_coefficients(alt_coefficient_matrix<Scalar>(spec, n, seed),
                                  grid);
}

template <typename Scalar>
FunctionalSampleT<Scalar> generate(const DgpSpec& dgp, Index n,
                                   const GridT<Scalar>& grid,
                                   std::uint64_t seed) {
  if (const auto* process = std::get_if<NullProcess>(&dgp))
    return gen_null(*process, n, grid, seed);
  return gen_alternative(std::get<AlternativeSpec>(dgp), n, grid, seed);
}

struct ExperimentConfig {
  DgpSpec dgp = NullProcess::wiener;
  Index n = 50;
  Index reps = 500;
  Index M = 1000;
  Index B = 200;
  std::vector<double> alphas = {0.05, 0.10};
  Index m = 101;
  GridScheme scheme = GridScheme::trapezoid;
  KernelFamily measure = KernelFamily::wiener;
  double measure_param = 1.0;
  std::uint64_t seed = 0;
  StatMethod method = StatMethod::closed_form;
  bool fresh_probes = false;
  unsigned threads = 1;
};

/// One replication's audit record.
struct RepRecord {
  Index rep = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t test_seed = 0;
  double n_T_n = 0;
  double p_value = 1;
  std::string error;  // nonempty when the replication failed
};

struct PowerRow {
  ExperimentConfig config;
  std::vector<double> rejection_rates;  // one per alpha
  std::vector<double> std_errors;       // binomial SE per alpha
  double wall_seconds = 0;
};

/// Thrown when a replication fails; carries the records completed so far so
/// the caller can persist partial results.
class experiment_error : public std::runtime_error {
 public:
  experiment_error(const std::string& what, std::vector<RepRecord> partial)
      : std::runtime_error(what), partial_records(std::move(partial)) {}
  std::vector<RepRecord> partial_records;
};

/*
 * Runs `reps` independent replications of draw-data-then-test and aggregates
 * rejection rates. Each replication derives its data and test seeds from
 * (master seed, rep index), so execution order and worker count do not
 * affect any record.
 */
inline PowerRow run_experiment(const ExperimentConfig& config,
                               std::vector<RepRecord>* records_out = nullptr) {
  if (config.reps < 1)
    throw std::invalid_argument("run_experiment: need reps >= 1");
  if (config.alphas.empty())
    throw std::invalid_argument("run_experiment: need at least one alpha");
  for (double alpha : config.alphas)
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("run_experiment: alpha must be in (0,1)");
  if (config.n < 2) throw std::invalid_argument("run_experiment: need n >= 2");

  const Grid grid = make_grid(config.m, config.scheme);
  GaussianMeasure measure{config.measure, config.measure_param, grid, {}};

  BootstrapOptions options;
  options.M = config.M;
  options.B = config.B;
  options.alpha = config.alphas.front();
  options.method = config.method;
  options.fresh_probes = config.fresh_probes;
  options.threads = 1;  // parallelism lives at the replication level

  const auto start = std::chrono::steady_clock::now();
  std::vector<RepRecord> records(config.reps);
  parallel_for(static_cast<std::size_t>(config.reps), config.threads,
               [&](std::size_t r) {
                 RepRecord& record = records[r];
                 record.rep = static_cast<Index>(r);
                 record.data_seed = derive_seed(config.seed, stream::dgp, r);
                 record.test_seed =
                     derive_seed(config.seed, stream::replication, r);
                 try {
                   FunctionalSample data =
                       generate(config.dgp, config.n, grid, record.data_seed);
                   BootstrapOptions rep_options = options;
                   rep_options.seed = record.test_seed;
                   TestResult result = bootstrap_test(data, measure, rep_options);
                   record.n_T_n = result.observed.n_T_n;
                   record.p_value = result.p_value;
                 } catch (const std::exception& e) {
                   record.error = e.what();
                 }
               });

  for (const RepRecord& record : records) {
    if (!record.error.empty()) {
      std::vector<RepRecord> partial;
      for (const RepRecord& r : records)
        if (r.error.empty() || r.rep == record.rep) partial.push_back(r);
      throw experiment_error("run_experiment: replication " +
                                 std::to_string(record.rep) +
                                 " failed: " + record.error,
                             std::move(partial));
    }
  }

  PowerRow row;
  row.config = config;
  for (double alpha : config.alphas) {
    Index rejections = 0;
    for (const RepRecord& record : records)
      if (record.p_value <= alpha) ++rejections;
    const double rate = double(rejections) / double(config.reps);
    row.rejection_rates.push_back(rate);
    row.std_errors.push_back(std::sqrt(rate * (1 - rate) / double(config.reps)));
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (records_out) *records_out = std::move(records);
  return row;
}

}  // namespace hgof

#endif  // HGOF_SIMULATION_HPP
