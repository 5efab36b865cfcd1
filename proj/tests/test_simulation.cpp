#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hgof/simulation.hpp"

using namespace hgof;

TEST_CASE("gen_null Wiener paths start at zero and reproduce", "[simulation]") {
  Grid grid = make_grid(31);
  FunctionalSample a = gen_null(NullProcess::wiener, 12, grid, 5);
  REQUIRE(a.curves.col(0).isZero(0.0));
  FunctionalSample b = gen_null(NullProcess::wiener, 12, grid, 5);
  REQUIRE(a.curves == b.curves);
  FunctionalSample c = gen_null(NullProcess::wiener, 12, grid, 6);
  REQUIRE(a.curves != c.curves);
}

TEST_CASE("gen_null OU has unit marginal variance", "[simulation][mc]") {
  Grid grid = make_grid(11);
  const Index n = 20000;
  FunctionalSample sample = gen_null(NullProcess::ornstein_uhlenbeck, n, grid, 9);
  const double se = std::sqrt(2.0 / double(n - 1));
  for (Index i : {Index(0), Index(5), Index(10)}) {
    Eigen::VectorXd col = sample.curves.col(i);
    const double var = (col.array() - col.mean()).square().sum() / double(n - 1);
    REQUIRE(std::abs(var - 1.0) < 3 * se);
  }
}

TEST_CASE("coefficient laws match their moments", "[simulation][mc]") {
  const Index n = 10000;  // 11 coefficients each: 1.1e5 draws
  const double half_normal_mean = std::sqrt(2.0 / std::numbers::pi);

  Eigen::MatrixXd base = alt_coefficient_matrix(
      {AltModel::alt1, AltVariant::base}, n, 31);
  const double mean_base = base.mean();
  const double se = 1.0 / std::sqrt(double(n * 11));
  REQUIRE(std::abs(mean_base - half_normal_mean) < 3 * se);
  REQUIRE(base.minCoeff() >= 0.0);  // half-normal support

  Eigen::MatrixXd mix = alt_coefficient_matrix(
      {AltModel::alt1, AltVariant::mixture}, n, 31);
  REQUIRE(std::abs(mix.mean() - half_normal_mean / 2) < 4 * se);
  REQUIRE(mix.minCoeff() < 0.0);  // the normal half reaches below zero

  Eigen::MatrixXd lap = alt_coefficient_matrix(
      {AltModel::alt1, AltVariant::laplace}, n, 31);
  REQUIRE(std::abs(lap.mean()) < 4 * std::sqrt(2.0) * se);
  const double lap_var = (lap.array() - lap.mean()).square().mean();
  REQUIRE(std::abs(lap_var - 2.0) < 0.1);  // standard Laplace variance
}

TEST_CASE("alt models share coefficient streams where laws agree",
          "[simulation]") {
  const Index n = 50;
  Eigen::MatrixXd alt1 =
      alt_coefficient_matrix({AltModel::alt1, AltVariant::base}, n, 77);
  Eigen::MatrixXd alt2 =
      alt_coefficient_matrix({AltModel::alt2, AltVariant::base}, n, 77);
  Eigen::MatrixXd alt3 =
      alt_coefficient_matrix({AltModel::alt3, AltVariant::base}, n, 77);

  // alt2 switches C4, C5, S4, S5 (columns 4, 5, 9, 10) to normal
  for (Index k : {0, 1, 2, 3, 6, 7, 8}) REQUIRE(alt1.col(k) == alt2.col(k));
  for (Index k : {4, 5, 9, 10}) REQUIRE(alt1.col(k) != alt2.col(k));

  // alt3 keeps only A0, C1, S1 (columns 0, 1, 6) on the variant law
  for (Index k : {0, 1, 6}) REQUIRE(alt1.col(k) == alt3.col(k));
  for (Index k : {2, 3, 4, 5, 7, 8, 9, 10}) REQUIRE(alt1.col(k) != alt3.col(k));
}

TEST_CASE("alt3 with stubbed variant coefficients is a centred Gaussian",
          "[simulation][mc]") {
  // zero out A0, C1, S1: what remains is sum of N(0,1) Fourier coefficients
  // with covariance sum_{j=2..5} 2 cos(2 pi j (s-t))
  Grid grid = make_grid(21);
  const Index n = 20000;
  Eigen::MatrixXd coeffs =
      alt_coefficient_matrix({AltModel::alt3, AltVariant::base}, n, 13);
  coeffs.col(0).setZero();
  coeffs.col(1).setZero();
  coeffs.col(6).setZero();
  FunctionalSample sample = curves_from_coefficients(coeffs, grid);

  Eigen::VectorXd mean = sample_mean(sample);
  Eigen::MatrixXd kernel = sample_covariance(sample).kernel;
  auto theory = [&](double s, double t) {
    double value = 0;
    for (int j = 2; j <= 5; ++j)
      value += 2 * std::cos(2 * std::numbers::pi * j * (s - t));
    return value;
  };
  for (Index i : {Index(0), Index(7), Index(14)}) {
    REQUIRE(std::abs(mean[i]) <
            4 * std::sqrt(theory(0, 0) / double(n)));
    for (Index k : {Index(3), Index(10), Index(20)}) {
      const double target = theory(grid.points[i], grid.points[k]);
      const double se = std::sqrt(
          (theory(0, 0) * theory(0, 0) + target * target) / double(n));
      REQUIRE(std::abs(kernel(i, k) - target) <= 4 * se);
    }
  }
}

TEST_CASE("run_experiment determinism and rate structure", "[simulation]") {
  ExperimentConfig config;
  config.dgp = NullProcess::wiener;
  config.n = 15;
  config.reps = 12;
  config.B = 19;
  config.m = 15;
  config.seed = 2024;
  config.alphas = {0.05, 0.10, 0.5};

  std::vector<RepRecord> records_a, records_b;
  PowerRow a = run_experiment(config, &records_a);
  PowerRow b = run_experiment(config, &records_b);
  REQUIRE(a.rejection_rates == b.rejection_rates);
  REQUIRE(records_a.size() == 12);
  for (std::size_t r = 0; r < records_a.size(); ++r) {
    REQUIRE(records_a[r].p_value == records_b[r].p_value);
    REQUIRE(records_a[r].n_T_n == records_b[r].n_T_n);
    REQUIRE(records_a[r].error.empty());
  }

  // monotone in alpha by the p-value definition
  REQUIRE(a.rejection_rates[0] <= a.rejection_rates[1]);
  REQUIRE(a.rejection_rates[1] <= a.rejection_rates[2]);

  // worker count changes nothing
  config.threads = 3;
  std::vector<RepRecord> records_c;
  run_experiment(config, &records_c);
  for (std::size_t r = 0; r < records_a.size(); ++r)
    REQUIRE(records_a[r].p_value == records_c[r].p_value);

  config.reps = 1;
  PowerRow single = run_experiment(config);
  REQUIRE((single.rejection_rates[0] == 0.0 || single.rejection_rates[0] == 1.0));
}

TEST_CASE("run_experiment flags bad configs", "[simulation]") {
  ExperimentConfig config;
  config.reps = 0;
  REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
  config.reps = 5;
  config.alphas = {1.5};
  REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
  config.alphas = {0.05};
  config.n = 1;
  REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("alt1 power clears the null level by a wide margin",
          "[simulation][mc]") {
  // desk smoke test; the full-scale benchmarks live in the acceptance suite
  ExperimentConfig config;
  config.dgp = AlternativeSpec{AltModel::alt1, AltVariant::base};
  config.n = 50;
  config.reps = 40;
  config.B = 99;
  config.m = 51;
  config.seed = 31337;
  config.alphas = {0.05};
  PowerRow row = run_experiment(config);
  REQUIRE(row.rejection_rates[0] >= 0.3);
}
