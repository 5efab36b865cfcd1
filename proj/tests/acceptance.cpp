// Acceptance suite: desk-scale reproduction of the simulation study plus the
// property-based checks of the asymptotic results. Runs every criterion at
// its pinned tolerance and prints one PASS/FAIL line each; the exit code is
// the number of failures.
//
//   acceptance [--criterion N] [--threads T]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "hgof/hgof.hpp"

using namespace hgof;

namespace {

int failures = 0;
int selected = 0;   // 0 = all
unsigned threads = 0;  // 0 = resolve from HG_THREADS / hardware

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion
            << ": " << detail << std::endl;
  if (!pass) ++failures;
}

bool want(int criterion) { return selected == 0 || selected == criterion; }

ExperimentConfig benchmark_config(DgpSpec dgp, Index n, Index reps,
                               std::uint64_t seed) {
  ExperimentConfig config;
  config.dgp = dgp;
  config.n = n;
  config.reps = reps;
  config.M = 1000;
  config.B = 200;
  config.alphas = {0.05, 0.10};
  config.m = 101;
  config.measure = KernelFamily::wiener;
  config.seed = seed;
  config.method = StatMethod::closed_form;
  config.threads = threads;
  return config;
}

std::string rate_detail(const std::string& name, const PowerRow& row) {
  std::ostringstream out;
  out << name << ": rate(.05) = " << row.rejection_rates[0] << ", rate(.10) = "
      << row.rejection_rates[1] << " [" << row.config.reps << " reps, "
      << row.wall_seconds << " s]";
  return out.str();
}

// --- criteria 1-2: empirical level under the Gaussian nulls ---------------

std::vector<RepRecord> criterion_1() {
  auto config = benchmark_config(NullProcess::wiener, 50, 500, 1001);
  std::vector<RepRecord> records;
  PowerRow row = run_experiment(config, &records);
  if (want(1)) {
    const bool pass = row.rejection_rates[0] >= 0.025 &&
                      row.rejection_rates[0] <= 0.075 &&
                      row.rejection_rates[1] >= 0.06 &&
                      row.rejection_rates[1] <= 0.14;
    report(1, pass, rate_detail("Wiener null level, n=50", row) +
                        ", target [.025,.075] x [.06,.14]");
  }
  return records;
}

void criterion_2() {
  auto config = benchmark_config(NullProcess::ornstein_uhlenbeck, 50, 500, 1002);
  PowerRow row = run_experiment(config);
  const bool pass = row.rejection_rates[0] >= 0.02 &&
                    row.rejection_rates[0] <= 0.08 &&
                    row.rejection_rates[1] >= 0.06 &&
                    row.rejection_rates[1] <= 0.14;
  report(2, pass, rate_detail("OU null level, n=50", row) +
                      ", target [.02,.08] x [.06,.14]");
}

// --- criteria 3-6: power against the Fourier-coefficient alternatives -----

double criterion_3() {
  auto config = benchmark_config(AlternativeSpec{AltModel::alt1, AltVariant::base},
                              50, 300, 1003);
  PowerRow row = run_experiment(config);
  const double power = row.rejection_rates[0];
  if (want(3))
    report(3, power >= 0.50 && power <= 0.72,
           rate_detail("Alt1/base power, n=50", row) + ", target [.50,.72]");
  return power;
}

void criterion_4() {
  auto config = benchmark_config(AlternativeSpec{AltModel::alt3, AltVariant::base},
                              50, 300, 1004);
  PowerRow row = run_experiment(config);
  const double power = row.rejection_rates[0];
  report(4, power >= 0.42 && power <= 0.62,
         rate_detail("Alt3/base power, n=50", row) + ", target [.42,.62]");
}

void criterion_5() {
  auto config = benchmark_config(AlternativeSpec{AltModel::alt1, AltVariant::base},
                              100, 300, 1005);
  PowerRow row = run_experiment(config);
  const double power = row.rejection_rates[0];
  report(5, power >= 0.87,
         rate_detail("Alt1/base power, n=100", row) + ", target >= .87");
}

void criterion_6(double alt1_base_power) {
  auto config = benchmark_config(
      AlternativeSpec{AltModel::alt1, AltVariant::mixture}, 50, 300, 1006);
  PowerRow row = run_experiment(config);
  const double gap = alt1_base_power - row.rejection_rates[0];
  std::ostringstream detail;
  detail << "base-vs-mixture power gap at n=50: " << alt1_base_power << " - "
         << row.rejection_rates[0] << " = " << gap << ", target >= 0.25";
  report(6, gap >= 0.25, detail.str());
}

// --- criterion 7: Monte Carlo vs closed form ------------------------------

void criterion_7() {
  Grid grid = make_grid(21);
  GaussianMeasure q = GaussianMeasure::wiener(grid);
  int agreements = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    FunctionalSample sample =
        sample_gaussian_process(kernel_matrix(q), 10, 20000 + trial);
    ProbeSet probes = sample_probes(q, 100000, 30000 + trial);
    StatisticValue mc = nT_mc(sample, probes);
    StatisticValue closed = nT_closed_form(sample, q);
    if (std::abs(mc.n_T_n - closed.n_T_n) <= 3 * *mc.mc_std_error)
      ++agreements;
  }
  std::ostringstream detail;
  detail << "oracle equivalence |nT_mc - nT_closed| <= 3 se: " << agreements
         << "/50 agree, target >= 47";
  report(7, agreements >= 47, detail.str());
}

// --- criterion 8: influence-function identities ---------------------------

void criterion_8() {
  Grid grid = make_grid(21);
  CovarianceOperator cov{
      grid, family_kernel(KernelFamily::ornstein_uhlenbeck, grid, 1.0)};
  const Index draws = 100000;
  FunctionalSample sample = sample_gaussian_process(cov, draws, 808);

  std::mt19937_64 engine(4242);
  std::normal_distribution<double> normal;
  auto psi_values = [&](const Eigen::VectorXd& f) {
    Eigen::VectorXd wf = grid.weights.array() * f.array();
    Eigen::ArrayXd angles = (sample.curves * wf).array();
    const double sigma2 = cov_quad_form(cov, f);
    const double damp = std::exp(-sigma2 / 2);
    return (angles.cos() + angles.sin() -
            damp * (1 + angles - (angles.square() - sigma2) / 2))
        .eval();
  };

  bool pass = true;
  double worst_mean = 0, worst_cov = 0;
  for (int pair = 0; pair < 20; ++pair) {
    Eigen::VectorXd f(grid.size()), g(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      f[i] = normal(engine);
      g[i] = normal(engine);
    }
    Eigen::ArrayXd psi_f = psi_values(f), psi_g = psi_values(g);

    const double mean_f = psi_f.mean();
    const double se_mean = std::sqrt((psi_f - mean_f).square().mean() /
                                     double(draws));
    worst_mean = std::max(worst_mean, std::abs(mean_f) / se_mean);
    if (std::abs(mean_f) > 4 * se_mean) pass = false;

    Eigen::ArrayXd product = psi_f * psi_g;
    const double cov_fg = product.mean() - mean_f * psi_g.mean();
    const double se_cov = std::sqrt(
        (product - product.mean()).square().mean() / double(draws));
    const double target = null_cov_kernel(cov, f, g);
    worst_cov = std::max(worst_cov, std::abs(cov_fg - target) / se_cov);
    if (std::abs(cov_fg - target) > 4 * se_cov) pass = false;
  }
  std::ostringstream detail;
  detail << "influence identities over 20 pairs at 1e5 draws: worst |mean|/se "
         << worst_mean << ", worst |cov err|/se " << worst_cov
         << ", target <= 4";
  report(8, pass, detail.str());
}

// --- criterion 9: exact invariants on randomized property suites ----------

void criterion_9() {
  std::mt19937_64 engine(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  bool pass = true;
  std::string first_failure;

  auto fail = [&](const std::string& what) {
    if (pass) first_failure = what;
    pass = false;
  };

  // (a) translation invariance of both statistic routes, 1e-10 relative
  {
    Grid grid = make_grid(9);
    GaussianMeasure q = GaussianMeasure::wiener(grid);
    ClosedFormEvaluator evaluator(q);
    ProbeSet probes = sample_probes(q, 16, 345);
    for (int c = 0; c < 1000 && pass; ++c) {
      FunctionalSample sample{grid, Eigen::MatrixXd(6, 9)};
      for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 9; ++i) sample.curves(j, i) = 2 * normal(engine);
      FunctionalSample shifted = sample;
      Eigen::VectorXd shift(9);
      for (Index i = 0; i < 9; ++i) shift[i] = 5 * normal(engine);
      shifted.curves.rowwise() += shift.transpose();

      const double cf_a = evaluator.evaluate(sample).n_T_n;
      const double cf_b = evaluator.evaluate(shifted).n_T_n;
      if (std::abs(cf_a - cf_b) > 1e-10 * std::max({1.0, cf_a, cf_b}))
        fail("closed-form translation invariance");
      const double mc_a = nT_mc(sample, probes).n_T_n;
      const double mc_b = nT_mc(shifted, probes).n_T_n;
      if (std::abs(mc_a - mc_b) > 1e-10 * std::max({1.0, mc_a, mc_b}))
        fail("monte-carlo translation invariance");
    }
  }

  // (b) V_n(0) = 0 exactly
  {
    Grid grid = make_grid(7);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(7);
    for (int c = 0; c < 1000 && pass; ++c) {
      FunctionalSample sample{grid, Eigen::MatrixXd(4, 7)};
      for (Index j = 0; j < 4; ++j)
        for (Index i = 0; i < 7; ++i) sample.curves(j, i) = 3 * normal(engine);
      if (v_n(sample, zero, sample_mean(sample), sample_covariance(sample)) !=
          0.0)
        fail("V_n(0) = 0");
    }
  }

  // (c) p-value formula bounds and decision consistency
  for (int c = 0; c < 1000 && pass; ++c) {
    const std::size_t b = 19 + static_cast<std::size_t>(uniform(engine) * 300);
    std::vector<double> boot(b);
    for (double& s : boot) s = uniform(engine);
    const double observed = uniform(engine);
    const double alpha = 0.01 + 0.98 * uniform(engine);
    const double p = bootstrap_p_value(boot, observed);
    if (p < 1.0 / double(b + 1) || p > 1.0) fail("p-value bounds");
    std::size_t count = 0;
    for (double s : boot)
      if (s >= observed) ++count;
    if (p != double(1 + count) / double(b + 1)) fail("p-value formula");
    if ((p <= alpha) != (observed > percentile(boot, alpha)))
      fail("decision equivalence");
  }

  // (d) rejection monotone in alpha, percentile antitone
  for (int c = 0; c < 1000 && pass; ++c) {
    const std::size_t b = 19 + static_cast<std::size_t>(uniform(engine) * 200);
    std::vector<double> boot(b);
    for (double& s : boot) s = uniform(engine);
    const double observed = uniform(engine);
    double a1 = 0.01 + 0.98 * uniform(engine);
    double a2 = 0.01 + 0.98 * uniform(engine);
    if (a1 > a2) std::swap(a1, a2);
    const double p = bootstrap_p_value(boot, observed);
    if ((p <= a1) && !(p <= a2)) fail("rejection monotone in alpha");
    if (percentile(boot, a1) < percentile(boot, a2))
      fail("percentile monotone in alpha");
  }

  report(9, pass,
         pass ? "exact invariants hold on 4 x 1000 randomized cases"
              : "exact invariant violated: " + first_failure);
}

// --- criterion 10: p-value uniformity under the null ----------------------

void criterion_10(const std::vector<RepRecord>& null_records) {
  std::vector<double> p_values;
  p_values.reserve(null_records.size());
  for (const RepRecord& record : null_records)
    p_values.push_back(record.p_value);
  std::sort(p_values.begin(), p_values.end());
  double ks = 0;
  const double n = double(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    ks = std::max(ks, (double(i) + 1) / n - p_values[i]);
    ks = std::max(ks, p_values[i] - double(i) / n);
  }
  std::ostringstream detail;
  detail << "KS distance of " << p_values.size()
         << " null p-values from uniform: " << ks << ", target <= 0.09";
  report(10, ks <= 0.09, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc)
      selected = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc)
      threads = static_cast<unsigned>(std::atoi(argv[++i]));
  }
  threads = resolve_threads(threads);

  std::vector<RepRecord> null_records;
  if (want(1) || want(10)) null_records = criterion_1();
  if (want(2)) criterion_2();
  double alt1_power = 0.605;  // replaced by the measured value when 3 runs
  if (want(3) || want(6)) alt1_power = criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6(alt1_power);
  if (want(7)) criterion_7();
  if (want(8)) criterion_8();
  if (want(9)) criterion_9();
  if (want(10)) criterion_10(null_records);

  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures;
}
