// hgof: goodness-of-fit testing for Gaussianity of functional data.
//
// Subcommands:
//   test      run the bootstrap test on a CSV file of curves
//   simulate  run a level/power experiment for a named data-generating process
//   verify    replay a result file and check it reproduces exactly
//
// Exit codes: 0 = ran, 2 = malformed input or invalid flags, 3 = numeric
// failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hgof/hgof.hpp"

namespace {

struct CommonFlags {
  std::string measure = "wiener";
  double measure_param = 1.0;
  hgof::Index M = 1000;
  hgof::Index B = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string method = "auto";
  bool fresh_probes = false;
  unsigned threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--measure", flags.measure, "Probe measure Q")
      ->check(CLI::IsMember({"wiener", "ou", "bridge"}))
      ->capture_default_str();
  cmd->add_option("--measure-param", flags.measure_param,
                  "Family parameter of Q (scale or correlation length)")
      ->capture_default_str();
  cmd->add_option("--M", flags.M, "Probe count for the Monte Carlo statistic")
      ->capture_default_str();
  cmd->add_option("--B", flags.B, "Bootstrap resamples")->capture_default_str();
  cmd->add_option("--alpha", flags.alpha, "Nominal level")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "Master seed")->capture_default_str();
  cmd->add_option("--method", flags.method,
                  "Statistic evaluation: mc, closed, or auto")
      ->check(CLI::IsMember({"mc", "closed", "auto"}))
      ->capture_default_str();
  cmd->add_flag("--fresh-probes", flags.fresh_probes,
                "Draw new probes for every bootstrap resample (mc only)");
  cmd->add_option("--threads", flags.threads,
                  "Worker threads (0 = HG_THREADS or hardware)");
}

hgof::StatMethod resolve_method(const std::string& name, hgof::Index m) {
  if (name == "mc") return hgof::StatMethod::monte_carlo;
  if (name == "closed") return hgof::StatMethod::closed_form;
  // auto: closed form while the m^3 factorizations stay cheap
  return m <= 512 ? hgof::StatMethod::closed_form
                  : hgof::StatMethod::monte_carlo;
}

void write_json_file(const std::string& path, const hgof::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

int run_test(const std::string& input, const CommonFlags& flags,
             const std::string& out_path) {
  hgof::FunctionalSample sample = hgof::read_curve_file(input);
  hgof::GaussianMeasure measure{hgof::family_from_string(flags.measure),
                                flags.measure_param, sample.grid, {}};
  hgof::BootstrapOptions options;
  options.M = flags.M;
  options.B = flags.B;
  options.alpha = flags.alpha;
  options.seed = flags.seed;
  options.method = resolve_method(flags.method, sample.m());
  options.fresh_probes = flags.fresh_probes;
  options.threads = hgof::resolve_threads(flags.threads);

  hgof::TestResult result = hgof::bootstrap_test(sample, measure, options);

  if (result.config.clipped_fraction > 1e-6)
    std::cerr << "warning: clipped " << result.config.clipped_fraction
              << " of the sample covariance spectrum (negative eigenvalue "
                 "mass)\n";

  std::cout << "n = " << sample.n() << ", m = " << sample.m()
            << ", measure = " << flags.measure << " ("
            << hgof::to_string(options.method) << ")\n";
  std::cout << "nT_n      = " << result.observed.n_T_n;
  if (result.observed.mc_std_error)
    std::cout << "  (mc se " << *result.observed.mc_std_error << ")";
  std::cout << "\n";
  std::cout << "p-value   = " << result.p_value << "  (B = " << options.B
            << ")\n";
  std::cout << "decision  = " << (result.reject ? "reject" : "do not reject")
            << " Gaussianity at alpha = " << flags.alpha << "\n";

  if (!out_path.empty())
    write_json_file(out_path, hgof::test_result_to_json(result, input));
  return 0;
}

int run_simulate(const std::string& dgp, const std::string& variant,
                 hgof::Index n, hgof::Index reps, hgof::Index m,
                 std::vector<double> alphas, bool alpha_given,
                 const CommonFlags& flags, const std::string& out_prefix) {
  if ((dgp == "wiener" || dgp == "ou") && !variant.empty())
    throw std::invalid_argument("--variant only applies to alt1/alt2/alt3");

  hgof::ExperimentConfig config;
  config.dgp = hgof::dgp_from_string(dgp, variant.empty() ? "base" : variant);
  config.n = n;
  config.reps = reps;
  config.m = m;
  config.M = flags.M;
  config.B = flags.B;
  if (!alphas.empty())
    config.alphas = std::move(alphas);
  else if (alpha_given)
    config.alphas = {flags.alpha};
  config.measure = hgof::family_from_string(flags.measure);
  config.measure_param = flags.measure_param;
  config.seed = flags.seed;
  config.method = resolve_method(flags.method, m);
  config.fresh_probes = flags.fresh_probes;
  config.threads = hgof::resolve_threads(flags.threads);

  std::vector<hgof::RepRecord> records;
  hgof::PowerRow row;
  try {
    row = hgof::run_experiment(config, &records);
  } catch (const hgof::experiment_error& e) {
    row.config = config;
    hgof::json doc = hgof::experiment_to_json(row, e.partial_records, false);
    doc["error"] = e.what();
    if (!out_prefix.empty()) write_json_file(out_prefix + ".json", doc);
    std::cerr << "error: " << e.what() << "\n";
    if (!out_prefix.empty())
      std::cerr << "partial results written to " << out_prefix << ".json\n";
    return 3;
  }

  std::cout << hgof::to_string(config.dgp) << ", n = " << config.n
            << ", reps = " << config.reps << ":\n";
  for (std::size_t a = 0; a < config.alphas.size(); ++a)
    std::cout << "  rejection rate at alpha " << config.alphas[a] << " = "
              << row.rejection_rates[a] << " (se " << row.std_errors[a]
              << ")\n";
  std::cout << "  wall time " << row.wall_seconds << " s\n";

  if (!out_prefix.empty()) {
    write_json_file(out_prefix + ".json",
                    hgof::experiment_to_json(row, records));
    std::ofstream csv(out_prefix + ".csv");
    if (!csv)
      throw std::invalid_argument("cannot open for writing: " + out_prefix +
                                  ".csv");
    hgof::write_power_csv(csv, {row});
  }
  return 0;
}

int run_verify(const std::string& result_path, const std::string& data_path,
               unsigned threads) {
  std::ifstream in(result_path);
  if (!in) throw std::invalid_argument("cannot open result file: " + result_path);
  hgof::json doc = hgof::json::parse(in);
  hgof::check_schema(doc);
  const std::string kind = doc.at("kind").get<std::string>();

  if (kind == "test") {
    hgof::ConfigRecord config = hgof::config_from_json(doc.at("config"));
    const std::string input =
        data_path.empty() ? doc.at("input").get<std::string>() : data_path;
    hgof::FunctionalSample sample = hgof::read_curve_file(input);
    hgof::GaussianMeasure measure{config.measure, config.measure_param,
                                  sample.grid, {}};
    hgof::BootstrapOptions options;
    options.M = config.M > 0 ? config.M : 1000;
    options.B = config.B;
    options.alpha = config.alpha;
    options.seed = config.seed;
    options.method = config.method;
    options.fresh_probes = config.fresh_probes;
    options.threads = hgof::resolve_threads(threads);
    hgof::TestResult result = hgof::bootstrap_test(sample, measure, options);

    const double recorded_stat = doc.at("observed").at("n_T_n").get<double>();
    const double recorded_p = doc.at("p_value").get<double>();
    const bool ok =
        result.observed.n_T_n == recorded_stat && result.p_value == recorded_p;
    std::cout << (ok ? "verified" : "MISMATCH") << ": statistic "
              << result.observed.n_T_n << " vs recorded " << recorded_stat
              << ", p-value " << result.p_value << " vs recorded "
              << recorded_p << "\n";
    return ok ? 0 : 1;
  }

  if (kind == "experiment") {
    hgof::ExperimentConfig config =
        hgof::experiment_config_from_json(doc.at("config"));
    config.threads = hgof::resolve_threads(threads);
    hgof::PowerRow row = hgof::run_experiment(config);
    const auto recorded =
        doc.at("rejection_rates").get<std::vector<double>>();
    const bool ok = row.rejection_rates == recorded;
    std::cout << (ok ? "verified" : "MISMATCH") << ": rejection rates";
    for (double r : row.rejection_rates) std::cout << " " << r;
    std::cout << " vs recorded";
    for (double r : recorded) std::cout << " " << r;
    std::cout << "\n";
    return ok ? 0 : 1;
  }

  throw std::invalid_argument("result file: unknown kind '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit test for Gaussianity of functional data"};
  app.set_version_flag("--version", hgof::kVersion);
  app.require_subcommand(0, 1);

  std::string verify_path;
  app.add_option("--verify", verify_path,
                 "Replay a result file and check exact reproduction");

  // test
  auto* test_cmd =
      app.add_subcommand("test", "Test a CSV file of curves for Gaussianity");
  std::string input_path;
  std::string out_path;
  CommonFlags test_flags;
  test_cmd->add_option("input", input_path, "CSV curve file")->required();
  test_cmd->add_option("--out", out_path, "Write the result JSON here");
  add_common_flags(test_cmd, test_flags);

  // simulate
  auto* sim_cmd =
      app.add_subcommand("simulate", "Empirical level/power experiment");
  std::string dgp = "wiener";
  std::string variant;
  hgof::Index n = 50;
  hgof::Index reps = 500;
  hgof::Index m = 101;
  std::vector<double> alphas;
  std::string out_prefix;
  CommonFlags sim_flags;
  sim_cmd->add_option("--dgp", dgp, "Data-generating process")
      ->check(CLI::IsMember({"wiener", "ou", "alt1", "alt2", "alt3"}))
      ->capture_default_str();
  sim_cmd->add_option("--variant", variant,
                      "Coefficient-law variant for alt models")
      ->check(CLI::IsMember({"base", "mixture", "laplace"}));
  sim_cmd->add_option("--n", n, "Sample size per replication")
      ->capture_default_str();
  sim_cmd->add_option("--reps", reps, "Replications")->capture_default_str();
  sim_cmd->add_option("--m", m, "Grid size")->capture_default_str();
  sim_cmd->add_option("--alphas", alphas, "Nominal levels (default 0.05 0.10)");
  sim_cmd->add_option("--out", out_prefix, "Output prefix for .csv/.json");
  add_common_flags(sim_cmd, sim_flags);

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "Replay a result file and compare");
  std::string verify_result;
  std::string verify_data;
  unsigned verify_threads = 0;
  verify_cmd->add_option("result", verify_result, "Result JSON file")
      ->required();
  verify_cmd->add_option("--data", verify_data,
                         "Override the recorded input path");
  verify_cmd->add_option("--threads", verify_threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (test_cmd->parsed()) return run_test(input_path, test_flags, out_path);
    if (sim_cmd->parsed())
      return run_simulate(dgp, variant, n, reps, m, alphas,
                          sim_cmd->count("--alpha") > 0, sim_flags, out_prefix);
    if (verify_cmd->parsed())
      return run_verify(verify_result, verify_data, verify_threads);
    if (!verify_path.empty()) return run_verify(verify_path, "", 0);
    std::cerr << app.help();
    return 2;
  } catch (const hgof::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
