#ifndef HGOF_IO_HPP
#define HGOF_IO_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgof/bootstrap.hpp"
#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/simulation.hpp"

namespace hgof {

using json = nlohmann::json;

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

/*
 * Curve file: CSV with one row per curve and one column per grid point. An
 * optional first row `# grid: t_1,...,t_m` declares the abscissae; without
 * it the points are equispaced on [0,1]. Declared grids get composite
 * trapezoid weights over the given points. Curves are assumed pre-smoothed
 * and grid-aligned; no interpolation happens here.
 */

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t row,
                         std::size_t col) {
  try {
    std::size_t used = 0;
    double value = std::stod(cell, &used);
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
      ++used;
    if (used != cell.size()) throw std::invalid_argument("trailing junk");
    if (!std::isfinite(value)) throw std::invalid_argument("not finite");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("curve file: row " + std::to_string(row) +
                                ", column " + std::to_string(col) +
                                ": cannot parse '" + cell + "' as a finite real");
  }
}

inline std::vector<double> split_csv_row(const std::string& line,
                                         std::size_t row) {
  std::vector<double> cells;
  std::stringstream stream(line);
  std::string cell;
  std::size_t col = 1;
  while (std::getline(stream, cell, ',')) {
    cells.push_back(parse_cell(cell, row, col));
    ++col;
  }
  if (!line.empty() && line.back() == ',')
    throw std::invalid_argument("curve file: row " + std::to_string(row) +
                                ", column " + std::to_string(col) +
                                ": empty trailing cell");
  return cells;
}

/// Composite trapezoid weights over arbitrary increasing points.
inline Grid grid_from_points(const std::vector<double>& points) {
  const Index m = static_cast<Index>(points.size());
  if (m < 2) throw std::invalid_argument("curve file: need m >= 2 grid points");
  Grid grid;
  grid.points.resize(m);
  grid.weights.resize(m);
  for (Index i = 0; i < m; ++i) {
    if (!(points[i] >= 0.0 && points[i] <= 1.0))
      throw std::invalid_argument("curve file: grid point " +
                                  std::to_string(points[i]) +
                                  " outside [0,1]");
    if (i > 0 && !(points[i] > points[i - 1]))
      throw std::invalid_argument("curve file: grid points not increasing");
    grid.points[i] = points[i];
  }
  grid.weights[0] = (points[1] - points[0]) / 2;
  grid.weights[m - 1] = (points[m - 1] - points[m - 2]) / 2;
  for (Index i = 1; i < m - 1; ++i)
    grid.weights[i] = (points[i + 1] - points[i - 1]) / 2;
  return grid;
}

}  // namespace detail

inline FunctionalSample read_curves(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<double> declared_points;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string prefix = "# grid:";
      if (first_content && line.rfind(prefix, 0) == 0) {
        std::string rest = line.substr(prefix.size());
        std::stringstream stream(rest);
        std::string cell;
        std::size_t col = 1;
        while (std::getline(stream, cell, ','))
          declared_points.push_back(detail::parse_cell(cell, lineno, col++));
      }
      continue;  // other comment lines are ignored
    }
    first_content = false;
    rows.push_back(detail::split_csv_row(line, lineno));
    if (rows.size() > 1 && rows.back().size() != rows.front().size())
      throw std::invalid_argument(
          "curve file: row " + std::to_string(lineno) + " has " +
          std::to_string(rows.back().size()) + " cells, expected " +
          std::to_string(rows.front().size()));
  }
  if (rows.size() < 2)
    throw std::invalid_argument("curve file: need n >= 2 curves, got " +
                                std::to_string(rows.size()));
  const Index m = static_cast<Index>(rows.front().size());
  if (m < 2)
    throw std::invalid_argument("curve file: need m >= 2 grid points");

  FunctionalSample sample;
  if (!declared_points.empty()) {
    if (static_cast<Index>(declared_points.size()) != m)
      throw std::invalid_argument(
          "curve file: declared grid has " +
          std::to_string(declared_points.size()) + " points but rows have " +
          std::to_string(m));
    sample.grid = detail::grid_from_points(declared_points);
  } else {
    sample.grid = make_grid(m, GridScheme::trapezoid);
  }
  sample.curves.resize(static_cast<Index>(rows.size()), m);
  for (Index j = 0; j < sample.curves.rows(); ++j)
    for (Index i = 0; i < m; ++i) sample.curves(j, i) = rows[j][i];
  return sample;
}

inline FunctionalSample read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open curve file: " + path);
  return read_curves(in);
}

inline void write_curves(std::ostream& out, const FunctionalSample& sample,
                         bool declare_grid = false) {
  out << std::setprecision(17);
  if (declare_grid) {
    out << "# grid:";
    for (Index i = 0; i < sample.grid.size(); ++i)
      out << (i ? "," : " ") << sample.grid.points[i];
    out << "\n";
  }
  for (Index j = 0; j < sample.n(); ++j) {
    for (Index i = 0; i < sample.m(); ++i) {
      if (i) out << ",";
      out << sample.curves(j, i);
    }
    out << "\n";
  }
}

inline void write_curve_file(const std::string& path,
                             const FunctionalSample& sample,
                             bool declare_grid = false) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  write_curves(out, sample, declare_grid);
}

// ---------------------------------------------------------------------------
// Result files: JSON documents with a versioned schema; parsers reject
// unknown major versions. Doubles survive the round trip exactly.
// ---------------------------------------------------------------------------

inline json schema_header(const std::string& kind) {
  return json{{"schema", {{"name", "hgof-result"},
                          {"major", kSchemaMajor},
                          {"minor", kSchemaMinor}}},
              {"tool", {{"name", "hgof"}, {"version", kVersion}}},
              {"kind", kind}};
}

inline void check_schema(const json& doc) {
  if (!doc.contains("schema") || !doc["schema"].contains("major"))
    throw std::invalid_argument("result file: missing schema header");
  const int major = doc["schema"]["major"].get<int>();
  if (major != kSchemaMajor)
    throw std::invalid_argument("result file: unsupported schema major " +
                                std::to_string(major));
}

inline KernelFamily family_from_string(const std::string& name) {
  if (name == "wiener") return KernelFamily::wiener;
  if (name == "ou") return KernelFamily::ornstein_uhlenbeck;
  if (name == "bridge") return KernelFamily::brownian_bridge;
  if (name == "custom") return KernelFamily::custom;
  throw std::invalid_argument("unknown measure family: " + name);
}

inline StatMethod method_from_string(const std::string& name) {
  if (name == "mc") return StatMethod::monte_carlo;
  if (name == "closed") return StatMethod::closed_form;
  throw std::invalid_argument("unknown statistic method: " + name);
}

inline json config_to_json(const ConfigRecord& config) {
  return json{{"n", config.n},
              {"m", config.m},
              {"M", config.M},
              {"B", config.B},
              {"alpha", config.alpha},
              {"measure", to_string(config.measure)},
              {"measure_param", config.measure_param},
              {"seed", config.seed},
              {"method", to_string(config.method)},
              {"fresh_probes", config.fresh_probes},
              {"clipped_fraction", config.clipped_fraction}};
}

inline ConfigRecord config_from_json(const json& j) {
  ConfigRecord config;
  config.n = j.at("n").get<Index>();
  config.m = j.at("m").get<Index>();
  config.M = j.at("M").get<Index>();
  config.B = j.at("B").get<Index>();
  config.alpha = j.at("alpha").get<double>();
  config.measure = family_from_string(j.at("measure").get<std::string>());
  config.measure_param = j.at("measure_param").get<double>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.method = method_from_string(j.at("method").get<std::string>());
  config.fresh_probes = j.at("fresh_probes").get<bool>();
  config.clipped_fraction = j.value("clipped_fraction", 0.0);
  return config;
}

inline json test_result_to_json(const TestResult& result,
                                const std::string& input_path) {
  json doc = schema_header("test");
  doc["input"] = input_path;
  doc["config"] = config_to_json(result.config);
  doc["observed"] = {{"n_T_n", result.observed.n_T_n},
                     {"method", to_string(result.observed.method)}};
  if (result.observed.mc_std_error)
    doc["observed"]["mc_std_error"] = *result.observed.mc_std_error;
  doc["boot_stats"] = result.boot_stats;
  doc["p_value"] = result.p_value;
  doc["alpha"] = result.alpha;
  doc["reject"] = result.reject;
  return doc;
}

inline json experiment_config_to_json(const ExperimentConfig& config) {
  json j{{"dgp", to_string(config.dgp)},
         {"n", config.n},
         {"reps", config.reps},
         {"M", config.M},
         {"B", config.B},
         {"alphas", config.alphas},
         {"m", config.m},
         {"scheme", config.scheme == GridScheme::trapezoid ? "trapezoid"
                                                           : "midpoint"},
         {"measure", to_string(config.measure)},
         {"measure_param", config.measure_param},
         {"seed", config.seed},
         {"method", to_string(config.method)},
         {"fresh_probes", config.fresh_probes}};
  return j;
}

inline DgpSpec dgp_from_string(const std::string& name,
                               const std::string& variant) {
  AltVariant v;
  if (variant == "base") v = AltVariant::base;
  else if (variant == "mixture") v = AltVariant::mixture;
  else if (variant == "laplace") v = AltVariant::laplace;
  else throw std::invalid_argument("unknown variant: " + variant);
  if (name == "wiener") return NullProcess::wiener;
  if (name == "ou") return NullProcess::ornstein_uhlenbeck;
  if (name == "alt1") return AlternativeSpec{AltModel::alt1, v};
  if (name == "alt2") return AlternativeSpec{AltModel::alt2, v};
  if (name == "alt3") return AlternativeSpec{AltModel::alt3, v};
  throw std::invalid_argument("unknown dgp: " + name);
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig config;
  std::string dgp = j.at("dgp").get<std::string>();
  std::string variant = "base";
  if (auto slash = dgp.find('/'); slash != std::string::npos) {
    variant = dgp.substr(slash + 1);
    dgp = dgp.substr(0, slash);
  }
  config.dgp = dgp_from_string(dgp, variant);
  config.n = j.at("n").get<Index>();
  config.reps = j.at("reps").get<Index>();
  config.M = j.at("M").get<Index>();
  config.B = j.at("B").get<Index>();
  config.alphas = j.at("alphas").get<std::vector<double>>();
  config.m = j.at("m").get<Index>();
  config.scheme = j.at("scheme").get<std::string>() == "midpoint"
                      ? GridScheme::midpoint
                      : GridScheme::trapezoid;
  config.measure = family_from_string(j.at("measure").get<std::string>());
  config.measure_param = j.at("measure_param").get<double>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.method = method_from_string(j.at("method").get<std::string>());
  config.fresh_probes = j.at("fresh_probes").get<bool>();
  return config;
}

inline json experiment_to_json(const PowerRow& row,
                               const std::vector<RepRecord>& records,
                               bool complete = true) {
  json doc = schema_header("experiment");
  doc["config"] = experiment_config_to_json(row.config);
  doc["complete"] = complete;
  doc["rejection_rates"] = row.rejection_rates;
  doc["std_errors"] = row.std_errors;
  doc["wall_seconds"] = row.wall_seconds;
  json reps = json::array();
  for (const RepRecord& record : records) {
    json r{{"rep", record.rep},
           {"data_seed", record.data_seed},
           {"test_seed", record.test_seed},
           {"n_T_n", record.n_T_n},
           {"p_value", record.p_value}};
    if (!record.error.empty()) r["error"] = record.error;
    reps.push_back(std::move(r));
  }
  doc["replications"] = std::move(reps);
  return doc;
}

/// CSV: one PowerRow per line, rate/SE column pair per alpha. Wall time is
/// deliberately left to the JSON audit record so the CSV is byte-identical
/// for a fixed seed.
inline void write_power_csv(std::ostream& out,
                            const std::vector<PowerRow>& rows) {
  if (rows.empty()) return;
  out << "dgp,n,reps,M,B,m,measure,measure_param,seed,method";
  for (double alpha : rows.front().config.alphas) {
    std::ostringstream label;
    label << alpha;
    out << ",rate_a" << label.str() << ",se_a" << label.str();
  }
  out << "\n";
  out << std::setprecision(17);
  for (const PowerRow& row : rows) {
    out << to_string(row.config.dgp) << "," << row.config.n << ","
        << row.config.reps << "," << row.config.M << "," << row.config.B << ","
        << row.config.m << "," << to_string(row.config.measure) << ","
        << row.config.measure_param << "," << row.config.seed << ","
        << to_string(row.config.method);
    for (std::size_t a = 0; a < row.rejection_rates.size(); ++a)
      out << "," << row.rejection_rates[a] << "," << row.std_errors[a];
    out << "\n";
  }
}

}  // namespace hgof

#endif  // HGOF_IO_HPP
