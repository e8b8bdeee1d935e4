#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iterreg/config.hpp"
#include "iterreg/data.hpp"
#include "iterreg/engine.hpp"
#include "iterreg/evaluation.hpp"
#include "iterreg/stopping.hpp"

namespace iterreg {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInadmissible = 2;
inline constexpr int kExitDivergence = 3;

/// Everything a training run produces.
///
/// records always cover the full run (T_max steps for hold-out); the iterates
/// describe the stopping time t_star: (f_t*, a_t*, b_t*).
struct TrainOutcome {
  Kernel kernel;
  Loss loss;
  KappaBound kappa;
  StepSchedule schedule;
  Matrix centers;
  Vector last;
  Vector averaged;
  Vector best;
  std::int64_t best_t = 0;
  std::int64_t t_star = 0;
  std::vector<TrainRecord> records;
  bool holdout = false;
  std::vector<Eigen::Index> train_index;  // hold-out only
  double risk_last = 0.0;                 // empirical risks on the training points
  double risk_averaged = 0.0;
  double risk_best = 0.0;
};

/// Loads the configured data set.
Sample load_data(const RunConfig& cfg);

/// Stopping time of a theoretical or fixed rule for m training points, and
/// the decay it implies (hinge_fixed overrides the configured theta).
std::int64_t stopping_time(const RunConfig& cfg, const Loss& loss, double theta, Eigen::Index m);
double effective_theta(const RunConfig& cfg);

/// Trains on the sample under the configured schedule and stopping rule.
/// Throws InadmissibleSchedule, DivergenceError or ConfigError.
TrainOutcome train(const RunConfig& cfg, const Sample& data);

/// Path CSV: t, eta_t, empirical_risk, rkhs_norm, subgrad_norm, then
/// validation_risk for hold-out runs and forced for forced schedules.
/// Hold-out runs end with the row "stop,<t*>" padded with empty fields.
void write_path_csv(std::ostream& out, const TrainOutcome& o);

Json model_to_json(const TrainOutcome& o);

struct LoadedModel {
  Kernel kernel;
  Loss loss;
  Matrix centers;
  Vector last;
  Vector averaged;
  Vector best;
};

LoadedModel load_model(const Json& doc);
LoadedModel load_model(const std::filesystem::path& path);

/// RiskReports of the last, averaged and best iterates, keyed by those names.
Json risk_reports(const TrainOutcome& o, const SyntheticDist& dist, std::int64_t mc_samples, std::uint64_t seed);

/// Runs a training configuration and writes the configured artifacts.
/// Messages go to err. Returns one of the exit codes above.
int cmd_train(const RunConfig& cfg, std::ostream& err);

struct IndicesRequest {
  enum class Rule { general, hinge, hinge_fixed };
  Rule rule = Rule::general;
  RegimeParams params;
  IterateKind iterate = IterateKind::last;
  double eps = 0.1;
  std::optional<std::int64_t> m;  // also print ceil(m^gamma)
};

/// Prints the indices as JSON to out.
int cmd_indices(const IndicesRequest& req, std::ostream& out, std::ostream& err);

/// One row per (m, repetition, variant) and a summary with the log-log slope
/// of the median excess risk per variant.
struct RatesRow {
  Eigen::Index m = 0;
  int repetition = 0;
  std::string variant;
  std::int64_t T = 0;
  double excess_risk = 0.0;
  double stderr_ = 0.0;
  std::optional<double> excess_misclassification;
  std::int64_t t_star = 0;
  double wall_time_s = 0.0;
};

struct RatesResult {
  std::vector<RatesRow> rows;
  Json summary;
};

RatesResult run_rates(const RunConfig& cfg);
void write_rates_csv(std::ostream& out, const std::vector<RatesRow>& rows);
int cmd_rates(const RunConfig& cfg, std::ostream& err);

/// Least-squares slope of log(y) on log(x) over the points with y > 0;
/// nullopt with fewer than two such points.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Writes a synthetic sample as CSV.
int cmd_sample(const Json& dist_spec, Eigen::Index m, std::uint64_t seed, const std::filesystem::path& out,
               std::ostream& err);

}  // namespace iterreg
