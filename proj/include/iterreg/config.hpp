#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iterreg/engine.hpp"
#include "iterreg/kernel.hpp"
#include "iterreg/loss.hpp"
#include "iterreg/stopping.hpp"
#include "iterreg/synth.hpp"

namespace iterreg {

using Json = nlohmann::json;

struct FixedStop {
  std::int64_t T = 1;
};

// T = ceil(m^gamma) with gamma from the chosen rule. q comes from the loss,
// theta from the schedule, except for hinge_fixed which sets theta itself.
struct TheoreticalStop {
  enum class Rule { general, hinge, hinge_fixed };
  Rule rule = Rule::general;
  double tau = 0.0;
  double beta = 1.0;
  double zeta = kZetaCapacityIndependent;
  double eps = 0.1;  // hinge_fixed only
  IterateKind iterate = IterateKind::last;
};

struct HoldoutStop {
  double split = kDefaultHoldoutTrainFraction;
  std::int64_t T_max = 1000;
};

using StoppingConfig = std::variant<FixedStop, TheoreticalStop, HoldoutStop>;

struct SyntheticData {
  Json dist;  // validated by dist_from_json
  Eigen::Index m = 0;
};

struct CsvData {
  std::filesystem::path path;
};

using DataConfig = std::variant<SyntheticData, CsvData>;

struct OutputPaths {
  std::optional<std::filesystem::path> path_csv;
  std::optional<std::filesystem::path> model_json;
  std::optional<std::filesystem::path> report_json;
};

struct RatesConfig {
  std::vector<Eigen::Index> m_grid;
  int repetitions = 1;
  bool timing = true;  // false writes 0 for wall time so the CSV is reproducible
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> summary_json;
};

struct RunConfig {
  Json kernel;  // validated by kernel_from_json
  Json loss;
  double theta = 0.5;
  std::optional<double> eta1;
  StepMode mode = StepMode::nonsmooth;
  bool force = false;
  std::optional<double> kappa;
  StoppingConfig stopping = FixedStop{};
  DataConfig data = SyntheticData{};
  std::uint64_t seed = 0;
  std::int64_t mc_samples = 100000;
  bool incremental = false;
  OutputPaths outputs;
  std::optional<RatesConfig> rates;
};

/// Parses a run configuration; throws ConfigError naming the offending field.
RunConfig parse_config(const Json& doc);
Json load_json_file(const std::filesystem::path& path);

/// Applies "a.b.c=value" to the document. The value is read as JSON when it
/// parses as JSON and as a plain string otherwise.
void apply_override(Json& doc, const std::string& assignment);

/// Serializes with every floating value at 17 significant digits and
/// non-finite values as null.
std::string dump_json(const Json& j, int indent = 2);

/// Kernel specs: {"type": "linear" | "polynomial" | "gaussian" | "dictionary",
/// "dim", "bandwidth", "degree", "offset", "features": [{"coord", "power"}]}.
Kernel kernel_from_json(const Json& spec, std::optional<Eigen::Index> dim = std::nullopt);
Json kernel_to_json(const Kernel& k);

/// Loss specs: {"name", "label_bound", "p", "epsilon"}.
Loss loss_from_json(const Json& spec);
Json loss_to_json(const Loss& loss);

/// Distribution specs:
///   {"type": "flip", "w": [...], "bias", "flip"}
///   {"type": "margin", "dim", "s"}
///   {"type": "regression_rkhs" | "median_regression", "noise", "kernel",
///    "dim", and either "centers" + "coefficients" or "n_centers" + "target_seed"}
SyntheticDist dist_from_json(const Json& spec);

}  // namespace iterreg
