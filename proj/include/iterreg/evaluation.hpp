#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iterreg/kernel.hpp"
#include "iterreg/loss.hpp"
#include "iterreg/synth.hpp"

namespace iterreg {

// Several predictors evaluated together; column j holds predictor j.
using MultiPredictor = std::function<Matrix(const MatrixRef&)>;

// Monte Carlo mean with standard error = sample std (n - 1) / sqrt(n).
struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

struct RiskReport {
  double empirical_risk = 0.0;
  double expected_risk = 0.0;
  double expected_risk_stderr = 0.0;
  std::optional<double> excess_risk;
  std::optional<double> misclassification_rate;
  std::int64_t mc_samples = 0;

  // Keys: empirical_risk, expected_risk, expected_risk_stderr, excess_risk,
  // misclassification_rate, mc_samples. Absent optionals are null.
  nlohmann::json to_json() const;
};

struct ComparisonResult {
  double lhs = 0.0;  // misclassification excess
  double rhs = 0.0;  // hinge excess
  double combined_stderr = 0.0;
  bool holds = false;  // lhs <= rhs + 3 combined_stderr
};

// Points per Monte Carlo block. Block b draws from the stream derived from
// (seed, b), so estimates do not depend on the thread count.
inline constexpr Eigen::Index kMcBlock = 8192;

/// Mean loss. Throws DimensionError on length mismatch or empty input.
double empirical_risk(const Loss& loss, const VectorRef& predictions, const VectorRef& labels);

/// Mean and standard error of a vector of per-sample values.
McEstimate mean_estimate(const VectorRef& values);

/// The n points the Monte Carlo routines draw for (dist, n, seed).
Sample mc_sample(const SyntheticDist& dist, std::int64_t n, std::uint64_t seed);

/// Expected risk on n fresh points. Throws DomainError when n < 2.
McEstimate expected_risk_mc(const Loss& loss, const Predictor& f, const SyntheticDist& dist, std::int64_t n,
                            std::uint64_t seed);
std::vector<McEstimate> expected_risk_mc(const Loss& loss, const MultiPredictor& f, Eigen::Index n_predictors,
                                         const SyntheticDist& dist, std::int64_t n, std::uint64_t seed);

/// expected_risk_mc minus the target risk of the distribution. The standard
/// error combines both Monte Carlo errors.
McEstimate excess_risk(const Loss& loss, const Predictor& f, const SyntheticDist& dist, std::int64_t n,
                       std::uint64_t seed);

/// x -> +1 when f(x) >= 0, else -1.
Predictor sign_classifier(Predictor f);

/// P(y != b(x)) for a classifier with values in {-1, +1}.
McEstimate misclassification_risk_mc(const Predictor& classifier, const SyntheticDist& dist, std::int64_t n,
                                     std::uint64_t seed);
std::vector<McEstimate> misclassification_risk_mc(const MultiPredictor& classifier, Eigen::Index n_predictors,
                                                  const SyntheticDist& dist, std::int64_t n, std::uint64_t seed);

struct RiskAndError {
  std::vector<McEstimate> risk;
  std::vector<McEstimate> misclassification;  // of sign f, with sign(0) = +1
};

/// Both estimates from one evaluation of f on the same points. Equal to
/// expected_risk_mc and misclassification_risk_mc of the sign classifier.
RiskAndError risk_and_misclassification_mc(const Loss& loss, const MultiPredictor& f, Eigen::Index n_predictors,
                                           const SyntheticDist& dist, std::int64_t n, std::uint64_t seed);

/// R(sign f) - R(b) against E_hinge(f) - E_hinge(f_rho), each estimated as
/// the mean of per-point differences to the Bayes rule on the same Monte Carlo
/// points. The Bayes rule is the hinge minimizer, so no target risk enters.
ComparisonResult comparison_check(const Predictor& f, const SyntheticDist& dist, std::int64_t n, std::uint64_t seed);

/// Same check from predictions already computed on mc_sample(dist, n, seed).
ComparisonResult comparison_check_values(const VectorRef& predictions, const Sample& points,
                                         const SyntheticDist& dist);

/// Thread count for Monte Carlo and sweeps: hardware concurrency capped by
/// the IterREG_THREADS environment variable when it holds a positive integer.
unsigned worker_threads();

// While alive, worker_threads() returns 1 on this thread. Outer parallel
// loops hold one per worker so inner Monte Carlo runs stay serial.
class SerialScope {
 public:
  SerialScope();
  ~SerialScope();
  SerialScope(const SerialScope&) = delete;
  SerialScope& operator=(const SerialScope&) = delete;

 private:
  bool previous_;
};

}  // namespace iterreg
