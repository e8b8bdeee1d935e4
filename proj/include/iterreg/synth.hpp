#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "iterreg/data.hpp"
#include "iterreg/kernel.hpp"
#include "iterreg/loss.hpp"

namespace iterreg {

// Maps a batch of points (rows) to one prediction per point.
using Predictor = std::function<Vector(const MatrixRef&)>;
using PointFunction = std::function<double(const VectorRef&)>;

// y = f*(x) + N(0, sigma^2).
struct RegressionRKHS {
  KernelExpansion target;
  double sigma = 0.0;
};

// y = f*(x) + Laplace(0, b); the noise has median zero.
struct MedianRegression {
  KernelExpansion target;
  double scale = 0.0;
};

// Label sign(d(x)), flipped with probability p(x) < 1/2.
//
// The linear decision w.x + bias and a constant flip probability are the
// serializable case; decision_fn and flip_fn override them when set.
struct FlipClassification {
  Vector w;
  double bias = 0.0;
  double flip = 0.0;
  PointFunction decision_fn;
  PointFunction flip_fn;
};

// rho(1|x) = 1/2 + sign(x0 - 1/2) |x0 - 1/2|^(1/s) / 2. The mass of
// {|rho(1|x) - 1/2| <= delta} is min(1, 2 (2 delta)^s).
struct MarginClassification {
  double s = 1.0;
};

// A target risk together with its Monte Carlo error (0 when exact).
struct TargetRisk {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Distribution with inputs uniform on [0,1]^dim and a known target.
///
/// Immutable after construction; sampling draws from a fresh stream per
/// call, so concurrent calls are safe.
class SyntheticDist {
 public:
  using Variant = std::variant<RegressionRKHS, MedianRegression, FlipClassification, MarginClassification>;

  static SyntheticDist regression_rkhs(KernelExpansion target, double sigma);
  static SyntheticDist median_regression(KernelExpansion target, double scale);
  static SyntheticDist flip_linear(Vector w, double bias, double flip);
  static SyntheticDist flip_custom(Eigen::Index dim, PointFunction decision, PointFunction flip);
  static SyntheticDist margin(Eigen::Index dim, double s);

  Eigen::Index dim() const { return dim_; }
  const Variant& variant() const { return variant_; }
  std::string name() const;
  bool is_classification() const;

  // Decision value whose sign is the Bayes rule, and the flip probability.
  // Only for classification variants.
  double decision(const VectorRef& x) const;
  double flip_probability(const VectorRef& x) const;

  // E[p(x)], the misclassification risk of the Bayes rule. Only for
  // classification variants.
  TargetRisk bayes_risk() const;

 private:
  SyntheticDist(Eigen::Index dim, Variant v) : dim_(dim), variant_(std::move(v)) {}

  Eigen::Index dim_;
  Variant variant_;
  std::optional<TargetRisk> mean_flip_;  // Monte Carlo estimate for custom flip functions
};

/// m i.i.d. pairs, deterministic in seed. Throws DomainError when m < 1.
Sample sample(const SyntheticDist& dist, Eigen::Index m, std::uint64_t seed);

/// Minimizer f_rho of the expected risk for the loss. Regression variants
/// return f* for every symmetric regression loss; classification variants
/// return the Bayes rule for hinge and the log-odds for logistic loss.
/// Throws DomainError for an incompatible pair.
Predictor target_predictor(const SyntheticDist& dist, const Loss& loss);

/// Expected risk of target_predictor(dist, loss).
TargetRisk target_risk(const SyntheticDist& dist, const Loss& loss);

/// sign(d(x)) with 0 mapped to +1.
Predictor bayes_classifier(const SyntheticDist& dist);

/// Exact mass of {x : |rho(1|x) - 1/2| <= delta}. Throws for non-margin
/// variants or delta <= 0.
double margin_mass(const SyntheticDist& dist, double delta);

// Coefficients uniform in [-1, 1] / n_centers on centers uniform in [0,1]^dim.
KernelExpansion random_expansion(const Kernel& k, Eigen::Index n_centers, std::uint64_t seed);

// Samples used to estimate expectations that have no closed form.
inline constexpr std::int64_t kTargetRiskMcSamples = 10'000'000;

}  // namespace iterreg
