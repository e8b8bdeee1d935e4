#pragma once

#include <cstdint>
#include <vector>

#include "iterreg/data.hpp"
#include "iterreg/engine.hpp"
#include "iterreg/kernel.hpp"
#include "iterreg/loss.hpp"

namespace iterreg {

// The capacity exponent is open at 2; this value stands in for the
// capacity-independent limit.
inline constexpr double kZetaCapacityIndependent = 2.0 - 1e-9;

/// Exponents describing a learning problem and a step decay.
///
///   q     growth exponent of the loss derivative, >= 0
///   tau   variance-expectation exponent, in [0, 1]
///   beta  approximation-error exponent, in (0, 1]
///   zeta  covering-number exponent, in (0, 2)
///   theta step decay, in (q/(q+1), 1) for subgradient steps, [0, 1) for smooth losses
struct RegimeParams {
  double q = 0.0;
  double tau = 0.0;
  double beta = 1.0;
  double zeta = kZetaCapacityIndependent;
  double theta = 0.5;
  bool smooth = false;

  void validate() const;
};

struct RateIndices {
  double gamma = 0.0;  // stop at T = ceil(m^gamma)
  double alpha = 0.0;  // excess risk decays like m^-alpha
  bool has_log_factor = false;
};

// Which iterate the bound is stated for; only the log factor differs.
enum class IterateKind { last, averaged, best };

/// Stopping and rate exponents.
///
/// For subgradient steps the formulas switch at theta = (q+1)/(q+2). With
/// D = 2 - tau + zeta tau / 2 and Q = q (1 + zeta/2):
///
///   theta >= (q+1)/(q+2):  gamma = 2 / ((1-theta) ((1+2beta) D + Q))
///                          alpha = beta / (beta D + (D + Q)/2)
///   theta <  (q+1)/(q+2):  with r = theta(1+q) - q,
///                          gamma = 2 / ((1-theta) ((1 + 2 beta r/(1-theta)) D + Q))
///                          alpha = beta / (beta D + (1-theta)/r (D + Q)/2)
///
/// Smooth losses always use the first pair. The last iterate carries a
/// log m factor when theta <= (q+1)/(q+2); the averaged and best iterates only
/// when theta equals it; smooth losses never do.
RateIndices compute_indices(const RegimeParams& p, IterateKind kind = IterateKind::last);

/// Hinge loss with theta > 1/2: gamma = 1/((1-theta)(2beta+1)), alpha = beta/(2beta+1).
RateIndices hinge_indices(double beta, double theta);

struct FixedTSchedule {
  double theta = 0.0;
  double gamma = 0.0;
};

/// Hinge loss with the stopping time pinned to ceil(m^(2/3 + eps)) and the
/// decay chosen from beta:
///   theta = (4 beta - 1 + 3 eps (2 beta + 1)) / ((2 beta + 1)(2 + 3 eps)).
/// Needs eps in (0, 1/3) and (4 - 3 eps)/(4 + 6 eps) < beta <= 1.
FixedTSchedule hinge_fixed_T_schedule(double beta, double eps);

/// ceil(m^gamma), at least 1. Values within 1e-9 (relative) of an integer
/// are snapped to it first so that 1000^(2/3) gives 100 rather than 101.
std::int64_t theoretical_T(std::int64_t m, double gamma);

/// Optimization-error factor for the last iterate:
///   T^-(1-theta)                     theta >  (q+1)/(q+2)
///   log(T) T^-(1-theta)              theta == (q+1)/(q+2)
///   log(T) T^-(theta(1+q) - q)       theta <  (q+1)/(q+2)
/// Needs T >= 2 and theta in (q/(q+1), 1).
double lambda_T(double T, double q, double theta);

struct HoldoutResult {
  std::int64_t t_star = 0;
  std::vector<double> validation_curve;  // entry t-1 is the validation risk of f_t
  RunResult run;                         // full run on the training part
  std::vector<Eigen::Index> train_index;
  std::vector<Eigen::Index> validation_index;
};

inline constexpr double kDefaultHoldoutTrainFraction = 0.8;

/// Splits the sample by a seeded shuffle (train_fraction of it for training),
/// runs T_max iterations on the training part and records the validation risk
/// of every f_t, t = 1..T_max. t_star is the earliest minimizer of that curve.
HoldoutResult holdout_stop(const Kernel& k, const Sample& data, const Loss& loss, const StepSchedule& sched,
                           std::int64_t T_max, double train_fraction = kDefaultHoldoutTrainFraction,
                           std::uint64_t seed = 0, const RunOptions& options = {});

}  // namespace iterreg
