#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "iterreg/data.hpp"
#include "iterreg/kernel.hpp"
#include "iterreg/loss.hpp"

namespace iterreg {

// nonsmooth: subgradient method under the growth condition.
// smooth: gradient descent for losses with Lipschitz derivative.
enum class StepMode { nonsmooth, smooth };

/// eta_t = eta1 * t^(-theta).
struct StepSchedule {
  double eta1 = 0.0;
  double theta = 0.0;
  StepMode mode = StepMode::nonsmooth;
  bool admissible = true;  // false only when an inadmissible schedule was forced

  double eta(std::int64_t t) const;
};

/// Largest eta1 allowed for the given decay.
///
/// nonsmooth: min{ sqrt(1-theta) / (sqrt(2) c_q (kappa+1)^(q+1)), (1-theta) / (4 |V|_0) }
///            with theta in (q/(q+1), 1) and theta > 0.
/// smooth:    min{ (1-theta) / (2 |V|_0), 1 / (L kappa^2) } with theta in [0, 1).
///
/// Throws DomainError when theta is outside the range for the mode or the
/// loss has no Lipschitz constant in smooth mode.
double max_eta1(const GrowthParams& growth, double kappa, double theta, StepMode mode);
double max_eta1(const Loss& loss, double kappa, double theta, StepMode mode);

/// Builds a schedule, using max_eta1 when eta1 is not given. An inadmissible
/// (eta1, theta) raises InadmissibleSchedule unless force is set, in which
/// case the schedule is returned with admissible = false.
StepSchedule make_schedule(const Loss& loss, double kappa, double theta, std::optional<double> eta1, StepMode mode,
                           bool force = false);

/// State after t completed iterations.
///
/// c holds the coefficients of f_{t+1} and c_prev those of f_t. The averaging
/// and best-iterate trackers cover f_1..f_t, the iterates the completed steps
/// started from, so stopping after t iterations yields (f_t, a_t, b_t).
struct IterationState {
  Vector c;
  Vector c_prev;
  std::int64_t t = 0;
  Vector f_values;  // f_{t+1}(x_i)
  double risk = 0.0;     // empirical risk of f_{t+1}
  double norm_sq = 0.0;  // ||f_{t+1}||_K^2

  Vector avg_c;                    // sum_s eta_s c_s
  double weight_sum = 0.0;         // sum_s eta_s
  double weighted_risk_sum = 0.0;  // sum_s eta_s E_z(f_s)
  Vector best_c;
  double best_risk = std::numeric_limits<double>::infinity();
  std::int64_t best_t = 0;

  std::vector<double> norm_sq_history;  // entry s-1 is ||f_{s+1}||_K^2
};

// One row of the regularization path: the iterate f_t a step started from.
struct TrainRecord {
  std::int64_t t = 0;
  double eta = 0.0;
  double empirical_risk = 0.0;
  double rkhs_norm = 0.0;
  double subgrad_norm = 0.0;
  std::optional<double> validation_risk;
  bool forced = false;
};

// What one step saw, for callers that check per-step inequalities.
struct StepView {
  std::int64_t t;
  double eta;
  const Vector& c_before;  // f_t
  const Vector& f_before;
  double risk_before;
  double norm_sq_before;
  double subgrad_norm_sq;
  const IterationState& after;
};

struct RunOptions {
  // Update f-values from the nonzero entries of the derivative vector instead
  // of recomputing G c every step. Pays off for hinge and eps-insensitive.
  // When at least half the entries are nonzero G g is one dense product.
  bool incremental = false;
  // Abort when ||f_{t+1}||_K > factor * t^((1-theta)/2); 0 disables the check.
  double divergence_factor = 10.0;
  std::function<void(const StepView&)> observer;
};

IterationState initial_state(const GramMatrix& G, const VectorRef& y, const Loss& loss);

/// One iteration c_{t+1} = c_t - (eta/m) g_t with g_t^i = V'_-(y_i, f_t(x_i)).
/// Returns the record for f_t. Throws DivergenceError on non-finite values or
/// when the norm check in options fires.
TrainRecord step(IterationState& state, const GramMatrix& G, const VectorRef& y, const Loss& loss, double eta,
                 const RunOptions& options = {}, double theta_for_check = 0.0);

struct RunResult {
  IterationState state;
  std::vector<TrainRecord> records;
};

/// Exactly T iterations from f_1 = 0; records describe f_1..f_T.
RunResult run(const GramMatrix& G, const VectorRef& y, const Loss& loss, const StepSchedule& sched, std::int64_t T,
              const RunOptions& options = {});
RunResult run(const Kernel& k, const Sample& data, const Loss& loss, const StepSchedule& sched, std::int64_t T,
              const RunOptions& options = {});

/// f_t, the iterate the last completed step started from.
Vector last_iterate(const IterationState& state);

/// Step-size weighted mean of f_1..f_t.
Vector averaged_iterate(const IterationState& state);

/// f_s with the smallest empirical risk over s <= t, earliest on ties.
Vector best_iterate(const IterationState& state);

/// (1/m^2) g' G g, clamped at zero.
double subgradient_norm_sq(const GramMatrix& G, const VectorRef& g, Eigen::Index m);

// Mean loss over the sample; labels are validated.
double empirical_risk_of_values(const Loss& loss, const VectorRef& f_values, const VectorRef& y);

}  // namespace iterreg
