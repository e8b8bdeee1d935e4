#include "iterreg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iterreg/errors.hpp"

namespace iterreg {

namespace {

void check_sizes(const GramMatrix& G, const VectorRef& y, Eigen::Index c_size) {
  if (G.size() != y.size() || G.size() != c_size) {
    throw DimensionError("step: Gram size " + std::to_string(G.size()) + ", labels " + std::to_string(y.size()) +
                         ", coefficients " + std::to_string(c_size));
  }
}

void refresh_values(IterationState& s, const VectorRef& y, const Loss& loss) {
  s.risk = empirical_risk_of_values(loss, s.f_values, y);
  s.norm_sq = std::max(0.0, s.c.dot(s.f_values));
}

}  // namespace

double StepSchedule::eta(std::int64_t t) const {
  if (t < 1) throw DomainError("step index must be >= 1");
  return eta1 * std::pow(static_cast<double>(t), -theta);
}

double max_eta1(const GrowthParams& growth, double kappa, double theta, StepMode mode) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be finite and >= 0");
  if (mode == StepMode::nonsmooth) {
    const double lower = growth.q / (growth.q + 1.0);
    if (!(theta > lower && theta > 0.0 && theta < 1.0)) {
      throw DomainError("theta = " + std::to_string(theta) + " outside (" + std::to_string(lower) +
                        ", 1) required for subgradient steps");
    }
    const double growth_term =
        std::sqrt(1.0 - theta) / (std::sqrt(2.0) * growth.c_q * std::pow(kappa + 1.0, growth.q + 1.0));
    const double value_term =
        growth.v0 > 0.0 ? (1.0 - theta) / (4.0 * growth.v0) : std::numeric_limits<double>::infinity();
    return std::min(growth_term, value_term);
  }
  if (!growth.lipschitz) throw DomainError("smooth steps need a loss with Lipschitz derivative");
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw DomainError("theta = " + std::to_string(theta) + " outside [0, 1) required for gradient steps");
  }
  const double value_term =
      growth.v0 > 0.0 ? (1.0 - theta) / (2.0 * growth.v0) : std::numeric_limits<double>::infinity();
  const double curvature = *growth.lipschitz * kappa * kappa;
  const double smooth_term = curvature > 0.0 ? 1.0 / curvature : std::numeric_limits<double>::infinity();
  return std::min(value_term, smooth_term);
}

double max_eta1(const Loss& loss, double kappa, double theta, StepMode mode) {
  return max_eta1(loss.growth_params(), kappa, theta, mode);
}

StepSchedule make_schedule(const Loss& loss, double kappa, double theta, std::optional<double> eta1, StepMode mode,
                           bool force) {
  if (!std::isfinite(theta) || theta < 0.0) throw DomainError("theta must be finite and >= 0");
  if (eta1 && (!(*eta1 > 0.0) || !std::isfinite(*eta1))) throw DomainError("eta1 must be finite and > 0");

  std::optional<double> bound;
  std::string why;
  try {
    bound = max_eta1(loss, kappa, theta, mode);
  } catch (const DomainError& e) {
    why = e.what();
  }

  StepSchedule s{0.0, theta, mode, true};
  if (!bound) {
    if (!force) throw InadmissibleSchedule(why);
    if (!eta1) throw InadmissibleSchedule(why + "; a forced schedule needs an explicit eta1");
    s.eta1 = *eta1;
    s.admissible = false;
    return s;
  }
  if (!std::isfinite(*bound) && !eta1) throw InadmissibleSchedule("step bound is unbounded; give eta1 explicitly");
  s.eta1 = eta1.value_or(*bound);
  if (s.eta1 > *bound) {
    if (!force) {
      throw InadmissibleSchedule("eta1 = " + std::to_string(s.eta1) + " exceeds the admissible bound " +
                                 std::to_string(*bound));
    }
    s.admissible = false;
  }
  return s;
}

double empirical_risk_of_values(const Loss& loss, const VectorRef& f_values, const VectorRef& y) {
  if (f_values.size() != y.size()) throw DimensionError("empirical risk: predictions and labels differ in length");
  if (y.size() == 0) throw DimensionError("empirical risk: empty sample");
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += loss.value(y(i), f_values(i));
  return s / static_cast<double>(y.size());
}

IterationState initial_state(const GramMatrix& G, const VectorRef& y, const Loss& loss) {
  const Eigen::Index m = G.size();
  check_sizes(G, y, m);
  for (Eigen::Index i = 0; i < m; ++i) loss.check_label(y(i));
  IterationState s;
  s.c = Vector::Zero(m);
  s.c_prev = Vector::Zero(m);
  s.f_values = Vector::Zero(m);
  s.avg_c = Vector::Zero(m);
  s.best_c = Vector::Zero(m);
  refresh_values(s, y, loss);
  return s;
}

double subgradient_norm_sq(const GramMatrix& G, const VectorRef& g, Eigen::Index m) {
  if (G.size() != g.size()) throw DimensionError("subgradient_norm_sq: derivative vector does not match Gram size");
  if (m < 1) throw DomainError("subgradient_norm_sq: m must be positive");
  const double md = static_cast<double>(m);
  return std::max(0.0, g.dot(G.entries * g) / (md * md));
}

TrainRecord step(IterationState& state, const GramMatrix& G, const VectorRef& y, const Loss& loss, double eta,
                 const RunOptions& options, double theta_for_check) {
  const Eigen::Index m = G.size();
  check_sizes(G, y, state.c.size());
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("step size must be finite and > 0");

  Vector g(m);
  for (Eigen::Index i = 0; i < m; ++i) g(i) = loss.left_derivative(y(i), state.f_values(i));

  const double md = static_cast<double>(m);
  Vector Gg;
  const Eigen::Index nnz = options.incremental ? (g.array() != 0.0).count() : m;
  if (2 * nnz < m) {
    // Sparse g: only the columns of the active points are touched.
    Gg = Vector::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (g(j) != 0.0) Gg.noalias() += g(j) * G.entries.col(j);
    }
  } else {
    Gg.noalias() = G.entries * g;
  }
  const double subgrad_sq = std::max(0.0, g.dot(Gg) / (md * md));

  const std::int64_t t = state.t + 1;  // index of the iterate this step starts from
  TrainRecord rec;
  rec.t = t;
  rec.eta = eta;
  rec.empirical_risk = state.risk;
  rec.rkhs_norm = std::sqrt(state.norm_sq);
  rec.subgrad_norm = std::sqrt(subgrad_sq);

  state.avg_c.noalias() += eta * state.c;
  state.weight_sum += eta;
  state.weighted_risk_sum += eta * state.risk;
  if (state.risk < state.best_risk) {
    state.best_risk = state.risk;
    state.best_c = state.c;
    state.best_t = t;
  }

  state.c_prev = state.c;
  std::optional<Vector> f_before;
  const double risk_before = state.risk;
  const double norm_sq_before = state.norm_sq;
  if (options.observer) f_before = state.f_values;

  state.c.noalias() -= (eta / md) * g;
  if (options.incremental) {
    state.f_values.noalias() -= (eta / md) * Gg;
  } else {
    state.f_values.noalias() = G.entries * state.c;
  }
  refresh_values(state, y, loss);
  state.t = t;
  state.norm_sq_history.push_back(state.norm_sq);

  if (!std::isfinite(state.risk) || !std::isfinite(state.norm_sq) || !state.c.allFinite()) {
    throw DivergenceError("non-finite iterate at t = " + std::to_string(t));
  }
  if (options.divergence_factor > 0.0) {
    const double limit = options.divergence_factor * std::pow(static_cast<double>(t), (1.0 - theta_for_check) / 2.0);
    if (std::sqrt(state.norm_sq) > limit) {
      throw DivergenceError("iterate norm " + std::to_string(std::sqrt(state.norm_sq)) + " exceeds " +
                            std::to_string(limit) + " at t = " + std::to_string(t));
    }
  }

  if (options.observer) {
    options.observer(StepView{t, eta, state.c_prev, *f_before, risk_before, norm_sq_before, subgrad_sq, state});
  }
  return rec;
}

RunResult run(const GramMatrix& G, const VectorRef& y, const Loss& loss, const StepSchedule& sched, std::int64_t T,
              const RunOptions& options) {
  if (T < 1) throw DomainError("number of iterations must be >= 1");
  RunResult out{initial_state(G, y, loss), {}};
  out.records.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) {
    TrainRecord rec = step(out.state, G, y, loss, sched.eta(t), options, sched.theta);
    rec.forced = !sched.admissible;
    out.records.push_back(rec);
  }
  return out;
}

RunResult run(const Kernel& k, const Sample& data, const Loss& loss, const StepSchedule& sched, std::int64_t T,
              const RunOptions& options) {
  return run(gram(k, data.X), data.y, loss, sched, T, options);
}

Vector last_iterate(const IterationState& state) {
  if (state.t < 1) throw DomainError("last iterate needs at least one iteration");
  return state.c_prev;
}

Vector averaged_iterate(const IterationState& state) {
  if (state.t < 1 || !(state.weight_sum > 0.0)) throw DomainError("averaged iterate needs at least one iteration");
  return state.avg_c / state.weight_sum;
}

Vector best_iterate(const IterationState& state) {
  if (state.t < 1) throw DomainError("best iterate needs at least one iteration");
  return state.best_c;
}

}  // namespace iterreg
