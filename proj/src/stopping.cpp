#include "iterreg/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "iterreg/errors.hpp"
#include "iterreg/random.hpp"

namespace iterreg {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool in_open(double v, double lo, double hi) { return v > lo && v < hi; }

}  // namespace

void RegimeParams::validate() const {
  if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("q must be finite and >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!in_open(zeta, 0.0, 2.0)) throw DomainError("zeta must lie in (0, 2)");
  if (smooth) {
    if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("theta must lie in [0, 1) for smooth losses");
  } else {
    const double lower = q / (q + 1.0);
    if (!(theta > 0.0 && theta < 1.0 && theta > lower)) {
      throw DomainError("theta must lie in (" + std::to_string(lower) + ", 1) for subgradient steps");
    }
  }
}

RateIndices compute_indices(const RegimeParams& p, IterateKind kind) {
  p.validate();
  const double D = 2.0 - p.tau + p.zeta * p.tau / 2.0;
  const double Q = p.q * (1.0 + p.zeta / 2.0);
  const double boundary = (p.q + 1.0) / (p.q + 2.0);
  const double one_minus = 1.0 - p.theta;

  RateIndices out;
  if (p.smooth || p.theta >= boundary) {
    out.gamma = 2.0 / (one_minus * ((1.0 + 2.0 * p.beta) * D + Q));
    out.alpha = p.beta / (p.beta * D + (D + Q) / 2.0);
  } else {
    const double r = p.theta * (1.0 + p.q) - p.q;
    out.gamma = 2.0 / (one_minus * ((1.0 + 2.0 * p.beta * r / one_minus) * D + Q));
    out.alpha = p.beta / (p.beta * D + one_minus / r * (D + Q) / 2.0);
  }

  if (!p.smooth) {
    const bool on_boundary = std::abs(p.theta - boundary) <= kBoundaryTol;
    const bool below = p.theta < boundary;
    out.has_log_factor = kind == IterateKind::last ? (below || on_boundary) : on_boundary;
  }
  return out;
}

RateIndices hinge_indices(double beta, double theta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!in_open(theta, 0.5, 1.0)) throw DomainError("hinge indices need theta in (1/2, 1)");
  return {1.0 / ((1.0 - theta) * (2.0 * beta + 1.0)), beta / (2.0 * beta + 1.0), false};
}

FixedTSchedule hinge_fixed_T_schedule(double beta, double eps) {
  if (!in_open(eps, 0.0, 1.0 / 3.0)) throw DomainError("eps must lie in (0, 1/3)");
  const double threshold = (4.0 - 3.0 * eps) / (4.0 + 6.0 * eps);
  if (!(beta > threshold && beta <= 1.0)) {
    throw DomainError("beta must lie in (" + std::to_string(threshold) + ", 1] for eps = " + std::to_string(eps));
  }
  const double theta = (4.0 * beta - 1.0 + 3.0 * eps * (2.0 * beta + 1.0)) / ((2.0 * beta + 1.0) * (2.0 + 3.0 * eps));
  return {theta, 1.0 / ((1.0 - theta) * (2.0 * beta + 1.0))};
}

std::int64_t theoretical_T(std::int64_t m, double gamma) {
  if (m < 1) throw DomainError("sample size must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and > 0");
  double v = std::pow(static_cast<double>(m), gamma);
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, v)) v = nearest;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(v)));
}

double lambda_T(double T, double q, double theta) {
  if (!(T >= 2.0) || !std::isfinite(T)) throw DomainError("lambda_T needs T >= 2");
  if (!(q >= 0.0)) throw DomainError("q must be >= 0");
  const double lower = q / (q + 1.0);
  if (!(theta > lower && theta > 0.0 && theta < 1.0)) throw DomainError("theta outside (q/(q+1), 1)");
  const double boundary = (q + 1.0) / (q + 2.0);
  if (std::abs(theta - boundary) <= kBoundaryTol) return std::log(T) * std::pow(T, -(1.0 - theta));
  if (theta > boundary) return std::pow(T, -(1.0 - theta));
  return std::log(T) * std::pow(T, -(theta * (1.0 + q) - q));
}

HoldoutResult holdout_stop(const Kernel& k, const Sample& data, const Loss& loss, const StepSchedule& sched,
                           std::int64_t T_max, double train_fraction, std::uint64_t seed, const RunOptions& options) {
  if (!in_open(train_fraction, 0.0, 1.0)) throw DomainError("train fraction must lie in (0, 1)");
  if (T_max < 1) throw DomainError("T_max must be >= 1");
  const Eigen::Index n = data.size();
  const auto n_train = static_cast<Eigen::Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw DomainError("degenerate hold-out partition: " + std::to_string(n_train) + " of " + std::to_string(n) +
                      " points for training");
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = make_rng(seed, 0x686f6c64);
  std::shuffle(perm.begin(), perm.end(), rng);

  HoldoutResult out;
  out.train_index.assign(perm.begin(), perm.begin() + n_train);
  out.validation_index.assign(perm.begin() + n_train, perm.end());
  const Sample train = subset(data, out.train_index);
  const Sample valid = subset(data, out.validation_index);

  const Matrix K_valid = cross_gram(k, valid.X, train.X);
  out.validation_curve.reserve(static_cast<std::size_t>(T_max));
  RunOptions opts = options;
  opts.observer = [&](const StepView& v) {
    const Vector pred = K_valid * v.c_before;
    out.validation_curve.push_back(empirical_risk_of_values(loss, pred, valid.y));
    if (options.observer) options.observer(v);
  };
  out.run = run(gram(k, train.X), train.y, loss, sched, T_max, opts);

  for (std::size_t i = 0; i < out.run.records.size(); ++i) out.run.records[i].validation_risk = out.validation_curve[i];
  const auto best = std::min_element(out.validation_curve.begin(), out.validation_curve.end());
  out.t_star = static_cast<std::int64_t>(best - out.validation_curve.begin()) + 1;
  return out;
}

}  // namespace iterreg
