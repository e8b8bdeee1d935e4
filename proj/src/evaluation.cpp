#include "iterreg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>


#include "iterreg/errors.hpp"
#include "iterreg/random.hpp"

namespace iterreg {

namespace {

// Running moments of one column, merged in block order.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add_block(const VectorRef& v) {
    const double n = static_cast<double>(v.size());
    if (n == 0.0) return;
    const double bmean = v.mean();
    const double bm2 = (v.array() - bmean).square().sum();
    const double total = count + n;
    const double delta = bmean - mean;
    mean += delta * n / total;
    m2 += bm2 + delta * delta * count * n / total;
    count = total;
  }

  McEstimate estimate() const {
    const double var = count > 1.0 ? m2 / (count - 1.0) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / count), static_cast<std::int64_t>(count)};
  }
};

Eigen::Index block_count(std::int64_t n) { return static_cast<Eigen::Index>((n + kMcBlock - 1) / kMcBlock); }

Sample block_sample(const SyntheticDist& dist, std::int64_t n, std::uint64_t seed, Eigen::Index b) {
  const std::int64_t len = std::min<std::int64_t>(kMcBlock, n - static_cast<std::int64_t>(b) * kMcBlock);
  return sample(dist, static_cast<Eigen::Index>(len), derive_seed(seed, static_cast<std::uint64_t>(b)));
}

// Evaluates per-point values block by block, possibly in parallel, and
// reduces the blocks in index order.
std::vector<McEstimate> mc_reduce(const SyntheticDist& dist, std::int64_t n, std::uint64_t seed, Eigen::Index k,
                                  const std::function<Matrix(const Sample&)>& values) {
  if (n < 2) throw DomainError("Monte Carlo estimates need n >= 2");
  const Eigen::Index blocks = block_count(n);
  std::vector<Matrix> results(static_cast<std::size_t>(blocks));

  std::atomic<Eigen::Index> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (Eigen::Index b = next++; b < blocks && !failed; b = next++) {
      try {
        results[static_cast<std::size_t>(b)] = values(block_sample(dist, n, seed, b));
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Moments> acc(static_cast<std::size_t>(k));
  for (const Matrix& r : results) {
    if (r.cols() != k) throw DimensionError("Monte Carlo values have the wrong number of columns");
    for (Eigen::Index j = 0; j < k; ++j) acc[static_cast<std::size_t>(j)].add_block(r.col(j));
  }
  std::vector<McEstimate> out;
  out.reserve(acc.size());
  for (const auto& m : acc) out.push_back(m.estimate());
  return out;
}

Matrix check_predictions(const Matrix& preds, Eigen::Index rows, Eigen::Index k) {
  if (preds.rows() != rows || preds.cols() != k) {
    throw DimensionError("predictor returned " + std::to_string(preds.rows()) + "x" + std::to_string(preds.cols()) +
                         " values for " + std::to_string(rows) + " points");
  }
  return preds;
}

double sign_ge(double v) { return v >= 0.0 ? 1.0 : -1.0; }

thread_local bool t_serial = false;

}  // namespace

SerialScope::SerialScope() : previous_(t_serial) { t_serial = true; }
SerialScope::~SerialScope() { t_serial = previous_; }

nlohmann::json RiskReport::to_json() const {
  nlohmann::json j;
  j["empirical_risk"] = empirical_risk;
  j["expected_risk"] = expected_risk;
  j["expected_risk_stderr"] = expected_risk_stderr;
  j["excess_risk"] = excess_risk ? nlohmann::json(*excess_risk) : nlohmann::json(nullptr);
  j["misclassification_rate"] = misclassification_rate ? nlohmann::json(*misclassification_rate) : nlohmann::json(nullptr);
  j["mc_samples"] = mc_samples;
  return j;
}

double empirical_risk(const Loss& loss, const VectorRef& predictions, const VectorRef& labels) {
  if (predictions.size() != labels.size()) throw DimensionError("empirical_risk: predictions and labels differ in length");
  if (labels.size() == 0) throw DimensionError("empirical_risk: empty sample");
  double s = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) s += loss.value(labels(i), predictions(i));
  return s / static_cast<double>(labels.size());
}

McEstimate mean_estimate(const VectorRef& values) {
  if (values.size() == 0) throw DimensionError("mean_estimate: no values");
  Moments m;
  m.add_block(values);
  return m.estimate();
}

Sample mc_sample(const SyntheticDist& dist, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("Monte Carlo sample size must be >= 1");
  Sample out;
  out.X.resize(static_cast<Eigen::Index>(n), dist.dim());
  out.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index b = 0; b < block_count(n); ++b) {
    Sample s = block_sample(dist, n, seed, b);
    out.X.middleRows(b * kMcBlock, s.size()) = s.X;
    out.y.segment(b * kMcBlock, s.size()) = s.y;
  }
  return out;
}

std::vector<McEstimate> expected_risk_mc(const Loss& loss, const MultiPredictor& f, Eigen::Index n_predictors,
                                         const SyntheticDist& dist, std::int64_t n, std::uint64_t seed) {
  return mc_reduce(dist, n, seed, n_predictors, [&](const Sample& s) {
    Matrix v = check_predictions(f(s.X), s.size(), n_predictors);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = loss.value(s.y(i), v(i, j));
    }
    return v;
  });
}

McEstimate expected_risk_mc(const Loss& loss, const Predictor& f, const SyntheticDist& dist, std::int64_t n,
                            std::uint64_t seed) {
  return expected_risk_mc(loss, [&f](const MatrixRef& X) -> Matrix { return f(X); }, 1, dist, n, seed).front();
}

McEstimate excess_risk(const Loss& loss, const Predictor& f, const SyntheticDist& dist, std::int64_t n,
                       std::uint64_t seed) {
  const TargetRisk target = target_risk(dist, loss);
  McEstimate e = expected_risk_mc(loss, f, dist, n, seed);
  e.estimate -= target.value;
  e.stderr_ = std::hypot(e.stderr_, target.stderr_);
  return e;
}

Predictor sign_classifier(Predictor f) {
  return [f = std::move(f)](const MatrixRef& X) -> Vector { return f(X).unaryExpr(&sign_ge); };
}

std::vector<McEstimate> misclassification_risk_mc(const MultiPredictor& classifier, Eigen::Index n_predictors,
                                                  const SyntheticDist& dist, std::int64_t n, std::uint64_t seed) {
  if (!dist.is_classification()) throw DomainError("misclassification risk needs a classification distribution");
  return mc_reduce(dist, n, seed, n_predictors, [&](const Sample& s) {
    Matrix v = check_predictions(classifier(s.X), s.size(), n_predictors);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = v(i, j) != s.y(i) ? 1.0 : 0.0;
    }
    return v;
  });
}

McEstimate misclassification_risk_mc(const Predictor& classifier, const SyntheticDist& dist, std::int64_t n,
                                     std::uint64_t seed) {
  return misclassification_risk_mc([&classifier](const MatrixRef& X) -> Matrix { return classifier(X); }, 1, dist, n,
                                   seed)
      .front();
}

RiskAndError risk_and_misclassification_mc(const Loss& loss, const MultiPredictor& f, Eigen::Index n_predictors,
                                           const SyntheticDist& dist, std::int64_t n, std::uint64_t seed) {
  if (!dist.is_classification()) throw DomainError("misclassification risk needs a classification distribution");
  // Columns [0, k) hold losses and [k, 2k) zero-one errors of the same evaluation.
  auto all = mc_reduce(dist, n, seed, 2 * n_predictors, [&](const Sample& s) {
    const Matrix v = check_predictions(f(s.X), s.size(), n_predictors);
    Matrix out(v.rows(), 2 * n_predictors);
    for (Eigen::Index j = 0; j < n_predictors; ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        out(i, j) = loss.value(s.y(i), v(i, j));
        out(i, n_predictors + j) = sign_ge(v(i, j)) != s.y(i) ? 1.0 : 0.0;
      }
    }
    return out;
  });
  RiskAndError r;
  r.risk.assign(all.begin(), all.begin() + n_predictors);
  r.misclassification.assign(all.begin() + n_predictors, all.end());
  return r;
}

ComparisonResult comparison_check_values(const VectorRef& predictions, const Sample& points,
                                         const SyntheticDist& dist) {
  if (!dist.is_classification()) throw DomainError("comparison check needs a classification distribution");
  const VectorRef labels = points.y;
  if (predictions.size() != labels.size() || labels.size() < 2) {
    throw DimensionError("comparison check needs matching predictions and labels, at least two");
  }
  // Paired differences against the Bayes rule on the same points: both sides
  // are unbiased and the Bayes rule's own sampling noise cancels.
  const Vector bayes = bayes_classifier(dist)(points.X);
  const Loss hinge = Loss::hinge();
  Vector mis(labels.size());
  Vector hin(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double wrong_f = sign_ge(predictions(i)) != labels(i) ? 1.0 : 0.0;
    const double wrong_b = bayes(i) != labels(i) ? 1.0 : 0.0;
    mis(i) = wrong_f - wrong_b;
    hin(i) = hinge.value(labels(i), predictions(i)) - hinge.value(labels(i), bayes(i));
  }
  const McEstimate m = mean_estimate(mis);
  const McEstimate h = mean_estimate(hin);

  ComparisonResult r;
  r.lhs = m.estimate;
  r.rhs = h.estimate;
  r.combined_stderr = std::hypot(m.stderr_, h.stderr_);
  r.holds = r.lhs <= r.rhs + 3.0 * r.combined_stderr;
  return r;
}

ComparisonResult comparison_check(const Predictor& f, const SyntheticDist& dist, std::int64_t n, std::uint64_t seed) {
  if (!dist.is_classification()) throw DomainError("comparison check needs a classification distribution");
  const Sample s = mc_sample(dist, n, seed);
  const Vector pred = f(s.X);
  return comparison_check_values(pred, s, dist);
}

unsigned worker_threads() {
  if (t_serial) return 1;
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IterREG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

}  // namespace iterreg
