#include "iterreg/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "iterreg/errors.hpp"
#include "iterreg/random.hpp"

namespace iterreg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::uint64_t kSampleStream = 0x73616d70;
constexpr std::uint64_t kFlipMcStream = 0x666c6970;

double sign_ge(double v) { return v >= 0.0 ? 1.0 : -1.0; }

double entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double margin_flip(double x0, double s) { return 0.5 - std::pow(std::abs(x0 - 0.5), 1.0 / s) / 2.0; }

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

enum class NoiseLaw { gaussian, laplace };

// E V(e) for noise e with the given law and scale; V depends on |e| only.
double noise_risk(const Loss& loss, NoiseLaw law, double scale) {
  if (scale == 0.0) return 0.0;
  const double p = loss.p();
  const double eps = loss.epsilon();
  const bool gauss = law == NoiseLaw::gaussian;
  switch (loss.kind()) {
    case LossKind::square:
      return gauss ? scale * scale : 2.0 * scale * scale;
    case LossKind::absolute:
      return gauss ? scale * std::sqrt(2.0 / std::numbers::pi) : scale;
    case LossKind::p_loss:
      return gauss ? std::pow(scale, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi)
                   : std::pow(scale, p) * std::tgamma(p + 1.0);
    case LossKind::eps_insensitive:
      if (gauss) {
        const double z = eps / scale;
        return 2.0 * (scale * std_normal_pdf(z) - eps * std_normal_sf(z));
      }
      return scale * std::exp(-eps / scale);
    case LossKind::eps_insensitive_p: {
      // Density of |e| beyond the tube edge w = eps^(1/p).
      const double w = std::pow(eps, 1.0 / p);
      auto density = [&](double u) {
        return gauss ? 2.0 * std_normal_pdf(u / scale) / scale : std::exp(-u / scale) / scale;
      };
      auto integrand = [&](double u) { return (std::pow(u, p) - eps) * density(u); };
      return simpson(integrand, w, w + 60.0 * scale, 400000);
    }
    case LossKind::hinge:
    case LossKind::logistic:
      break;
  }
  throw DomainError("loss " + loss.name() + " does not apply to a regression distribution");
}

// 2 int_0^{1/2} H(1/2 - u^(1/s)/2) du on a mesh graded towards u = 0, where
// the integrand is least regular.
double margin_entropy(double s) {
  constexpr int n = 200000;
  constexpr double grade = 4.0;
  double acc = 0.0;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double u = 0.5 * std::pow(static_cast<double>(i) / n, grade);
    const double mid = 0.5 * (prev + u);
    acc += (u - prev) * entropy(0.5 - std::pow(mid, 1.0 / s) / 2.0);
    prev = u;
  }
  return 2.0 * acc;
}

// Mean and standard error of h(x) over n uniform points.
TargetRisk uniform_mc(Eigen::Index dim, std::int64_t n, std::uint64_t stream, const PointFunction& h) {
  Rng rng = make_rng(0, stream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x(dim);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) x(k) = unif(rng);
    const double v = h(x);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (v - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

const FlipClassification* as_flip(const SyntheticDist& d) { return std::get_if<FlipClassification>(&d.variant()); }
const MarginClassification* as_margin(const SyntheticDist& d) {
  return std::get_if<MarginClassification>(&d.variant());
}

void require_classification(const SyntheticDist& d, const char* what) {
  if (!d.is_classification()) throw DomainError(std::string(what) + " needs a classification distribution");
}

}  // namespace

SyntheticDist SyntheticDist::regression_rkhs(KernelExpansion target, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("noise std must be finite and >= 0");
  const Eigen::Index dim = target.kernel().dim();
  return SyntheticDist(dim, RegressionRKHS{std::move(target), sigma});
}

SyntheticDist SyntheticDist::median_regression(KernelExpansion target, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DomainError("noise scale must be finite and >= 0");
  const Eigen::Index dim = target.kernel().dim();
  return SyntheticDist(dim, MedianRegression{std::move(target), scale});
}

SyntheticDist SyntheticDist::flip_linear(Vector w, double bias, double flip) {
  if (w.size() < 1) throw DomainError("decision weights must be nonempty");
  if (!(flip >= 0.0 && flip < 0.5)) throw DomainError("flip probability must lie in [0, 1/2)");
  if (!w.allFinite() || !std::isfinite(bias)) throw DomainError("decision parameters must be finite");
  const Eigen::Index dim = w.size();
  return SyntheticDist(dim, FlipClassification{std::move(w), bias, flip, {}, {}});
}

SyntheticDist SyntheticDist::flip_custom(Eigen::Index dim, PointFunction decision, PointFunction flip) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!decision || !flip) throw DomainError("custom flip distribution needs both functions");
  FlipClassification f;
  f.w = Vector::Zero(dim);
  f.decision_fn = std::move(decision);
  f.flip_fn = std::move(flip);
  SyntheticDist d(dim, std::move(f));
  const auto& fn = as_flip(d)->flip_fn;
  d.mean_flip_ = uniform_mc(dim, kTargetRiskMcSamples, kFlipMcStream, [&fn](const VectorRef& x) {
    const double p = fn(x);
    if (!(p >= 0.0 && p < 0.5)) throw DomainError("flip probability function left [0, 1/2)");
    return p;
  });
  return d;
}

SyntheticDist SyntheticDist::margin(Eigen::Index dim, double s) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("margin exponent s must be finite and > 0");
  return SyntheticDist(dim, MarginClassification{s});
}

std::string SyntheticDist::name() const {
  return std::visit(Overloaded{[](const RegressionRKHS&) { return std::string("regression_rkhs"); },
                               [](const MedianRegression&) { return std::string("median_regression"); },
                               [](const FlipClassification&) { return std::string("flip"); },
                               [](const MarginClassification&) { return std::string("margin"); }},
                    variant_);
}

bool SyntheticDist::is_classification() const {
  return std::holds_alternative<FlipClassification>(variant_) || std::holds_alternative<MarginClassification>(variant_);
}

double SyntheticDist::decision(const VectorRef& x) const {
  if (const auto* f = as_flip(*this)) return f->decision_fn ? f->decision_fn(x) : f->w.dot(x) + f->bias;
  if (as_margin(*this)) return x(0) - 0.5;
  throw DomainError("decision function needs a classification distribution");
}

double SyntheticDist::flip_probability(const VectorRef& x) const {
  if (const auto* f = as_flip(*this)) return f->flip_fn ? f->flip_fn(x) : f->flip;
  if (const auto* mc = as_margin(*this)) return margin_flip(x(0), mc->s);
  throw DomainError("flip probability needs a classification distribution");
}

TargetRisk SyntheticDist::bayes_risk() const {
  require_classification(*this, "bayes_risk");
  if (const auto* f = as_flip(*this)) return f->flip_fn ? *mean_flip_ : TargetRisk{f->flip, 0.0};
  // E|x0 - 1/2|^(1/s) = (1/2)^(1/s) / (1/s + 1) for x0 uniform on [0, 1].
  const double r = 1.0 / as_margin(*this)->s;
  return {0.5 - 0.5 * std::pow(0.5, r) / (r + 1.0), 0.0};
}

Sample sample(const SyntheticDist& dist, Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw DomainError("sample size must be >= 1");
  Rng rng = make_rng(seed, kSampleStream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Sample s;
  s.X.resize(m, dist.dim());
  s.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < dist.dim(); ++k) s.X(i, k) = unif(rng);
  }

  std::visit(Overloaded{[&](const RegressionRKHS& r) {
                          s.y = r.target.predict(s.X);
                          std::normal_distribution<double> noise(0.0, 1.0);
                          for (Eigen::Index i = 0; i < m; ++i) s.y(i) += r.sigma * noise(rng);
                        },
                        [&](const MedianRegression& r) {
                          s.y = r.target.predict(s.X);
                          std::exponential_distribution<double> mag(1.0);
                          for (Eigen::Index i = 0; i < m; ++i) {
                            const double e = mag(rng);
                            s.y(i) += (unif(rng) < 0.5 ? -r.scale : r.scale) * e;
                          }
                        },
                        [&](const auto&) {
                          Vector xi(dist.dim());
                          for (Eigen::Index i = 0; i < m; ++i) {
                            xi = s.X.row(i).transpose();
                            const double b = sign_ge(dist.decision(xi));
                            const double p = dist.flip_probability(xi);
                            s.y(i) = unif(rng) < p ? -b : b;
                          }
                        }},
             dist.variant());
  return s;
}

Predictor bayes_classifier(const SyntheticDist& dist) {
  require_classification(dist, "bayes_classifier");
  return [dist](const MatrixRef& X) {
    Vector out(X.rows());
    Vector x(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      x = X.row(i).transpose();
      out(i) = sign_ge(dist.decision(x));
    }
    return out;
  };
}

Predictor target_predictor(const SyntheticDist& dist, const Loss& loss) {
  if (dist.is_classification() != loss.is_classification()) {
    throw DomainError("loss " + loss.name() + " does not apply to the " + dist.name() + " distribution");
  }
  if (const auto* r = std::get_if<RegressionRKHS>(&dist.variant())) {
    return [t = r->target](const MatrixRef& X) { return t.predict(X); };
  }
  if (const auto* r = std::get_if<MedianRegression>(&dist.variant())) {
    return [t = r->target](const MatrixRef& X) { return t.predict(X); };
  }
  if (loss.kind() == LossKind::hinge) return bayes_classifier(dist);
  // Log-odds: sign(d) log((1 - p) / p).
  return [dist](const MatrixRef& X) {
    Vector out(X.rows());
    Vector x(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      x = X.row(i).transpose();
      const double p = dist.flip_probability(x);
      const double odds = p > 0.0 ? std::log1p(-p) - std::log(p) : std::numeric_limits<double>::infinity();
      out(i) = sign_ge(dist.decision(x)) * odds;
    }
    return out;
  };
}

TargetRisk target_risk(const SyntheticDist& dist, const Loss& loss) {
  if (dist.is_classification() != loss.is_classification()) {
    throw DomainError("loss " + loss.name() + " does not apply to the " + dist.name() + " distribution");
  }
  if (const auto* r = std::get_if<RegressionRKHS>(&dist.variant())) {
    return {noise_risk(loss, NoiseLaw::gaussian, r->sigma), 0.0};
  }
  if (const auto* r = std::get_if<MedianRegression>(&dist.variant())) {
    return {noise_risk(loss, NoiseLaw::laplace, r->scale), 0.0};
  }
  if (loss.kind() == LossKind::hinge) {
    const TargetRisk b = dist.bayes_risk();
    return {2.0 * b.value, 2.0 * b.stderr_};
  }
  if (const auto* f = as_flip(dist)) {
    if (!f->flip_fn) return {entropy(f->flip), 0.0};
    const auto& fn = f->flip_fn;
    return uniform_mc(dist.dim(), kTargetRiskMcSamples, kFlipMcStream, [&fn](const VectorRef& x) { return entropy(fn(x)); });
  }
  return {margin_entropy(as_margin(dist)->s), 0.0};
}

double margin_mass(const SyntheticDist& dist, double delta) {
  const auto* mc = as_margin(dist);
  if (mc == nullptr) throw DomainError("margin_mass needs a margin distribution");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  return std::min(1.0, 2.0 * std::pow(2.0 * delta, mc->s));
}

KernelExpansion random_expansion(const Kernel& k, Eigen::Index n_centers, std::uint64_t seed) {
  if (n_centers < 1) throw DomainError("target needs at least one center");
  Rng rng = make_rng(seed, 0x74617267);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix centers(n_centers, k.dim());
  for (Eigen::Index i = 0; i < n_centers; ++i) {
    for (Eigen::Index j = 0; j < k.dim(); ++j) centers(i, j) = unif(rng);
  }
  Vector coeffs(n_centers);
  for (Eigen::Index i = 0; i < n_centers; ++i) coeffs(i) = (2.0 * unif(rng) - 1.0) / static_cast<double>(n_centers);
  return KernelExpansion(k, std::move(centers), std::move(coeffs));
}

}  // namespace iterreg
