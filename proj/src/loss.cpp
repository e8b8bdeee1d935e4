#include "iterreg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iterreg/errors.hpp"

namespace iterreg {

namespace {

void check_bound(double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("label bound must be finite and >= 0");
}

// |r|^e, with 0^0 = 1.
double abs_pow(double r, double e) { return e == 0.0 ? 1.0 : std::pow(std::abs(r), e); }

double sign_pow_derivative(double r, double p) {
  if (r == 0.0) return 0.0;
  const double mag = p * abs_pow(r, p - 1.0);
  return r > 0.0 ? mag : -mag;
}

// Growth constant for p |a - y|^(p-1) with |y| <= b.
double power_growth_constant(double p, double b) {
  return p * std::max(1.0, std::pow(2.0, p - 2.0)) * std::max(1.0, std::pow(b, p - 1.0));
}

}  // namespace

Loss Loss::square(double label_bound) {
  check_bound(label_bound);
  return Loss(LossKind::square, 2.0, 0.0, label_bound);
}

Loss Loss::absolute(double label_bound) {
  check_bound(label_bound);
  return Loss(LossKind::absolute, 1.0, 0.0, label_bound);
}

Loss Loss::p_loss(int p, double label_bound) {
  if (p < 1) throw DomainError("p_loss needs an integer p >= 1");
  check_bound(label_bound);
  return Loss(LossKind::p_loss, static_cast<double>(p), 0.0, label_bound);
}

Loss Loss::hinge() { return Loss(LossKind::hinge, 1.0, 0.0, 1.0); }

Loss Loss::eps_insensitive(double eps, double label_bound) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps_insensitive needs eps > 0");
  check_bound(label_bound);
  return Loss(LossKind::eps_insensitive, 1.0, eps, label_bound);
}

Loss Loss::eps_insensitive_p(double eps, double p, double label_bound) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps_insensitive_p needs eps > 0");
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("eps_insensitive_p needs p > 1");
  check_bound(label_bound);
  return Loss(LossKind::eps_insensitive_p, p, eps, label_bound);
}

Loss Loss::logistic() { return Loss(LossKind::logistic, 1.0, 0.0, 1.0); }

LossKind Loss::kind_from_name(std::string_view name) {
  if (name == "square") return LossKind::square;
  if (name == "absolute") return LossKind::absolute;
  if (name == "p_loss") return LossKind::p_loss;
  if (name == "hinge") return LossKind::hinge;
  if (name == "eps_insensitive") return LossKind::eps_insensitive;
  if (name == "eps_insensitive_p") return LossKind::eps_insensitive_p;
  if (name == "logistic") return LossKind::logistic;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

std::string Loss::name() const {
  switch (kind_) {
    case LossKind::square:
      return "square";
    case LossKind::absolute:
      return "absolute";
    case LossKind::p_loss:
      return "p_loss";
    case LossKind::hinge:
      return "hinge";
    case LossKind::eps_insensitive:
      return "eps_insensitive";
    case LossKind::eps_insensitive_p:
      return "eps_insensitive_p";
    case LossKind::logistic:
      return "logistic";
  }
  return "unknown";
}

Loss Loss::with_label_bound(double b) const {
  check_bound(b);
  Loss out = *this;
  if (!is_classification()) out.label_bound_ = b;
  return out;
}

void Loss::check_label(double y) const {
  if (is_classification()) {
    if (y != 1.0 && y != -1.0) throw DomainError(name() + " loss needs labels in {-1, +1}, got " + std::to_string(y));
  } else if (!std::isfinite(y)) {
    throw DomainError("non-finite label");
  }
}

double Loss::value(double y, double a) const {
  check_label(y);
  const double r = a - y;
  switch (kind_) {
    case LossKind::square:
      return r * r;
    case LossKind::absolute:
      return std::abs(r);
    case LossKind::p_loss:
      return abs_pow(r, p_);
    case LossKind::hinge:
      return std::max(1.0 - y * a, 0.0);
    case LossKind::eps_insensitive:
      return std::max(std::abs(r) - eps_, 0.0);
    case LossKind::eps_insensitive_p:
      return std::max(abs_pow(r, p_) - eps_, 0.0);
    case LossKind::logistic: {
      const double z = -y * a;
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
  }
  return 0.0;
}

double Loss::left_derivative(double y, double a) const {
  check_label(y);
  const double r = a - y;
  switch (kind_) {
    case LossKind::square:
      return 2.0 * r;
    case LossKind::absolute:
      return r <= 0.0 ? -1.0 : 1.0;
    case LossKind::p_loss:
      if (p_ == 1.0) return r <= 0.0 ? -1.0 : 1.0;
      return sign_pow_derivative(r, p_);
    case LossKind::hinge: {
      const double margin = y * a;
      if (margin < 1.0) return -y;
      if (margin > 1.0) return 0.0;
      // At the kink the slope to the left is -y for y = 1 and 0 for y = -1.
      return y > 0.0 ? -y : 0.0;
    }
    case LossKind::eps_insensitive:
      if (r <= -eps_) return -1.0;
      if (r <= eps_) return 0.0;
      return 1.0;
    case LossKind::eps_insensitive_p: {
      const double width = std::pow(eps_, 1.0 / p_);
      if (r <= -width || r > width) return sign_pow_derivative(r, p_);
      return 0.0;
    }
    case LossKind::logistic: {
      // -y / (1 + e^{ya})
      const double z = y * a;
      const double s = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
      return -y * s;
    }
  }
  return 0.0;
}

GrowthParams Loss::growth_params() const {
  const double b = label_bound_;
  switch (kind_) {
    case LossKind::square:
      return {1.0, 2.0 * std::max(1.0, b), b * b, 2.0};
    case LossKind::absolute:
      return {0.0, 0.5, b, std::nullopt};
    case LossKind::p_loss:
      if (p_ == 1.0) return {0.0, 0.5, b, std::nullopt};
      return {p_ - 1.0, power_growth_constant(p_, b), std::pow(b, p_),
              p_ == 2.0 ? std::optional<double>(2.0) : std::nullopt};
    case LossKind::hinge:
      return {0.0, 0.5, 1.0, std::nullopt};
    case LossKind::eps_insensitive:
      return {0.0, 0.5, std::max(b - eps_, 0.0), std::nullopt};
    case LossKind::eps_insensitive_p:
      return {p_ - 1.0, power_growth_constant(p_, b), std::max(std::pow(b, p_) - eps_, 0.0), std::nullopt};
    case LossKind::logistic:
      return {0.0, 1.0, std::numbers::ln2, 1.0};
  }
  return {};
}

}  // namespace iterreg
