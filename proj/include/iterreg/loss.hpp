#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace iterreg {

enum class LossKind { square, absolute, p_loss, hinge, eps_insensitive, eps_insensitive_p, logistic };

// Constants of the growth condition |V'_-(y, a)| <= c_q (1 + |a|^q).
struct GrowthParams {
  double q = 0.0;
  double c_q = 1.0;
  double v0 = 0.0;               // sup_y V(y, 0)
  std::optional<double> lipschitz;  // Lipschitz constant of V'(y, .) for smooth losses
};

/// A loss V(y, a), convex in the prediction a.
///
/// Regression losses need a bound B on |y| to state their growth constants;
/// it is either configured or taken from the largest observed label.
/// The exponential loss is not offered: its derivative outgrows every
/// polynomial, so no finite (q, c_q) exists for it.
class Loss {
 public:
  static Loss square(double label_bound = 1.0);
  static Loss absolute(double label_bound = 1.0);
  static Loss p_loss(int p, double label_bound = 1.0);
  static Loss hinge();
  static Loss eps_insensitive(double eps, double label_bound = 1.0);
  static Loss eps_insensitive_p(double eps, double p, double label_bound = 1.0);
  static Loss logistic();

  // Parses the config names "square", "absolute", "p_loss", "hinge",
  // "eps_insensitive", "eps_insensitive_p" and "logistic".
  static LossKind kind_from_name(std::string_view name);

  LossKind kind() const { return kind_; }
  std::string name() const;
  bool is_classification() const { return kind_ == LossKind::hinge || kind_ == LossKind::logistic; }
  bool is_smooth() const { return growth_params().lipschitz.has_value(); }

  double p() const { return p_; }
  double epsilon() const { return eps_; }
  double label_bound() const { return label_bound_; }

  // Same loss with a different |y| bound; classification losses ignore it.
  Loss with_label_bound(double b) const;

  double value(double y, double a) const;
  double left_derivative(double y, double a) const;
  GrowthParams growth_params() const;

  // Throws DomainError when y is not an admissible label for this loss.
  void check_label(double y) const;

 private:
  Loss(LossKind kind, double p, double eps, double b) : kind_(kind), p_(p), eps_(eps), label_bound_(b) {}

  LossKind kind_;
  double p_;
  double eps_;
  double label_bound_;
};

}  // namespace iterreg
