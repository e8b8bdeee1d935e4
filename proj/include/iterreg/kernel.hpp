#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace iterreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

// x -> x[coord]^power, the one feature family that can be written to a config.
struct Monomial {
  Eigen::Index coord = 0;
  int power = 1;
};

struct FeatureMap {
  std::function<double(const VectorRef&)> fn;
  std::optional<Monomial> monomial;  // set when the map is serializable

  static FeatureMap from_monomial(Monomial mono);
};

struct LinearKernel {};

// (<x, x'> + offset)^degree
struct PolynomialKernel {
  int degree = 2;
  double offset = 1.0;
};

// exp(-|x - x'|^2 / (2 h^2)) with h the bandwidth
struct GaussianKernel {
  double bandwidth = 1.0;
};

// sum_i phi_i(x) phi_i(x')
struct DictionaryKernel {
  std::vector<FeatureMap> features;
};

/// A reproducing kernel on R^dim.
///
/// Kernels are immutable once built and can be shared between threads.
class Kernel {
 public:
  using Variant = std::variant<LinearKernel, PolynomialKernel, GaussianKernel, DictionaryKernel>;

  static Kernel linear(Eigen::Index dim);
  static Kernel polynomial(Eigen::Index dim, int degree, double offset);
  static Kernel gaussian(Eigen::Index dim, double bandwidth);
  static Kernel dictionary(Eigen::Index dim, std::vector<FeatureMap> features);

  Eigen::Index dim() const { return dim_; }
  const Variant& variant() const { return variant_; }
  std::string name() const;

  // No dimension checks; callers validate once per batch.
  double unchecked(const VectorRef& x, const VectorRef& x2) const;

 private:
  Kernel(Eigen::Index dim, Variant v) : dim_(dim), variant_(std::move(v)) {}

  Eigen::Index dim_;
  Variant variant_;
};

struct GramMatrix {
  Matrix entries;

  Eigen::Index size() const { return entries.rows(); }
};

enum class KappaProvenance { analytic, data_estimated, user_supplied };

std::string to_string(KappaProvenance p);

// Upper bound on sup_x sqrt(K(x, x)).
struct KappaBound {
  double value = 0.0;
  KappaProvenance provenance = KappaProvenance::analytic;
};

double eval(const Kernel& k, const VectorRef& x, const VectorRef& x2);

// Points are the rows of X.
GramMatrix gram(const Kernel& k, const MatrixRef& X);

// rows(A) x rows(B) matrix of kernel values.
Matrix cross_gram(const Kernel& k, const MatrixRef& A, const MatrixRef& B);

double expansion_eval(const Kernel& k, const MatrixRef& centers, const VectorRef& c, const VectorRef& x);

/// c' G c, clamped at zero so that roundoff cannot produce a negative norm.
double rkhs_norm_sq(const GramMatrix& G, const VectorRef& c);

/// Gaussian kernels have the analytic bound 1. Other kernels take the user
/// value when present and fall back to the largest sqrt(K(x_i, x_i)) over
/// the sample, which only bounds the kernel on the observed points.
KappaBound kappa(const Kernel& k, const MatrixRef* sample = nullptr, std::optional<double> user = std::nullopt);

/// Function f = sum_j c_j K(., x_j) stored as its centers and coefficients.
class KernelExpansion {
 public:
  KernelExpansion(Kernel k, Matrix centers, Vector coeffs);

  const Kernel& kernel() const { return kernel_; }
  const Matrix& centers() const { return centers_; }
  const Vector& coefficients() const { return coeffs_; }

  double operator()(const VectorRef& x) const;
  Vector predict(const MatrixRef& X) const;

 private:
  Kernel kernel_;
  Matrix centers_;
  Vector coeffs_;
};

// Evaluates several coefficient vectors sharing the same centers in one kernel
// pass. Result is rows(X) x cols(coeffs).
Matrix predict_many(const Kernel& k, const MatrixRef& centers, const MatrixRef& coeffs, const MatrixRef& X);

}  // namespace iterreg
