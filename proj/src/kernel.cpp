#include "iterreg/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "iterreg/errors.hpp"

namespace iterreg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const Kernel& k, Eigen::Index d, const char* what) {
  if (d != k.dim()) {
    throw DimensionError(std::string(what) + ": point has dimension " + std::to_string(d) + ", kernel expects " +
                         std::to_string(k.dim()));
  }
}

constexpr Eigen::Index kPredictBlock = 512;

// Plain loops so that single evaluations and Gram blocks agree bit for bit.
double dot_raw(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

double sq_dist_raw(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// out(i, j) = K(a_i, b_j) for points stored as columns. With symmetric set,
// a and b are the same set and only the upper triangle is evaluated.
template <class F>
void fill_with(F kv, const Matrix& a, const Matrix& b, Matrix& out, bool symmetric) {
  const Eigen::Index d = a.rows();
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const double* bj = b.col(j).data();
    const Eigen::Index stop = symmetric ? j + 1 : a.cols();
    for (Eigen::Index i = 0; i < stop; ++i) {
      const double v = kv(a.col(i).data(), bj, d);
      out(i, j) = v;
      if (symmetric) out(j, i) = v;
    }
  }
}

void fill(const Kernel& k, const Matrix& a, const Matrix& b, Matrix& out, bool symmetric) {
  std::visit(Overloaded{[&](const LinearKernel&) { fill_with(dot_raw, a, b, out, symmetric); },
                        [&](const PolynomialKernel& p) {
                          fill_with([&p](const double* x, const double* y,
                                         Eigen::Index d) { return std::pow(dot_raw(x, y, d) + p.offset, p.degree); },
                                    a, b, out, symmetric);
                        },
                        [&](const GaussianKernel& g) {
                          const double scale = -1.0 / (2.0 * g.bandwidth * g.bandwidth);
                          fill_with([scale](const double* x, const double* y,
                                            Eigen::Index d) { return std::exp(sq_dist_raw(x, y, d) * scale); },
                                    a, b, out, symmetric);
                        },
                        [&](const DictionaryKernel&) {
                          fill_with([&k](const double* x, const double* y, Eigen::Index d) {
                            return k.unchecked(Eigen::Map<const Vector>(x, d), Eigen::Map<const Vector>(y, d));
                          },
                                    a, b, out, symmetric);
                        }},
             k.variant());
}

}  // namespace

FeatureMap FeatureMap::from_monomial(Monomial mono) {
  if (mono.coord < 0 || mono.power < 0) throw DomainError("monomial needs coord >= 0 and power >= 0");
  FeatureMap f;
  f.monomial = mono;
  f.fn = [mono](const VectorRef& x) { return std::pow(x(mono.coord), mono.power); };
  return f;
}

Kernel Kernel::linear(Eigen::Index dim) {
  if (dim < 1) throw DomainError("kernel dimension must be positive");
  return Kernel(dim, LinearKernel{});
}

Kernel Kernel::polynomial(Eigen::Index dim, int degree, double offset) {
  if (dim < 1) throw DomainError("kernel dimension must be positive");
  if (degree < 1) throw DomainError("polynomial degree must be a positive integer");
  if (!(offset >= 0.0)) throw DomainError("polynomial offset must be >= 0");
  return Kernel(dim, PolynomialKernel{degree, offset});
}

Kernel Kernel::gaussian(Eigen::Index dim, double bandwidth) {
  if (dim < 1) throw DomainError("kernel dimension must be positive");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw DomainError("gaussian bandwidth must be > 0");
  return Kernel(dim, GaussianKernel{bandwidth});
}

Kernel Kernel::dictionary(Eigen::Index dim, std::vector<FeatureMap> features) {
  if (dim < 1) throw DomainError("kernel dimension must be positive");
  if (features.empty()) throw DomainError("dictionary kernel needs at least one feature map");
  for (const auto& f : features) {
    if (!f.fn) throw DomainError("dictionary feature map is empty");
    if (f.monomial && f.monomial->coord >= dim) throw DomainError("monomial coordinate out of range");
  }
  return Kernel(dim, DictionaryKernel{std::move(features)});
}

std::string Kernel::name() const {
  return std::visit(Overloaded{[](const LinearKernel&) { return std::string("linear"); },
                               [](const PolynomialKernel&) { return std::string("polynomial"); },
                               [](const GaussianKernel&) { return std::string("gaussian"); },
                               [](const DictionaryKernel&) { return std::string("dictionary"); }},
                    variant_);
}

double Kernel::unchecked(const VectorRef& x, const VectorRef& x2) const {
  const Eigen::Index d = x.size();
  return std::visit(Overloaded{[&](const LinearKernel&) { return dot_raw(x.data(), x2.data(), d); },
                               [&](const PolynomialKernel& p) {
                                 return std::pow(dot_raw(x.data(), x2.data(), d) + p.offset, p.degree);
                               },
                               [&](const GaussianKernel& g) {
                                 const double scale = -1.0 / (2.0 * g.bandwidth * g.bandwidth);
                                 return std::exp(sq_dist_raw(x.data(), x2.data(), d) * scale);
                               },
                               [&](const DictionaryKernel& d) {
                                 double s = 0.0;
                                 for (const auto& f : d.features) s += f.fn(x) * f.fn(x2);
                                 return s;
                               }},
                    variant_);
}

std::string to_string(KappaProvenance p) {
  switch (p) {
    case KappaProvenance::analytic:
      return "analytic";
    case KappaProvenance::data_estimated:
      return "data-estimated";
    case KappaProvenance::user_supplied:
      return "user-supplied";
  }
  return "unknown";
}

double eval(const Kernel& k, const VectorRef& x, const VectorRef& x2) {
  require_dim(k, x.size(), "eval");
  require_dim(k, x2.size(), "eval");
  return k.unchecked(x, x2);
}

GramMatrix gram(const Kernel& k, const MatrixRef& X) {
  if (X.rows() == 0) throw DimensionError("gram: empty point set");
  require_dim(k, X.cols(), "gram");
  const Eigen::Index m = X.rows();
  // Columns of the transpose are contiguous points.
  const Matrix pts = X.transpose();
  Matrix G(m, m);
  fill(k, pts, pts, G, true);
  return GramMatrix{std::move(G)};
}

Matrix cross_gram(const Kernel& k, const MatrixRef& A, const MatrixRef& B) {
  require_dim(k, A.cols(), "cross_gram");
  require_dim(k, B.cols(), "cross_gram");
  const Matrix a = A.transpose();
  const Matrix b = B.transpose();
  Matrix out(A.rows(), B.rows());
  fill(k, a, b, out, false);
  return out;
}

double expansion_eval(const Kernel& k, const MatrixRef& centers, const VectorRef& c, const VectorRef& x) {
  if (centers.rows() != c.size()) {
    throw DimensionError("expansion_eval: " + std::to_string(centers.rows()) + " centers but " +
                         std::to_string(c.size()) + " coefficients");
  }
  require_dim(k, x.size(), "expansion_eval");
  if (centers.rows() > 0) require_dim(k, centers.cols(), "expansion_eval");
  const Matrix pts = centers.transpose();
  double s = 0.0;
  for (Eigen::Index j = 0; j < pts.cols(); ++j) s += c(j) * k.unchecked(x, pts.col(j));
  return s;
}

double rkhs_norm_sq(const GramMatrix& G, const VectorRef& c) {
  if (G.size() != c.size()) throw DimensionError("rkhs_norm_sq: coefficient length does not match Gram size");
  const double v = c.dot(G.entries * c);
  return std::max(v, 0.0);
}

KappaBound kappa(const Kernel& k, const MatrixRef* sample, std::optional<double> user) {
  if (std::holds_alternative<GaussianKernel>(k.variant())) return {1.0, KappaProvenance::analytic};
  if (user) {
    if (!(*user >= 0.0) || !std::isfinite(*user)) throw DomainError("user kappa must be finite and >= 0");
    return {*user, KappaProvenance::user_supplied};
  }
  if (sample == nullptr || sample->rows() == 0) {
    throw DomainError("kappa: no analytic bound for the " + k.name() + " kernel and neither a sample nor a user value");
  }
  require_dim(k, sample->cols(), "kappa");
  const Matrix pts = sample->transpose();
  double best = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    best = std::max(best, std::sqrt(std::max(0.0, k.unchecked(pts.col(i), pts.col(i)))));
  }
  return {best, KappaProvenance::data_estimated};
}

KernelExpansion::KernelExpansion(Kernel k, Matrix centers, Vector coeffs)
    : kernel_(std::move(k)), centers_(std::move(centers)), coeffs_(std::move(coeffs)) {
  if (centers_.rows() != coeffs_.size()) throw DimensionError("KernelExpansion: centers and coefficients differ in length");
  if (centers_.rows() > 0) require_dim(kernel_, centers_.cols(), "KernelExpansion");
}

double KernelExpansion::operator()(const VectorRef& x) const { return expansion_eval(kernel_, centers_, coeffs_, x); }

Vector KernelExpansion::predict(const MatrixRef& X) const { return predict_many(kernel_, centers_, coeffs_, X).col(0); }

Matrix predict_many(const Kernel& k, const MatrixRef& centers, const MatrixRef& coeffs, const MatrixRef& X) {
  if (centers.rows() != coeffs.rows()) throw DimensionError("predict_many: centers and coefficient rows differ");
  Matrix out = Matrix::Zero(X.rows(), coeffs.cols());
  if (centers.rows() == 0 || X.rows() == 0) return out;
  for (Eigen::Index start = 0; start < X.rows(); start += kPredictBlock) {
    const Eigen::Index len = std::min(kPredictBlock, X.rows() - start);
    const Matrix K = cross_gram(k, X.middleRows(start, len), centers);
    out.middleRows(start, len).noalias() = K * coeffs;
  }
  return out;
}

}  // namespace iterreg
