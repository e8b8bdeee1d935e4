#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "iterreg/kernel.hpp"

namespace testing_helpers {

inline iterreg::Matrix random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  iterreg::Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = u(rng);
  }
  return X;
}

inline iterreg::Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  iterreg::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline double min_eigenvalue(const iterreg::Matrix& G) {
  Eigen::SelfAdjointEigenSolver<iterreg::Matrix> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool close(double a, double b, double rel = 1e-12, double abs = 1e-12) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testing_helpers
