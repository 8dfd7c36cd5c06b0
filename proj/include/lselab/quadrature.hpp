#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "lselab/gaussian.hpp"

namespace lselab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Probabilists' Gauss-Hermite rule: sum w_i f(x_i) ~ E f(Z), Z ~ N(0,1).
QuadratureRule gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// E[f(x)] over the marginal of `sites` under the Gaussian, by tensor
/// Gauss-Hermite after a Cholesky change of variables. f receives values in
/// region order of `sites`.
double gaussian_quadrature(const GaussianData& g, const Region& sites,
                           const std::function<double(const Eigen::VectorXd&)>& f,
                           int nodes_per_dim = 24);

}  // namespace lselab
