#include "lselab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace lselab {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
// from the first eigenvector components.
QuadratureRule from_jacobi(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mass) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = diag(i);
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = off(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw std::runtime_error("quadrature eigensolve failed");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<size_t>(i)] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<size_t>(i)] = mass * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  return from_jacobi(diag, off, 1.0);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return from_jacobi(diag, off, 2.0);
}

double gaussian_quadrature(const GaussianData& g, const Region& sites,
                           const std::function<double(const Eigen::VectorXd&)>& f,
                           int nodes_per_dim) {
  const int k = sites.size();
  if (k == 0) return f(Eigen::VectorXd(0));
  Eigen::VectorXd mean = g.mean_block(sites);
  Eigen::MatrixXd cov = g.covariance_block(sites);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("marginal covariance not PD");
  Eigen::MatrixXd Lc = llt.matrixL();

  QuadratureRule rule = gauss_hermite(nodes_per_dim);
  std::vector<size_t> idx(static_cast<size_t>(k), 0);
  double total = 0;
  Eigen::VectorXd z(k);
  while (true) {
    double w = 1;
    for (int i = 0; i < k; ++i) {
      z(i) = rule.nodes[idx[static_cast<size_t>(i)]];
      w *= rule.weights[idx[static_cast<size_t>(i)]];
    }
    total += w * f(mean + Lc * z);
    int axis = k - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < rule.nodes.size()) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return total;
}

}  // namespace lselab
