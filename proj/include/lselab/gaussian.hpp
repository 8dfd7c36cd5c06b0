#pragma once

#include <Eigen/Dense>
#include <optional>

#include "lselab/potential.hpp"

namespace lselab {

/// Multivariate Gaussian over the sites of a region, stored as precision
/// matrix and mean in region order. The precision of a bilinear Gibbs
/// measure with energy x^T C x + l.x is 2C with mean -(2C)^{-1} l.
class GaussianData {
 public:
  GaussianData(Region region, Eigen::MatrixXd precision, Eigen::VectorXd mean);

  /// Exact measure of a bilinear family on a region. Boundary mode reads
  /// fixed values from bc for cross terms leaving the region. Throws
  /// "not normalizable" when the restricted coefficient matrix is not
  /// positive definite.
  static GaussianData from_family(const InteractionFamily& fam, const Region& region,
                                  EnergyMode mode, const BoundaryCondition& bc = {});

  const Region& region() const { return region_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& mean_vector() const { return mean_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  double mean(const Site& s) const;
  double covariance(const Site& a, const Site& b) const;
  /// Marginal covariance block for the given sites (must lie in the region).
  Eigen::MatrixXd covariance_block(const Region& sites) const;
  Eigen::VectorXd mean_block(const Region& sites) const;

 private:
  Region region_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd mean_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  mutable std::optional<Eigen::MatrixXd> cov_;  // filled on first covariance query
  const Eigen::MatrixXd& full_covariance() const;
};

/// Real quadratic polynomial c + l.x + x^T Q x over an explicit variable set,
/// coefficients held in region order. Q is symmetric; off-diagonal monomial
/// coefficients are Q_ij + Q_ji.
struct QuadPoly {
  Region vars = Region::empty(1);
  double c = 0;
  Eigen::VectorXd l;
  Eigen::MatrixXd Q;

  static QuadPoly constant(int dim, double value);
  static QuadPoly coordinate(const Site& s);
  static QuadPoly zero(int dim) { return constant(dim, 0.0); }

  double eval(const SiteValues& x) const;
  QuadPoly plus(const QuadPoly& other) const;
  QuadPoly scaled(double a) const;
  /// Fix one variable to a number (used when a coordinate leaves the window).
  QuadPoly substituted(const Site& s, double value) const;
  /// Drop variables whose coefficients all vanish.
  QuadPoly trimmed() const;
  /// Gradient in one coordinate, an affine QuadPoly.
  QuadPoly gradient(const Site& s) const;
};

/// exp(-1/2 x^T P x + q.x + r) with real symmetric P over an explicit
/// variable set. Squaring and square roots scale the exponent.
struct QuadExp {
  Region vars = Region::empty(1);
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double r = 0;

  static QuadExp one(int dim);
  /// exp(-kappa/2 (x_s - center)^2).
  static QuadExp site_bump(const Site& s, double kappa, double center);

  double eval(const SiteValues& x) const;
  QuadExp squared() const;
  QuadExp sqrt() const;
  /// The exponent as a quadratic polynomial (log of this function).
  QuadPoly log_poly() const;
};

/// Conditional law of the cube coordinates of a bilinear Gibbs measure given
/// the halo values: mean = mean_matrix * x_halo + mean_offset, fixed
/// covariance. Halo sites outside `clip` are frozen at the boundary value.
struct ConditionalGaussian {
  Region cube = Region::empty(1);
  Region halo = Region::empty(1);
  Eigen::MatrixXd mean_matrix;
  Eigen::VectorXd mean_offset;
  Eigen::MatrixXd covariance;
};

ConditionalGaussian cube_conditional(const InteractionFamily& fam, const Region& cube,
                                     const std::optional<Region>& clip = std::nullopt,
                                     const BoundaryCondition& bc = {});

/// Integrate the cube coordinates of a polynomial against the conditional
/// law; the result depends on the surviving and halo coordinates only.
QuadPoly conditional_expect(const QuadPoly& f, const ConditionalGaussian& cond);
QuadExp conditional_expect(const QuadExp& f, const ConditionalGaussian& cond);

/// E[f] under the Gaussian. Variables outside the measure's region are an
/// error; substitute them first.
double gaussian_expect(const GaussianData& g, const QuadPoly& f);
double gaussian_expect(const GaussianData& g, const QuadExp& f);
/// E[f * e] for a polynomial prefactor against a quadratic-exponential tilt.
double gaussian_expect(const GaussianData& g, const QuadPoly& f, const QuadExp& e);
double gaussian_covariance(const GaussianData& g, const QuadPoly& f, const QuadPoly& h);
inline double gaussian_variance(const GaussianData& g, const QuadPoly& f) {
  return gaussian_covariance(g, f, f);
}

/// Gaussian tilted by a quadratic-exponential factor: the measure with
/// density proportional to e^{-...} relative to g. `log_mass` returns
/// log E_g[factor].
struct TiltedGaussian {
  GaussianData measure;
  double log_mass;
};
TiltedGaussian tilt(const GaussianData& g, const QuadExp& factor);

}  // namespace lselab
