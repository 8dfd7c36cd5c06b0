#include <random>

#include "doctest.h"
#include "lselab/gaussian.hpp"
#include "lselab/quadrature.hpp"

using namespace lselab;

namespace {

InteractionFamily chain_family() {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  fam.set_pair({0}, {1}, 0.4);
  return fam;
}

QuadPoly square_of(const Site& s) {
  return {Region::single(s), 0.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1.0)};
}

}  // namespace

TEST_CASE("single-site measure: mean zero, variance one half") {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  GaussianData g = GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary);
  CHECK(g.mean(Site{0}) == doctest::Approx(0.0));
  CHECK(g.covariance(Site{0}, Site{0}) == doctest::Approx(0.5));
  CHECK(gaussian_expect(g, square_of(Site{0})) == doctest::Approx(0.5));
  CHECK(gaussian_expect(g, QuadPoly::constant(1, 1.0)) == doctest::Approx(1.0));
}

TEST_CASE("two-site covariance equals the matrix inverse") {
  Region sites = Region::interval(0, 1);
  GaussianData g = GaussianData::from_family(chain_family(), sites, EnergyMode::Interior);
  Eigen::Matrix2d C;
  C << 1.0, 0.2, 0.2, 1.0;
  Eigen::Matrix2d inv = (2.0 * C).inverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(g.covariance(sites.site(i), sites.site(j)) == doctest::Approx(inv(i, j)));
}

TEST_CASE("boundary values shift the mean") {
  BoundaryCondition bc;
  bc.set({1}, 3.0);
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  fam.set_pair({0}, {1}, 0.2);
  GaussianData g = GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary, bc);
  CHECK(g.mean(Site{0}) == doctest::Approx(-0.3));
}

TEST_CASE("indefinite coefficient matrix is rejected") {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(-1.0);
  CHECK_THROWS_WITH(
      GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary),
      "not normalizable");
}

TEST_CASE("conditional expectation of polynomials") {
  ConditionalGaussian cond = cube_conditional(chain_family(), Region::single(Site{0}));
  // mean of x_0 given the neighbours is -0.2 (x_{-1} + x_1)
  QuadPoly ex = conditional_expect(QuadPoly::coordinate(Site{0}), cond);
  CHECK(ex.vars.size() == 2);
  SiteValues probe{{{-1}, 1.0}, {{1}, 2.0}};
  CHECK(ex.eval(probe) == doctest::Approx(-0.2 * 3.0));

  QuadPoly ex2 = conditional_expect(square_of(Site{0}), cond);
  CHECK(ex2.eval(probe) == doctest::Approx(0.5 + 0.36));  // variance + mean^2

  // Locality: functions of untouched coordinates pass through.
  QuadPoly far = square_of(Site{5});
  CHECK(conditional_expect(far, cond).vars == far.vars);
}

TEST_CASE("tower property through a cube") {
  Region ambient = Region::interval(-6, 6);
  GaussianData mu = GaussianData::from_family(chain_family(), ambient, EnergyMode::Boundary);
  ConditionalGaussian cond = cube_conditional(chain_family(), Region::interval(-1, 1), ambient);
  QuadPoly f = square_of(Site{0});
  CHECK(gaussian_expect(mu, conditional_expect(f, cond)) ==
        doctest::Approx(gaussian_expect(mu, f)).epsilon(1e-12));
}

TEST_CASE("quadratic-exponential expectations") {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);  // variance 1/2
  GaussianData g = GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary);
  const double sigma2 = 0.5;
  for (double t : {0.3, 1.0, -0.8}) {
    QuadExp e{Region::single(Site{0}), Eigen::MatrixXd::Zero(1, 1),
              Eigen::VectorXd::Constant(1, t), 0.0};
    CHECK(gaussian_expect(g, e) == doctest::Approx(std::exp(0.5 * t * t * sigma2)));
  }
  // Polynomial prefactor: E[x e^{tx}] = t sigma^2 e^{t^2 sigma^2 / 2}.
  QuadExp e{Region::single(Site{0}), Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 1.0),
            0.0};
  CHECK(gaussian_expect(g, QuadPoly::coordinate(Site{0}), e) ==
        doctest::Approx(sigma2 * std::exp(0.5 * sigma2)));
}

TEST_CASE("conditional expectation of a bump agrees with quadrature") {
  ConditionalGaussian cond = cube_conditional(chain_family(), Region::single(Site{0}));
  QuadExp bump = QuadExp::site_bump(Site{0}, 1.5, 0.4);
  QuadExp swept = conditional_expect(bump, cond);

  QuadratureRule rule = gauss_hermite(48);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    double xl = u(rng), xr = u(rng);
    double mean = -0.2 * (xl + xr);
    double sd = std::sqrt(0.5);
    double ref = 0;
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      double x0 = mean + sd * rule.nodes[k];
      ref += rule.weights[k] * std::exp(-0.75 * (x0 - 0.4) * (x0 - 0.4));
    }
    SiteValues probe{{{-1}, xl}, {{1}, xr}};
    CHECK(swept.eval(probe) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("covariance closed forms for quadratics") {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  GaussianData g = GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary);
  const double sigma2 = 0.5;
  // Var(x^2) = 2 sigma^4 for a centred Gaussian.
  CHECK(gaussian_covariance(g, square_of(Site{0}), square_of(Site{0})) ==
        doctest::Approx(2.0 * sigma2 * sigma2));
  CHECK(gaussian_covariance(g, QuadPoly::coordinate(Site{0}), square_of(Site{0})) ==
        doctest::Approx(0.0));
}

TEST_CASE("tilting matches direct quadrature") {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(0.8);
  GaussianData g = GaussianData::from_family(fam, Region::single(Site{0}), EnergyMode::Boundary);
  QuadExp e{Region::single(Site{0}), Eigen::MatrixXd::Constant(1, 1, 0.6),
            Eigen::VectorXd::Constant(1, 0.2), 0.1};
  TiltedGaussian t = tilt(g, e);

  QuadratureRule rule = gauss_hermite(64);
  double sd = std::sqrt(g.covariance(Site{0}, Site{0}));
  double mass = 0, first = 0;
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    double x = sd * rule.nodes[k];
    double val = std::exp(-0.3 * x * x + 0.2 * x + 0.1);
    mass += rule.weights[k] * val;
    first += rule.weights[k] * val * x;
  }
  CHECK(std::exp(t.log_mass) == doctest::Approx(mass).epsilon(1e-12));
  CHECK(t.measure.mean(Site{0}) == doctest::Approx(first / mass).epsilon(1e-12));
}

TEST_CASE("quadrature rules integrate known moments") {
  QuadratureRule gh = gauss_hermite(12);
  double m2 = 0, m4 = 0, total = 0;
  for (size_t k = 0; k < gh.nodes.size(); ++k) {
    total += gh.weights[k];
    m2 += gh.weights[k] * gh.nodes[k] * gh.nodes[k];
    m4 += gh.weights[k] * std::pow(gh.nodes[k], 4);
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(m2 == doctest::Approx(1.0));
  CHECK(m4 == doctest::Approx(3.0));

  QuadratureRule gl = gauss_legendre(16);
  double integral = 0;
  for (size_t k = 0; k < gl.nodes.size(); ++k)
    integral += gl.weights[k] * std::cos(gl.nodes[k]);
  CHECK(integral == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-12));
}
