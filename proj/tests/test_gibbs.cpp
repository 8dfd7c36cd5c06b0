#include <random>

#include "doctest.h"
#include "lselab/gibbs.hpp"

using namespace lselab;

namespace {

InteractionFamily single_site() {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  return fam;
}

InteractionFamily chain() {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  fam.set_pair({0}, {1}, 0.4);
  return fam;
}

QuadPoly square_of(const Site& s) {
  return {Region::single(s), 0.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1.0)};
}

}  // namespace

TEST_CASE("grid measure reproduces Gaussian moments to quadrature accuracy") {
  auto m = LocalGibbsMeasure::grid(single_site(), Region::single(Site{0}), EnergyMode::Boundary);
  CHECK(m.expect(QuadPoly::constant(1, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.expect(square_of(Site{0})) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m.variance(QuadPoly::coordinate(Site{0})) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("grid tail-mass guard") {
  GridSpec spec;
  spec.halfwidth = 2.0;  // far too small for exp(-x^2)
  CHECK_THROWS_WITH(
      LocalGibbsMeasure::grid(single_site(), Region::single(Site{0}), EnergyMode::Boundary, {},
                              spec),
      "domain too small");
}

TEST_CASE("entropy closed form on exponential tilts") {
  auto g = LocalGibbsMeasure::gaussian(single_site(), Region::single(Site{0}),
                                       EnergyMode::Boundary);
  auto grid = LocalGibbsMeasure::grid(single_site(), Region::single(Site{0}),
                                      EnergyMode::Boundary);
  const double sigma2 = 0.5;
  for (double t : {0.4, 1.1}) {
    QuadExp e{Region::single(Site{0}), Eigen::MatrixXd::Zero(1, 1),
              Eigen::VectorXd::Constant(1, t), 0.0};
    double expected = 2.0 * t * t * sigma2 * std::exp(2.0 * t * t * sigma2);
    CHECK(g.entropy(e) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(grid.entropy(e) == doctest::Approx(expected).epsilon(1e-6));
  }
  // Constants carry no entropy.
  QuadExp c{Region::single(Site{0}), Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), 0.7};
  CHECK(g.entropy(c) == doctest::Approx(0.0));
  CHECK(std::abs(grid.entropy(c)) < 1e-12);
}

TEST_CASE("entropy is nonnegative and vanishes only on constants") {
  GridMeasure g = GridMeasure::build(single_site(), Region::single(Site{0}),
                                     EnergyMode::Boundary);
  auto bump = g.sample_values(
      [](const Eigen::VectorXd& x) { return Complex(std::exp(-0.2 * (x(0) - 1) * (x(0) - 1)), 0); });
  CHECK(g.entropy(bump) > 0);
  std::vector<Complex> ones(g.total_nodes(), Complex(1, 0));
  CHECK(std::abs(g.entropy(ones)) < 1e-13);
}

TEST_CASE("divergence-form generator identities") {
  GridMeasure g = GridMeasure::build(single_site(), Region::single(Site{0}),
                                     EnergyMode::Boundary);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  std::vector<Complex> f(g.total_nodes()), h(g.total_nodes());
  for (auto& z : f) z = Complex(gauss(rng), gauss(rng));
  for (auto& z : h) z = Complex(gauss(rng), gauss(rng));

  std::vector<Complex> ones(g.total_nodes(), Complex(1, 0));
  auto Lones = g.generator_apply(ones);
  for (const auto& z : Lones) CHECK(std::abs(z) == 0.0);

  auto Lf = g.generator_apply(f);
  auto Lh = g.generator_apply(h);
  Complex inv = 0, sym = 0;
  double scale = 0;
  for (size_t k = 0; k < g.total_nodes(); ++k) {
    inv += g.weight(k) * Lf[k];
    sym += g.weight(k) * (f[k] * Lh[k] - h[k] * Lf[k]);
    scale += g.weight(k) * std::abs(Lf[k]);
  }
  CHECK(std::abs(inv) < 1e-12 * scale);
  CHECK(std::abs(sym) < 1e-12 * scale);

  // Dirichlet form pairing: E(f (-L) f) equals the bond sum.
  auto Lf2 = g.generator_apply(f);
  Complex pair = 0;
  for (size_t k = 0; k < g.total_nodes(); ++k) pair += g.weight(k) * std::conj(f[k]) * -Lf2[k];
  CHECK(pair.real() == doctest::Approx(g.dirichlet(f)).epsilon(1e-10));
  CHECK(std::abs(pair.imag()) < 1e-10 * std::abs(pair.real()));
}

TEST_CASE("generator drift matches -grad U at interior nodes") {
  for (int M : {128, 256}) {
    GridSpec spec;
    spec.nodes = M;
    GridMeasure g = GridMeasure::build(single_site(), Region::single(Site{0}),
                                       EnergyMode::Boundary, {}, spec);
    auto x = g.sample_values([](const Eigen::VectorXd& p) { return Complex(p(0), 0); });
    auto Lx = g.generator_apply(x);
    double worst = 0;
    for (size_t k = 0; k < g.total_nodes(); ++k) {
      double xv = g.point(k)(0);
      if (std::abs(xv) > 1.0) continue;
      worst = std::max(worst, std::abs(Lx[k].real() + 2.0 * xv));
    }
    double h2 = g.spacing(0) * g.spacing(0);
    CHECK(worst < 5.0 * h2);  // second-order consistency
  }
}

TEST_CASE("volume-uniform convexity coefficient") {
  CHECK(lsi_coefficient_BE(single_site()) == doctest::Approx(1.0));
  CHECK(lsi_coefficient_BE(chain()) == doctest::Approx(2.0 / 1.2));
  InteractionFamily scaled(1, 1);
  scaled.set_diagonal(3.0);
  CHECK(lsi_coefficient_BE(scaled) == doctest::Approx(1.0 / 3.0));
  InteractionFamily flat(1, 1);
  flat.set_diagonal(0.0);
  CHECK_THROWS_WITH(lsi_coefficient_BE(flat), "Bakry-Emery inapplicable");
}

TEST_CASE("spectral gap from the log-Sobolev coefficient") {
  auto m = LocalGibbsMeasure::gaussian(single_site(), Region::single(Site{0}),
                                       EnergyMode::Boundary);
  double c = lsi_coefficient_BE(single_site());
  QuadPoly x = QuadPoly::coordinate(Site{0});
  // Linear functions meet the gap bound with equality for Gaussians.
  CHECK(m.variance(x) == doctest::Approx(0.5 * c * m.dirichlet(x)).epsilon(1e-12));
  SgiReport rep = check_sgi_from_lsi(m, c, {x, square_of(Site{0}), QuadPoly::constant(1, 2.0)});
  CHECK(rep.pass);
  CHECK(rep.rows[2].measured == doctest::Approx(0.0));

  auto grid = LocalGibbsMeasure::grid(chain(), Region::interval(0, 1), EnergyMode::Boundary);
  QuadPoly mix = QuadPoly::coordinate(Site{0})
                     .plus(QuadPoly::coordinate(Site{1}).scaled(-0.5))
                     .plus(square_of(Site{1}).scaled(0.2));
  SgiReport rep2 = check_sgi_from_lsi(grid, lsi_coefficient_BE(chain()), {mix}, 1e-10);
  CHECK(rep2.pass);
}

TEST_CASE("consistency of the local specification on the exact backend") {
  Region ambient = Region::interval(-8, 8);
  auto mu = LocalGibbsMeasure::gaussian(chain(), ambient, EnergyMode::Boundary);

  auto res = check_dlr(mu, Region::interval(-2, 2), square_of(Site{0}), 1e-10);
  CHECK(res.pass);
  CHECK(res.residual < 1e-10);

  // A far region acts as the identity on local functions.
  auto far = check_dlr(mu, Region::interval(4, 6), square_of(Site{0}), 1e-14);
  CHECK(far.residual < 1e-14);
}

TEST_CASE("exponential moment bound") {
  Region pair_sites = Region::interval(0, 1);
  auto m = LocalGibbsMeasure::gaussian(single_site(), pair_sites, EnergyMode::Boundary);
  Eigen::MatrixXd Q(2, 2);
  Q << 1, -1, -1, 1;
  QuadPoly g{pair_sites, 0.0, Eigen::VectorXd::Zero(2), Q};

  HerbstResult res = herbst_check(m, g, 8.0, 1.0, 1.0 / 16.0);
  CHECK(res.pass);
  CHECK(res.lhs == doctest::Approx(-0.5 * std::log(1.0 - 4.0 / 16.0 * 0.5)));
  CHECK(res.rhs == doctest::Approx(2.0 / 16.0 * 1.0));

  CHECK_THROWS(herbst_check(m, g, 8.0, 1.0, 0.2));  // outside (0, 1/(a c))

  // Single-site version against grid quadrature.
  auto m1 = LocalGibbsMeasure::gaussian(single_site(), Region::single(Site{0}),
                                        EnergyMode::Boundary);
  auto g1 = LocalGibbsMeasure::grid(single_site(), Region::single(Site{0}),
                                    EnergyMode::Boundary);
  QuadPoly xsq = square_of(Site{0});
  HerbstResult exact = herbst_check(m1, xsq, 4.0, 1.0, 0.05);
  HerbstResult quad = herbst_check(g1, xsq, 4.0, 1.0, 0.05);
  CHECK(exact.lhs == doctest::Approx(quad.lhs).epsilon(1e-8));
  CHECK(exact.pass);
}

TEST_CASE("covariance decay along the chain") {
  auto m = LocalGibbsMeasure::gaussian(chain(), Region::interval(-15, 15), EnergyMode::Boundary);
  std::vector<Site> far;
  for (int r = 1; r <= 6; ++r) far.push_back(Site{r});
  MixingResult res = mixing_decay(m, Site{0}, far);
  CHECK(res.monotone);
  CHECK(res.fitted_rate > 1.0);

  auto prod = LocalGibbsMeasure::gaussian(single_site(), Region::interval(-3, 3),
                                          EnergyMode::Boundary);
  MixingResult res0 = mixing_decay(prod, Site{0}, {Site{2}});
  CHECK(res0.rows[0].covariance == doctest::Approx(0.0));
}

TEST_CASE("density ratio of boundary versus interior weights") {
  InteractionFamily prod = single_site();
  auto r0 = density_ratio_bound(prod, Region::interval(-1, 1), 500, 3);
  CHECK(r0.bound_B1 == doctest::Approx(1.0));
  CHECK(r0.observed_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r0.observed_min == doctest::Approx(1.0).epsilon(1e-12));

  InteractionFamily pert(1, 1);
  pert.set_diagonal(1.0);
  pert.set_epsilon(0.1);
  pert.add_perturbation(cos_sum_perturbation(1, 1.0));
  auto r1 = density_ratio_bound(pert, Region::interval(-1, 1), 2000, 3);
  CHECK(r1.bound_B1 == doctest::Approx(std::exp(0.8)));
  CHECK(r1.pass);

  InteractionFamily d2(2, 1);
  d2.set_diagonal(1.0);
  CHECK_THROWS_WITH(density_ratio_bound(d2, Region::single(Site{0, 0}), 10, 3),
                    "bound restricted to one-dimensional lattice");
  CHECK_THROWS(density_ratio_bound(chain(), Region::interval(-1, 1), 10, 3));
}

TEST_CASE("tensorisation adds entropies and variances over factors") {
  InteractionFamily prod(1, 1);
  prod.set_diagonal(1.0);
  prod.set_diagonal(Site{1}, 2.0);
  Region sites = Region::interval(0, 1);
  auto g2 = LocalGibbsMeasure::grid(prod, sites, EnergyMode::Boundary);
  auto g0 = LocalGibbsMeasure::grid(prod, Region::single(Site{0}), EnergyMode::Boundary);
  GridSpec s1;
  s1.halfwidth = 8.0 / std::sqrt(2.0);  // match the two-site auto width
  auto g1 = LocalGibbsMeasure::grid(prod, Region::single(Site{1}), EnergyMode::Boundary, {}, s1);

  // f(x0, x1) = f0(x0) f1(x1) with unit masses splits the entropy.
  QuadExp f0{Region::single(Site{0}), Eigen::MatrixXd::Zero(1, 1),
             Eigen::VectorXd::Constant(1, 0.5), 0.0};
  QuadExp f1{Region::single(Site{1}), Eigen::MatrixXd::Zero(1, 1),
             Eigen::VectorXd::Constant(1, -0.3), 0.0};
  QuadExp f{sites, Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd(2), 0.0};
  f.q << 0.5, -0.3;

  double m0 = g0.expect(f0.squared());
  double m1 = g1.expect(f1.squared());
  double lhs = g2.entropy(f);
  double rhs = g0.entropy(f0) * m1 + g1.entropy(f1) * m0;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

  auto mg = LocalGibbsMeasure::gaussian(prod, sites, EnergyMode::Boundary);
  QuadPoly sum = QuadPoly::coordinate(Site{0}).plus(QuadPoly::coordinate(Site{1}));
  CHECK(mg.variance(sum) ==
        doctest::Approx(mg.variance(QuadPoly::coordinate(Site{0})) +
                        mg.variance(QuadPoly::coordinate(Site{1}))));
}

TEST_CASE("sampler hits Gaussian moments within error bars") {
  McmcConfig cfg;
  cfg.seed = 42;
  cfg.samples = 8000;
  cfg.burn_in = 1500;
  cfg.chains = 4;
  auto m = LocalGibbsMeasure::mcmc(single_site(), Region::single(Site{0}),
                                   EnergyMode::Boundary, {}, cfg);
  const auto& mm = m.mcmc_data();
  auto mean = mm.expect([](const Eigen::VectorXd& x) { return x(0); });
  CHECK(std::abs(mean.value) < 4.0 * mean.std_error + 1e-3);
  auto second = mm.expect([](const Eigen::VectorXd& x) { return x(0) * x(0); });
  CHECK(std::abs(second.value - 0.5) < 4.0 * second.std_error + 5e-3);
  CHECK(second.ess > 100);
  CHECK(mm.diagnostics().acceptance > 0.3);
  CHECK(mm.diagnostics().acceptance < 0.9);

  // Deterministic given the seed.
  auto m2 = LocalGibbsMeasure::mcmc(single_site(), Region::single(Site{0}),
                                    EnergyMode::Boundary, {}, cfg);
  auto second2 = m2.mcmc_data().expect([](const Eigen::VectorXd& x) { return x(0) * x(0); });
  CHECK(second.value == second2.value);
}
