#include "doctest.h"
#include "lselab/quadrature.hpp"
#include "lselab/sweepout.hpp"

using namespace lselab;

namespace {

InteractionFamily chain() {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  fam.set_pair({0}, {1}, 0.4);
  return fam;
}

InteractionFamily product() {
  InteractionFamily fam(1, 1);
  fam.set_diagonal(1.0);
  return fam;
}

}  // namespace

TEST_CASE("normalisation and locality of the collection maps") {
  PiOperator pi(chain(), 4, 30);
  QuadPoly one = QuadPoly::constant(1, 1.0);
  QuadPoly pi_one = pi.apply_Pi(one);
  CHECK(pi_one.vars.is_empty());
  CHECK(pi_one.c == doctest::Approx(1.0).epsilon(1e-14));

  // A coordinate inside a cube turns into an affine function of the halo.
  QuadPoly x0 = QuadPoly::coordinate(Site{0});
  QuadPoly e0 = pi.apply_Es(0, x0);
  for (const auto& v : e0.vars.sites()) {
    bool in_cube = false;
    for (const auto& cube : pi.cubes(0)) in_cube = in_cube || cube.contains(v);
    CHECK(!in_cube);
  }

  // Site 5 sits in the gap between the shifted cubes [-6,4] and [6,16], so
  // that collection leaves functions of it untouched.
  bool in_gap = true;
  for (const auto& cube : pi.cubes(1)) in_gap = in_gap && !cube.contains(Site{5});
  REQUIRE(in_gap);
  QuadPoly x5 = QuadPoly::coordinate(Site{5});
  QuadPoly kept = pi.apply_Es(1, x5);
  CHECK(kept.vars == Region::single(Site{5}));
  CHECK(kept.l(0) == doctest::Approx(1.0));
}

TEST_CASE("product specification collapses in finitely many passes") {
  PiOperator pi(product(), 4, 30);
  QuadPoly x0 = QuadPoly::coordinate(Site{0});
  QuadPoly once = pi.apply_Pi(x0);
  CHECK(once.vars.is_empty());
  CHECK(once.c == doctest::Approx(0.0));

  PiIterateResult it = iterate_pi(pi, x0, 3);
  CHECK(it.sup_error[0] == doctest::Approx(0.0));
}

TEST_CASE("iterates of the chain contract geometrically") {
  PiOperator pi(chain(), 4, 30);
  QuadPoly x0 = QuadPoly::coordinate(Site{0});
  PiIterateResult it = iterate_pi(pi, x0, 6);
  CHECK(it.geometric);
  CHECK(it.fitted_ratio < 1.0);
  CHECK(it.fitted_ratio > 0.0);
  for (size_t i = 2; i < it.sup_difference.size(); ++i)
    CHECK(it.sup_difference[i] <= it.sup_difference[i - 1] * (1 + 1e-12));
}

TEST_CASE("ambient averages are invariant under the sweep") {
  PiOperator pi(chain(), 4, 30);
  QuadPoly x0sq{Region::single(Site{0}), 0.0, Eigen::VectorXd::Zero(1),
                Eigen::MatrixXd::Constant(1, 1, 1.0)};
  CHECK(check_dlr_pi(pi, x0sq) < 1e-10);
  CHECK(check_dlr_pi(pi, QuadPoly::coordinate(Site{3})) < 1e-10);
}

TEST_CASE("active coordinate cap guards blowup") {
  PiOperator pi(chain(), 4, 30, 1);
  QuadPoly x0 = QuadPoly::coordinate(Site{0});
  CHECK_THROWS_WITH(pi.apply_Pi(x0), "active set too large");
}

TEST_CASE("entropy comparison stays finite and positive") {
  PiOperator pi(chain(), 4, 30);
  QuadPoly f = QuadPoly::constant(1, 1.0).plus(QuadPoly::coordinate(Site{0}).scaled(0.1));
  PiEntropyResult res = pi_entropy_bound(pi, f);
  CHECK(res.finite);
  CHECK(res.c_bar > 0);
  CHECK(res.gradient == doctest::Approx(0.01).epsilon(1e-12));

  QuadPoly c = QuadPoly::constant(1, 2.0);
  // Constants carry no entropy: both terms coincide.
  PiOperator pi2(chain(), 2, 20);
  QuadPoly csq{Region::empty(1), 4.0, Eigen::VectorXd::Zero(0), Eigen::MatrixXd::Zero(0, 0)};
  (void)csq;
  CHECK(std::abs(pi_entropy_bound(pi2, c).lhs) < 1e-12);
}

TEST_CASE("gradient contraction factor") {
  PiOperator pi(chain(), 4, 30);
  std::vector<QuadPoly> tests{
      QuadPoly::constant(1, 1.0).plus(QuadPoly::coordinate(Site{0}).scaled(0.1))};
  GammaEstimate g = estimate_gamma(pi, tests);
  CHECK(g.gamma > 0.0);
  CHECK(g.gamma < 1.0);

  // Product measure: one pass wipes the function, nothing remains to vary.
  PiOperator pp(product(), 4, 30);
  GammaEstimate gp = estimate_gamma(pp, tests);
  CHECK(gp.gamma == doctest::Approx(0.0));
}

TEST_CASE("sweeping coefficients decay with separation") {
  Region cube = Region::interval(0, 10);
  Region ambient = Region::interval(-20, 30);
  SweepTable table = sweeping_coefficients(chain(), cube, ambient, 1.5, 0.3);
  CHECK(table.decaying);
  CHECK(table.fitted_rate > 0);
  CHECK(table.envelope_D > 0);
  for (const auto& r : table.rows) {
    CHECK(r.alpha >= 0);
    CHECK(r.alpha <=
          table.envelope_D * table.cube_size * std::exp(-table.fitted_rate * r.separation) *
              (1 + 1e-9));
  }

  SweepTable ptab = sweeping_coefficients(product(), cube, ambient, 1.5, 0.3);
  for (const auto& r : ptab.rows) CHECK(r.alpha < 1e-15);
}
