#include "lselab/sweepout.hpp"

#include <cmath>
#include <stdexcept>

namespace lselab {

namespace {

QuadPoly affine_squared(const QuadPoly& f) {
  if (f.vars.size() > 0 && f.Q.cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("test function must be affine");
  return {f.vars, f.c * f.c, 2.0 * f.c * f.l, f.l * f.l.transpose()};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& logy) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    sx += x[static_cast<size_t>(i)];
    sy += logy[static_cast<size_t>(i)];
    sxx += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    sxy += x[static_cast<size_t>(i)] * logy[static_cast<size_t>(i)];
  }
  double denom = n * sxx - sx * sx;
  return denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

PiOperator::PiOperator(InteractionFamily fam, int L, int ambient_halfwidth, int active_cap)
    : family_(std::move(fam)),
      partition_(family_.dim(), L, family_.range()),
      ambient_(Region::box(Site(static_cast<size_t>(family_.dim()), -ambient_halfwidth),
                           Site(static_cast<size_t>(family_.dim()), ambient_halfwidth))),
      mu_(GaussianData::from_family(family_, ambient_, EnergyMode::Boundary)),
      cap_(active_cap) {
  Site lo(static_cast<size_t>(family_.dim()), -ambient_halfwidth);
  Site hi(static_cast<size_t>(family_.dim()), ambient_halfwidth);
  for (int s = 0; s < partition_.collections(); ++s) {
    std::vector<Region> clipped;
    for (const auto& cube : partition_.cubes_in_window(s, lo, hi)) {
      Region c = cube.intersect(ambient_);
      if (!c.is_empty()) clipped.push_back(c);
    }
    cubes_.push_back(std::move(clipped));
  }
}

template <typename F>
F PiOperator::apply_collection(int s, F f) const {
  // Cubes of one collection are pairwise at distance 2R, so a halo created
  // by one cube never lands inside another; the cube list can be fixed from
  // the incoming support.
  std::vector<const Region*> acting;
  for (const auto& cube : cubes(s))
    if (!cube.intersect(f.vars).is_empty()) acting.push_back(&cube);
  for (const Region* cube : acting) {
    ConditionalGaussian cond = cube_conditional(family_, *cube, ambient_);
    f = conditional_expect(f, cond);
    if (f.vars.size() > cap_) throw std::runtime_error("active set too large");
  }
  return f;
}

QuadPoly PiOperator::apply_Es(int s, QuadPoly f) const { return apply_collection(s, std::move(f)); }
QuadExp PiOperator::apply_Es(int s, QuadExp f) const { return apply_collection(s, std::move(f)); }

QuadPoly PiOperator::apply_Pi(QuadPoly f) const {
  for (int s = 0; s < partition_.collections(); ++s) f = apply_Es(s, std::move(f));
  return f;
}

QuadExp PiOperator::apply_Pi(QuadExp f) const {
  for (int s = 0; s < partition_.collections(); ++s) f = apply_Es(s, std::move(f));
  return f;
}

double PiOperator::mu_dirichlet(const QuadPoly& f) const {
  double s = 0;
  for (const auto& v : f.vars.sites()) {
    QuadPoly d = f.gradient(v);
    s += gaussian_expect(mu_, affine_squared(d));
  }
  return s;
}

PiIterateResult iterate_pi(const PiOperator& pi, const QuadPoly& f, int n_max) {
  PiIterateResult res;
  res.mu_f = pi.mu_expect(f);

  // Fixed probe configurations: zero, all ones, alternating sign.
  std::vector<std::function<double(const Site&)>> probes = {
      [](const Site&) { return 0.0; },
      [](const Site&) { return 1.0; },
      [](const Site& s) {
        int sum = 0;
        for (int v : s) sum += v;
        return (sum % 2 == 0) ? 1.0 : -1.0;
      }};

  auto sup_err = [&](const QuadPoly& g) {
    double worst = 0;
    for (const auto& probe : probes) {
      SiteValues x;
      for (const auto& s : g.vars.sites()) x[s] = probe(s);
      worst = std::max(worst, std::abs(g.eval(x) - res.mu_f));
    }
    return worst;
  };
  auto sup_diff = [&](const QuadPoly& a, const QuadPoly& b) {
    double worst = 0;
    QuadPoly d = a.plus(b.scaled(-1.0));
    for (const auto& probe : probes) {
      SiteValues x;
      for (const auto& s : d.vars.sites()) x[s] = probe(s);
      worst = std::max(worst, std::abs(d.eval(x)));
    }
    return worst;
  };

  QuadPoly cur = f;
  for (int n = 1; n <= n_max; ++n) {
    QuadPoly next = pi.apply_Pi(cur);
    res.sup_difference.push_back(sup_diff(next, cur));
    cur = std::move(next);
    res.sup_error.push_back(sup_err(cur));
  }

  std::vector<double> ns, logs;
  for (size_t i = 0; i < res.sup_error.size(); ++i)
    if (res.sup_error[i] > 0) {
      ns.push_back(static_cast<double>(i + 1));
      logs.push_back(std::log(res.sup_error[i]));
    }
  double slope = fit_slope(ns, logs);
  res.fitted_ratio = ns.size() >= 2 ? std::exp(slope) : 0.0;
  res.geometric = res.fitted_ratio < 1.0;
  return res;
}

double check_dlr_pi(const PiOperator& pi, const QuadPoly& f) {
  return std::abs(pi.mu_expect(pi.apply_Pi(f)) - pi.mu_expect(f));
}

PiEntropyResult pi_entropy_bound(const PiOperator& pi, const QuadPoly& f_affine, int quad_nodes) {
  PiEntropyResult res;
  QuadPoly f2 = affine_squared(f_affine);
  QuadPoly pif2 = pi.apply_Pi(f2);

  auto xlogx_expect = [&](const QuadPoly& q) {
    auto closure = [&](const Eigen::VectorXd& v) {
      SiteValues x;
      for (int i = 0; i < q.vars.size(); ++i) x[q.vars.site(i)] = v(i);
      double value = q.eval(x);
      if (value <= 0) return 0.0;  // conditional averages of f^2 stay >= 0
      return value * std::log(value);
    };
    return gaussian_quadrature(pi.measure(), q.vars, closure, quad_nodes);
  };

  // mu(Pi g) = mu(g) for the ambient conditionals (tower property), so the
  // first term needs no propagated non-polynomial integrand.
  double term1 = xlogx_expect(f2);
  double term2 = xlogx_expect(pif2);
  res.lhs = term1 - term2;
  res.gradient = pi.mu_dirichlet(f_affine);
  res.c_bar = res.lhs / res.gradient;
  res.finite = std::isfinite(res.c_bar) && res.gradient > 0;
  return res;
}

GammaEstimate estimate_gamma(const PiOperator& pi, const std::vector<QuadPoly>& tests_affine,
                             int quad_nodes) {
  GammaEstimate out;
  for (const auto& f : tests_affine) {
    QuadPoly f2 = affine_squared(f);
    QuadPoly pif2 = pi.apply_Pi(f2);

    // |grad sqrt(Q)|^2 = sum_j (d_j Q)^2 / (4 Q).
    std::vector<QuadPoly> grads;
    for (const auto& s : pif2.vars.sites()) grads.push_back(pif2.gradient(s));
    auto closure = [&](const Eigen::VectorXd& v) {
      SiteValues x;
      for (int i = 0; i < pif2.vars.size(); ++i) x[pif2.vars.site(i)] = v(i);
      double q = pif2.eval(x);
      if (q <= 0) return 0.0;
      double s = 0;
      for (const auto& g : grads) {
        double gv = g.eval(x);
        s += gv * gv;
      }
      return s / (4.0 * q);
    };
    double num = pif2.vars.is_empty()
                     ? 0.0
                     : gaussian_quadrature(pi.measure(), pif2.vars, closure, quad_nodes);
    double den = pi.mu_dirichlet(f);
    out.ratios.push_back(num / den);
    out.gamma = std::max(out.gamma, out.ratios.back());
  }
  return out;
}

SweepTable sweeping_coefficients(const InteractionFamily& fam, const Region& cube,
                                 const Region& ambient, double kappa, double center) {
  GaussianData mu = GaussianData::from_family(fam, ambient, EnergyMode::Boundary);
  ConditionalGaussian cond = cube_conditional(fam, cube, ambient);
  Region halo = cube.halo(fam.range()).intersect(ambient);

  SweepTable table;
  table.cube_size = cube.size();
  auto grad_mass = [&](const QuadExp& e, const Site& at) {
    // |d_at e|^2 = (d_at log e)^2 e^2
    QuadPoly aff = e.log_poly().gradient(at);
    if (aff.vars.is_empty() && aff.c == 0.0) return 0.0;
    QuadPoly sq{aff.vars, aff.c * aff.c, 2.0 * aff.c * aff.l, aff.l * aff.l.transpose()};
    return gaussian_expect(mu, sq, e.squared());
  };

  for (const auto& i : cube.sites()) {
    QuadExp f = QuadExp::site_bump(i, kappa, center);
    double den = grad_mass(f, i);
    QuadExp swept = conditional_expect(f.squared(), cond).sqrt();
    for (const auto& j : halo.sites()) {
      SweepRow row;
      row.source = i;
      row.target = j;
      row.separation = linf(i, j);
      row.alpha = grad_mass(swept, j) / den;
      table.rows.push_back(row);
    }
  }

  std::vector<double> xs, logy;
  for (const auto& r : table.rows)
    if (r.alpha > 0) {
      xs.push_back(r.separation);
      logy.push_back(std::log(r.alpha));
    }
  double slope = fit_slope(xs, logy);
  table.fitted_rate = -slope;
  table.decaying = table.fitted_rate > 0;
  for (const auto& r : table.rows)
    if (r.alpha > 0)
      table.envelope_D = std::max(
          table.envelope_D, r.alpha * std::exp(table.fitted_rate * r.separation) / table.cube_size);
  return table;
}

}  // namespace lselab
