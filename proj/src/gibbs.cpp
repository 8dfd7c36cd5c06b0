#include "lselab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lselab {

namespace {

// Closure evaluating a polynomial on vectors in region order. Variables
// outside the region are first frozen at their boundary values.
std::function<double(const Eigen::VectorXd&)> poly_closure(QuadPoly f, const Region& region,
                                                           const BoundaryCondition& bc) {
  for (const auto& v : f.vars.sites())
    if (!region.contains(v)) f = f.substituted(v, bc(v));
  std::vector<int> map;
  for (const auto& v : f.vars.sites()) map.push_back(region.index_of(v));
  return [f = std::move(f), map](const Eigen::VectorXd& x) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(map.size()));
    for (size_t i = 0; i < map.size(); ++i) v(static_cast<Eigen::Index>(i)) = x(map[i]);
    return f.c + f.l.dot(v) + v.dot(f.Q * v);
  };
}

QuadPoly frozen_outside(QuadPoly f, const Region& region, const BoundaryCondition& bc) {
  for (const auto& v : f.vars.sites())
    if (!region.contains(v)) f = f.substituted(v, bc(v));
  return f;
}

QuadExp frozen_outside(QuadExp e, const Region& region, const BoundaryCondition& bc) {
  for (const auto& v : e.vars.sites()) {
    if (region.contains(v)) continue;
    // Substitute a fixed coordinate value into the exponent.
    QuadPoly lp = e.log_poly().substituted(v, bc(v));
    QuadExp out;
    out.vars = lp.vars;
    out.P = -2.0 * lp.Q;
    out.q = lp.l;
    out.r = lp.c;
    return frozen_outside(out, region, bc);
  }
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridMeasure

GridMeasure GridMeasure::build(const InteractionFamily& fam, const Region& region,
                               EnergyMode mode, const BoundaryCondition& bc,
                               const GridSpec& spec) {
  if (region.size() < 1 || region.size() > 3)
    throw std::invalid_argument("grid backend supports 1 to 3 sites");
  GridMeasure m;
  m.region_ = region;
  int def = region.size() == 1 ? 128 : (region.size() == 2 ? 64 : 32);
  int M = spec.nodes > 0 ? spec.nodes : def;
  double hw = spec.halfwidth > 0 ? spec.halfwidth : 8.0 / std::sqrt(convexity_B(fam));
  double voln = 1;
  for (int a = 0; a < region.size(); ++a) {
    m.nodes_.push_back(M);
    m.h_.push_back(2.0 * hw / (M - 1));
    m.lo_.push_back(spec.center - hw);
    voln *= m.h_.back();
  }
  m.total_ = 1;
  for (int n : m.nodes_) m.total_ *= static_cast<size_t>(n);

  CompiledEnergy energy(fam, region, mode, bc);
  m.weights_.resize(m.total_);
  double z = 0;
  for (size_t k = 0; k < m.total_; ++k) {
    double w = std::exp(-energy.value(m.point(k))) * voln;
    m.weights_[k] = w;
    z += w;
  }
  m.log_z_ = std::log(z);
  for (auto& w : m.weights_) w /= z;

  m.bond_.resize(static_cast<size_t>(region.size()));
  for (int a = 0; a < region.size(); ++a) {
    auto& bw = m.bond_[static_cast<size_t>(a)];
    bw.assign(m.total_, 0.0);
    for (size_t k = 0; k < m.total_; ++k) {
      auto mi = m.multi_index(k);
      if (mi[static_cast<size_t>(a)] + 1 >= m.nodes_[static_cast<size_t>(a)]) continue;
      Eigen::VectorXd x = m.point(k);
      x(a) += 0.5 * m.h_[static_cast<size_t>(a)];
      bw[k] = std::exp(-energy.value(x)) * voln / z;
    }
  }
  m.finalize(spec.tail_tolerance);
  return m;
}

GridMeasure GridMeasure::lebesgue(const Region& region, int nodes, double halfwidth,
                                  double center) {
  GridMeasure m;
  m.region_ = region;
  double voln = 1;
  for (int a = 0; a < region.size(); ++a) {
    m.nodes_.push_back(nodes);
    m.h_.push_back(2.0 * halfwidth / (nodes - 1));
    m.lo_.push_back(center - halfwidth);
    voln *= m.h_.back();
  }
  m.total_ = 1;
  for (int n : m.nodes_) m.total_ *= static_cast<size_t>(n);
  m.normalized_ = false;
  m.weights_.assign(m.total_, voln);
  m.bond_.resize(static_cast<size_t>(region.size()));
  for (int a = 0; a < region.size(); ++a) {
    auto& bw = m.bond_[static_cast<size_t>(a)];
    bw.assign(m.total_, voln);
    for (size_t k = 0; k < m.total_; ++k)
      if (m.multi_index(k)[static_cast<size_t>(a)] + 1 >= nodes) bw[k] = 0.0;
  }
  return m;
}

void GridMeasure::finalize(double tail_tolerance) {
  double tail = 0;
  for (size_t k = 0; k < total_; ++k) {
    auto mi = multi_index(k);
    bool outer = false;
    for (int a = 0; a < region_.size(); ++a) {
      int i = mi[static_cast<size_t>(a)], n = nodes_[static_cast<size_t>(a)];
      if (i < 2 || i >= n - 2) outer = true;
    }
    if (outer) tail += weights_[k];
  }
  if (tail > tail_tolerance) throw std::domain_error("domain too small");
}

double GridMeasure::node(int axis, int k) const {
  return lo_[static_cast<size_t>(axis)] + k * h_[static_cast<size_t>(axis)];
}

size_t GridMeasure::flat_index(const std::vector<int>& multi) const {
  size_t f = 0;
  for (int a = 0; a < region_.size(); ++a)
    f = f * static_cast<size_t>(nodes_[static_cast<size_t>(a)]) + static_cast<size_t>(multi[static_cast<size_t>(a)]);
  return f;
}

std::vector<int> GridMeasure::multi_index(size_t flat) const {
  std::vector<int> mi(static_cast<size_t>(region_.size()));
  for (int a = region_.size() - 1; a >= 0; --a) {
    int n = nodes_[static_cast<size_t>(a)];
    mi[static_cast<size_t>(a)] = static_cast<int>(flat % static_cast<size_t>(n));
    flat /= static_cast<size_t>(n);
  }
  return mi;
}

Eigen::VectorXd GridMeasure::point(size_t flat) const {
  auto mi = multi_index(flat);
  Eigen::VectorXd x(region_.size());
  for (int a = 0; a < region_.size(); ++a) x(a) = node(a, mi[static_cast<size_t>(a)]);
  return x;
}

double GridMeasure::bond_weight(size_t flat, int axis) const {
  return bond_[static_cast<size_t>(axis)][flat];
}

double GridMeasure::expect(const std::function<double(const Eigen::VectorXd&)>& f) const {
  double s = 0;
  for (size_t k = 0; k < total_; ++k) s += weights_[k] * f(point(k));
  return s;
}

Complex GridMeasure::expect(const std::function<Complex(const Eigen::VectorXd&)>& f) const {
  Complex s = 0;
  for (size_t k = 0; k < total_; ++k) s += weights_[k] * f(point(k));
  return s;
}

std::vector<Complex> GridMeasure::sample_values(
    const std::function<Complex(const Eigen::VectorXd&)>& f) const {
  std::vector<Complex> v(total_);
  for (size_t k = 0; k < total_; ++k) v[k] = f(point(k));
  return v;
}

double GridMeasure::mass(const std::vector<Complex>& values) const {
  double s = 0;
  for (size_t k = 0; k < total_; ++k) s += weights_[k] * std::norm(values[k]);
  return s;
}

double GridMeasure::entropy(const std::vector<Complex>& values) const {
  double m = mass(values);
  if (m <= 0) throw std::domain_error("entropy needs positive mass");
  double peak = 0;
  for (const auto& v : values) peak = std::max(peak, std::norm(v));
  const double floor = 1e-30 * peak;
  double s = 0;
  for (size_t k = 0; k < total_; ++k) {
    double r = std::norm(values[k]);
    if (r == 0.0) continue;  // 0 log 0 = 0
    s += weights_[k] * r * std::log(std::max(r, floor) / m);
  }
  return s;
}

double GridMeasure::dirichlet(const std::vector<Complex>& values, int per_axis) const {
  double s = 0;
  for (int a = 0; a < region_.size(); ++a) {
    if (per_axis >= 0 && a != per_axis) continue;
    const double h2 = h_[static_cast<size_t>(a)] * h_[static_cast<size_t>(a)];
    size_t stride = 1;
    for (int b = region_.size() - 1; b > a; --b) stride *= static_cast<size_t>(nodes_[static_cast<size_t>(b)]);
    const auto& bw = bond_[static_cast<size_t>(a)];
    for (size_t k = 0; k < total_; ++k) {
      if (bw[k] == 0.0) continue;
      s += bw[k] * std::norm(values[k + stride] - values[k]) / h2;
    }
  }
  return s;
}

std::vector<Complex> GridMeasure::generator_apply(const std::vector<Complex>& values) const {
  if (values.size() != total_) throw std::invalid_argument("grid size mismatch");
  std::vector<Complex> out(total_, Complex(0));
  for (int a = 0; a < region_.size(); ++a) {
    const double h2 = h_[static_cast<size_t>(a)] * h_[static_cast<size_t>(a)];
    size_t stride = 1;
    for (int b = region_.size() - 1; b > a; --b) stride *= static_cast<size_t>(nodes_[static_cast<size_t>(b)]);
    const auto& bw = bond_[static_cast<size_t>(a)];
    for (size_t k = 0; k < total_; ++k) {
      Complex acc = 0;
      if (bw[k] != 0.0) acc += bw[k] * (values[k + stride] - values[k]);
      auto mi = multi_index(k);
      if (mi[static_cast<size_t>(a)] > 0) {
        size_t km = k - stride;
        acc += bw[km] * (values[km] - values[k]);
      }
      out[k] += acc / (h2 * weights_[k]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LocalGibbsMeasure

LocalGibbsMeasure LocalGibbsMeasure::gaussian(const InteractionFamily& fam, const Region& region,
                                              EnergyMode mode, const BoundaryCondition& bc) {
  LocalGibbsMeasure m;
  m.backend_ = Backend::GaussianExact;
  m.region_ = region;
  m.family_ = std::make_shared<InteractionFamily>(fam);
  m.mode_ = mode;
  m.bc_ = bc;
  m.gauss_ = std::make_shared<GaussianData>(GaussianData::from_family(fam, region, mode, bc));
  return m;
}

LocalGibbsMeasure LocalGibbsMeasure::grid(const InteractionFamily& fam, const Region& region,
                                          EnergyMode mode, const BoundaryCondition& bc,
                                          const GridSpec& spec) {
  LocalGibbsMeasure m;
  m.backend_ = Backend::GridQuadrature;
  m.region_ = region;
  m.family_ = std::make_shared<InteractionFamily>(fam);
  m.mode_ = mode;
  m.bc_ = bc;
  m.grid_ = std::make_shared<GridMeasure>(GridMeasure::build(fam, region, mode, bc, spec));
  return m;
}

LocalGibbsMeasure LocalGibbsMeasure::mcmc(const InteractionFamily& fam, const Region& region,
                                          EnergyMode mode, const BoundaryCondition& bc,
                                          const McmcConfig& cfg) {
  LocalGibbsMeasure m;
  m.backend_ = Backend::LangevinMC;
  m.region_ = region;
  m.family_ = std::make_shared<InteractionFamily>(fam);
  m.mode_ = mode;
  m.bc_ = bc;
  m.mcmc_ = std::make_shared<McmcMeasure>(fam, region, mode, bc, cfg);
  return m;
}

const GaussianData& LocalGibbsMeasure::gaussian_data() const {
  if (!gauss_) throw std::logic_error("not a Gaussian-backend measure");
  return *gauss_;
}
const GridMeasure& LocalGibbsMeasure::grid_data() const {
  if (!grid_) throw std::logic_error("not a grid-backend measure");
  return *grid_;
}
const McmcMeasure& LocalGibbsMeasure::mcmc_data() const {
  if (!mcmc_) throw std::logic_error("not a sampling-backend measure");
  return *mcmc_;
}

double LocalGibbsMeasure::expect(const QuadPoly& f) const {
  switch (backend_) {
    case Backend::GaussianExact:
      return gaussian_expect(*gauss_, frozen_outside(f, region_, bc_));
    case Backend::GridQuadrature:
      return grid_->expect(poly_closure(f, region_, bc_));
    case Backend::LangevinMC:
      return mcmc_->expect(poly_closure(f, region_, bc_)).value;
  }
  return 0;
}

double LocalGibbsMeasure::expect(const QuadExp& f) const {
  QuadExp g = frozen_outside(f, region_, bc_);
  switch (backend_) {
    case Backend::GaussianExact:
      return gaussian_expect(*gauss_, g);
    case Backend::GridQuadrature: {
      auto lp = g.log_poly();
      auto cl = poly_closure(lp, region_, bc_);
      return grid_->expect(
          std::function<double(const Eigen::VectorXd&)>([&](const Eigen::VectorXd& x) { return std::exp(cl(x)); }));
    }
    case Backend::LangevinMC: {
      auto lp = g.log_poly();
      auto cl = poly_closure(lp, region_, bc_);
      return mcmc_->expect([&](const Eigen::VectorXd& x) { return std::exp(cl(x)); }).value;
    }
  }
  return 0;
}

double LocalGibbsMeasure::covariance(const QuadPoly& f, const QuadPoly& g) const {
  switch (backend_) {
    case Backend::GaussianExact:
      return gaussian_covariance(*gauss_, frozen_outside(f, region_, bc_),
                                 frozen_outside(g, region_, bc_));
    default: {
      auto cf = poly_closure(f, region_, bc_);
      auto cg = poly_closure(g, region_, bc_);
      auto prod = [&](const Eigen::VectorXd& x) { return cf(x) * cg(x); };
      if (backend_ == Backend::GridQuadrature)
        return grid_->expect(std::function<double(const Eigen::VectorXd&)>(prod)) -
               grid_->expect(cf) * grid_->expect(cg);
      return mcmc_->expect(prod).value - mcmc_->expect(cf).value * mcmc_->expect(cg).value;
    }
  }
}

double LocalGibbsMeasure::variance(const QuadPoly& f) const { return covariance(f, f); }

double LocalGibbsMeasure::entropy(const QuadExp& f) const {
  QuadExp g = frozen_outside(f, region_, bc_);
  if (backend_ == Backend::GaussianExact) {
    QuadExp f2 = g.squared();
    QuadPoly logf2 = f2.log_poly();
    double m = gaussian_expect(*gauss_, f2);
    double num = gaussian_expect(*gauss_, logf2, f2);
    return num - m * std::log(m);
  }
  if (backend_ == Backend::GridQuadrature) {
    auto lp = g.log_poly();
    auto cl = poly_closure(lp, region_, bc_);
    auto vals = grid_->sample_values([&](const Eigen::VectorXd& x) { return Complex(std::exp(cl(x)), 0); });
    return grid_->entropy(vals);
  }
  throw std::invalid_argument("unsupported integrand class");
}

double LocalGibbsMeasure::dirichlet(const QuadPoly& f) const {
  if (backend_ == Backend::GaussianExact) {
    QuadPoly g = frozen_outside(f, region_, bc_);
    double s = 0;
    for (const auto& v : g.vars.sites()) {
      QuadPoly d = g.gradient(v);
      // (affine)^2 expressed as a quadratic polynomial
      QuadPoly sq{d.vars, d.c * d.c, 2.0 * d.c * d.l, d.l * d.l.transpose()};
      s += gaussian_expect(*gauss_, sq);
    }
    return s;
  }
  if (backend_ == Backend::GridQuadrature) {
    auto cl = poly_closure(f, region_, bc_);
    auto vals = grid_->sample_values([&](const Eigen::VectorXd& x) { return Complex(cl(x), 0); });
    return grid_->dirichlet(vals);
  }
  throw std::invalid_argument("unsupported integrand class");
}

double LocalGibbsMeasure::dirichlet(const QuadExp& f) const {
  QuadExp g = frozen_outside(f, region_, bc_);
  if (backend_ == Backend::GaussianExact) {
    QuadExp f2 = g.squared();
    double s = 0;
    for (const auto& v : g.vars.sites()) {
      // d_v f = (q_v - P_v . x) f, so |d_v f|^2 = (affine)^2 f^2.
      QuadPoly aff = g.log_poly().gradient(v);
      QuadPoly sq{aff.vars, aff.c * aff.c, 2.0 * aff.c * aff.l, aff.l * aff.l.transpose()};
      s += gaussian_expect(*gauss_, sq, f2);
    }
    return s;
  }
  if (backend_ == Backend::GridQuadrature) {
    auto lp = g.log_poly();
    auto cl = poly_closure(lp, region_, bc_);
    auto vals = grid_->sample_values([&](const Eigen::VectorXd& x) { return Complex(std::exp(cl(x)), 0); });
    return grid_->dirichlet(vals);
  }
  throw std::invalid_argument("unsupported integrand class");
}

// ---------------------------------------------------------------------------
// Coefficients and checkers

double lsi_coefficient_BE(const InteractionFamily& fam) {
  // Gershgorin bound on the Hessian spectrum, uniform over volumes: the cross
  // second derivative toward each neighbour is the pair coefficient, probed
  // around the origin (coefficients are translation invariant).
  double diag = 2.0 * fam.min_diagonal();
  double offsum = 0;
  Site origin(static_cast<size_t>(fam.dim()), 0);
  Region neighbours = Region::single(origin).halo(fam.range());
  for (const auto& s : neighbours.sites()) offsum += std::abs(fam.pair_coefficient(origin, s));
  double rho = diag - offsum;
  if (fam.epsilon() != 0.0) {
    for (const auto& t : fam.perturbations()) {
      double p = static_cast<double>(t.pattern.size());
      rho -= std::abs(fam.epsilon()) * p * (t.sup_site_laplacian + (p - 1.0) * t.sup_mixed_second);
    }
  }
  if (rho <= 0.0) throw std::domain_error("Bakry-Emery inapplicable");
  return 2.0 / rho;
}

SgiReport check_sgi_from_lsi(const LocalGibbsMeasure& m, double c_ls,
                             const std::vector<QuadPoly>& tests, double slack) {
  SgiReport rep;
  int i = 0;
  for (const auto& f : tests) {
    CheckRow row;
    row.label = "sgi test " + std::to_string(i++);
    row.measured = m.variance(f);
    row.bound = 0.5 * c_ls * m.dirichlet(f);
    row.pass = row.measured <= row.bound + slack;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

DlrResult check_dlr(const LocalGibbsMeasure& ambient, const Region& lambda, const QuadPoly& f,
                    double tol) {
  ConditionalGaussian cond =
      cube_conditional(ambient.family(), lambda, ambient.region(), ambient.boundary());
  QuadPoly ef = conditional_expect(f, cond);
  DlrResult r;
  if (ambient.backend() == Backend::LangevinMC) {
    auto e1 = ambient.mcmc_data().expect(poly_closure(ef, ambient.region(), ambient.boundary()));
    auto e2 = ambient.mcmc_data().expect(poly_closure(f, ambient.region(), ambient.boundary()));
    r.lhs = e1.value;
    r.rhs = e2.value;
    r.tolerance = 3.0 * std::sqrt(e1.std_error * e1.std_error + e2.std_error * e2.std_error);
  } else {
    r.lhs = ambient.expect(ef);
    r.rhs = ambient.expect(f);
    r.tolerance = tol;
  }
  r.residual = std::abs(r.lhs - r.rhs);
  r.pass = r.residual <= r.tolerance;
  return r;
}

HerbstResult herbst_check(const LocalGibbsMeasure& m, const QuadPoly& g, double a, double c_ls,
                          double eps, double slack) {
  if (!(eps > 0.0) || !(eps < 1.0 / (a * c_ls)))
    throw std::invalid_argument("epsilon outside admissible range");
  HerbstResult res;
  res.epsilon = eps;
  QuadExp tiltf{g.vars, -2.0 * eps * g.Q, eps * g.l, eps * g.c};
  res.lhs = std::log(m.expect(tiltf));
  res.rhs = 2.0 * eps * m.expect(g);
  res.pass = res.lhs <= res.rhs + slack;
  return res;
}

MixingResult mixing_decay(const LocalGibbsMeasure& m, const Site& base,
                          const std::vector<Site>& far) {
  MixingResult out;
  QuadPoly f = QuadPoly::coordinate(base);
  for (const auto& s : far) {
    MixingRow row;
    row.r = linf(base, s);
    row.covariance = m.covariance(f, QuadPoly::coordinate(s));
    out.rows.push_back(row);
  }
  double prev = std::abs(out.rows.empty() ? 0.0 : out.rows.front().covariance);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    double a = std::abs(out.rows[i].covariance);
    if (i > 0 && a > prev + 1e-14) out.monotone = false;
    if (i > 0) prev = a;
    if (a > 0) {
      double x = out.rows[i].r, y = std::log(a);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  if (n >= 2 && sxx * n != sx * sx) out.fitted_rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

DensityRatioResult density_ratio_bound(const InteractionFamily& fam, const Region& lambda,
                                       int samples, std::uint64_t seed) {
  if (fam.dim() != 1) throw std::domain_error("bound restricted to one-dimensional lattice");
  if (!fam.is_product())
    throw std::domain_error("pair terms are unbounded; no finite density ratio bound");
  double per_site = 0;
  for (const auto& t : fam.perturbations())
    per_site += std::abs(fam.epsilon()) * t.sup_value * t.pattern.size();
  DensityRatioResult res;
  res.bound_B1 = std::exp(4.0 * per_site);

  // Sampled ratio: for each boundary draw, compare boundary and interior
  // densities at random interior configurations.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  const int n_bc = std::max(1, samples / 100);
  const int n_x = samples / n_bc;
  Region halo = lambda.halo(fam.range());
  CompiledEnergy interior(fam, lambda, EnergyMode::Interior);
  GridSpec gs;
  double lo = 1e300, hi = -1e300;
  GridMeasure g0 = GridMeasure::build(fam, lambda, EnergyMode::Interior, {}, gs);
  double log_z_int = g0.log_partition();
  for (int b = 0; b < n_bc; ++b) {
    BoundaryCondition bc;
    for (const auto& s : halo.sites()) bc.set(s, unif(rng));
    CompiledEnergy full(fam, lambda, EnergyMode::Boundary, bc);
    GridMeasure gb = GridMeasure::build(fam, lambda, EnergyMode::Boundary, bc, gs);
    double log_ratio_z = log_z_int - gb.log_partition();
    for (int k = 0; k < n_x; ++k) {
      Eigen::VectorXd x(lambda.size());
      for (int i = 0; i < lambda.size(); ++i) x(i) = unif(rng);
      double rho = std::exp(-(full.value(x) - interior.value(x)) + log_ratio_z);
      lo = std::min(lo, rho);
      hi = std::max(hi, rho);
    }
  }
  res.observed_min = lo;
  res.observed_max = hi;
  res.pass = hi <= res.bound_B1 * (1 + 1e-9) && lo >= (1.0 / res.bound_B1) * (1 - 1e-9);
  return res;
}

}  // namespace lselab
