#include "lselab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lselab {

namespace {

constexpr Complex kI{0.0, 1.0};

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (y[i] <= 0) continue;
    double ly = std::log(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++n;
  }
  if (n < 2 || n * sxx == sx * sx) return 0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Crank-Nicolson sweep of one axis: (D - i dt/2 T) v' = (D + i dt/2 T) v with
// D = diag(w h^2) and T the symmetric bond-weight second difference. The map
// is a Cayley transform of a self-adjoint operator in the weighted inner
// product, hence an isometry of the discrete measure norm.
void cn_axis_step(const GridMeasure& m, std::vector<Complex>& v, int axis, double dt) {
  const int n = m.nodes(axis);
  const double h2 = m.spacing(axis) * m.spacing(axis);
  size_t stride = 1;
  for (int b = m.region().size() - 1; b > axis; --b) stride *= static_cast<size_t>(m.nodes(b));
  size_t lines = m.total_nodes() / static_cast<size_t>(n);

  std::vector<Complex> diag(static_cast<size_t>(n)), rhs(static_cast<size_t>(n)),
      upper(static_cast<size_t>(n)), scratch(static_cast<size_t>(n));

  // Enumerate line start offsets: all flat indices whose axis coordinate is 0.
  std::vector<size_t> starts;
  starts.reserve(lines);
  size_t block = stride * static_cast<size_t>(n);
  for (size_t base = 0; base < m.total_nodes(); base += block)
    for (size_t off = 0; off < stride; ++off) starts.push_back(base + off);

  const Complex z = kI * (0.5 * dt);
  for (size_t s : starts) {
    for (int k = 0; k < n; ++k) {
      size_t idx = s + static_cast<size_t>(k) * stride;
      double bk = m.bond_weight(idx, axis);                                   // bond k -> k+1
      double bkm = k > 0 ? m.bond_weight(idx - stride, axis) : 0.0;           // bond k-1 -> k
      double wk = m.weight(idx) * h2;
      Complex tv = 0;
      if (k + 1 < n) tv += bk * (v[idx + stride] - v[idx]);
      if (k > 0) tv += bkm * (v[idx - stride] - v[idx]);
      rhs[static_cast<size_t>(k)] = wk * v[idx] + z * tv;
      diag[static_cast<size_t>(k)] = Complex(wk, 0) + z * (bk + bkm);
      upper[static_cast<size_t>(k)] = -z * bk;
    }
    // Thomas solve; the matrix is strictly diagonally dominant.
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for (int k = 1; k < n; ++k) {
      size_t idx = s + static_cast<size_t>(k) * stride;
      Complex lower = -z * (k > 0 ? m.bond_weight(idx - stride, axis) : 0.0);
      Complex denom = diag[static_cast<size_t>(k)] - lower * scratch[static_cast<size_t>(k - 1)];
      scratch[static_cast<size_t>(k)] = upper[static_cast<size_t>(k)] / denom;
      rhs[static_cast<size_t>(k)] =
          (rhs[static_cast<size_t>(k)] - lower * rhs[static_cast<size_t>(k - 1)]) / denom;
    }
    for (int k = n - 2; k >= 0; --k)
      rhs[static_cast<size_t>(k)] -= scratch[static_cast<size_t>(k)] * rhs[static_cast<size_t>(k + 1)];
    for (int k = 0; k < n; ++k) v[s + static_cast<size_t>(k) * stride] = rhs[static_cast<size_t>(k)];
  }
}

void linear_step(const GridMeasure& m, std::vector<Complex>& v, double dt) {
  const int d = m.region().size();
  if (d == 1) {
    cn_axis_step(m, v, 0, dt);
    return;
  }
  for (int a = 0; a < d - 1; ++a) cn_axis_step(m, v, a, 0.5 * dt);
  cn_axis_step(m, v, d - 1, dt);
  for (int a = d - 2; a >= 0; --a) cn_axis_step(m, v, a, 0.5 * dt);
}

void phase_step(const GridMeasure& m, std::vector<Complex>& v, double half_dt, double lambda,
                bool normalize, double floor_ratio, const std::vector<double>* pot) {
  double mass = normalize ? m.mass(v) : 1.0;
  if (normalize && mass <= 0) throw std::runtime_error("solver diverged: vanishing mass");
  double peak = 0;
  for (const auto& z : v) peak = std::max(peak, std::norm(z));
  const double floor = floor_ratio * peak;
  for (size_t k = 0; k < v.size(); ++k) {
    double r = std::max(std::norm(v[k]), floor);
    double theta = lambda * std::log(r / mass);
    if (pot) theta += (*pot)[k];
    v[k] *= std::exp(-kI * (half_dt * theta));
  }
}

}  // namespace

GridWave::GridWave(std::shared_ptr<const GridMeasure> measure, std::vector<Complex> values,
                   WaveForm form)
    : measure_(std::move(measure)), values_(std::move(values)), form_(form) {
  if (values_.size() != measure_->total_nodes()) throw std::invalid_argument("value count mismatch");
}

GridWave GridWave::from_function(std::shared_ptr<const GridMeasure> measure,
                                 const std::function<Complex(const Eigen::VectorXd&)>& f,
                                 WaveForm form) {
  auto vals = measure->sample_values(f);
  return GridWave(std::move(measure), std::move(vals), form);
}

ObservableRow observe(const GridWave& w, double t, double lambda, const QuadPoly* V) {
  const GridMeasure& m = w.measure();
  ObservableRow row;
  row.t = t;
  row.mass = m.mass(w.values());
  row.kinetic = m.dirichlet(w.values());
  row.entropy = m.entropy(w.values());
  row.energy = row.kinetic + lambda * row.entropy;
  if (V) {
    double vterm = 0;
    std::vector<int> map;
    for (const auto& s : V->vars.sites()) map.push_back(m.region().index_of(s));
    for (size_t k = 0; k < m.total_nodes(); ++k) {
      Eigen::VectorXd x = m.point(k);
      Eigen::VectorXd xv(static_cast<Eigen::Index>(map.size()));
      for (size_t i = 0; i < map.size(); ++i) xv(static_cast<Eigen::Index>(i)) = x(map[i]);
      vterm += m.weight(k) * (V->c + V->l.dot(xv) + xv.dot(V->Q * xv)) * std::norm(w.values()[k]);
    }
    row.energy += vterm;
  }
  for (int a = 0; a < m.region().size(); ++a) row.grad.push_back(m.dirichlet(w.values(), a));
  return row;
}

GridEvolveResult evolve_grid(const GridWave& f, const SolverConfig& cfg, const QuadPoly* V) {
  if (cfg.dt == 0) throw std::invalid_argument("dt must be nonzero");
  const GridMeasure& m = f.measure();
  GridWave w = f;
  const int steps = static_cast<int>(std::llround(cfg.T / std::abs(cfg.dt)));
  const double dt = cfg.dt;

  std::vector<double> potvals;
  const std::vector<double>* pot = nullptr;
  if (V) {
    potvals.resize(m.total_nodes());
    std::vector<int> map;
    for (const auto& s : V->vars.sites()) map.push_back(m.region().index_of(s));
    for (size_t k = 0; k < m.total_nodes(); ++k) {
      Eigen::VectorXd x = m.point(k);
      Eigen::VectorXd xv(static_cast<Eigen::Index>(map.size()));
      for (size_t i = 0; i < map.size(); ++i) xv(static_cast<Eigen::Index>(i)) = x(map[i]);
      potvals[k] = V->c + V->l.dot(xv) + xv.dot(V->Q * xv);
    }
    pot = &potvals;
  }

  GridEvolveResult out{w, {}};
  out.series.sites = m.region();
  out.series.rows.push_back(observe(out.wave, 0.0, cfg.lambda, V));

  double t = 0;
  for (int s = 0; s < steps; ++s) {
    auto& v = out.wave.values();
    phase_step(m, v, 0.5 * dt, cfg.lambda, cfg.normalize_log, cfg.log_floor_ratio, pot);
    linear_step(m, v, dt);
    phase_step(m, v, 0.5 * dt, cfg.lambda, cfg.normalize_log, cfg.log_floor_ratio, pot);
    t += dt;
    for (const auto& z : v)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::runtime_error("solver diverged at step " + std::to_string(s));
    if ((s + 1) % cfg.sample_stride == 0 || s + 1 == steps)
      out.series.rows.push_back(observe(out.wave, t, cfg.lambda, V));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian ansatz

GaussianWave GaussianWave::vacuum(const Region& sites, WaveForm form) {
  GaussianWave w;
  w.sites = sites;
  w.A = Eigen::MatrixXcd::Zero(sites.size(), sites.size());
  w.b = Eigen::VectorXcd::Zero(sites.size());
  w.c = Complex(0, 0);
  w.form = form;
  return w;
}

QuadExp GaussianWave::abs_squared() const {
  QuadExp e;
  e.vars = sites;
  e.P = 2.0 * A.real();
  e.q = 2.0 * b.real();
  e.r = 2.0 * c.real();
  return e;
}

Eigen::MatrixXd coefficient_matrix(const InteractionFamily& fam, const Region& region) {
  const int n = region.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) C(i, i) = fam.diagonal(region.site(i));
  for (const auto& [a, b] : fam.pairs_touching(region, EnergyMode::Interior)) {
    double half = 0.5 * fam.pair_coefficient(a, b);
    int ia = region.index_of(a), ib = region.index_of(b);
    C(ia, ib) += half;
    C(ib, ia) += half;
  }
  return C;
}

namespace {

struct GaussState {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  Complex c;
};

double log_mass_gibbs(const GaussState& y, const Eigen::MatrixXd& C, double log_det_C) {
  Eigen::MatrixXd M = C + y.A.real();
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw std::domain_error("ansatz left admissible set");
  double log_det_M = 0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) log_det_M += 2.0 * std::log(llt.matrixLLT()(i, i));
  Eigen::VectorXd br = y.b.real();
  return 2.0 * y.c.real() + br.dot(llt.solve(br)) + 0.5 * (log_det_C - log_det_M);
}

double log_mass_flat(const GaussState& y) {
  Eigen::MatrixXd Ar = y.A.real();
  Eigen::LLT<Eigen::MatrixXd> llt(Ar);
  if (llt.info() != Eigen::Success) throw std::domain_error("ansatz left admissible set");
  double log_det = 0;
  for (Eigen::Index i = 0; i < Ar.rows(); ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
  Eigen::VectorXd br = y.b.real();
  const double n = static_cast<double>(Ar.rows());
  return 2.0 * y.c.real() + br.dot(llt.solve(br)) + 0.5 * (n * std::log(M_PI) - log_det);
}

GaussState gibbs_rhs(const GaussState& y, const Eigen::MatrixXd& C, double lambda,
                     double log_det_C) {
  GaussState d;
  Eigen::MatrixXcd Ar = y.A.real().cast<Complex>();
  d.A = -2.0 * kI * (y.A * y.A + C * y.A + y.A * C + lambda * Ar);
  d.b = -2.0 * kI * (y.A * y.b + C * y.b + lambda * y.b.real().cast<Complex>());
  Complex bdotb = (y.b.array() * y.b.array()).sum();
  double lm = log_mass_gibbs(y, C, log_det_C);
  d.c = -kI * (y.A.trace() - bdotb + 2.0 * lambda * y.c.real() - lambda * lm);
  return d;
}

GaussState flat_rhs(const GaussState& y, const Eigen::MatrixXd& V2, const Eigen::VectorXd& v1,
                    double v0, double lambda, bool normalize) {
  GaussState d;
  Eigen::MatrixXcd Ar = y.A.real().cast<Complex>();
  d.A = -2.0 * kI * (y.A * y.A - V2 + lambda * Ar);
  d.b = -kI * (2.0 * y.A * y.b + v1 + 2.0 * lambda * y.b.real().cast<Complex>());
  Complex bdotb = (y.b.array() * y.b.array()).sum();
  double lm = normalize ? log_mass_flat(y) : 0.0;
  d.c = -kI * (y.A.trace() - bdotb + v0 + 2.0 * lambda * y.c.real() - lambda * lm);
  return d;
}

template <typename Rhs>
GaussState rk4_step(const GaussState& y, double dt, const Rhs& rhs) {
  GaussState k1 = rhs(y);
  auto advance = [&](const GaussState& k, double h) {
    GaussState z;
    z.A = y.A + h * k.A;
    z.b = y.b + h * k.b;
    z.c = y.c + h * k.c;
    return z;
  };
  GaussState k2 = rhs(advance(k1, 0.5 * dt));
  GaussState k3 = rhs(advance(k2, 0.5 * dt));
  GaussState k4 = rhs(advance(k3, dt));
  GaussState out;
  out.A = y.A + (dt / 6.0) * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A);
  out.b = y.b + (dt / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
  out.c = y.c + (dt / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
  out.A = 0.5 * (out.A + out.A.transpose()).eval();
  return out;
}

ObservableRow observe_tilted(const Region& sites, const GaussState& y, double mass,
                             const Eigen::LLT<Eigen::MatrixXd>& llt_M, double t, double lambda) {
  // Tilted law nu with density |phi|^2 relative to the reference; precision
  // 2M where M is the combined real exponent matrix.
  const int n = sites.size();
  Eigen::VectorXd br = y.b.real(), bi = y.b.imag();
  Eigen::MatrixXd Arr = y.A.real(), Aii = y.A.imag();
  Eigen::VectorXd mnu = llt_M.solve(br);
  Eigen::MatrixXd Sigma = 0.5 * llt_M.solve(Eigen::MatrixXd::Identity(n, n));

  ObservableRow row;
  row.t = t;
  row.mass = mass;
  Eigen::VectorXd gr = Arr * mnu - br;
  Eigen::VectorXd gi = Aii * mnu - bi;
  Eigen::MatrixXd Tr = Arr * Sigma * Arr.transpose();
  Eigen::MatrixXd Ti = Aii * Sigma * Aii.transpose();
  row.grad.resize(static_cast<size_t>(n));
  row.kinetic = 0;
  for (int j = 0; j < n; ++j) {
    double g = mass * (gr(j) * gr(j) + gi(j) * gi(j) + Tr(j, j) + Ti(j, j));
    row.grad[static_cast<size_t>(j)] = g;
    row.kinetic += g;
  }
  double e_log = -mnu.dot(Arr * mnu) - (Arr * Sigma).trace() + 2.0 * br.dot(mnu) + 2.0 * y.c.real();
  row.entropy = mass * (e_log - std::log(mass));
  row.energy = row.kinetic + lambda * row.entropy;
  return row;
}

}  // namespace

ObservableRow observe_gibbs(const GaussianWave& w, const Eigen::MatrixXd& C, double t,
                            double lambda) {
  GaussState y{w.A, w.b, w.c};
  Eigen::LLT<Eigen::MatrixXd> lltC(C);
  if (lltC.info() != Eigen::Success) throw std::domain_error("measure not normalizable");
  double log_det_C = 0;
  for (Eigen::Index i = 0; i < C.rows(); ++i) log_det_C += 2.0 * std::log(lltC.matrixLLT()(i, i));
  Eigen::MatrixXd M = C + w.A.real();
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw std::domain_error("ansatz left admissible set");
  double mass = std::exp(log_mass_gibbs(y, C, log_det_C));
  return observe_tilted(w.sites, y, mass, llt, t, lambda);
}

ObservableRow observe_flat(const GaussianWave& w, const Eigen::MatrixXd& V2,
                           const Eigen::VectorXd& v1, double v0, double t, double lambda) {
  GaussState y{w.A, w.b, w.c};
  Eigen::MatrixXd Ar = w.A.real();
  Eigen::LLT<Eigen::MatrixXd> llt(Ar);
  if (llt.info() != Eigen::Success) throw std::domain_error("ansatz left admissible set");
  double mass = std::exp(log_mass_flat(y));
  ObservableRow row = observe_tilted(w.sites, y, mass, llt, t, lambda);
  // Potential term of the direct-form energy.
  const int n = w.sites.size();
  Eigen::VectorXd mnu = llt.solve(w.b.real());
  Eigen::MatrixXd Sigma = 0.5 * llt.solve(Eigen::MatrixXd::Identity(n, n));
  row.energy += mass * (v0 + v1.dot(mnu) + mnu.dot(V2 * mnu) + (V2 * Sigma).trace());
  return row;
}

GaussEvolveResult evolve_gaussian_gibbs(const GaussianWave& f, const Eigen::MatrixXd& C,
                                        const SolverConfig& cfg) {
  Eigen::LLT<Eigen::MatrixXd> lltC(C);
  if (lltC.info() != Eigen::Success) throw std::domain_error("measure not normalizable");
  double log_det_C = 0;
  for (Eigen::Index i = 0; i < C.rows(); ++i) log_det_C += 2.0 * std::log(lltC.matrixLLT()(i, i));

  GaussState y{f.A, f.b, f.c};
  auto rhs = [&](const GaussState& s) { return gibbs_rhs(s, C, cfg.lambda, log_det_C); };
  const int steps = static_cast<int>(std::llround(cfg.T / std::abs(cfg.dt)));

  GaussEvolveResult out{f, {}};
  out.series.sites = f.sites;
  out.series.rows.push_back(observe_gibbs(f, C, 0.0, cfg.lambda));
  double t = 0;
  for (int s = 0; s < steps; ++s) {
    y = rk4_step(y, cfg.dt, rhs);
    t += cfg.dt;
    if ((s + 1) % cfg.sample_stride == 0 || s + 1 == steps) {
      out.wave.A = y.A;
      out.wave.b = y.b;
      out.wave.c = y.c;
      out.series.rows.push_back(observe_gibbs(out.wave, C, t, cfg.lambda));
    }
  }
  out.wave.A = y.A;
  out.wave.b = y.b;
  out.wave.c = y.c;
  return out;
}

GaussEvolveResult evolve_gaussian_flat(const GaussianWave& f, const Eigen::MatrixXd& V2,
                                       const Eigen::VectorXd& v1, double v0,
                                       const SolverConfig& cfg) {
  GaussState y{f.A, f.b, f.c};
  auto rhs = [&](const GaussState& s) {
    return flat_rhs(s, V2, v1, v0, cfg.lambda, cfg.normalize_log);
  };
  const int steps = static_cast<int>(std::llround(cfg.T / std::abs(cfg.dt)));

  GaussEvolveResult out{f, {}};
  out.series.sites = f.sites;
  out.series.rows.push_back(observe_flat(f, V2, v1, v0, 0.0, cfg.lambda));
  double t = 0;
  for (int s = 0; s < steps; ++s) {
    y = rk4_step(y, cfg.dt, rhs);
    t += cfg.dt;
    if ((s + 1) % cfg.sample_stride == 0 || s + 1 == steps) {
      out.wave.A = y.A;
      out.wave.b = y.b;
      out.wave.c = y.c;
      out.series.rows.push_back(observe_flat(out.wave, V2, v1, v0, t, cfg.lambda));
    }
  }
  out.wave.A = y.A;
  out.wave.b = y.b;
  out.wave.c = y.c;
  return out;
}

// ---------------------------------------------------------------------------
// Checkers

ConservationReport check_conservation(const ObservableSeries& s, double tol_mass,
                                      double tol_energy) {
  ConservationReport rep;
  const double m0 = s.front().mass;
  const double e0 = s.front().energy;
  for (const auto& r : s.rows) {
    rep.mass_drift = std::max(rep.mass_drift, std::abs(r.mass - m0) / std::abs(m0));
    rep.energy_drift = std::max(rep.energy_drift, std::abs(r.energy - e0) / std::abs(e0));
  }
  rep.mass_pass = rep.mass_drift < tol_mass;
  rep.energy_pass = rep.energy_drift < tol_energy;
  return rep;
}

BoundsReport check_bounds(const ObservableSeries& s, double lambda, std::optional<double> c_lsi,
                          double slack) {
  BoundsReport rep;
  const double k0 = s.front().kinetic;
  const double ent0 = s.front().entropy;
  const double al = std::abs(lambda);

  CheckRow grad{"gradient bound", 0, 0, true};
  CheckRow ent{"entropy bound", 0, 0, true};
  double worst_g = -1e300, worst_e = -1e300;
  for (const auto& r : s.rows) {
    double gb = std::exp(2.0 * al * r.t) * k0;
    double eb = ent0 + (al > 0 ? (std::exp(2.0 * al * r.t) - 1.0) / al : 2.0 * r.t) * k0;
    if (r.kinetic - gb > worst_g) {
      worst_g = r.kinetic - gb;
      grad.measured = r.kinetic;
      grad.bound = gb;
    }
    if (r.entropy - eb > worst_e) {
      worst_e = r.entropy - eb;
      ent.measured = r.entropy;
      ent.bound = eb;
    }
  }
  grad.pass = worst_g <= slack;
  ent.pass = worst_e <= slack;
  rep.rows.push_back(grad);
  rep.rows.push_back(ent);

  if (lambda > 0 && c_lsi) {
    double c = *c_lsi;
    CheckRow ug{"uniform gradient bound", 0, (1.0 + lambda * c) * k0, true};
    CheckRow ue{"uniform entropy bound", 0, (1.0 / lambda + c) * k0, true};
    for (const auto& r : s.rows) {
      ug.measured = std::max(ug.measured, r.kinetic);
      ue.measured = std::max(ue.measured, r.entropy);
    }
    ug.pass = ug.measured <= ug.bound + slack;
    ue.pass = ue.measured <= ue.bound + slack;
    rep.rows.push_back(ug);
    rep.rows.push_back(ue);
  }
  for (const auto& r : rep.rows) rep.pass = rep.pass && r.pass;
  return rep;
}

PropagationTable propagation_experiment(const InteractionFamily& fam, const Region& chain,
                                        const Region& source, double delta, int n_max,
                                        const SolverConfig& cfg) {
  const int R = fam.range();
  const int d = fam.dim();
  const double A = derivative_bound_A(fam);
  const double eps_inv =
      9.0 * (2.0 * std::abs(cfg.lambda) + A) * std::pow(2.0 * R + 1.0, 2.0 * d);
  const double eps = 1.0 / eps_inv;

  GaussianWave f = GaussianWave::vacuum(chain, WaveForm::Gibbs);
  for (const auto& s : source.sites()) {
    int i = chain.index_of(s);
    f.A(i, i) += delta;
  }
  Eigen::MatrixXd C = coefficient_matrix(fam, chain);

  PropagationTable table;
  table.epsilon = eps;

  std::vector<PropagationRow> rows;
  for (const auto& j : chain.sites()) {
    int nj = dist(j, source) / R;
    if (nj < 1 || nj > n_max) continue;
    PropagationRow r;
    r.site = j;
    r.n_j = nj;
    r.window = eps * nj;
    rows.push_back(r);
  }

  SolverConfig run = cfg;
  run.T = eps * n_max;
  GaussEvolveResult res = evolve_gaussian_gibbs(f, C, run);
  table.grad0 = res.series.front().kinetic;
  for (auto& r : rows) {
    r.bound = std::exp(-static_cast<double>(r.n_j)) * table.grad0;
    int ji = chain.index_of(r.site);
    for (const auto& row : res.series.rows) {
      if (row.t > r.window + 1e-12) break;
      r.max_grad = std::max(r.max_grad, row.grad[static_cast<size_t>(ji)]);
    }
    r.pass = r.max_grad <= r.bound;
    table.pass = table.pass && r.pass;
  }
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.n_j);
    ys.push_back(r.max_grad);
  }
  table.fitted_rate = -fit_log_slope(xs, ys);
  table.rows = std::move(rows);
  return table;
}

VolumeTable volume_convergence(const InteractionFamily& fam, double lambda, int n_max, int L,
                               double delta, int ambient_halfwidth, const SolverConfig& cfg) {
  Region ambient = Region::interval(-ambient_halfwidth, ambient_halfwidth);
  GaussianData mu = GaussianData::from_family(fam, ambient, EnergyMode::Boundary);

  VolumeTable table;
  SolverConfig run = cfg;
  run.lambda = lambda;
  for (int n = 1; n <= n_max; ++n) {
    Region box = Region::interval(-8 * n * L, 8 * n * L);
    if (!box.is_subset_of(ambient)) throw std::invalid_argument("ambient box too small");
    GaussianWave f = GaussianWave::vacuum(box, WaveForm::Gibbs);
    int i0 = box.index_of(Site{0});
    f.A(i0, i0) += delta;
    if (n == 1) table.initial_norm = gaussian_expect(mu, f.abs_squared());
    Eigen::MatrixXd C = coefficient_matrix(fam, box);
    GaussEvolveResult res = evolve_gaussian_gibbs(f, C, run);
    VolumeRow row;
    row.n = n;
    row.volume = box.size();
    row.norm = gaussian_expect(mu, res.wave.abs_squared());
    table.rows.push_back(row);
  }
  for (size_t i = 1; i < table.rows.size(); ++i)
    table.diffs.push_back(std::abs(table.rows[i].norm - table.rows[i - 1].norm));
  for (size_t i = 1; i < table.diffs.size(); ++i)
    if (table.diffs[i] >= table.diffs[i - 1]) table.decreasing = false;
  table.final_diff = table.diffs.empty() ? 0.0 : table.diffs.back();
  return table;
}

GridWave to_flat_form(const GridWave& gibbs_wave, std::shared_ptr<const GridMeasure> flat_measure,
                      const CompiledEnergy& energy) {
  const GridMeasure& m = gibbs_wave.measure();
  std::vector<Complex> vals = gibbs_wave.values();
  for (size_t k = 0; k < vals.size(); ++k)
    vals[k] *= std::exp(-0.5 * energy.value(m.point(k)));
  return GridWave(std::move(flat_measure), std::move(vals), WaveForm::Flat);
}

GridWave to_gibbs_form(const GridWave& flat_wave, std::shared_ptr<const GridMeasure> gibbs_measure,
                       const CompiledEnergy& energy) {
  const GridMeasure& m = flat_wave.measure();
  std::vector<Complex> vals = flat_wave.values();
  for (size_t k = 0; k < vals.size(); ++k)
    vals[k] *= std::exp(0.5 * energy.value(m.point(k)));
  return GridWave(std::move(gibbs_measure), std::move(vals), WaveForm::Gibbs);
}

WaveAgreement compare_waves(const std::vector<Complex>& a, const std::vector<Complex>& b,
                            double mass_cut) {
  if (a.size() != b.size()) throw std::invalid_argument("wave size mismatch");
  double peak = 0;
  for (const auto& z : a) peak = std::max(peak, std::abs(z));
  Complex overlap = 0;
  for (size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k]) >= mass_cut * peak) overlap += std::conj(b[k]) * a[k];
  WaveAgreement res;
  res.aligned_phase = std::arg(overlap);
  Complex rot = std::exp(kI * res.aligned_phase);
  for (size_t k = 0; k < a.size(); ++k) {
    res.max_modulus_diff =
        std::max(res.max_modulus_diff, std::abs(std::abs(a[k]) - std::abs(b[k])) / peak);
    if (std::abs(a[k]) >= mass_cut * peak && std::abs(b[k]) >= mass_cut * peak) {
      double dphi = std::arg(a[k] * std::conj(rot * b[k]));
      res.max_phase_diff = std::max(res.max_phase_diff, std::abs(dphi));
    }
  }
  return res;
}

}  // namespace lselab
