#include "lselab/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace lselab {

namespace {

// Index of each sub-region site inside the super-region (throws if absent).
std::vector<int> embed_map(const Region& sub, const Region& sup) {
  std::vector<int> map;
  map.reserve(static_cast<size_t>(sub.size()));
  for (const auto& s : sub.sites()) {
    int idx = sup.index_of(s);
    if (idx < 0) throw std::invalid_argument("variable outside target region");
    map.push_back(idx);
  }
  return map;
}

Eigen::MatrixXd selector(const Region& sub, const Region& sup) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(sub.size(), sup.size());
  auto map = embed_map(sub, sup);
  for (int i = 0; i < sub.size(); ++i) S(i, map[static_cast<size_t>(i)]) = 1.0;
  return S;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  double s = 0;
  const Eigen::MatrixXd& packed = llt.matrixLLT();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) s += std::log(packed(i, i));
  return 2.0 * s;
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::domain_error(what);
  return llt;
}

}  // namespace

GaussianData::GaussianData(Region region, Eigen::MatrixXd precision, Eigen::VectorXd mean)
    : region_(std::move(region)), precision_(std::move(precision)), mean_(std::move(mean)) {
  if (precision_.rows() != region_.size() || precision_.cols() != region_.size() ||
      mean_.size() != region_.size())
    throw std::invalid_argument("size mismatch");
  llt_ = checked_llt(precision_, "not normalizable");
}

GaussianData GaussianData::from_family(const InteractionFamily& fam, const Region& region,
                                       EnergyMode mode, const BoundaryCondition& bc) {
  if (!fam.is_bilinear()) throw std::invalid_argument("exact backend requires bilinear family");
  const int n = region.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) C(i, i) = fam.diagonal(region.site(i));
  for (const auto& [a, b] : fam.pairs_touching(region, EnergyMode::Interior)) {
    int ia = region.index_of(a), ib = region.index_of(b);
    double half = 0.5 * fam.pair_coefficient(a, b);
    C(ia, ib) += half;
    C(ib, ia) += half;
  }
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  if (mode == EnergyMode::Boundary) {
    for (const auto& [a, b] : fam.pairs_touching(region, EnergyMode::Boundary)) {
      bool a_in = region.contains(a), b_in = region.contains(b);
      if (a_in && b_in) continue;
      const Site& inside = a_in ? a : b;
      const Site& outside = a_in ? b : a;
      lin(region.index_of(inside)) += fam.pair_coefficient(a, b) * bc(outside);
    }
  }
  Eigen::MatrixXd precision = 2.0 * C;
  auto llt = checked_llt(precision, "not normalizable");
  Eigen::VectorXd mean = llt.solve(-lin);
  return GaussianData(region, std::move(precision), std::move(mean));
}

double GaussianData::mean(const Site& s) const {
  int i = region_.index_of(s);
  if (i < 0) throw std::invalid_argument("site outside measure region");
  return mean_(i);
}

const Eigen::MatrixXd& GaussianData::full_covariance() const {
  if (!cov_) cov_ = llt_.solve(Eigen::MatrixXd::Identity(region_.size(), region_.size()));
  return *cov_;
}

double GaussianData::covariance(const Site& a, const Site& b) const {
  int ia = region_.index_of(a), ib = region_.index_of(b);
  if (ia < 0 || ib < 0) throw std::invalid_argument("site outside measure region");
  return full_covariance()(ia, ib);
}

Eigen::MatrixXd GaussianData::covariance_block(const Region& sites) const {
  auto map = embed_map(sites, region_);
  const auto& cov = full_covariance();
  Eigen::MatrixXd out(sites.size(), sites.size());
  for (int i = 0; i < sites.size(); ++i)
    for (int j = 0; j < sites.size(); ++j)
      out(i, j) = cov(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
  return out;
}

Eigen::VectorXd GaussianData::mean_block(const Region& sites) const {
  auto map = embed_map(sites, region_);
  Eigen::VectorXd out(sites.size());
  for (int i = 0; i < sites.size(); ++i) out(i) = mean_(map[static_cast<size_t>(i)]);
  return out;
}

QuadPoly QuadPoly::constant(int dim, double value) {
  QuadPoly p{Region::empty(dim), value, Eigen::VectorXd::Zero(0), Eigen::MatrixXd::Zero(0, 0)};
  return p;
}

QuadPoly QuadPoly::coordinate(const Site& s) {
  QuadPoly p{Region::single(s), 0.0, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1)};
  return p;
}

double QuadPoly::eval(const SiteValues& x) const {
  Eigen::VectorXd v(vars.size());
  for (int i = 0; i < vars.size(); ++i) v(i) = x.at(vars.site(i));
  return c + l.dot(v) + v.dot(Q * v);
}

QuadPoly QuadPoly::plus(const QuadPoly& other) const {
  if (vars.dim() != other.vars.dim()) throw std::invalid_argument("dimension mismatch");
  Region all = vars.unite(other.vars);
  QuadPoly out{all, c + other.c, Eigen::VectorXd::Zero(all.size()),
               Eigen::MatrixXd::Zero(all.size(), all.size())};
  auto m1 = embed_map(vars, all);
  auto m2 = embed_map(other.vars, all);
  for (int i = 0; i < vars.size(); ++i) {
    out.l(m1[static_cast<size_t>(i)]) += l(i);
    for (int j = 0; j < vars.size(); ++j)
      out.Q(m1[static_cast<size_t>(i)], m1[static_cast<size_t>(j)]) += Q(i, j);
  }
  for (int i = 0; i < other.vars.size(); ++i) {
    out.l(m2[static_cast<size_t>(i)]) += other.l(i);
    for (int j = 0; j < other.vars.size(); ++j)
      out.Q(m2[static_cast<size_t>(i)], m2[static_cast<size_t>(j)]) += other.Q(i, j);
  }
  return out;
}

QuadPoly QuadPoly::scaled(double a) const { return {vars, c * a, l * a, Q * a}; }

QuadPoly QuadPoly::substituted(const Site& s, double value) const {
  int k = vars.index_of(s);
  if (k < 0) return *this;
  Region rest = vars.subtract(Region::single(s));
  QuadPoly out{rest, c, Eigen::VectorXd::Zero(rest.size()), Eigen::MatrixXd::Zero(rest.size(), rest.size())};
  out.c += l(k) * value + Q(k, k) * value * value;
  auto map = embed_map(rest, vars);
  for (int i = 0; i < rest.size(); ++i) {
    int oi = map[static_cast<size_t>(i)];
    out.l(i) = l(oi) + (Q(oi, k) + Q(k, oi)) * value;
    for (int j = 0; j < rest.size(); ++j) out.Q(i, j) = Q(oi, map[static_cast<size_t>(j)]);
  }
  return out;
}

QuadPoly QuadPoly::trimmed() const {
  std::vector<Site> keep;
  for (int i = 0; i < vars.size(); ++i) {
    bool used = l(i) != 0.0;
    for (int j = 0; j < vars.size() && !used; ++j) used = Q(i, j) != 0.0 || Q(j, i) != 0.0;
    if (used) keep.push_back(vars.site(i));
  }
  Region r(vars.dim(), keep);
  QuadPoly out{r, c, Eigen::VectorXd::Zero(r.size()), Eigen::MatrixXd::Zero(r.size(), r.size())};
  auto map = embed_map(r, vars);
  for (int i = 0; i < r.size(); ++i) {
    out.l(i) = l(map[static_cast<size_t>(i)]);
    for (int j = 0; j < r.size(); ++j) out.Q(i, j) = Q(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
  }
  return out;
}

QuadPoly QuadPoly::gradient(const Site& s) const {
  int k = vars.index_of(s);
  if (k < 0) return QuadPoly::constant(vars.dim(), 0.0);
  QuadPoly out{vars, l(k), Eigen::VectorXd::Zero(vars.size()), Eigen::MatrixXd::Zero(vars.size(), vars.size())};
  for (int j = 0; j < vars.size(); ++j) out.l(j) = Q(k, j) + Q(j, k);
  out.c = l(k);
  return out.trimmed();
}

QuadExp QuadExp::one(int dim) {
  return {Region::empty(dim), Eigen::MatrixXd::Zero(0, 0), Eigen::VectorXd::Zero(0), 0.0};
}

QuadExp QuadExp::site_bump(const Site& s, double kappa, double center) {
  QuadExp e{Region::single(s), Eigen::MatrixXd::Constant(1, 1, kappa),
            Eigen::VectorXd::Constant(1, kappa * center), -0.5 * kappa * center * center};
  return e;
}

double QuadExp::eval(const SiteValues& x) const {
  Eigen::VectorXd v(vars.size());
  for (int i = 0; i < vars.size(); ++i) v(i) = x.at(vars.site(i));
  return std::exp(-0.5 * v.dot(P * v) + q.dot(v) + r);
}

QuadExp QuadExp::squared() const { return {vars, 2.0 * P, 2.0 * q, 2.0 * r}; }
QuadExp QuadExp::sqrt() const { return {vars, 0.5 * P, 0.5 * q, 0.5 * r}; }

QuadPoly QuadExp::log_poly() const { return {vars, r, q, -0.5 * P}; }

ConditionalGaussian cube_conditional(const InteractionFamily& fam, const Region& cube,
                                     const std::optional<Region>& clip,
                                     const BoundaryCondition& bc) {
  if (!fam.is_bilinear()) throw std::invalid_argument("exact backend requires bilinear family");
  GaussianData local = GaussianData::from_family(fam, cube, EnergyMode::Interior);
  const int n = cube.size();

  Region halo_all = cube.halo(fam.range());
  std::vector<Site> free_sites, frozen_sites;
  for (const auto& s : halo_all.sites()) {
    if (!clip || clip->contains(s))
      free_sites.push_back(s);
    else
      frozen_sites.push_back(s);
  }
  Region halo(cube.dim(), free_sites);

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, halo.size());
  Eigen::VectorXd l0 = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Site& si = cube.site(i);
    for (int j = 0; j < halo.size(); ++j) B(i, j) = fam.pair_coefficient(si, halo.site(j));
    for (const auto& s : frozen_sites) l0(i) += fam.pair_coefficient(si, s) * bc(s);
  }

  // Drop halo sites that do not couple to the cube.
  std::vector<Site> coupled;
  std::vector<int> cols;
  for (int j = 0; j < halo.size(); ++j)
    if (B.col(j).cwiseAbs().maxCoeff() != 0.0) {
      coupled.push_back(halo.site(j));
      cols.push_back(j);
    }
  Region halo_used(cube.dim(), coupled);
  Eigen::MatrixXd Bu(n, halo_used.size());
  for (size_t j = 0; j < cols.size(); ++j) Bu.col(static_cast<Eigen::Index>(j)) = B.col(cols[j]);

  ConditionalGaussian cond;
  cond.cube = cube;
  cond.halo = halo_used;
  cond.mean_matrix = -local.llt().solve(Bu);
  cond.mean_offset = -local.llt().solve(l0);
  cond.covariance = local.llt().solve(Eigen::MatrixXd::Identity(n, n));
  return cond;
}

QuadPoly conditional_expect(const QuadPoly& f, const ConditionalGaussian& cond) {
  Region integrated = f.vars.intersect(cond.cube);
  if (integrated.is_empty()) return f;
  Region kept = f.vars.subtract(cond.cube);
  Region out_vars = kept.unite(cond.halo);

  const int ni = integrated.size();
  auto fmap = embed_map(integrated, f.vars);
  auto cmap = embed_map(integrated, cond.cube);

  // Affine law of the integrated coordinates: A x_out + a0, with covariance S.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, out_vars.size());
  Eigen::VectorXd a0(ni);
  Eigen::MatrixXd S(ni, ni);
  auto hmap = embed_map(cond.halo, out_vars);
  for (int i = 0; i < ni; ++i) {
    int ci = cmap[static_cast<size_t>(i)];
    a0(i) = cond.mean_offset(ci);
    for (int j = 0; j < cond.halo.size(); ++j)
      A(i, hmap[static_cast<size_t>(j)]) = cond.mean_matrix(ci, j);
    for (int j = 0; j < ni; ++j) S(i, j) = cond.covariance(ci, cmap[static_cast<size_t>(j)]);
  }

  Eigen::MatrixXd SK = selector(kept, out_vars);
  Eigen::VectorXd lK = Eigen::VectorXd::Zero(kept.size());
  Eigen::VectorXd lI(ni);
  Eigen::MatrixXd QKK = Eigen::MatrixXd::Zero(kept.size(), kept.size());
  Eigen::MatrixXd QKI = Eigen::MatrixXd::Zero(kept.size(), ni);
  Eigen::MatrixXd QII(ni, ni);
  auto kmap = embed_map(kept, f.vars);
  for (int i = 0; i < kept.size(); ++i) {
    lK(i) = f.l(kmap[static_cast<size_t>(i)]);
    for (int j = 0; j < kept.size(); ++j) QKK(i, j) = f.Q(kmap[static_cast<size_t>(i)], kmap[static_cast<size_t>(j)]);
    for (int j = 0; j < ni; ++j) QKI(i, j) = 0.5 * (f.Q(kmap[static_cast<size_t>(i)], fmap[static_cast<size_t>(j)]) +
                                                    f.Q(fmap[static_cast<size_t>(j)], kmap[static_cast<size_t>(i)]));
  }
  for (int i = 0; i < ni; ++i) {
    lI(i) = f.l(fmap[static_cast<size_t>(i)]);
    for (int j = 0; j < ni; ++j) QII(i, j) = f.Q(fmap[static_cast<size_t>(i)], fmap[static_cast<size_t>(j)]);
  }

  QuadPoly out{out_vars, 0.0, Eigen::VectorXd::Zero(out_vars.size()),
               Eigen::MatrixXd::Zero(out_vars.size(), out_vars.size())};
  out.c = f.c + lI.dot(a0) + a0.dot(QII * a0) + (QII * S).trace();
  out.l = SK.transpose() * lK + A.transpose() * lI + 2.0 * SK.transpose() * (QKI * a0) +
          2.0 * A.transpose() * (QII * a0);
  Eigen::MatrixXd G = SK.transpose() * QKK * SK + 2.0 * SK.transpose() * QKI * A +
                      A.transpose() * QII * A;
  out.Q = 0.5 * (G + G.transpose());
  return out.trimmed();
}

QuadExp conditional_expect(const QuadExp& f, const ConditionalGaussian& cond) {
  Region integrated = f.vars.intersect(cond.cube);
  if (integrated.is_empty()) return f;
  Region kept = f.vars.subtract(cond.cube);
  Region out_vars = kept.unite(cond.halo);

  const int ni = integrated.size();
  auto fmap = embed_map(integrated, f.vars);
  auto cmap = embed_map(integrated, cond.cube);
  auto kmap = embed_map(kept, f.vars);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, out_vars.size());
  Eigen::VectorXd a0(ni);
  Eigen::MatrixXd Sigma(ni, ni);
  auto hmap = embed_map(cond.halo, out_vars);
  for (int i = 0; i < ni; ++i) {
    int ci = cmap[static_cast<size_t>(i)];
    a0(i) = cond.mean_offset(ci);
    for (int j = 0; j < cond.halo.size(); ++j)
      A(i, hmap[static_cast<size_t>(j)]) = cond.mean_matrix(ci, j);
    for (int j = 0; j < ni; ++j) Sigma(i, j) = cond.covariance(ci, cmap[static_cast<size_t>(j)]);
  }

  Eigen::MatrixXd PII(ni, ni), PIK(ni, kept.size());
  Eigen::MatrixXd PKK = Eigen::MatrixXd::Zero(kept.size(), kept.size());
  Eigen::VectorXd qI(ni), qK(kept.size());
  for (int i = 0; i < ni; ++i) {
    qI(i) = f.q(fmap[static_cast<size_t>(i)]);
    for (int j = 0; j < ni; ++j) PII(i, j) = f.P(fmap[static_cast<size_t>(i)], fmap[static_cast<size_t>(j)]);
    for (int j = 0; j < kept.size(); ++j) PIK(i, j) = f.P(fmap[static_cast<size_t>(i)], kmap[static_cast<size_t>(j)]);
  }
  for (int i = 0; i < kept.size(); ++i) {
    qK(i) = f.q(kmap[static_cast<size_t>(i)]);
    for (int j = 0; j < kept.size(); ++j) PKK(i, j) = f.P(kmap[static_cast<size_t>(i)], kmap[static_cast<size_t>(j)]);
  }

  auto sig_llt = checked_llt(Sigma, "conditional covariance not positive definite");
  Eigen::MatrixXd Sprec = sig_llt.solve(Eigen::MatrixXd::Identity(ni, ni));
  Eigen::MatrixXd G = Sprec + PII;
  auto g_llt = checked_llt(0.5 * (G + G.transpose()), "integrand not integrable against conditional law");

  Eigen::MatrixXd SK = selector(kept, out_vars);
  Eigen::MatrixXd W1 = Sprec * A - PIK * SK;
  Eigen::VectorXd w0 = Sprec * a0 + qI;
  Eigen::MatrixXd Ginv_W1 = g_llt.solve(W1);
  Eigen::VectorXd Ginv_w0 = g_llt.solve(w0);

  QuadExp out;
  out.vars = out_vars;
  Eigen::MatrixXd P = SK.transpose() * PKK * SK - W1.transpose() * Ginv_W1 +
                      A.transpose() * (Sprec * A);
  out.P = 0.5 * (P + P.transpose());
  out.q = SK.transpose() * qK + W1.transpose() * Ginv_w0 - A.transpose() * (Sprec * a0);
  out.r = f.r + 0.5 * w0.dot(Ginv_w0) - 0.5 * a0.dot(Sprec * a0) +
          0.5 * (log_det_from_llt(sig_llt) * -1.0 - log_det_from_llt(g_llt));
  return out;
}

double gaussian_expect(const GaussianData& g, const QuadPoly& f) {
  Eigen::VectorXd m = g.mean_block(f.vars);
  Eigen::MatrixXd S = g.covariance_block(f.vars);
  return f.c + f.l.dot(m) + m.dot(f.Q * m) + (f.Q * S).trace();
}

TiltedGaussian tilt(const GaussianData& g, const QuadExp& factor) {
  auto map = embed_map(factor.vars, g.region());
  Eigen::MatrixXd P1 = g.precision();
  Eigen::VectorXd b = g.precision() * g.mean_vector();
  for (int i = 0; i < factor.vars.size(); ++i) {
    b(map[static_cast<size_t>(i)]) += factor.q(i);
    for (int j = 0; j < factor.vars.size(); ++j)
      P1(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]) += factor.P(i, j);
  }
  auto llt1 = checked_llt(P1, "tilting factor not integrable");
  Eigen::VectorXd m1 = llt1.solve(b);
  double log_mass = factor.r - 0.5 * g.mean_vector().dot(g.precision() * g.mean_vector()) +
                    0.5 * m1.dot(P1 * m1) +
                    0.5 * (log_det_from_llt(g.llt()) - log_det_from_llt(llt1));
  return {GaussianData(g.region(), std::move(P1), std::move(m1)), log_mass};
}

double gaussian_expect(const GaussianData& g, const QuadExp& f) {
  return std::exp(tilt(g, f).log_mass);
}

double gaussian_expect(const GaussianData& g, const QuadPoly& f, const QuadExp& e) {
  TiltedGaussian t = tilt(g, e);
  return std::exp(t.log_mass) * gaussian_expect(t.measure, f);
}

double gaussian_covariance(const GaussianData& g, const QuadPoly& f, const QuadPoly& h) {
  Region joint = f.vars.unite(h.vars);
  Eigen::VectorXd m = g.mean_block(joint);
  Eigen::MatrixXd S = g.covariance_block(joint);
  auto lift = [&](const QuadPoly& p, Eigen::VectorXd& l, Eigen::MatrixXd& Q) {
    l = Eigen::VectorXd::Zero(joint.size());
    Q = Eigen::MatrixXd::Zero(joint.size(), joint.size());
    auto map = embed_map(p.vars, joint);
    for (int i = 0; i < p.vars.size(); ++i) {
      l(map[static_cast<size_t>(i)]) += p.l(i);
      for (int j = 0; j < p.vars.size(); ++j)
        Q(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]) += p.Q(i, j);
    }
  };
  Eigen::VectorXd lf, lh;
  Eigen::MatrixXd Qf, Qh;
  lift(f, lf, Qf);
  lift(h, lh, Qh);
  Eigen::VectorXd cf = lf + 2.0 * Qf * m;
  Eigen::VectorXd ch = lh + 2.0 * Qh * m;
  return cf.dot(S * ch) + 2.0 * (Qf * S * Qh * S).trace();
}

}  // namespace lselab
