#include "lselab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lselab {

PerturbationTerm cos_sum_perturbation(int d, double amplitude) {
  if (d != 1) throw std::invalid_argument("cos_sum perturbation is one-dimensional");
  PerturbationTerm t;
  t.pattern = Region(1, {{0}, {1}});
  t.value = [amplitude](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return amplitude * std::cos(s);
  };
  t.gradient = [amplitude](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return std::vector<double>(v.size(), -amplitude * std::sin(s));
  };
  t.hessian = [amplitude](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(v.size()),
                                                  static_cast<Eigen::Index>(v.size()),
                                                  -amplitude * std::cos(s));
    return h;
  };
  t.sup_value = std::abs(amplitude);
  t.sup_gradient = std::abs(amplitude);
  t.sup_mixed_second = std::abs(amplitude);
  t.sup_site_laplacian = std::abs(amplitude);
  t.name = "cos_sum";
  return t;
}

InteractionFamily::InteractionFamily(int d, int R) : d_(d), R_(R) {
  if (d < 1 || R < 1) throw std::invalid_argument("dimension and range must be >= 1");
}

Site InteractionFamily::canonical_offset(const Site& a, const Site& b) const {
  Site o(static_cast<size_t>(d_));
  for (int i = 0; i < d_; ++i) o[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] - a[static_cast<size_t>(i)];
  for (int i = 0; i < d_; ++i) {
    if (o[static_cast<size_t>(i)] > 0) break;
    if (o[static_cast<size_t>(i)] < 0) {
      for (auto& v : o) v = -v;
      break;
    }
  }
  return o;
}

InteractionFamily& InteractionFamily::set_diagonal(double c) {
  diag_default_ = c;
  return *this;
}

InteractionFamily& InteractionFamily::set_diagonal(const Site& s, double c) {
  diag_override_[s] = c;
  return *this;
}

InteractionFamily& InteractionFamily::set_pair(const Site& a, const Site& b, double c) {
  if (a == b) throw std::invalid_argument("pair requires distinct sites");
  if (linf(a, b) > R_) throw std::invalid_argument("pair exceeds interaction range");
  pair_stencil_[canonical_offset(a, b)] = c;
  return *this;
}

InteractionFamily& InteractionFamily::set_pair_override(const Site& a, const Site& b, double c) {
  if (a == b) throw std::invalid_argument("pair requires distinct sites");
  if (linf(a, b) > R_) throw std::invalid_argument("pair exceeds interaction range");
  pair_override_[std::minmax(a, b)] = c;
  return *this;
}

InteractionFamily& InteractionFamily::set_epsilon(double eps) {
  epsilon_ = eps;
  return *this;
}

InteractionFamily& InteractionFamily::add_perturbation(PerturbationTerm term) {
  if (term.pattern.dim() != d_) throw std::invalid_argument("perturbation dimension mismatch");
  if (diam(term.pattern) > R_) throw std::invalid_argument("perturbation exceeds interaction range");
  perturbations_.push_back(std::move(term));
  return *this;
}

double InteractionFamily::diagonal(const Site& s) const {
  auto it = diag_override_.find(s);
  return it == diag_override_.end() ? diag_default_ : it->second;
}

double InteractionFamily::pair_coefficient(const Site& a, const Site& b) const {
  if (a == b || linf(a, b) > R_) return 0.0;
  auto it = pair_override_.find(std::minmax(a, b));
  if (it != pair_override_.end()) return it->second;
  auto st = pair_stencil_.find(canonical_offset(a, b));
  return st == pair_stencil_.end() ? 0.0 : st->second;
}

bool InteractionFamily::is_product() const {
  for (const auto& [o, c] : pair_stencil_)
    if (c != 0.0) return false;
  for (const auto& [p, c] : pair_override_)
    if (c != 0.0) return false;
  return true;
}

std::vector<std::pair<Site, Site>> InteractionFamily::pairs_touching(const Region& region,
                                                                     EnergyMode mode) const {
  std::set<std::pair<Site, Site>> found;
  Site off(static_cast<size_t>(d_));
  for (const auto& i : region.sites()) {
    std::fill(off.begin(), off.end(), -R_);
    while (true) {
      Site j(static_cast<size_t>(d_));
      for (int n = 0; n < d_; ++n) j[static_cast<size_t>(n)] = i[static_cast<size_t>(n)] + off[static_cast<size_t>(n)];
      if (j != i && pair_coefficient(i, j) != 0.0) {
        if (mode == EnergyMode::Boundary || region.contains(j)) found.insert(std::minmax(i, j));
      }
      int axis = d_ - 1;
      while (axis >= 0) {
        if (++off[static_cast<size_t>(axis)] <= R_) break;
        off[static_cast<size_t>(axis)] = -R_;
        --axis;
      }
      if (axis < 0) break;
    }
  }
  return {found.begin(), found.end()};
}

std::vector<std::pair<int, Site>> InteractionFamily::perturbation_translates(
    const Region& region, EnergyMode mode) const {
  std::vector<std::pair<int, Site>> out;
  if (epsilon_ == 0.0) return out;
  for (size_t t = 0; t < perturbations_.size(); ++t) {
    const Region& pat = perturbations_[t].pattern;
    std::set<Site> anchors;
    for (const auto& i : region.sites())
      for (const auto& p : pat.sites()) {
        Site k(static_cast<size_t>(d_));
        for (int n = 0; n < d_; ++n) k[static_cast<size_t>(n)] = i[static_cast<size_t>(n)] - p[static_cast<size_t>(n)];
        anchors.insert(k);
      }
    for (const auto& k : anchors) {
      if (mode == EnergyMode::Interior) {
        bool inside = true;
        for (const auto& p : pat.sites()) {
          Site s(static_cast<size_t>(d_));
          for (int n = 0; n < d_; ++n) s[static_cast<size_t>(n)] = p[static_cast<size_t>(n)] + k[static_cast<size_t>(n)];
          if (!region.contains(s)) {
            inside = false;
            break;
          }
        }
        if (!inside) continue;
      }
      out.emplace_back(static_cast<int>(t), k);
    }
  }
  return out;
}

double InteractionFamily::min_diagonal() const {
  double m = diag_default_;
  for (const auto& [s, c] : diag_override_) m = std::min(m, c);
  return m;
}

double InteractionFamily::max_abs_pair() const {
  double m = 0;
  for (const auto& [o, c] : pair_stencil_) m = std::max(m, std::abs(c));
  for (const auto& [p, c] : pair_override_) m = std::max(m, std::abs(c));
  return m;
}

namespace {

double coordinate(const InteractionFamily&, const Region& lambda, const BoundaryCondition& bc,
                  const SiteValues& x, const Site& s) {
  if (lambda.contains(s)) {
    auto it = x.find(s);
    if (it == x.end()) throw std::invalid_argument("unassigned site");
    return it->second;
  }
  // Interior-mode term selection never reaches this branch.
  auto it = x.find(s);
  return it == x.end() ? bc(s) : it->second;
}

std::vector<double> translate_values(const InteractionFamily& fam, const Region& lambda,
                                     const BoundaryCondition& bc, const SiteValues& x,
                                     const Region& pattern, const Site& anchor) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(pattern.size()));
  for (const auto& p : pattern.sites()) {
    Site s(p.size());
    for (size_t n = 0; n < p.size(); ++n) s[n] = p[n] + anchor[n];
    v.push_back(coordinate(fam, lambda, bc, x, s));
  }
  return v;
}

}  // namespace

double energy_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                const BoundaryCondition& bc, const SiteValues& x) {
  double u = 0;
  for (const auto& i : lambda.sites()) {
    double xi = coordinate(fam, lambda, bc, x, i);
    u += fam.diagonal(i) * xi * xi;
  }
  for (const auto& [a, b] : fam.pairs_touching(lambda, mode)) {
    double xa = coordinate(fam, lambda, bc, x, a);
    double xb = coordinate(fam, lambda, bc, x, b);
    u += fam.pair_coefficient(a, b) * xa * xb;
  }
  for (const auto& [t, k] : fam.perturbation_translates(lambda, mode)) {
    const auto& term = fam.perturbations()[static_cast<size_t>(t)];
    u += fam.epsilon() * term.value(translate_values(fam, lambda, bc, x, term.pattern, k));
  }
  return u;
}

SiteValues grad_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                  const BoundaryCondition& bc, const SiteValues& x) {
  SiteValues g;
  for (const auto& i : lambda.sites()) {
    double xi = coordinate(fam, lambda, bc, x, i);
    g[i] = 2.0 * fam.diagonal(i) * xi;
  }
  for (const auto& [a, b] : fam.pairs_touching(lambda, mode)) {
    double c = fam.pair_coefficient(a, b);
    if (lambda.contains(a)) g[a] += c * coordinate(fam, lambda, bc, x, b);
    if (lambda.contains(b)) g[b] += c * coordinate(fam, lambda, bc, x, a);
  }
  for (const auto& [t, k] : fam.perturbation_translates(lambda, mode)) {
    const auto& term = fam.perturbations()[static_cast<size_t>(t)];
    auto vals = translate_values(fam, lambda, bc, x, term.pattern, k);
    auto grad = term.gradient(vals);
    int idx = 0;
    for (const auto& p : term.pattern.sites()) {
      Site s(p.size());
      for (size_t n = 0; n < p.size(); ++n) s[n] = p[n] + k[n];
      if (lambda.contains(s)) g[s] += fam.epsilon() * grad[static_cast<size_t>(idx)];
      ++idx;
    }
  }
  return g;
}

Eigen::MatrixXd hess_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                       const BoundaryCondition& bc, const SiteValues& x) {
  const int n = lambda.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = 2.0 * fam.diagonal(lambda.site(i));
  for (const auto& [a, b] : fam.pairs_touching(lambda, mode)) {
    int ia = lambda.index_of(a), ib = lambda.index_of(b);
    if (ia >= 0 && ib >= 0) {
      double c = fam.pair_coefficient(a, b);
      h(ia, ib) += c;
      h(ib, ia) += c;
    }
  }
  for (const auto& [t, k] : fam.perturbation_translates(lambda, mode)) {
    const auto& term = fam.perturbations()[static_cast<size_t>(t)];
    auto vals = translate_values(fam, lambda, bc, x, term.pattern, k);
    Eigen::MatrixXd ph = term.hessian(vals);
    int pi = 0;
    for (const auto& p : term.pattern.sites()) {
      Site sp(p.size());
      for (size_t n2 = 0; n2 < p.size(); ++n2) sp[n2] = p[n2] + k[n2];
      int qi = 0;
      for (const auto& q : term.pattern.sites()) {
        Site sq(q.size());
        for (size_t n2 = 0; n2 < q.size(); ++n2) sq[n2] = q[n2] + k[n2];
        int ip = lambda.index_of(sp), iq = lambda.index_of(sq);
        if (ip >= 0 && iq >= 0) h(ip, iq) += fam.epsilon() * ph(pi, qi);
        ++qi;
      }
      ++pi;
    }
  }
  return h;
}

double QuadraticFormV::operator()(const SiteValues& x) const {
  double v = constant;
  for (const auto& [s, c] : linear) v += c * x.at(s);
  for (const auto& [p, c] : quadratic) v += c * x.at(p.first) * x.at(p.second);
  return v;
}

QuadraticFormV ground_state_V(const InteractionFamily& fam, const Region& lambda,
                              double lambda_coupling) {
  if (!fam.is_bilinear()) throw std::invalid_argument("closed form requires bilinear family");
  const int R = fam.range();
  Region lamR = lambda.grown(R);
  const int n = lamR.size();

  // Symmetric matrix convention: C_jj = diagonal, C_jk = pair/2 off the
  // diagonal, so that U = x^T C x when every term is present.
  auto C = [&](const Site& a, const Site& b) {
    return a == b ? fam.diagonal(a) : 0.5 * fam.pair_coefficient(a, b);
  };

  QuadraticFormV V;
  V.support = lamR;
  V.range = 2 * R;
  for (const auto& j : lambda.sites()) V.constant -= fam.diagonal(j);

  for (int ji = 0; ji < n; ++ji) {
    for (int ki = ji; ki < n; ++ki) {
      const Site& j = lamR.site(ji);
      const Site& k = lamR.site(ki);
      bool touches = lambda.contains(j) || lambda.contains(k);
      double d = touches ? lambda_coupling * C(j, k) : 0.0;
      for (const auto& l : lambda.sites()) d += C(j, l) * C(k, l);
      if (d == 0.0) continue;
      double monomial = (ji == ki) ? d : 2.0 * d;
      V.quadratic[{j, k}] = monomial;
    }
  }
  return V;
}

CompiledEnergy::CompiledEnergy(const InteractionFamily& fam, const Region& lambda,
                               EnergyMode mode, const BoundaryCondition& bc)
    : fam_(&fam), lambda_(lambda) {
  const int n = lambda.size();
  diag_ = Eigen::VectorXd::Zero(n);
  linear_ = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) diag_(i) = fam.diagonal(lambda.site(i));
  for (const auto& [a, b] : fam.pairs_touching(lambda, mode)) {
    int ia = lambda.index_of(a), ib = lambda.index_of(b);
    double c = fam.pair_coefficient(a, b);
    if (ia >= 0 && ib >= 0) {
      pairs_.emplace_back(ia, ib, c);
    } else if (ia >= 0) {
      linear_(ia) += c * bc(b);
    } else {
      linear_(ib) += c * bc(a);
    }
  }
  for (const auto& [t, k] : fam.perturbation_translates(lambda, mode)) {
    Translate tr;
    tr.term = t;
    const Region& pat = fam.perturbations()[static_cast<size_t>(t)].pattern;
    for (const auto& p : pat.sites()) {
      Site s(p.size());
      for (size_t m = 0; m < p.size(); ++m) s[m] = p[m] + k[m];
      int idx = lambda.index_of(s);
      tr.index.push_back(idx);
      tr.fixed.push_back(idx >= 0 ? 0.0 : bc(s));
    }
    perts_.push_back(std::move(tr));
  }
}

double CompiledEnergy::value(const Eigen::VectorXd& x) const {
  double u = constant_;
  for (int i = 0; i < diag_.size(); ++i) u += diag_(i) * x(i) * x(i);
  u += linear_.dot(x);
  for (const auto& [i, j, c] : pairs_) u += c * x(i) * x(j);
  std::vector<double> args;
  for (const auto& tr : perts_) {
    args.clear();
    for (size_t m = 0; m < tr.index.size(); ++m)
      args.push_back(tr.index[m] >= 0 ? x(tr.index[m]) : tr.fixed[m]);
    u += fam_->epsilon() * fam_->perturbations()[static_cast<size_t>(tr.term)].value(args);
  }
  return u;
}

Eigen::VectorXd CompiledEnergy::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = linear_;
  for (int i = 0; i < diag_.size(); ++i) g(i) += 2.0 * diag_(i) * x(i);
  for (const auto& [i, j, c] : pairs_) {
    g(i) += c * x(j);
    g(j) += c * x(i);
  }
  std::vector<double> args;
  for (const auto& tr : perts_) {
    args.clear();
    for (size_t m = 0; m < tr.index.size(); ++m)
      args.push_back(tr.index[m] >= 0 ? x(tr.index[m]) : tr.fixed[m]);
    auto pg = fam_->perturbations()[static_cast<size_t>(tr.term)].gradient(args);
    for (size_t m = 0; m < tr.index.size(); ++m)
      if (tr.index[m] >= 0) g(tr.index[m]) += fam_->epsilon() * pg[m];
  }
  return g;
}

double derivative_bound_A(const InteractionFamily& fam) {
  double a = fam.max_abs_pair();
  if (fam.epsilon() != 0.0) {
    for (const auto& term : fam.perturbations()) {
      // Largest number of translates of the pattern covering one fixed pair:
      // anchors are i - p over ordered (p, q) in the pattern with q - p = j - i.
      std::map<Site, int> mult;
      for (const auto& p : term.pattern.sites())
        for (const auto& q : term.pattern.sites())
          if (p != q) {
            Site o(p.size());
            for (size_t i = 0; i < p.size(); ++i) o[i] = q[i] - p[i];
            mult[o] += 1;
          }
      int worst = 0;
      for (const auto& [o, m] : mult) worst = std::max(worst, m);
      a += std::abs(fam.epsilon()) * term.sup_mixed_second * worst;
    }
  }
  return a;
}

double convexity_B(const InteractionFamily& fam) {
  double b = 2.0 * fam.min_diagonal();
  if (fam.epsilon() != 0.0) {
    for (const auto& term : fam.perturbations())
      b -= std::abs(fam.epsilon()) * term.sup_site_laplacian * term.pattern.size();
  }
  if (b <= 0.0) throw std::domain_error("strong convexity violated");
  return b;
}

}  // namespace lselab
