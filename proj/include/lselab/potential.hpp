#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lselab/lattice.hpp"

namespace lselab {

/// Configuration fixed outside the region under study. Finitely supported;
/// unlisted sites read as 0.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  explicit BoundaryCondition(std::map<Site, double> values) : values_(std::move(values)) {}
  double operator()(const Site& s) const {
    auto it = values_.find(s);
    return it == values_.end() ? 0.0 : it->second;
  }
  void set(const Site& s, double v) { values_[s] = v; }
  const std::map<Site, double>& support() const { return values_; }

 private:
  std::map<Site, double> values_;
};

/// Whether energies count every term touching the region or only terms
/// strictly inside it.
enum class EnergyMode { Boundary, Interior };

/// A bounded multi-site term W placed on every lattice translate of a fixed
/// offset pattern. Callables receive values ordered like pattern.sites().
/// The sup bounds are declared by the caller and feed the uniform
/// second-derivative and convexity estimates; they are not re-derived.
struct PerturbationTerm {
  Region pattern = Region::empty(1);
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
  std::function<Eigen::MatrixXd(const std::vector<double>&)> hessian;
  double sup_value = 0;
  double sup_gradient = 0;
  double sup_mixed_second = 0;
  double sup_site_laplacian = 0;
  std::string name;
};

/// cos of the coordinate sum on nearest-neighbour pairs; all derivatives
/// bounded by the amplitude.
PerturbationTerm cos_sum_perturbation(int d, double amplitude);

/// Finite-range interaction family: a quadratic part given by diagonal and
/// unordered-pair coefficients (each pair carries its coefficient once, so
/// the cross second derivative between distinct sites equals the pair
/// coefficient), plus optional bounded perturbations scaled by epsilon.
///
/// Pair coefficients are translation invariant: a coefficient set for the
/// offset between two sites applies to every translate. Explicit per-pair
/// overrides take precedence where present.
class InteractionFamily {
 public:
  InteractionFamily(int d, int R);

  int dim() const { return d_; }
  int range() const { return R_; }

  InteractionFamily& set_diagonal(double c);
  InteractionFamily& set_diagonal(const Site& s, double c);
  /// Coefficient for the unordered pair {a, b} and all its translates.
  InteractionFamily& set_pair(const Site& a, const Site& b, double c);
  /// Coefficient for the specific unordered pair {a, b} only.
  InteractionFamily& set_pair_override(const Site& a, const Site& b, double c);
  InteractionFamily& set_epsilon(double eps);
  InteractionFamily& add_perturbation(PerturbationTerm term);

  double diagonal(const Site& s) const;
  double pair_coefficient(const Site& a, const Site& b) const;
  double epsilon() const { return epsilon_; }
  const std::vector<PerturbationTerm>& perturbations() const { return perturbations_; }
  bool is_bilinear() const { return perturbations_.empty() || epsilon_ == 0.0; }
  /// True when every translation-invariant pair coefficient vanishes (the
  /// measure factorises over sites).
  bool is_product() const;

  /// Unordered pairs {i, j} with nonzero coefficient and i in region or
  /// j in region (Interior: both in region). Each pair listed once.
  std::vector<std::pair<Site, Site>> pairs_touching(const Region& region, EnergyMode mode) const;
  /// Anchor translates k of each perturbation pattern with (pattern + k)
  /// touching the region (Interior: contained in it).
  std::vector<std::pair<int, Site>> perturbation_translates(const Region& region,
                                                            EnergyMode mode) const;

  double min_diagonal() const;
  double max_abs_pair() const;

 private:
  Site canonical_offset(const Site& a, const Site& b) const;
  int d_, R_;
  double diag_default_ = 0;
  std::map<Site, double> diag_override_;
  std::map<Site, double> pair_stencil_;  // canonical offset -> coefficient
  std::map<std::pair<Site, Site>, double> pair_override_;
  double epsilon_ = 0;
  std::vector<PerturbationTerm> perturbations_;
};

/// Values of the free coordinates, keyed by site.
using SiteValues = std::map<Site, double>;

/// U_Lambda(x | omega): every interaction term meeting Lambda, with sites
/// outside Lambda read from the boundary condition. Interior mode keeps only
/// terms strictly inside Lambda. Missing coordinates on Lambda raise
/// "unassigned site".
double energy_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                const BoundaryCondition& bc, const SiteValues& x);

/// Gradient over the sites of lambda (same term selection as energy_U).
SiteValues grad_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                  const BoundaryCondition& bc, const SiteValues& x);

/// Hessian over lambda x lambda, indexed in region order.
Eigen::MatrixXd hess_U(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                       const BoundaryCondition& bc, const SiteValues& x);

/// Quadratic form with coefficients supported within range 2R of the region
/// it was derived for. `quadratic` maps canonically ordered site pairs to
/// monomial coefficients: V(x) = constant + sum lin_j x_j + sum q_{jk} x_j x_k.
struct QuadraticFormV {
  double constant = 0;
  std::map<Site, double> linear;
  std::map<std::pair<Site, Site>, double> quadratic;
  Region support = Region::empty(1);
  int range = 0;

  double operator()(const SiteValues& x) const;
};

/// The potential seen by the flat-form wave when the ground-state weight
/// exp(-U/2) is factored out: V = -1/2 Delta_L U + 1/4 |grad_L U|^2 + lambda U
/// with derivatives over lambda only. Closed form for bilinear families;
/// throws on nonzero perturbation.
QuadraticFormV ground_state_V(const InteractionFamily& fam, const Region& lambda, double lambda_coupling);

/// Term list of U_Lambda resolved once, for fast repeated evaluation on
/// vectors in region order. Boundary values are folded into linear and
/// constant parts at build time.
class CompiledEnergy {
 public:
  CompiledEnergy(const InteractionFamily& fam, const Region& lambda, EnergyMode mode,
                 const BoundaryCondition& bc = {});
  const Region& region() const { return lambda_; }
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

 private:
  struct Translate {
    int term;
    std::vector<int> index;      // region index per pattern site, -1 if fixed
    std::vector<double> fixed;   // boundary value where index is -1
  };
  const InteractionFamily* fam_;
  Region lambda_;
  Eigen::VectorXd diag_;
  std::vector<std::tuple<int, int, double>> pairs_;
  Eigen::VectorXd linear_;
  double constant_ = 0;
  std::vector<Translate> perts_;
};

/// Uniform bound on |d_i d_j U| over distinct sites: the largest pair
/// coefficient plus the declared perturbation allowance.
double derivative_bound_A(const InteractionFamily& fam);

/// Uniform lower bound on the per-site second derivative: 2 C^- minus the
/// declared perturbation allowance. Throws "strong convexity violated" when
/// the bound is not positive.
double convexity_B(const InteractionFamily& fam);

}  // namespace lselab
