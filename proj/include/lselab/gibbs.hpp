#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>

#include "lselab/gaussian.hpp"
#include "lselab/potential.hpp"

namespace lselab {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Tensor grid measure

struct GridSpec {
  int nodes = 0;          // 0: pick by region size (128 / 64 / 32)
  double halfwidth = 0;   // 0: 8 / sqrt(convexity B)
  double center = 0;
  double tail_tolerance = 1e-10;
};

/// Product grid over the region with per-node weights proportional to
/// exp(-U) h^n. Normalized to a probability measure unless built as the
/// flat Lebesgue reference. Bond ("half node") weights carry exp(-U) at
/// axis midpoints; they make the discrete generator exactly reversible.
class GridMeasure {
 public:
  static GridMeasure build(const InteractionFamily& fam, const Region& region, EnergyMode mode,
                           const BoundaryCondition& bc = {}, const GridSpec& spec = {});
  /// Flat reference d mu = dx (unnormalized), for direct-form waves.
  static GridMeasure lebesgue(const Region& region, int nodes, double halfwidth,
                              double center = 0);

  const Region& region() const { return region_; }
  int axes() const { return region_.size(); }
  int nodes(int axis) const { return nodes_[static_cast<size_t>(axis)]; }
  double spacing(int axis) const { return h_[static_cast<size_t>(axis)]; }
  double node(int axis, int k) const;
  size_t total_nodes() const { return total_; }
  bool normalized() const { return normalized_; }
  double log_partition() const { return log_z_; }

  size_t flat_index(const std::vector<int>& multi) const;
  std::vector<int> multi_index(size_t flat) const;
  Eigen::VectorXd point(size_t flat) const;

  double weight(size_t flat) const { return weights_[flat]; }
  /// Weight of the bond from node `flat` to its +1 neighbour along `axis`
  /// (normalized like the node weights; 0 when out of range).
  double bond_weight(size_t flat, int axis) const;

  double expect(const std::function<double(const Eigen::VectorXd&)>& f) const;
  Complex expect(const std::function<Complex(const Eigen::VectorXd&)>& f) const;
  std::vector<Complex> sample_values(const std::function<Complex(const Eigen::VectorXd&)>& f) const;

  double mass(const std::vector<Complex>& values) const;  // m |f|^2
  double entropy(const std::vector<Complex>& values) const;
  /// Dirichlet form m |grad f|^2 from bond differences; per_axis selects one
  /// coordinate direction (-1 sums all).
  double dirichlet(const std::vector<Complex>& values, int per_axis = -1) const;

  /// Divergence-form generator L = Delta - grad U . grad on node values;
  /// E(Lf) = 0 and E(f Lg) = E(g Lf) hold exactly by construction.
  std::vector<Complex> generator_apply(const std::vector<Complex>& values) const;

  friend class GridWave;

 private:
  GridMeasure() : region_(Region::empty(1)) {}
  void finalize(double tail_tolerance);
  Region region_;
  std::vector<int> nodes_;
  std::vector<double> h_, lo_;
  size_t total_ = 0;
  bool normalized_ = true;
  double log_z_ = 0;
  std::vector<double> weights_;               // node weights (sum 1 when normalized)
  std::vector<std::vector<double>> bond_;     // per axis, bond weights
};

// ---------------------------------------------------------------------------
// MCMC backend

struct McmcConfig {
  double step = 0.2;
  int samples = 20000;  // kept draws per chain
  int burn_in = 2000;
  int chains = 4;
  std::uint64_t seed = 1;
};

struct McmcEstimate {
  double value = 0;
  double std_error = 0;
  double ess = 0;
};

struct McmcDiagnostics {
  double acceptance = 0;
  double tuned_step = 0;
};

/// Metropolis-adjusted Langevin chains targeting exp(-U_Lambda). The step is
/// tuned toward 0.57 acceptance during burn-in only, then frozen; chains are
/// seeded independently and merged in chain order, so output is a
/// deterministic function of the seed.
class McmcMeasure {
 public:
  McmcMeasure(const InteractionFamily& fam, Region region, EnergyMode mode, BoundaryCondition bc,
              McmcConfig cfg);
  McmcEstimate expect(const std::function<double(const Eigen::VectorXd&)>& f) const;
  const McmcDiagnostics& diagnostics() const { return diag_; }
  const Region& region() const { return region_; }
  const McmcConfig& config() const { return cfg_; }
  /// Kept draws, chain-major; draws_per_chain() consecutive rows per chain.
  const std::vector<Eigen::VectorXd>& draws() const { return draws_; }
  int draws_per_chain() const { return cfg_.samples; }

 private:
  Region region_;
  McmcConfig cfg_;
  McmcDiagnostics diag_;
  std::vector<Eigen::VectorXd> draws_;
};

// ---------------------------------------------------------------------------
// Local Gibbs measure facade

enum class Backend { GaussianExact, GridQuadrature, LangevinMC };

/// E_Lambda^omega (or the interior E_Lambda^o) with a chosen evaluation
/// backend. Exact closed forms on the Gaussian backend cover quadratic
/// polynomials and quadratic exponentials; anything else needs the grid or
/// sampling backend.
class LocalGibbsMeasure {
 public:
  static LocalGibbsMeasure gaussian(const InteractionFamily& fam, const Region& region,
                                    EnergyMode mode, const BoundaryCondition& bc = {});
  static LocalGibbsMeasure grid(const InteractionFamily& fam, const Region& region,
                                EnergyMode mode, const BoundaryCondition& bc = {},
                                const GridSpec& spec = {});
  static LocalGibbsMeasure mcmc(const InteractionFamily& fam, const Region& region,
                                EnergyMode mode, const BoundaryCondition& bc = {},
                                const McmcConfig& cfg = {});

  Backend backend() const { return backend_; }
  const Region& region() const { return region_; }
  const InteractionFamily& family() const { return *family_; }
  EnergyMode mode() const { return mode_; }
  const BoundaryCondition& boundary() const { return bc_; }

  const GaussianData& gaussian_data() const;
  const GridMeasure& grid_data() const;
  const McmcMeasure& mcmc_data() const;

  double expect(const QuadPoly& f) const;
  double expect(const QuadExp& f) const;
  double covariance(const QuadPoly& f, const QuadPoly& g) const;
  double variance(const QuadPoly& f) const;

  /// m(|f|^2 log(|f|^2 / m|f|^2)); nonnegative. Gaussian backend supports
  /// quadratic-exponential f in closed form.
  double entropy(const QuadExp& f) const;
  /// m |grad f|^2 with exact per-site gradients of the polynomial.
  double dirichlet(const QuadPoly& f) const;
  double dirichlet(const QuadExp& f) const;

 private:
  LocalGibbsMeasure() : region_(Region::empty(1)) {}
  Backend backend_ = Backend::GaussianExact;
  Region region_;
  std::shared_ptr<const InteractionFamily> family_;
  EnergyMode mode_ = EnergyMode::Boundary;
  BoundaryCondition bc_;
  std::shared_ptr<const GaussianData> gauss_;
  std::shared_ptr<const GridMeasure> grid_;
  std::shared_ptr<const McmcMeasure> mcmc_;
};

// ---------------------------------------------------------------------------
// Coefficients and checkers

/// LSI coefficient 2/rho from uniform strong convexity: rho is a volume-
/// uniform lower bound on the Hessian spectrum of U (Gershgorin over the
/// coefficient stencil, minus the declared perturbation allowance). Throws
/// "Bakry-Emery inapplicable" when the bound is not positive.
double lsi_coefficient_BE(const InteractionFamily& fam);

struct CheckRow {
  std::string label;
  double measured = 0;
  double bound = 0;
  bool pass = false;
};

struct SgiReport {
  std::vector<CheckRow> rows;
  bool pass = true;
};
/// variance(f) <= (c_ls / 2) m|grad f|^2 for each test function.
SgiReport check_sgi_from_lsi(const LocalGibbsMeasure& m, double c_ls,
                             const std::vector<QuadPoly>& tests, double slack = 1e-10);

struct DlrResult {
  double lhs = 0, rhs = 0, residual = 0, tolerance = 0;
  bool pass = false;
};
/// |mu(E_Lambda f) - mu(f)| on the ambient measure; exact backends compare
/// to `tol`, the sampling backend to 3 combined standard errors.
DlrResult check_dlr(const LocalGibbsMeasure& ambient, const Region& lambda, const QuadPoly& f,
                    double tol = 1e-10);

struct HerbstResult {
  double lhs = 0, rhs = 0, epsilon = 0;
  bool pass = false;
};
/// log m(e^{eps g}) <= 2 eps m(g) for |grad g|^2 <= a g and
/// eps in (0, 1/(a c)).
HerbstResult herbst_check(const LocalGibbsMeasure& m, const QuadPoly& g, double a, double c_ls,
                          double eps, double slack = 1e-8);

struct MixingRow {
  int r = 0;
  double covariance = 0;
};
struct MixingResult {
  std::vector<MixingRow> rows;
  double fitted_rate = 0;   // |cov| ~ exp(-rate r)
  bool monotone = true;
};
/// Covariance of coordinate pairs at increasing separation plus a
/// least-squares exponential fit of the decay.
MixingResult mixing_decay(const LocalGibbsMeasure& m, const Site& base,
                          const std::vector<Site>& far);

struct DensityRatioResult {
  double bound_B1 = 0;
  double observed_min = 0, observed_max = 0;
  bool pass = false;
};
/// B1 = exp(4 sup_k sum_{X ni k, |X|>=2} ||J_X||_inf) from declared bounds
/// (one-dimensional lattice only), with the density ratio dE/dE^o sampled at
/// random configurations and boundary conditions.
DensityRatioResult density_ratio_bound(const InteractionFamily& fam, const Region& lambda,
                                       int samples = 10000, std::uint64_t seed = 7);

}  // namespace lselab
