#pragma once

#include <memory>

#include "lselab/gibbs.hpp"

namespace lselab {

enum class WaveForm { Gibbs, Flat };

/// Complex wave on a tensor grid, carrying the reference measure it is
/// weighted by (a Gibbs grid measure, or the flat Lebesgue reference).
class GridWave {
 public:
  GridWave(std::shared_ptr<const GridMeasure> measure, std::vector<Complex> values, WaveForm form);
  static GridWave from_function(std::shared_ptr<const GridMeasure> measure,
                                const std::function<Complex(const Eigen::VectorXd&)>& f,
                                WaveForm form);

  const GridMeasure& measure() const { return *measure_; }
  std::shared_ptr<const GridMeasure> measure_ptr() const { return measure_; }
  const std::vector<Complex>& values() const { return values_; }
  std::vector<Complex>& values() { return values_; }
  WaveForm form() const { return form_; }

 private:
  std::shared_ptr<const GridMeasure> measure_;
  std::vector<Complex> values_;
  WaveForm form_;
};

struct SolverConfig {
  double dt = 1e-3;            // may be negative to integrate backwards
  double T = 1.0;
  double lambda = 0.5;
  double log_floor_ratio = 1e-30;
  bool normalize_log = true;   // divide |phi|^2 by its mass inside the log
  int sample_stride = 1;       // record observables every this many steps
};

struct ObservableRow {
  double t = 0, mass = 0, kinetic = 0, entropy = 0, energy = 0;
  std::vector<double> grad;  // per-site gradient norms, region order
};

struct ObservableSeries {
  Region sites = Region::empty(1);
  std::vector<ObservableRow> rows;
  const ObservableRow& front() const { return rows.front(); }
  const ObservableRow& back() const { return rows.back(); }
};

/// One observable row: mass m|phi|^2, kinetic m|grad phi|^2 (bond Dirichlet
/// form on grids, closed form for the ansatz), entropy Ent_m|phi|^2, energy
/// kinetic + lambda entropy (plus the potential term on direct-form runs),
/// and per-site gradient norms.
ObservableRow observe(const GridWave& w, double t, double lambda, const QuadPoly* V = nullptr);

struct GridEvolveResult {
  GridWave wave;
  ObservableSeries series;
};

/// Strang splitting: exact half-step phase rotation
/// phi <- phi exp(-i dt/2 (lambda log(|phi|^2 / m|phi|^2) + V)), a full
/// Crank-Nicolson step of the divergence-form generator (palindromic sweep
/// over axes beyond one dimension), and the mirrored phase half-step. The
/// linear substep is a Cayley transform per axis, so the discrete measure
/// norm is conserved to rounding.
GridEvolveResult evolve_grid(const GridWave& f, const SolverConfig& cfg,
                             const QuadPoly* V = nullptr);

// ---------------------------------------------------------------------------
// Gaussian ansatz

/// phi(x) = exp(-1/2 x^T A x + b.x + c) with A complex symmetric. Closed
/// under both flows when the potential data is quadratic.
struct GaussianWave {
  Region sites = Region::empty(1);
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  Complex c{0, 0};
  WaveForm form = WaveForm::Gibbs;

  static GaussianWave vacuum(const Region& sites, WaveForm form);
  /// |phi|^2 as a quadratic exponential over the wave's sites.
  QuadExp abs_squared() const;
};

/// Symmetric coefficient matrix of the bilinear family over a region
/// (diagonal entries plus half the pair coefficient off the diagonal).
Eigen::MatrixXd coefficient_matrix(const InteractionFamily& fam, const Region& region);

struct GaussEvolveResult {
  GaussianWave wave;
  ObservableSeries series;
};

/// RK4 on the closed parameter system of the measure-form equation
///   dA/dt = -2i (A^2 + CA + AC + lambda Re A)
///   db/dt = -2i (Ab + Cb + lambda Re b)
///   dc/dt = -i (tr A - b.b + 2 lambda Re c - lambda log m|phi|^2),
/// obtained by matching quadratic, linear and constant coefficients after
/// substituting the ansatz. A is re-symmetrized each step; losing
/// integrability of |phi|^2 e^{-U} raises "ansatz left admissible set".
GaussEvolveResult evolve_gaussian_gibbs(const GaussianWave& f, const Eigen::MatrixXd& C,
                                        const SolverConfig& cfg);

/// Direct-form counterpart with quadratic potential V = v0 + v1.x + x^T V2 x:
///   dA/dt = -2i (A^2 - V2 + lambda Re A)
///   db/dt = -i (2Ab + v1 + 2 lambda Re b)
///   dc/dt = -i (tr A - b.b + v0 + 2 lambda Re c - lambda [log mass]).
GaussEvolveResult evolve_gaussian_flat(const GaussianWave& f, const Eigen::MatrixXd& V2,
                                       const Eigen::VectorXd& v1, double v0,
                                       const SolverConfig& cfg);

ObservableRow observe_gibbs(const GaussianWave& w, const Eigen::MatrixXd& C, double t,
                            double lambda);
ObservableRow observe_flat(const GaussianWave& w, const Eigen::MatrixXd& V2,
                           const Eigen::VectorXd& v1, double v0, double t, double lambda);

// ---------------------------------------------------------------------------
// Checkers and experiments over trajectories

struct ConservationReport {
  double mass_drift = 0;    // relative
  double energy_drift = 0;  // relative
  bool mass_pass = false, energy_pass = false;
  bool pass() const { return mass_pass && energy_pass; }
};
ConservationReport check_conservation(const ObservableSeries& s, double tol_mass = 1e-8,
                                      double tol_energy = 1e-4);

struct BoundsReport {
  std::vector<CheckRow> rows;
  bool pass = true;
};
/// Gradient bound kinetic(t) <= e^{2|lambda| t} kinetic(0), the matching
/// entropy bound, and for lambda > 0 with an LSI coefficient the
/// time-uniform versions.
BoundsReport check_bounds(const ObservableSeries& s, double lambda,
                          std::optional<double> c_lsi = std::nullopt, double slack = 1e-8);

struct PropagationRow {
  Site site;
  int n_j = 0;
  double window = 0;
  double max_grad = 0;
  double bound = 0;
  bool pass = false;
};
struct PropagationTable {
  double epsilon = 0;  // inverse propagation speed
  double grad0 = 0;    // m |grad f|^2
  std::vector<PropagationRow> rows;
  double fitted_rate = 0;
  bool pass = true;
};
/// Cone estimate: for every site j with 1 <= N_j <= n_max,
/// max_{t <= eps N_j} m|grad_j phi|^2 <= e^{-N_j} m|grad f|^2 with
/// eps^{-1} = 9 (2|lambda| + A) (2R+1)^{2d} and N_j = floor(dist(j, F)/R).
PropagationTable propagation_experiment(const InteractionFamily& fam, const Region& chain,
                                        const Region& source, double delta, int n_max,
                                        const SolverConfig& cfg);

struct VolumeRow {
  int n = 0;
  int volume = 0;
  double norm = 0;  // ambient m|phi_n(T)|^2
};
struct VolumeTable {
  double initial_norm = 0;
  std::vector<VolumeRow> rows;
  std::vector<double> diffs;
  bool decreasing = true;
  double final_diff = 0;
};
/// Interior-form solves on nested boxes [-8nL, 8nL]; reports the ambient
/// norm sequence whose successive differences shrink toward zero.
VolumeTable volume_convergence(const InteractionFamily& fam, double lambda, int n_max, int L,
                               double delta, int ambient_halfwidth, const SolverConfig& cfg);

/// Pointwise factor exp(-/+ U/2) between measure-form and direct-form waves
/// living on geometrically identical grids.
GridWave to_flat_form(const GridWave& gibbs_wave, std::shared_ptr<const GridMeasure> flat_measure,
                      const CompiledEnergy& energy);
GridWave to_gibbs_form(const GridWave& flat_wave,
                       std::shared_ptr<const GridMeasure> gibbs_measure,
                       const CompiledEnergy& energy);

struct WaveAgreement {
  double max_modulus_diff = 0;  // relative to peak modulus
  double max_phase_diff = 0;    // after removing the best-fit global phase
  double aligned_phase = 0;
};
/// Compare two waves on the same grid, gauging away one global phase;
/// nodes below `mass_cut` of the peak modulus are ignored for phases.
WaveAgreement compare_waves(const std::vector<Complex>& a, const std::vector<Complex>& b,
                            double mass_cut = 1e-4);

}  // namespace lselab
