#pragma once

#include "lselab/gaussian.hpp"
#include "lselab/lattice.hpp"
#include "lselab/quadrature.hpp"

namespace lselab {

/// Composition of cube-tensorised conditional expectations over the 2^d
/// staggered cube collections, clipped to a finite ambient box. Acts in
/// closed form on quadratic-polynomial and quadratic-exponential cylinder
/// functions of the Gaussian (bilinear) specification; the ambient Gibbs
/// measure plays the role of the infinite-volume one.
class PiOperator {
 public:
  PiOperator(InteractionFamily fam, int L, int ambient_halfwidth, int active_cap = 6);

  const CubePartition& partition() const { return partition_; }
  const Region& ambient() const { return ambient_; }
  const GaussianData& measure() const { return mu_; }
  const InteractionFamily& family() const { return family_; }
  int active_cap() const { return cap_; }

  /// Cubes of collection s clipped to the ambient box.
  const std::vector<Region>& cubes(int s) const { return cubes_[static_cast<size_t>(s)]; }

  /// Tensorised conditional expectation of one collection. Only cubes meeting
  /// the argument's support act; growth beyond the active-coordinate cap
  /// raises "active set too large".
  QuadPoly apply_Es(int s, QuadPoly f) const;
  QuadExp apply_Es(int s, QuadExp f) const;

  QuadPoly apply_Pi(QuadPoly f) const;
  QuadExp apply_Pi(QuadExp f) const;

  double mu_expect(const QuadPoly& f) const { return gaussian_expect(mu_, f); }
  double mu_expect(const QuadExp& f) const { return gaussian_expect(mu_, f); }
  /// mu |grad f|^2 with exact coordinate gradients.
  double mu_dirichlet(const QuadPoly& f) const;

 private:
  template <typename F>
  F apply_collection(int s, F f) const;
  InteractionFamily family_;
  CubePartition partition_;
  Region ambient_;
  GaussianData mu_;
  int cap_;
  std::vector<std::vector<Region>> cubes_;
};

struct PiIterateResult {
  double mu_f = 0;
  std::vector<double> sup_error;       // per iteration, max over probes
  std::vector<double> sup_difference;  // between consecutive iterates
  double fitted_ratio = 0;             // e_{n+1} / e_n from a log-linear fit
  bool geometric = false;
};
/// Probe Pi^n f on fixed configurations against the ambient average.
PiIterateResult iterate_pi(const PiOperator& pi, const QuadPoly& f, int n_max);

/// |mu(Pi f) - mu(f)|.
double check_dlr_pi(const PiOperator& pi, const QuadPoly& f);

struct PiEntropyResult {
  double lhs = 0;
  double gradient = 0;  // mu |grad f|^2
  double c_bar = 0;
  bool finite = false;
};
/// mu(Pi(f^2 log f^2) - Pi f^2 log Pi f^2) <= c_bar mu |grad f|^2 for affine
/// real f. The leading term uses the tower property of the ambient
/// conditionals (the exact DLR identity checked separately).
PiEntropyResult pi_entropy_bound(const PiOperator& pi, const QuadPoly& f_affine,
                                 int quad_nodes = 24);

struct GammaEstimate {
  std::vector<double> ratios;
  double gamma = 0;  // max over the test set
};
/// gamma-hat = max_f mu |grad (Pi f^2)^{1/2}|^2 / mu |grad f|^2 over affine
/// test functions.
GammaEstimate estimate_gamma(const PiOperator& pi, const std::vector<QuadPoly>& tests_affine,
                             int quad_nodes = 24);

struct SweepRow {
  Site source;  // bump coordinate i inside the cube
  Site target;  // differentiated coordinate j outside
  int separation = 0;
  double alpha = 0;
};
struct SweepTable {
  std::vector<SweepRow> rows;
  double fitted_rate = 0;      // alpha ~ envelope * e^{-rate |j-i|}
  double envelope_D = 0;       // smallest D with alpha <= D |X0| e^{-rate |j-i|}
  int cube_size = 0;
  bool decaying = false;
};
/// mu |grad_j (E_X |f|^2)^{1/2}|^2 / mu |grad_i f|^2 for single-site bumps
/// f at i in X and j in the halo of X.
SweepTable sweeping_coefficients(const InteractionFamily& fam, const Region& cube,
                                 const Region& ambient, double kappa, double center);

}  // namespace lselab
