#pragma once

#include <Eigen/Dense>

#include "lselab/dynamics.hpp"

namespace lselab {

/// Gaussian-profile stationary state psi_b = b exp(-1/2 sum c_j x_j^2) of the
/// direct-form equation with eigenvalue E_b. Free case: c_j = -lambda
/// (lambda < 0), E_b = -lambda (n - log b^2). Harmonic case V = sum a_j x_j^2:
/// c_j = (sqrt(4 a_j + lambda^2) - lambda) / 2, E_b = sum c_j + lambda log b^2.
struct Gausson {
  int n = 1;
  Eigen::VectorXd c;
  double amplitude = 1;
  double lambda = -1;
  double energy = 0;
  Eigen::VectorXd a;  // empty for the free case

  bool harmonic() const { return a.size() > 0; }
  Complex eval(const Eigen::VectorXd& x) const;
};

/// Throws "not normalizable" for lambda >= 0.
Gausson free_gausson(double lambda, int n, double b);
Gausson harmonic_gausson(const Eigen::VectorXd& a, double lambda, double b);

/// Amplitude that makes the squared integral one: prod (c_j / pi)^{1/4}.
double l2_normalizer(const Gausson& g);

struct ResidualConfig {
  int nodes = 256;
  double halfwidth = 10;
};

/// Relative weighted L2 norm of -Delta psi + V psi + lambda psi log|psi|^2
/// - E psi on a tensor grid (order-8 Laplacian stencil), for any trial
/// (psi, E); the Gausson pair drives it to discretization level.
double eigen_residual(const Gausson& g, double energy_trial, const ResidualConfig& rc = {});
inline double eigen_residual(const Gausson& g, const ResidualConfig& rc = {}) {
  return eigen_residual(g, g.energy, rc);
}

struct StationarityConfig {
  int nodes = 12288;       // 1-d only; the modulus-drift target needs fine h
  double halfwidth = 8;
  double dt = 1e-3;
  double T = 1.0;
  int sample_stride = 10;
  double mass_cut = 1e-8;  // relative squared-modulus threshold for phase checks
};

struct StationarityReport {
  double max_modulus_drift = 0;  // relative to peak
  double max_phase_error = 0;    // vs -E t, mod 2 pi, on significant nodes
  double fitted_rate = 0;        // d(arg)/dt at the peak node
  double expected_rate = 0;      // -E
  bool pass = false;
};

/// Evolve the direct-form solver without mass normalization in the log and
/// compare against psi(t) = e^{-iEt} psi(0).
StationarityReport stationarity_check(const Gausson& g, const StationarityConfig& sc = {});

}  // namespace lselab
