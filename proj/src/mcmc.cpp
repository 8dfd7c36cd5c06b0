#include <cmath>
#include <stdexcept>

#include "lselab/gibbs.hpp"

namespace lselab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

McmcMeasure::McmcMeasure(const InteractionFamily& fam, Region region, EnergyMode mode,
                         BoundaryCondition bc, McmcConfig cfg)
    : region_(std::move(region)), cfg_(cfg) {
  if (cfg_.samples < 1 || cfg_.chains < 1 || cfg_.step <= 0)
    throw std::invalid_argument("bad sampler configuration");
  CompiledEnergy energy(fam, region_, mode, bc);
  const int n = region_.size();
  const double target = 0.57;

  draws_.reserve(static_cast<size_t>(cfg_.chains) * static_cast<size_t>(cfg_.samples));
  long accepted = 0, total = 0;
  double tuned_sum = 0;

  for (int chain = 0; chain < cfg_.chains; ++chain) {
    std::mt19937_64 rng(splitmix(cfg_.seed ^ splitmix(static_cast<std::uint64_t>(chain) + 1)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    double ux = energy.value(x);
    Eigen::VectorXd gx = energy.gradient(x);
    double tau = cfg_.step;

    auto log_q = [&](const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                     const Eigen::VectorXd& gfrom, double t) {
      Eigen::VectorXd mean = from - 0.5 * t * t * gfrom;
      return -(to - mean).squaredNorm() / (2.0 * t * t);
    };

    for (int it = 0; it < cfg_.burn_in + cfg_.samples; ++it) {
      Eigen::VectorXd noise(n);
      for (int i = 0; i < n; ++i) noise(i) = gauss(rng);
      Eigen::VectorXd y = x - 0.5 * tau * tau * gx + tau * noise;
      double uy = energy.value(y);
      Eigen::VectorXd gy = energy.gradient(y);
      double log_alpha = -uy + ux + log_q(x, y, gy, tau) - log_q(y, x, gx, tau);
      bool accept = std::log(unif(rng)) < log_alpha;
      if (accept) {
        x = y;
        ux = uy;
        gx = gy;
      }
      if (it < cfg_.burn_in) {
        // Robbins-Monro step tuning, frozen after burn-in.
        double delta = (accept ? 1.0 : 0.0) - target;
        tau = std::exp(std::log(tau) + delta / std::sqrt(static_cast<double>(it + 1)));
      } else {
        draws_.push_back(x);
        accepted += accept ? 1 : 0;
        ++total;
      }
    }
    tuned_sum += tau;
  }
  diag_.acceptance = total > 0 ? static_cast<double>(accepted) / static_cast<double>(total) : 0;
  diag_.tuned_step = tuned_sum / cfg_.chains;
}

McmcEstimate McmcMeasure::expect(const std::function<double(const Eigen::VectorXd&)>& f) const {
  const size_t n = draws_.size();
  std::vector<double> vals(n);
  double mean = 0;
  for (size_t i = 0; i < n; ++i) {
    vals[i] = f(draws_[i]);
    mean += vals[i];
  }
  mean /= static_cast<double>(n);

  // Batch means over contiguous stretches within each chain.
  const int per_chain = cfg_.samples;
  const int nb_per_chain = std::max(1, std::min(20, per_chain / 10));
  const int blen = per_chain / nb_per_chain;
  std::vector<double> bm;
  for (int c = 0; c < cfg_.chains; ++c)
    for (int b = 0; b < nb_per_chain; ++b) {
      double s = 0;
      for (int k = 0; k < blen; ++k)
        s += vals[static_cast<size_t>(c) * static_cast<size_t>(per_chain) +
                  static_cast<size_t>(b * blen + k)];
      bm.push_back(s / blen);
    }
  double bmean = 0;
  for (double v : bm) bmean += v;
  bmean /= static_cast<double>(bm.size());
  double bvar = 0;
  for (double v : bm) bvar += (v - bmean) * (v - bmean);
  bvar /= std::max<size_t>(1, bm.size() - 1);

  McmcEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(bvar / static_cast<double>(bm.size()));
  double var_draws = 0;
  for (double v : vals) var_draws += (v - mean) * (v - mean);
  var_draws /= std::max<size_t>(1, n - 1);
  est.ess = est.std_error > 0 ? var_draws / (est.std_error * est.std_error) : static_cast<double>(n);
  return est;
}

}  // namespace lselab
