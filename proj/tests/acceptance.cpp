// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its tolerances here and reads measured values off the
// named check rows of the default-parameter experiments.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lselab/experiments.hpp"

using namespace lselab;

namespace {

struct Suite {
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, double> seconds;
  ExperimentContext ctx;

  const Verdict& get(const std::string& name) {
    auto it = verdicts.find(name);
    if (it != verdicts.end()) return it->second;
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = run_experiment(name, ctx);
    auto t1 = std::chrono::steady_clock::now();
    seconds[name] = std::chrono::duration<double>(t1 - t0).count();
    return verdicts.emplace(name, std::move(v)).first->second;
  }
};

int g_failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, label.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

bool row_ok(const Verdict& v, const std::string& label) {
  const CheckRow* r = v.find(label);
  return r != nullptr && r->pass;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int main() {
  Suite suite;
  suite.ctx.out_dir = "acceptance_out";
  suite.ctx.seed = 1;
  std::filesystem::create_directories(suite.ctx.out_dir);

  {  // 1. mass conservation
    const Verdict& v = suite.get("conservation");
    bool pass = row_ok(v, "mass drift lambda +0.5") && row_ok(v, "mass drift lambda -0.5");
    double m = std::max(v.find("mass drift lambda +0.5")->measured,
                        v.find("mass drift lambda -0.5")->measured);
    report(1, "mass conservation, drift < 1e-8", pass,
           "drift=" + fmt(m) + ", " + fmt(suite.seconds["conservation"]) + "s total");
  }
  {  // 2. energy conservation and second-order evidence
    const Verdict& v = suite.get("conservation");
    const CheckRow* ratio = v.find("energy drift ratio dt/dt2");
    bool pass = row_ok(v, "energy drift lambda +0.5") && row_ok(v, "energy drift lambda -0.5") &&
                ratio && ratio->pass;
    report(2, "energy conservation, drift < 1e-4 and halving ratio in [3.4, 4.6]", pass,
           std::string("ratio=") + (ratio ? fmt(ratio->measured) : "n/a"));
  }
  {  // 3. gradient and entropy bounds
    const Verdict& v = suite.get("bounds");
    bool pass = v.pass();
    report(3, "gradient/entropy bounds with uniform variants", pass,
           fmt(suite.seconds["bounds"]) + "s");
  }
  {  // 4. ansatz validation gate
    const Verdict& v = suite.get("propagation");
    bool pass = true;
    double worst = 0;
    for (const auto& c : v.checks)
      if (c.label.rfind("gate ", 0) == 0) {
        pass = pass && c.pass;
        worst = std::max(worst, c.measured);
      }
    report(4, "ansatz matches grid solver within 1e-3", pass, "worst rel diff=" + fmt(worst));
  }
  {  // 5. finite-speed propagation
    const Verdict& v = suite.get("propagation");
    bool pass = row_ok(v, "cone bound all sites") && row_ok(v, "propagation speed arithmetic");
    report(5, "cone bound e^{-N_j} on the 48-site chain", pass,
           fmt(suite.seconds["propagation"]) + "s");
  }
  {  // 6. sweeping-out properties
    const Verdict& v = suite.get("pi-convergence");
    const Verdict& g = suite.get("gamma-sweep");
    bool pass = row_ok(v, "dlr residual x0") && row_ok(v, "dlr residual x0^2") &&
                row_ok(v, "geometric ratio") && g.pass();
    std::string detail = "ratio=" + fmt(v.find("geometric ratio")->measured);
    for (const auto& c : g.checks)
      if (c.label.rfind("gamma(L=", 0) == 0) detail += " " + c.label + "=" + fmt(c.measured);
    report(6, "DLR, geometric convergence, gamma(L) < 1 decreasing", pass, detail);
  }
  {  // 7. spectral gap from log-Sobolev
    const Verdict& v = suite.get("sgi-rothaus");
    bool pass = row_ok(v, "spectral gap vs half LSI") && row_ok(v, "gaussian gap equality");
    report(7, "measured gap coefficient <= half the LSI coefficient", pass,
           "gap=" + fmt(v.find("spectral gap vs half LSI")->measured));
  }
  {  // 8. exponential moment bound
    const Verdict& v = suite.get("herbst");
    bool pass = row_ok(v, "herbst gaussian");
    const CheckRow* r = v.find("herbst gaussian");
    report(8, "log m(e^{eps g}) <= 2 eps m(g) on the doubled site", pass,
           "lhs=" + fmt(r->measured) + " rhs+slack=" + fmt(r->bound));
  }
  {  // 9. covariance decay
    const Verdict& v = suite.get("mixing");
    bool pass = row_ok(v, "covariance matches inverse") && row_ok(v, "monotone decay");
    report(9, "chain covariance matches (2C)^{-1} and decays", pass,
           "max dev=" + fmt(v.find("covariance matches inverse")->measured));
  }
  {  // 10. stationary profiles
    const Verdict& v = suite.get("soliton");
    bool pass = row_ok(v, "free residual") && row_ok(v, "free phase rate") &&
                row_ok(v, "amplitude scaling shift") && row_ok(v, "harmonic identity");
    report(10, "stationary profiles: residual, phase rate, scaling, identity", pass,
           "residual=" + fmt(v.find("free residual")->measured) + ", " +
               fmt(suite.seconds["soliton"]) + "s");
  }
  {  // 11. norm convergence over nested boxes
    const Verdict& v = suite.get("volume-convergence");
    bool pass = row_ok(v, "differences decreasing") && row_ok(v, "final difference");
    report(11, "norm differences decrease with final < 1e-4", pass,
           "final=" + fmt(v.find("final difference")->measured) + ", " +
               fmt(suite.seconds["volume-convergence"]) + "s");
  }
  {  // 12. representation equivalence
    const Verdict& v = suite.get("representation-equivalence");
    bool pass = row_ok(v, "modulus agreement") && row_ok(v, "gauged phase agreement");
    report(12, "dual solves agree up to a global phase", pass,
           "modulus=" + fmt(v.find("modulus agreement")->measured) +
               " phase=" + fmt(v.find("gauged phase agreement")->measured));
  }
  {  // 13. truncation robustness
    const Verdict& a = suite.get("pi-convergence");
    const Verdict& b = suite.get("mixing");
    const Verdict& c = suite.get("volume-convergence");
    bool pass = row_ok(a, "truncation mu(x0^2) shift") && row_ok(a, "truncation dlr shift") &&
                row_ok(b, "truncation covariance shift") && row_ok(c, "truncation norm shift");
    report(13, "doubling the ambient box shifts observables < 1e-8", pass,
           "norm shift=" + fmt(c.find("truncation norm shift")->measured));
  }

  // Runtime budgets for the heavier criteria.
  struct Budget {
    const char* name;
    double limit;
  };
  for (const Budget& b : {Budget{"conservation", 25.0}, Budget{"bounds", 60.0},
                          Budget{"propagation", 120.0}, Budget{"pi-convergence", 300.0},
                          Budget{"gamma-sweep", 300.0}, Budget{"sgi-rothaus", 5.0},
                          Budget{"herbst", 5.0}, Budget{"mixing", 5.0}, Budget{"soliton", 60.0},
                          Budget{"volume-convergence", 300.0},
                          Budget{"representation-equivalence", 30.0}}) {
    double t = suite.seconds[b.name];
    if (t > b.limit) {
      std::printf("FAIL runtime: %s took %.1fs (budget %.0fs)\n", b.name, t, b.limit);
      ++g_failures;
    }
  }

  if (g_failures == 0) {
    std::printf("acceptance: all 13 criteria pass\n");
    return 0;
  }
  std::printf("acceptance: %d failure(s)\n", g_failures);
  return 1;
}
