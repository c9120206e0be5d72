// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.
// Usage: scolab_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scolab/cli.hpp"
#include "scolab/experiment_runner.hpp"
#include "scolab/oracle.hpp"
#include "scolab/report.hpp"
#include "scolab/stability_lab.hpp"

using namespace scolab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

Vec random_in_ball(Rng& rng, Eigen::Index p, double radius) {
  Vec x(p);
  for (Eigen::Index i = 0; i < p; ++i) x(i) = rng.uniform(-1.0, 1.0);
  const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(p));
  return x * (r / x.norm());
}

// 1. Analytic versus central-difference gradient of F_S on the default benchmark.
Outcome gradient_oracle() {
  const Dataset s = sample_dataset(convex_benchmark(), 40, 40, Rng(1).split("dataset"));
  Rng rng = Rng(1).split("points");
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    worst = std::max(worst, fd_gradient_check(s, random_in_ball(rng, 5, 10.0), 1e-5));
  }
  return {worst < 1e-6, "max relative error " + fmt(worst)};
}

// 2. Algebraic identities of the two tracker updates and of coupling.
Outcome algorithm_algebra() {
  std::string detail;
  bool ok = true;

  // (a) single identity inner sample, y0 = x0: SCSC keeps y_{t+1} = x_t.
  PopulationLaw id = identity_law(4, Vec::LinSpaced(4, -1.0, 2.0), 0.5);
  const Dataset s_id = sample_dataset(id, 10, 1, Rng(2).split("dataset"));
  OptimizerConfig a;
  a.variant = Variant::scsc;
  a.T = 10'000;
  a.eta = 0.05;
  a.beta = 0.3;
  a.x0 = Vec::Constant(4, 0.7);
  a.y0 = a.x0;
  a.record_tracking = true;
  const Trajectory ta = run(s_id, a, Rng(2).split("indices"));
  const double max_err =
      std::sqrt(*std::max_element(ta.tracking_sq_errors.begin(), ta.tracking_sq_errors.end()));
  ok = ok && ta.tracking_sq_errors.size() == 10'000 && max_err <= 1e-12;
  detail += "(a) max ||y_{t+1}-x_t|| = " + fmt(max_err);

  // (b) beta = 1: SCGD and SCSC iterates are bit-identical.
  const Dataset s = sample_dataset(convex_benchmark(), 30, 30, Rng(3).split("dataset"));
  OptimizerConfig b;
  b.T = 5000;
  b.eta = 0.02;
  b.beta = 1.0;
  b.record_full = true;
  b.variant = Variant::scgd;
  const Trajectory t1 = run(s, b, Rng(3).split("indices"));
  b.variant = Variant::scsc;
  const Trajectory t2 = run(s, b, Rng(3).split("indices"));
  bool same = t1.iterates.size() == t2.iterates.size() && t1.iterates.size() == 5000;
  for (std::size_t k = 0; same && k < t1.iterates.size(); ++k) {
    same = std::memcmp(t1.iterates[k].data(), t2.iterates[k].data(),
                       sizeof(double) * static_cast<std::size_t>(t1.iterates[k].size())) == 0;
  }
  ok = ok && same;
  detail += std::string("; (b) bit-identical ") + (same ? "yes" : "no");

  // (c) coupled run on identical datasets.
  OptimizerConfig c;
  c.T = 3000;
  c.output_mode = OutputMode::uniform_average;
  double dist = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    dist = std::max(dist, coupled_run(s, s, c, Rng(seed)).distance);
  }
  ok = ok && dist == 0.0;
  detail += "; (c) distance " + fmt(dist);
  return {ok, detail};
}

// 3. The ERM certificate dominates random feasible points; closed form and
// projected gradient agree for interior solutions.
Outcome oracle_dominance() {
  Rng rng(4);
  double worst_violation = -1e300;
  double worst_agreement = 0.0;
  int interior = 0;
  for (int inst = 0; inst < 10; ++inst) {
    Rng ir = rng.split("instance", static_cast<std::uint64_t>(inst));
    // Alternate rank-deficient (d < p) and full-rank instances; half use a small ball.
    const Eigen::Index p = 5, d = inst % 2 == 0 ? 4 : 6;
    PopulationLaw law;
    law.a0 = Mat(d, p);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < p; ++j) law.a0(i, j) = ir.uniform(-1.0, 1.0);
    law.b0 = Vec(d);
    law.c0 = Vec(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      law.b0(i) = ir.uniform(-1.0, 1.0);
      law.c0(i) = ir.uniform(-3.0, 3.0);
    }
    law.tau_a = 0.2;
    law.tau_b = 0.2;
    law.tau_c = 1.0;
    const double radius = inst < 5 ? 10.0 : 0.5;
    const Dataset s = sample_dataset(law, 20, 20, ir.split("dataset"));
    const MinimizerCertificate cert = erm_minimizer(s, radius);
    Rng pr = ir.split("points");
    for (int k = 0; k < 1000; ++k) {
      const double v = cert.value - empirical_risk(s, random_in_ball(pr, p, radius));
      worst_violation = std::max(worst_violation, v);
    }
    if (cert.x_star.norm() < radius * (1.0 - 1e-9)) {
      ++interior;
      const MinimizerCertificate pg =
          projected_gradient_minimizer(s, radius, Vec::Zero(p), 1e-13, 20'000'000);
      worst_agreement = std::max(worst_agreement, (pg.x_star - cert.x_star).norm());
    }
  }
  const bool ok = worst_violation <= 1e-10 && worst_agreement <= 1e-8 && interior > 0;
  return {ok, "max(F* - F_S(x)) = " + fmt(worst_violation) + ", interior agreement " +
                  fmt(worst_agreement) + " over " + std::to_string(interior) + " interior instances"};
}

// 4. Tracking error against the tracking bound, both variants.
Outcome tracking_bound_check() {
  bool ok = true;
  std::string detail;
  for (Variant v : {Variant::scgd, Variant::scsc}) {
    StudyConfig sc;
    sc.study = StudyKind::tracking;
    sc.variant = v;
    sc.law = convex_benchmark();
    sc.n = 40;
    sc.m = 40;
    sc.steps = {{5000, 1e-3, 0.1}};
    sc.replicates = 50;
    sc.c = 2.0;
    sc.burn_in = 10;
    sc.seed = 5;
    sc.threads = workers();
    const StudyResult r = tracking_study(sc);
    const double frac = static_cast<double>(r.rows_within_bound) / static_cast<double>(r.rows.size());
    ok = ok && frac >= 0.95;
    detail += (detail.empty() ? "" : "; ") + to_string(v) + " within bound at " +
              std::to_string(r.rows_within_bound) + "/" + std::to_string(r.rows.size()) + " steps";
  }
  return {ok, detail};
}

// 5. Optimization error decreases in T on the strongly convex benchmark.
Outcome optimization_direction() {
  const PopulationLaw law = strongly_convex_benchmark();
  const Dataset probe = sample_dataset(law, 40, 40, Rng(6).split("dataset"));
  const double sigma = empirical_sigma(probe);
  // Smallest constant eta with (eta (T - 1))^-1 <= sigma / 2 at the shortest horizon.
  const double eta = 2.0 / (sigma * 255.0);
  bool ok = sigma >= 0.5;
  std::string detail = "sigma " + fmt(sigma) + ", eta " + fmt(eta);
  for (Variant v : {Variant::scgd, Variant::scsc}) {
    StudyConfig sc;
    sc.study = StudyKind::optimization;
    sc.variant = v;
    sc.convexity = Convexity::strongly_convex;
    sc.law = law;
    sc.n = 40;
    sc.m = 40;
    sc.steps = {{256, eta, 0.1}, {1024, eta, 0.1}, {4096, eta, 0.1}};
    sc.replicates = 100;
    sc.seed = 6;
    sc.threads = workers();
    sc.output_mode = OutputMode::sigma_weighted;
    const StudyResult r = optimization_study(sc);
    bool monotone = true;
    for (std::size_t k = 1; k < r.rows.size(); ++k) {
      const double slack = 2.0 * std::hypot(r.rows[k].se, r.rows[k - 1].se);
      monotone = monotone && r.rows[k].mean <= r.rows[k - 1].mean + slack;
    }
    const double ratio = r.rows.back().mean / r.rows.front().mean;
    ok = ok && monotone && ratio < 0.25;
    detail += "; " + to_string(v) + " gaps " + fmt(r.rows[0].mean) + " > " + fmt(r.rows[1].mean) +
              " > " + fmt(r.rows[2].mean) + " (ratio " + fmt(ratio) + ")";
  }
  return {ok, detail};
}

StabilityEstimate stability(const PopulationLaw& law, std::size_t n, std::size_t m,
                            const OptimizerConfig& cfg, std::uint64_t seed) {
  StabilityOptions opts;
  opts.replicates = 400;
  opts.threads = workers();
  return estimate_stability(law, n, m, cfg, opts, Rng(seed));
}

// 6. eps_nu scales like 1/n on the convex benchmark with noiseless inner samples.
Outcome convex_stability_scaling() {
  PopulationLaw law = convex_benchmark();
  law.tau_a = 0.0;
  law.tau_b = 0.0;
  OptimizerConfig cfg;
  cfg.T = 2048;
  cfg.eta = 1e-3;
  cfg.beta = 0.1;
  std::vector<double> ns{25, 50, 100}, eps;
  double omega = 0.0;
  for (double n : ns) {
    const StabilityEstimate e = stability(law, static_cast<std::size_t>(n), 50, cfg, 7);
    eps.push_back(e.eps_nu_hat);
    omega = std::max(omega, e.eps_omega_hat);
  }
  const double slope = loglog_slope(ns, eps);
  return {slope >= -1.35 && slope <= -0.65 && omega == 0.0,
          "eps_nu " + fmt(eps[0]) + ", " + fmt(eps[1]) + ", " + fmt(eps[2]) + "; slope " + fmt(slope) +
              "; max eps_omega " + fmt(omega)};
}

// 7. eps_nu saturates in T on the strongly convex benchmark and grows on the convex one.
Outcome stability_saturation() {
  auto ratio_for = [](const PopulationLaw& law, double sigma_hint, std::string& detail) {
    const Dataset probe = sample_dataset(law, 50, 50, Rng(8).split("dataset"));
    const BoundParams k = compute_constants(probe, 10.0, 200);
    const double sigma = sigma_hint < 0 ? k.sigma : sigma_hint;
    OptimizerConfig cfg;
    cfg.variant = Variant::scsc;
    cfg.eta = 1.0 / (2.0 * k.l + 2.0 * sigma);
    cfg.beta = 0.5;
    cfg.T = 1024;
    const StabilityEstimate lo = stability(law, 50, 50, cfg, 8);
    cfg.T = 4096;
    const StabilityEstimate hi = stability(law, 50, 50, cfg, 8);
    const double ratio = hi.eps_nu_hat / lo.eps_nu_hat;
    detail += "eta " + fmt(cfg.eta) + ": " + fmt(lo.eps_nu_hat) + " -> " + fmt(hi.eps_nu_hat) +
              " (ratio " + fmt(ratio) + ")";
    return ratio;
  };
  std::string detail = "strongly convex ";
  const double strong = ratio_for(strongly_convex_benchmark(), -1.0, detail);
  detail += "; convex ";
  const double convex = ratio_for(convex_benchmark(), 0.0, detail);
  return {strong <= 1.5 && convex >= 1.5, detail};
}

// 8. Excess risk decays with n under the strongly convex SCSC preset.
Outcome excess_risk_slope() {
  StudyConfig sc;
  sc.study = StudyKind::excess_risk;
  sc.variant = Variant::scsc;
  sc.convexity = Convexity::strongly_convex;
  sc.law = strongly_convex_benchmark();
  sc.sizes = {20, 40, 80};
  sc.replicates = 200;
  sc.seed = 9;
  sc.threads = workers();
  const StudyResult r = excess_risk_study(sc);
  std::string detail;
  for (const auto& row : r.rows) {
    detail += "n=" + std::to_string(row.n) + " T=" + std::to_string(row.t) + " excess " +
              fmt(row.mean) + " (se " + fmt(row.se, 2) + "); ";
  }
  detail += "slope " + fmt(r.fitted_slope);
  return {r.fitted_slope >= -0.85 && r.fitted_slope <= -0.20, detail};
}

// 9. Generalization gap against the stability right-hand side.
Outcome generalization_check() {
  OptimizerConfig cfg;
  cfg.T = 2000;
  cfg.eta = 1e-2;
  cfg.beta = 0.1;
  StabilityOptions opts;
  opts.replicates = 400;
  opts.threads = workers();
  const GeneralizationReport r = check_generalization(convex_benchmark(), 40, 40, cfg, opts, Rng(10));
  return {r.holds, "gap " + fmt(r.gap_mean) + " (se " + fmt(r.gap_se, 2) + ") vs rhs " + fmt(r.rhs) +
                       " + 3 x " + fmt(r.combined_se, 2)};
}

// 10. Byte-identical CSV across reruns and thread counts.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "scolab_acceptance_repro";
  fs::remove_all(root);
  struct Study {
    std::vector<std::string> args;
    std::string file;
  };
  const std::vector<Study> studies{
      {{"tracking", "--T", "3000", "--eta", "1e-3", "--replicates", "12", "--seed", "11"}, "tracking.csv"},
      {{"stability", "--n-list", "20,40", "--T", "1000", "--replicates", "40", "--seed", "11"},
       "stability.csv"},
      {{"optimization", "--T-list", "256,1024", "--replicates", "16", "--seed", "11"},
       "optimization.csv"},
      {{"excess-risk", "--variant", "scsc", "--convexity", "strongly_convex", "--benchmark",
        "strongly_convex", "--sizes", "10,20", "--replicates", "24", "--seed", "11"},
       "excess.csv"},
  };
  bool ok = true;
  std::string detail;
  std::size_t k = 0;
  for (const auto& st : studies) {
    std::vector<std::string> bytes;
    for (const char* threads : {"1", "1", "8"}) {
      const fs::path dir = root / std::to_string(k++);
      std::vector<std::string> args = st.args;
      args.insert(args.end(), {"--threads", threads, "--out", dir.string()});
      std::ostringstream out, err;
      if (run_cli(args, out, err) != 0) {
        ok = false;
        detail += st.args[0] + " failed: " + err.str();
      }
      bytes.push_back(slurp(dir / st.file));
    }
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1] && bytes[0] == bytes[2];
    ok = ok && same;
    detail += st.file + (same ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(root);
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", 1.0, gradient_oracle},
      {2, "algorithm algebra", 5.0, algorithm_algebra},
      {3, "oracle dominance", 10.0, oracle_dominance},
      {4, "tracking bound", 120.0, tracking_bound_check},
      {5, "optimization error direction", 180.0, optimization_direction},
      {6, "convex stability scaling", 600.0, convex_stability_scaling},
      {7, "strongly convex stability saturation", 900.0, stability_saturation},
      {8, "excess-risk slope", 900.0, excess_risk_slope},
      {9, "generalization inequality", 600.0, generalization_check},
      {10, "reproducibility", 600.0, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_seconds;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): "
              << o.detail << " [" << fmt(secs, 3) << " s, limit " << c.limit_seconds << " s]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
