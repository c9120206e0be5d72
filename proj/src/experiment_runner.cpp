#include "scolab/experiment_runner.hpp"

#include <algorithm>
#include <cmath>

#include "scolab/parallel.hpp"

namespace scolab {

namespace {

constexpr std::size_t kConstantsGrid = 2000;

OptimizerConfig base_config(const StudyConfig& cfg, const GridPoint& g) {
  OptimizerConfig oc;
  oc.variant = cfg.variant;
  oc.T = g.T;
  oc.eta = g.eta;
  oc.beta = g.beta;
  oc.domain_radius = cfg.domain_radius;
  oc.x0 = cfg.x0;
  oc.y0 = cfg.y0;
  oc.output_mode = cfg.output_mode;
  return oc;
}

Vec or_zero(const Vec& v, std::size_t dim) {
  return v.size() ? v : Vec::Zero(static_cast<Eigen::Index>(dim));
}

}  // namespace

void validate(const StudyConfig& cfg) {
  cfg.law.validate();
  if (cfg.replicates < 2) throw Error("replicates must be ≥ 2");
  if (!(cfg.domain_radius > 0.0)) throw Error("invalid domain");
  if (!(cfg.c > 0.0)) throw Error("c must be > 0");
  switch (cfg.study) {
    case StudyKind::tracking:
    case StudyKind::optimization:
      if (cfg.n == 0 || cfg.m == 0) throw Error("empty dataset");
      if (cfg.steps.empty()) throw Error("study grid is empty");
      for (const auto& g : cfg.steps) {
        if (g.T < 1) throw Error("T must be ≥ 1");
        if (!(g.eta > 0.0)) throw Error("eta must be > 0");
        if (!(g.beta > 0.0 && g.beta <= 1.0)) throw Error("beta must be in (0, 1]");
      }
      if (cfg.study == StudyKind::tracking && cfg.steps.front().T <= cfg.burn_in) {
        throw Error("T must exceed the burn-in");
      }
      break;
    case StudyKind::excess_risk:
      if (cfg.sizes.empty()) throw Error("study grid is empty");
      for (auto s : cfg.sizes) {
        if (s == 0) throw Error("empty dataset");
      }
      if (!(cfg.schedule_scale > 0.0)) throw Error("schedule scale must be > 0");
      if (cfg.t_max < 1) throw Error("t_max must be ≥ 1");
      break;
  }
}

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, std::size_t points) {
  if (lo < 1 || hi < lo) throw Error("log_grid: need 1 <= lo <= hi");
  std::vector<std::int64_t> out;
  if (points < 2 || lo == hi) {
    out.push_back(lo);
    if (hi != lo) out.push_back(hi);
    return out;
  }
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t k = 0; k < points; ++k) {
    const double v = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1));
    const auto t = std::clamp<std::int64_t>(std::llround(v), lo, hi);
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

double initial_tracking_error(const CompositionalProblem& s, const Vec& x0, const Vec& y0, double beta) {
  const Vec gs = s.empirical_inner(x0);
  Vec g(static_cast<Eigen::Index>(s.inner_dim()));
  double sum = 0.0;
  for (std::size_t j = 0; j < s.inner_count(); ++j) {
    s.inner_value(j, x0, g);
    sum += ((1.0 - beta) * y0 + beta * g - gs).squaredNorm();
  }
  return sum / static_cast<double>(s.inner_count());
}

double empirical_sigma(const Dataset& s) {
  const Eigen::SelfAdjointEigenSolver<Mat> eig(s.mean_a().transpose() * s.mean_a(),
                                               Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues()(0));
}

StudyResult tracking_study(const StudyConfig& cfg) {
  validate(cfg);
  const Rng root(cfg.seed);
  const Dataset s = sample_dataset(cfg.law, cfg.n, cfg.m, root.split("dataset"));
  const GridPoint g = cfg.steps.front();
  OptimizerConfig oc = base_config(cfg, g);
  oc.record_tracking = true;
  oc.output_mode = OutputMode::last;
  validate(oc, s);

  std::vector<std::vector<double>> errors(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    errors[r] = run(s, oc, root.split("grid", 0).split("replicate", r)).tracking_sq_errors;
  });

  auto column = [&](std::int64_t t) {
    std::vector<double> v(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) v[r] = errors[r][static_cast<std::size_t>(t)];
    return v;
  };

  // D_y is measured: the t = 0 column is ||y_1 - g_S(x_0)||^2.
  const double dy = mean_se(column(0)).mean;
  StudyResult out;
  out.params = compute_constants(s, cfg.domain_radius, kConstantsGrid, dy);
  out.params.c = cfg.c;
  for (std::int64_t t : log_grid(std::max<std::int64_t>(1, cfg.burn_in), g.T - 1, cfg.log_points)) {
    const MeanSe ms = mean_se(column(t));
    StudyRow row;
    row.t = t;
    row.n = cfg.n;
    row.m = cfg.m;
    row.eta = g.eta;
    row.beta = g.beta;
    row.mean = ms.mean;
    row.se = ms.se;
    row.bound = tracking_bound(cfg.variant, t, out.params, g.eta, g.beta).value;
    if (row.mean <= row.bound) ++out.rows_within_bound;
    out.rows.push_back(row);
  }
  return out;
}

StudyResult optimization_study(const StudyConfig& cfg) {
  validate(cfg);
  const Rng root(cfg.seed);
  const Dataset s = sample_dataset(cfg.law, cfg.n, cfg.m, root.split("dataset"));
  const MinimizerCertificate star = erm_minimizer(s, cfg.domain_radius);
  const double sigma = cfg.sigma > 0.0 ? cfg.sigma : empirical_sigma(s);
  const Vec x0 = or_zero(cfg.x0, s.param_dim());
  const Vec y0 = or_zero(cfg.y0, s.inner_dim());

  std::vector<OptimizerConfig> configs;
  for (const auto& g : cfg.steps) {
    OptimizerConfig oc = base_config(cfg, g);
    if (cfg.output_mode == OutputMode::sigma_weighted) oc.sigma = sigma;
    validate(oc, s);
    configs.push_back(oc);
  }

  const std::size_t total = configs.size() * cfg.replicates;
  std::vector<double> gaps(total);
  parallel_for(total, cfg.threads, [&](std::size_t k) {
    const std::size_t gi = k / cfg.replicates;
    const std::size_t r = k % cfg.replicates;
    const Trajectory traj = run(s, configs[gi], root.split("grid", gi).split("replicate", r));
    gaps[k] = empirical_risk(s, traj.final_output) - star.value;
  });

  StudyResult out;
  out.reference_value = star.value;
  out.params = compute_constants(s, cfg.domain_radius, kConstantsGrid);
  out.params.c = cfg.c;
  out.params.sigma = sigma;
  for (std::size_t gi = 0; gi < configs.size(); ++gi) {
    const auto& g = cfg.steps[gi];
    const MeanSe ms =
        mean_se(std::span<const double>(gaps).subspan(gi * cfg.replicates, cfg.replicates));
    BoundParams k = out.params;
    k.dy = initial_tracking_error(s, x0, y0, g.beta);
    if (cfg.convexity == Convexity::strongly_convex) {
      k.dx = empirical_risk(s, x0) - star.value;
    }
    StudyRow row;
    row.t = g.T;
    row.n = cfg.n;
    row.m = cfg.m;
    row.eta = g.eta;
    row.beta = g.beta;
    row.mean = ms.mean;
    row.se = ms.se;
    if (cfg.convexity == Convexity::convex || sigma > 0.0) {
      row.bound = optimization_bound(cfg.variant, cfg.convexity, g.T, g.eta, g.beta, k).value;
    }
    if (row.mean <= row.bound) ++out.rows_within_bound;
    out.rows.push_back(row);
  }
  return out;
}

StudyResult excess_risk_study(const StudyConfig& cfg) {
  validate(cfg);
  const Rng root(cfg.seed);
  const MinimizerCertificate star = population_minimizer(cfg.law, cfg.domain_radius);

  std::vector<Schedule> schedules;
  for (auto size : cfg.sizes) {
    schedules.push_back(
        schedule_preset(cfg.variant, cfg.convexity, size, size, cfg.schedule_scale, cfg.t_max));
  }

  const std::size_t total = cfg.sizes.size() * cfg.replicates;
  std::vector<double> excess(total);
  parallel_for(total, cfg.threads, [&](std::size_t k) {
    const std::size_t gi = k / cfg.replicates;
    const std::size_t r = k % cfg.replicates;
    const std::size_t size = cfg.sizes[gi];
    const Rng rep = root.split("grid", gi).split("replicate", r);
    const Dataset s = sample_dataset(cfg.law, size, size, rep.split("data"));
    OptimizerConfig oc = base_config(cfg, {schedules[gi].T, schedules[gi].eta, schedules[gi].beta});
    if (cfg.convexity == Convexity::convex) {
      oc.output_mode = OutputMode::uniform_average;
    } else {
      oc.output_mode = OutputMode::sigma_weighted;
      oc.sigma = cfg.sigma > 0.0 ? cfg.sigma : empirical_sigma(s);
      if (!(oc.sigma > 0.0)) throw Error("sampled dataset is not strongly convex");
    }
    const Trajectory traj = run(s, oc, rep.split("indices"));
    excess[k] = population_risk(cfg.law, traj.final_output) - star.value;
  });

  StudyResult out;
  out.reference_value = star.value;
  std::vector<double> xs, ys;
  for (std::size_t gi = 0; gi < cfg.sizes.size(); ++gi) {
    const MeanSe ms =
        mean_se(std::span<const double>(excess).subspan(gi * cfg.replicates, cfg.replicates));
    const auto size = cfg.sizes[gi];
    StudyRow row;
    row.t = schedules[gi].T;
    row.n = size;
    row.m = size;
    row.eta = schedules[gi].eta;
    row.beta = schedules[gi].beta;
    row.mean = ms.mean;
    row.se = ms.se;
    row.bound = 2.0 / std::sqrt(static_cast<double>(size));
    row.capped = schedules[gi].capped;
    if (row.mean <= row.bound) ++out.rows_within_bound;
    out.rows.push_back(row);
    xs.push_back(static_cast<double>(size));
    ys.push_back(ms.mean);
  }
  out.fitted_slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return out;
}

StudyResult run_study(const StudyConfig& cfg) {
  switch (cfg.study) {
    case StudyKind::tracking: return tracking_study(cfg);
    case StudyKind::optimization: return optimization_study(cfg);
    case StudyKind::excess_risk: return excess_risk_study(cfg);
  }
  throw Error("unknown study");
}

}  // namespace scolab
