#include "scolab/optimizer.hpp"

#include <cmath>
#include <limits>

namespace scolab {

std::string to_string(Variant v) { return v == Variant::scgd ? "scgd" : "scsc"; }

std::string to_string(Convexity c) {
  return c == Convexity::convex ? "convex" : "strongly_convex";
}

std::string to_string(OutputMode m) {
  switch (m) {
    case OutputMode::last: return "last";
    case OutputMode::uniform_average: return "uniform_average";
    case OutputMode::sigma_weighted: return "sigma_weighted";
    case OutputMode::uniform_random: return "uniform_random";
  }
  return "last";
}

Variant parse_variant(const std::string& s) {
  if (s == "scgd" || s == "SCGD") return Variant::scgd;
  if (s == "scsc" || s == "SCSC") return Variant::scsc;
  throw Error("unknown variant '" + s + "' (expected scgd or scsc)");
}

Convexity parse_convexity(const std::string& s) {
  if (s == "convex") return Convexity::convex;
  if (s == "strongly_convex" || s == "strongly-convex") return Convexity::strongly_convex;
  throw Error("unknown convexity '" + s + "' (expected convex or strongly_convex)");
}

OutputMode parse_output_mode(const std::string& s) {
  if (s == "last") return OutputMode::last;
  if (s == "uniform_average" || s == "average") return OutputMode::uniform_average;
  if (s == "sigma_weighted") return OutputMode::sigma_weighted;
  if (s == "uniform_random") return OutputMode::uniform_random;
  throw Error("unknown output mode '" + s + "'");
}

void validate(const OptimizerConfig& cfg, const CompositionalProblem& problem) {
  if (cfg.T < 1) throw Error("T must be ≥ 1");
  if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta)) throw Error("eta must be ≥ 0 and finite");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw Error("beta must be in (0, 1]");
  if (!(cfg.domain_radius > 0.0) || !std::isfinite(cfg.domain_radius)) throw Error("invalid domain");
  const auto p = static_cast<Eigen::Index>(problem.param_dim());
  const auto d = static_cast<Eigen::Index>(problem.inner_dim());
  if (cfg.x0.size() != 0 && cfg.x0.size() != p) throw Error("dimension mismatch: x0");
  if (cfg.y0.size() != 0 && cfg.y0.size() != d) throw Error("dimension mismatch: y0");
  if (cfg.x0.size() != 0) {
    if (!cfg.x0.allFinite()) throw Error("non-finite vector");
    if (cfg.x0.norm() > cfg.domain_radius * (1.0 + 1e-12)) throw Error("x0 outside domain");
  }
  if (cfg.y0.size() != 0 && !cfg.y0.allFinite()) throw Error("non-finite vector");
  if (cfg.output_mode == OutputMode::sigma_weighted && !(cfg.sigma > 0.0)) {
    throw Error("sigma_weighted output needs sigma > 0");
  }
  if (cfg.sigma > 0.0 && cfg.sigma * cfg.eta >= 2.0) throw Error("unstable weights");
  if (cfg.max_recorded < 1) throw Error("max_recorded must be ≥ 1");
  if (problem.inner_count() > std::numeric_limits<std::uint32_t>::max() ||
      problem.outer_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("dataset too large for the index log");
  }
}

Vec tracking_step(Variant variant, const Vec& y, const Vec& g_cur, const Vec& g_prev, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error("beta must be in (0, 1]");
  if (y.size() != g_cur.size()) throw Error("dimension mismatch: tracker vs inner value");
  if (variant == Variant::scgd) return (1.0 - beta) * y + beta * g_cur;
  if (g_prev.size() != g_cur.size()) throw Error("dimension mismatch: previous inner value");
  return (1.0 - beta) * (y + g_cur - g_prev) + beta * g_cur;
}

Vec param_step(const Vec& x, const Mat& jac, const Vec& outer_g, double eta, double radius) {
  if (!(eta >= 0.0)) throw Error("eta must be ≥ 0 and finite");
  if (jac.rows() != x.size()) throw Error("dimension mismatch: Jacobian rows vs parameter");
  Vec next = x - eta * mat_vec(jac, outer_g);
  project_ball_inplace(next, radius);
  return next;
}

namespace {

/// Streaming accumulator for the uniform and geometrically weighted averages.
struct OutputAccumulator {
  explicit OutputAccumulator(Eigen::Index p, double sigma, double eta)
      : uniform_sum(Vec::Zero(p)), weighted_sum(Vec::Zero(p)), rho(1.0 - 0.5 * sigma * eta) {}

  void add(const Vec& x) {
    uniform_sum += x;
    ++count;
    // W_t = rho W_{t-1} + 1 gives weight rho^(T-t) to x_t at the end.
    weighted_sum = rho * weighted_sum + x;
    weight = rho * weight + 1.0;
  }

  Vec uniform() const { return uniform_sum / static_cast<double>(count); }
  Vec weighted() const { return weighted_sum / weight; }

  Vec uniform_sum;
  Vec weighted_sum;
  double rho;
  double weight = 0.0;
  std::int64_t count = 0;
};

}  // namespace

Trajectory run(const CompositionalProblem& problem, const OptimizerConfig& cfg, IndexStream indices) {
  validate(cfg, problem);
  const auto p = static_cast<Eigen::Index>(problem.param_dim());
  const auto d = static_cast<Eigen::Index>(problem.inner_dim());
  const std::size_t m = problem.inner_count();
  const std::size_t n = problem.outer_count();

  Trajectory traj;
  traj.sigma = cfg.sigma;
  traj.eta = cfg.eta;
  traj.output_mode = cfg.output_mode;

  const std::int64_t stride =
      cfg.record_full ? 1
                      : std::max<std::int64_t>(
                            1, (cfg.T + static_cast<std::int64_t>(cfg.max_recorded) - 1) /
                                   static_cast<std::int64_t>(cfg.max_recorded));
  traj.complete = stride == 1;
  if (cfg.record_tracking) traj.tracking_sq_errors.reserve(static_cast<std::size_t>(cfg.T));
  if (cfg.record_indices) traj.index_log.reserve(static_cast<std::size_t>(cfg.T));

  std::int64_t pick = -1;
  if (cfg.output_mode == OutputMode::uniform_random) {
    pick = 1 + static_cast<std::int64_t>(indices.step(static_cast<std::size_t>(cfg.T)));
  }

  Vec x = cfg.x0.size() ? cfg.x0 : Vec::Zero(p);
  Vec y = cfg.y0.size() ? cfg.y0 : Vec::Zero(d);
  Vec x_prev = x;  // x_{-1} := x_0, so the first correction vanishes
  Vec g_cur(d), g_prev(d), grad_f(d), step(p);
  Mat jac;
  const bool weighted = cfg.sigma > 0.0;
  OutputAccumulator acc(p, weighted ? cfg.sigma : 0.0, cfg.eta);

  for (std::int64_t t = 0; t < cfg.T; ++t) {
    const std::size_t j = indices.inner(m);
    problem.inner_value(j, x, g_cur);
    if (cfg.variant == Variant::scsc) {
      problem.inner_value(j, x_prev, g_prev);
      y = (1.0 - cfg.beta) * (y + g_cur - g_prev) + cfg.beta * g_cur;
    } else {
      y = (1.0 - cfg.beta) * y + cfg.beta * g_cur;
    }
    if (cfg.record_tracking) {
      traj.tracking_sq_errors.push_back((y - problem.empirical_inner(x)).squaredNorm());
    }

    const std::size_t i = indices.outer(n);
    if (cfg.record_indices) {
      traj.index_log.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i)});
    }
    problem.outer_gradient(i, y, grad_f);
    problem.inner_jacobian(j, x, jac);
    step.noalias() = jac * grad_f;

    x_prev = x;
    x -= cfg.eta * step;
    project_ball_inplace(x, cfg.domain_radius);

    const std::int64_t now = t + 1;
    acc.add(x);
    if (now == pick) traj.random_pick = x;
    if (now % stride == 0 || now == cfg.T) {
      traj.steps.push_back(now);
      traj.iterates.push_back(x);
    }
  }

  traj.last = x;
  traj.uniform_average = acc.uniform();
  if (weighted) traj.sigma_weighted = acc.weighted();
  traj.final_output = select_output(traj, cfg.output_mode, cfg.sigma, cfg.eta);
  return traj;
}

Trajectory run(const CompositionalProblem& problem, const OptimizerConfig& cfg, const Rng& rng) {
  return run(problem, cfg, IndexStream(rng));
}

Vec select_output(const Trajectory& traj, OutputMode mode, double sigma, double eta) {
  if (mode == OutputMode::sigma_weighted) {
    if (!(sigma > 0.0) || !(eta > 0.0)) throw Error("sigma_weighted output needs sigma > 0 and eta > 0");
    if (sigma * eta >= 2.0) throw Error("unstable weights");
  }
  if (traj.iterates.empty()) throw Error("empty trajectory");

  if (traj.complete) {
    switch (mode) {
      case OutputMode::last:
        return traj.iterates.back();
      case OutputMode::uniform_average:
      case OutputMode::sigma_weighted: {
        OutputAccumulator acc(traj.iterates.front().size(),
                              mode == OutputMode::sigma_weighted ? sigma : 0.0, eta);
        for (const auto& x : traj.iterates) acc.add(x);
        return mode == OutputMode::uniform_average ? acc.uniform() : acc.weighted();
      }
      case OutputMode::uniform_random:
        if (traj.random_pick.size() == 0) throw Error("trajectory has no random pick recorded");
        return traj.random_pick;
    }
  }

  switch (mode) {
    case OutputMode::last:
      return traj.last.size() ? traj.last : traj.iterates.back();
    case OutputMode::uniform_average:
      if (traj.uniform_average.size() == 0) throw Error("iterates thinned; uniform average unavailable");
      return traj.uniform_average;
    case OutputMode::sigma_weighted:
      if (traj.sigma_weighted.size() == 0 || traj.sigma != sigma || traj.eta != eta) {
        throw Error("iterates thinned; weighted output unavailable for this (sigma, eta)");
      }
      return traj.sigma_weighted;
    case OutputMode::uniform_random:
      if (traj.random_pick.size() == 0) throw Error("trajectory has no random pick recorded");
      return traj.random_pick;
  }
  return traj.last;
}

Schedule schedule_preset(Variant variant, Convexity convexity, std::size_t n, std::size_t m,
                         double scale, std::optional<std::int64_t> t_max) {
  if (n == 0 || m == 0) throw Error("empty dataset");
  if (!(scale > 0.0)) throw Error("schedule scale must be > 0");
  Schedule s;
  if (convexity == Convexity::convex) {
    if (variant == Variant::scgd) {
      s.t_exponent = 3.5; s.eta_exponent = 6.0 / 7.0; s.beta_exponent = 4.0 / 7.0;
    } else {
      s.t_exponent = 2.5; s.eta_exponent = 4.0 / 5.0; s.beta_exponent = 4.0 / 5.0;
    }
  } else {
    if (variant == Variant::scgd) {
      s.t_exponent = 5.0 / 3.0; s.eta_exponent = 9.0 / 10.0; s.beta_exponent = 3.0 / 5.0;
    } else {
      s.t_exponent = 7.0 / 6.0; s.eta_exponent = 6.0 / 7.0; s.beta_exponent = 6.0 / 7.0;
    }
  }
  const double raw = scale * std::pow(static_cast<double>(std::max(n, m)), s.t_exponent);
  // pow() of exact powers can land one ulp above an integer; do not let ceil() bump it.
  const double nearest = std::round(raw);
  const double t_real = std::abs(raw - nearest) <= 1e-9 * raw ? nearest : std::ceil(raw);
  s.T = std::max<std::int64_t>(1, static_cast<std::int64_t>(t_real));
  if (t_max && s.T > *t_max) {
    s.T = *t_max;
    s.capped = true;
  }
  const auto t = static_cast<double>(s.T);
  s.eta = std::pow(t, -s.eta_exponent);
  s.beta = std::pow(t, -s.beta_exponent);
  return s;
}

}  // namespace scolab
