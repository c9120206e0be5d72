#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scolab/optimizer.hpp"
#include "scolab/oracle.hpp"
#include "scolab/problems.hpp"

namespace scolab {

enum class StudyKind { tracking, optimization, excess_risk };

struct GridPoint {
  std::int64_t T = 1;
  double eta = 1e-2;
  double beta = 0.1;
};

/**
 * One Monte Carlo study. Which fields matter depends on `study`:
 *  - tracking:     law, n, m, steps[0], replicates, c, burn_in, log_points
 *  - optimization: law, n, m, steps (one row each), output_mode, sigma
 *  - excess_risk:  law, sizes (n = m per row), schedule_scale, t_max
 * Every replicate draws from a child stream keyed by (grid index, replicate
 * index), so results do not depend on `threads`.
 */
struct StudyConfig {
  StudyKind study = StudyKind::tracking;
  Variant variant = Variant::scgd;
  Convexity convexity = Convexity::convex;
  PopulationLaw law;
  std::size_t n = 40;
  std::size_t m = 40;
  std::vector<GridPoint> steps;
  std::vector<std::size_t> sizes;
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double domain_radius = 10.0;
  OutputMode output_mode = OutputMode::last;
  double sigma = 0.0;  // 0: use lambda_min of the sampled dataset
  double c = 2.0;
  std::int64_t burn_in = 10;
  std::size_t log_points = 64;
  double schedule_scale = 1.0;
  std::int64_t t_max = 2'000'000;
  Vec x0;
  Vec y0;
};

void validate(const StudyConfig& cfg);

struct StudyRow {
  std::int64_t t = 0;  // step index (tracking) or horizon T
  std::size_t n = 0;
  std::size_t m = 0;
  double eta = 0.0;
  double beta = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double bound = 0.0;  // tracking bound, shape proxy, or 1/sqrt(n) + 1/sqrt(m)
  bool capped = false;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  BoundParams params;        // constants of the fixed dataset (tracking, optimization)
  double reference_value = 0.0;  // F_S(x_*^S) or F(x_*)
  double fitted_slope = 0.0;     // excess risk: log-log slope of mean vs n
  std::size_t rows_within_bound = 0;
};

StudyResult tracking_study(const StudyConfig& cfg);
StudyResult optimization_study(const StudyConfig& cfg);
StudyResult excess_risk_study(const StudyConfig& cfg);
StudyResult run_study(const StudyConfig& cfg);

/// Log-spaced distinct integers in [lo, hi], always including both ends.
std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, std::size_t points);

/// E||y_1 - g_S(x_0)||^2 in closed form: the first tracker update is identical for both variants.
double initial_tracking_error(const CompositionalProblem& s, const Vec& x0, const Vec& y0, double beta);

/// lambda_min(A^T A) of the dataset's mean inner matrix.
double empirical_sigma(const Dataset& s);

}  // namespace scolab
