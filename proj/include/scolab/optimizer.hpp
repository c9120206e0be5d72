#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scolab/core_math.hpp"
#include "scolab/problems.hpp"

namespace scolab {

enum class Variant { scgd, scsc };
enum class Convexity { convex, strongly_convex };
/// uniform_random is x_tau with tau ~ Unif{1..T}.
enum class OutputMode { last, uniform_average, sigma_weighted, uniform_random };

std::string to_string(Variant v);
std::string to_string(Convexity c);
std::string to_string(OutputMode m);
Variant parse_variant(const std::string& s);
Convexity parse_convexity(const std::string& s);
OutputMode parse_output_mode(const std::string& s);

struct OptimizerConfig {
  Variant variant = Variant::scgd;
  std::int64_t T = 1000;
  double eta = 1e-2;
  double beta = 0.1;
  double domain_radius = 10.0;
  Vec x0;  // empty means the origin
  Vec y0;  // empty means the origin
  OutputMode output_mode = OutputMode::last;
  double sigma = 0.0;  // weight parameter for sigma_weighted
  bool record_tracking = false;
  bool record_indices = false;
  bool record_full = false;
  std::size_t max_recorded = 4096;
};

/// Throws Error naming the first violated precondition.
void validate(const OptimizerConfig& cfg, const CompositionalProblem& problem);

struct IndexPair {
  std::uint32_t inner;  // j_t
  std::uint32_t outer;  // i_t
  bool operator==(const IndexPair&) const = default;
};

struct Trajectory {
  std::vector<std::int64_t> steps;  // t of each stored iterate, increasing, ends at T
  std::vector<Vec> iterates;        // x_t at those steps
  bool complete = false;            // true when every x_1..x_T is stored
  std::vector<double> tracking_sq_errors;  // ||y_{t+1} - g_S(x_t)||^2, t = 0..T-1
  std::vector<IndexPair> index_log;
  // Running outputs over the whole run, exact regardless of thinning.
  Vec last;
  Vec uniform_average;
  Vec sigma_weighted;  // empty unless cfg.sigma > 0
  Vec random_pick;     // empty unless output_mode == uniform_random
  double sigma = 0.0;
  double eta = 0.0;
  OutputMode output_mode = OutputMode::last;
  Vec final_output;
};

/// Source of the (j_t, i_t) index sequence. Copies replay the same sequence.
class IndexStream {
 public:
  explicit IndexStream(Rng rng) : rng_(std::move(rng)) {}
  std::size_t inner(std::size_t m) { return rng_.uniform_index(m); }
  std::size_t outer(std::size_t n) { return rng_.uniform_index(n); }
  std::size_t step(std::size_t count) { return rng_.uniform_index(count); }

 private:
  Rng rng_;
};

Vec tracking_step(Variant variant, const Vec& y, const Vec& g_cur, const Vec& g_prev, double beta);
Vec param_step(const Vec& x, const Mat& jac, const Vec& outer_g, double eta, double radius);

Trajectory run(const CompositionalProblem& problem, const OptimizerConfig& cfg, IndexStream indices);
Trajectory run(const CompositionalProblem& problem, const OptimizerConfig& cfg, const Rng& rng);

/**
 * Output point of a trajectory. When the trajectory stores every iterate the
 * result is recomputed in one streaming pass for any (sigma, eta); otherwise
 * the running accumulators of the run are used.
 */
Vec select_output(const Trajectory& traj, OutputMode mode, double sigma, double eta);

struct Schedule {
  std::int64_t T = 1;
  double eta = 1.0;
  double beta = 1.0;
  double t_exponent = 1.0;
  double eta_exponent = 1.0;
  double beta_exponent = 1.0;
  bool capped = false;
};

/**
 * Iteration count and step sizes that balance stability and optimization error:
 * T = ceil(scale * max(n, m)^e), eta = T^-a, beta = T^-b. When `t_max` is
 * given, T is capped and the cap is reported.
 */
Schedule schedule_preset(Variant variant, Convexity convexity, std::size_t n, std::size_t m,
                         double scale = 1.0, std::optional<std::int64_t> t_max = std::nullopt);

}  // namespace scolab
