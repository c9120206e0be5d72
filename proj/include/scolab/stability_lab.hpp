#pragma once

#include <cstddef>
#include <variant>

#include "scolab/optimizer.hpp"
#include "scolab/problems.hpp"

namespace scolab {

enum class NeighborKind { nu, omega };

/// Replace one outer (nu) or inner (omega) sample; index is 0-based.
struct NeighborSpec {
  NeighborKind kind = NeighborKind::nu;
  std::size_t index = 0;
  std::variant<OuterSample, InnerSample> replacement;
};

Dataset make_neighbor(const Dataset& s, const NeighborSpec& spec);

struct CoupledResult {
  Vec output;
  Vec output_prime;
  double distance = 0.0;
};

/**
 * Runs the optimizer on S and S' with one realized (j_t, i_t) sequence drawn
 * from `rng`. With `coupled = false` the second run gets an independent child
 * stream instead, for comparison against the shared-sequence convention.
 */
CoupledResult coupled_run(const Dataset& s, const Dataset& s_prime, const OptimizerConfig& cfg,
                          const Rng& rng, bool coupled = true);

/// Monte Carlo estimate of (eps_nu, eps_omega). The replaced index is drawn
/// uniformly per replicate, so this is an average-case lower estimate of the
/// uniform (sup over indices) quantity.
struct StabilityEstimate {
  double eps_nu_hat = 0.0;
  double eps_nu_se = 0.0;
  double eps_omega_hat = 0.0;
  double eps_omega_se = 0.0;
  std::size_t replicates = 0;
  bool coupled = true;
};

struct StabilityOptions {
  std::size_t replicates = 400;
  bool coupled = true;
  unsigned threads = 1;
};

StabilityEstimate estimate_stability(const PopulationLaw& law, std::size_t n, std::size_t m,
                                     const OptimizerConfig& cfg, const StabilityOptions& opts,
                                     const Rng& rng);

struct GeneralizationReport {
  double gap_mean = 0.0;  // E[F(A(S)) - F_S(A(S))]
  double gap_se = 0.0;
  StabilityEstimate stability;
  double variance_mean = 0.0;  // E[Var_omega(g_omega(A(S)))]
  double variance_se = 0.0;
  double lf = 0.0;
  double lg = 0.0;
  double rhs = 0.0;  // L_f L_g eps_nu + 4 L_f L_g eps_omega + L_f sqrt(var / m)
  double combined_se = 0.0;
  bool holds = false;  // gap_mean <= rhs + 3 * combined_se
};

GeneralizationReport check_generalization(const PopulationLaw& law, std::size_t n, std::size_t m,
                              const OptimizerConfig& cfg, const StabilityOptions& opts,
                              const Rng& rng);

}  // namespace scolab
