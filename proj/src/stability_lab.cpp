#include "scolab/stability_lab.hpp"

#include <cmath>
#include <vector>

#include "scolab/parallel.hpp"

namespace scolab {

Dataset make_neighbor(const Dataset& s, const NeighborSpec& spec) {
  if (spec.kind == NeighborKind::nu) {
    if (spec.index >= s.n()) throw Error("neighbor index out of range");
    const auto* rep = std::get_if<OuterSample>(&spec.replacement);
    if (!rep) throw Error("nu neighbor needs an outer replacement sample");
    return s.with_outer(spec.index, *rep);
  }
  if (spec.index >= s.m()) throw Error("neighbor index out of range");
  const auto* rep = std::get_if<InnerSample>(&spec.replacement);
  if (!rep) throw Error("omega neighbor needs an inner replacement sample");
  return s.with_inner(spec.index, *rep);
}

namespace {

void require_neighbors(const Dataset& s, const Dataset& s_prime) {
  if (s.n() != s_prime.n() || s.m() != s_prime.m() || s.param_dim() != s_prime.param_dim() ||
      s.inner_dim() != s_prime.inner_dim()) {
    throw Error("non-neighboring datasets");
  }
}

Vec output_of(const Dataset& s, const OptimizerConfig& cfg, const Rng& rng) {
  return run(s, cfg, rng).final_output;
}

}  // namespace

CoupledResult coupled_run(const Dataset& s, const Dataset& s_prime, const OptimizerConfig& cfg,
                          const Rng& rng, bool coupled) {
  require_neighbors(s, s_prime);
  CoupledResult out;
  out.output = output_of(s, cfg, rng);
  out.output_prime = output_of(s_prime, cfg, coupled ? rng : rng.split("uncoupled"));
  out.distance = (out.output - out.output_prime).norm();
  return out;
}

StabilityEstimate estimate_stability(const PopulationLaw& law, std::size_t n, std::size_t m,
                                     const OptimizerConfig& cfg, const StabilityOptions& opts,
                                     const Rng& rng) {
  if (opts.replicates < 2) throw Error("replicates must be ≥ 2");
  law.validate();
  std::vector<double> nu_dist(opts.replicates), omega_dist(opts.replicates);
  parallel_for(opts.replicates, opts.threads, [&](std::size_t r) {
    const Rng rep = rng.split("replicate", r);
    const Dataset s = sample_dataset(law, n, m, rep.split("data"));
    Rng draw = rep.split("replacement");
    OuterSample outer = sample_outer(law, draw);
    InnerSample inner = sample_inner(law, draw);
    const std::size_t i = draw.uniform_index(n);
    const std::size_t j = draw.uniform_index(m);
    const Dataset s_nu = s.with_outer(i, std::move(outer));
    const Dataset s_omega = s.with_inner(j, std::move(inner));

    // One index stream per replicate drives A(S) and both neighbor runs.
    const Rng indices = rep.split("indices");
    const Vec base = output_of(s, cfg, indices);
    const Rng other = opts.coupled ? indices : indices.split("uncoupled");
    nu_dist[r] = (base - output_of(s_nu, cfg, other)).norm();
    omega_dist[r] = (base - output_of(s_omega, cfg, other)).norm();
  });
  const MeanSe nu = mean_se(nu_dist);
  const MeanSe omega = mean_se(omega_dist);
  StabilityEstimate est;
  est.eps_nu_hat = nu.mean;
  est.eps_nu_se = nu.se;
  est.eps_omega_hat = omega.mean;
  est.eps_omega_se = omega.se;
  est.replicates = opts.replicates;
  est.coupled = opts.coupled;
  return est;
}

GeneralizationReport check_generalization(const PopulationLaw& law, std::size_t n, std::size_t m,
                              const OptimizerConfig& cfg, const StabilityOptions& opts,
                              const Rng& rng) {
  if (opts.replicates < 2) throw Error("replicates must be ≥ 2");
  law.validate();
  std::vector<double> gaps(opts.replicates), variances(opts.replicates);
  const Rng gap_rng = rng.split("generalization");
  parallel_for(opts.replicates, opts.threads, [&](std::size_t r) {
    const Rng rep = gap_rng.split("replicate", r);
    const Dataset s = sample_dataset(law, n, m, rep.split("data"));
    const Vec x = output_of(s, cfg, rep.split("indices"));
    gaps[r] = population_risk(law, x) - empirical_risk(s, x);
    variances[r] = law.inner_variance(x);
  });

  GeneralizationReport rep;
  const MeanSe gap = mean_se(gaps);
  const MeanSe var = mean_se(variances);
  rep.gap_mean = gap.mean;
  rep.gap_se = gap.se;
  rep.variance_mean = var.mean;
  rep.variance_se = var.se;
  rep.stability = estimate_stability(law, n, m, cfg, opts, rng.split("stability"));

  const BoundParams k = law_constants(law, cfg.domain_radius);
  rep.lf = k.lf;
  rep.lg = k.lg;
  const double md = static_cast<double>(m);
  const double root = std::sqrt(std::max(var.mean, 0.0) / md);
  rep.rhs = k.lf * k.lg * rep.stability.eps_nu_hat + 4.0 * k.lf * k.lg * rep.stability.eps_omega_hat +
            k.lf * root;
  // Delta method for sqrt(var / m).
  const double root_se = var.mean > 0.0 ? var.se / (2.0 * std::sqrt(var.mean * md)) : 0.0;
  const double a = k.lf * k.lg * rep.stability.eps_nu_se;
  const double b = 4.0 * k.lf * k.lg * rep.stability.eps_omega_se;
  const double c = k.lf * root_se;
  rep.combined_se = std::sqrt(gap.se * gap.se + a * a + b * b + c * c);
  rep.holds = rep.gap_mean <= rep.rhs + 3.0 * rep.combined_se;
  return rep;
}

}  // namespace scolab
