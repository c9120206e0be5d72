#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scolab/optimizer.hpp"
#include "scolab/problems.hpp"

namespace scolab {

enum class MinimizerMethod { closed_form, projected_gradient_high_precision };

std::string to_string(MinimizerMethod m);

struct MinimizerCertificate {
  Vec x_star;
  double value = 0.0;
  MinimizerMethod method = MinimizerMethod::closed_form;
  double kkt_residual = 0.0;
  /// The normal equations were singular; x_star is the minimum-norm solution.
  bool rank_deficient = false;
};

/// Default residual tolerance for certificates.
inline constexpr double kKktTolerance = 1e-10;

/**
 * Minimiser of F_S over the ball. The unconstrained problem is a dense least
 * squares solve; when its minimum-norm solution leaves the ball the boundary
 * solution of the secular equation is polished by projected gradient steps
 * at 1/L until the projected-gradient residual is below tolerance.
 */
MinimizerCertificate erm_minimizer(const Dataset& s, double radius);
MinimizerCertificate population_minimizer(const PopulationLaw& law, double radius);

/// Plain projected gradient descent at step 1/L from x0; independent of the closed form.
MinimizerCertificate projected_gradient_minimizer(const Dataset& s, double radius, const Vec& x0,
                                                  double tolerance = kKktTolerance,
                                                  std::int64_t max_iterations = 5'000'000);

/// ||x - Pi(x - grad F_S(x))||.
double kkt_residual(const Dataset& s, const Vec& x, double radius);

enum class BoundKind {
  tracking,
  stability_convex,
  stability_strongly_convex,
  optimization_convex,
  optimization_strongly_convex,
};

struct BoundInputs {
  Variant variant = Variant::scgd;
  BoundParams params;
  std::int64_t t = 0;  // step index (tracking) or horizon T
  double eta = 0.0;
  double beta = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

struct BoundValue {
  BoundKind which = BoundKind::tracking;
  BoundInputs inputs;
  double value = 0.0;
  /// Individual summands in the order they appear in the formula.
  std::vector<double> terms;
};

/**
 * Tracking-error bound on E||y_{t+1} - g_S(x_t)||^2:
 *   (c/e)^c (t beta)^-c D_y + L_f^2 L_g^3 eta^2 / beta^k + 2 V_g beta,
 * with k = 2 for SCGD and k = 1 for SCSC.
 */
BoundValue tracking_bound(Variant variant, std::int64_t t, const BoundParams& params, double eta,
                          double beta);

/// Stability shape proxy: the O(.) expression with every hidden constant set to 1.
BoundValue stability_bound(Variant variant, Convexity convexity, std::int64_t T, std::size_t n,
                           std::size_t m, double eta, double beta, const BoundParams& params);

/// Optimization-error shape proxy for the averaged outputs, hidden constants set to 1.
BoundValue optimization_bound(Variant variant, Convexity convexity, std::int64_t T, double eta,
                              double beta, const BoundParams& params);

/// Largest coordinatewise relative error between the analytic gradient and
/// central differences with step h; each coordinate is scaled by 1 + |fd|.
double fd_gradient_check(const CompositionalProblem& s, const Vec& x, double h);

}  // namespace scolab
