#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

#include "scolab/core_math.hpp"

namespace scolab {

/// One inner draw of the affine family: g(x) = a * x + b with a of shape d x p.
struct InnerSample {
  Mat a;
  Vec b;
  bool operator==(const InnerSample& other) const { return a == other.a && b == other.b; }
};

/// One outer draw of the quadratic family: f(y) = 0.5 * ||y - c||^2.
struct OuterSample {
  Vec c;
  bool operator==(const OuterSample& other) const { return c == other.c; }
};

Vec inner_eval(const InnerSample& s, const Vec& x);
/// Jacobian in the p x d convention, i.e. a^T, so mat_vec(jac, grad_f) is the chain rule.
Mat inner_jac(const InnerSample& s, const Vec& x);
double outer_eval(const OuterSample& s, const Vec& y);
Vec outer_grad(const OuterSample& s, const Vec& y);

/**
 * Finite-sum compositional objective F_S(x) = (1/n) sum_i f_i((1/m) sum_j g_j(x)).
 *
 * The optimizer, the oracle checks and the stability lab only talk to this
 * interface; the sample families behind it are free to carry any payload.
 * Output-parameter overloads exist so that the per-step loop never allocates.
 */
class CompositionalProblem {
 public:
  virtual ~CompositionalProblem() = default;

  virtual std::size_t param_dim() const = 0;
  virtual std::size_t inner_dim() const = 0;
  virtual std::size_t inner_count() const = 0;
  virtual std::size_t outer_count() const = 0;

  virtual void inner_value(std::size_t j, const Vec& x, Vec& out) const = 0;
  virtual void inner_jacobian(std::size_t j, const Vec& x, Mat& out) const = 0;
  virtual double outer_value(std::size_t i, const Vec& y) const = 0;
  virtual void outer_gradient(std::size_t i, const Vec& y, Vec& out) const = 0;

  /// g_S(x). The default sums over all inner samples.
  virtual Vec empirical_inner(const Vec& x) const;
  /// Mean Jacobian (p x d). The default sums over all inner samples.
  virtual Mat empirical_jacobian(const Vec& x) const;
};

/// The training set S = S_nu u S_omega of the affine-quadratic family.
class Dataset final : public CompositionalProblem {
 public:
  Dataset(std::vector<OuterSample> outer, std::vector<InnerSample> inner);

  const std::vector<OuterSample>& outer() const { return outer_; }
  const std::vector<InnerSample>& inner() const { return inner_; }
  std::size_t n() const { return outer_.size(); }
  std::size_t m() const { return inner_.size(); }

  const Mat& mean_a() const { return mean_a_; }
  const Vec& mean_b() const { return mean_b_; }
  const Vec& mean_c() const { return mean_c_; }

  Dataset with_outer(std::size_t i, OuterSample replacement) const;
  Dataset with_inner(std::size_t j, InnerSample replacement) const;

  bool operator==(const Dataset& other) const {
    return outer_ == other.outer_ && inner_ == other.inner_;
  }

  std::size_t param_dim() const override { return static_cast<std::size_t>(mean_a_.cols()); }
  std::size_t inner_dim() const override { return static_cast<std::size_t>(mean_a_.rows()); }
  std::size_t inner_count() const override { return inner_.size(); }
  std::size_t outer_count() const override { return outer_.size(); }

  void inner_value(std::size_t j, const Vec& x, Vec& out) const override;
  void inner_jacobian(std::size_t j, const Vec& x, Mat& out) const override;
  double outer_value(std::size_t i, const Vec& y) const override;
  void outer_gradient(std::size_t i, const Vec& y, Vec& out) const override;
  Vec empirical_inner(const Vec& x) const override;
  Mat empirical_jacobian(const Vec& x) const override;

 private:
  void refresh_means();

  std::vector<OuterSample> outer_;
  std::vector<InnerSample> inner_;
  Mat mean_a_;
  Vec mean_b_;
  Vec mean_c_;
};

/// Compositional problem assembled from callables; used for non-affine families.
class GenericProblem final : public CompositionalProblem {
 public:
  struct Callbacks {
    std::function<Vec(std::size_t, const Vec&)> inner_value;
    std::function<Mat(std::size_t, const Vec&)> inner_jacobian;
    std::function<double(std::size_t, const Vec&)> outer_value;
    std::function<Vec(std::size_t, const Vec&)> outer_gradient;
  };

  GenericProblem(std::size_t p, std::size_t d, std::size_t n, std::size_t m, Callbacks cb);

  std::size_t param_dim() const override { return p_; }
  std::size_t inner_dim() const override { return d_; }
  std::size_t inner_count() const override { return m_; }
  std::size_t outer_count() const override { return n_; }

  void inner_value(std::size_t j, const Vec& x, Vec& out) const override;
  void inner_jacobian(std::size_t j, const Vec& x, Mat& out) const override;
  double outer_value(std::size_t i, const Vec& y) const override;
  void outer_gradient(std::size_t i, const Vec& y, Vec& out) const override;

 private:
  std::size_t p_, d_, n_, m_;
  Callbacks cb_;
};

Vec empirical_inner(const CompositionalProblem& s, const Vec& x);
double empirical_risk(const CompositionalProblem& s, const Vec& x);
Vec empirical_risk_grad(const CompositionalProblem& s, const Vec& x);

enum class NoiseKind { uniform_bounded };

/**
 * Sampling law of the affine-quadratic family: every entry of a, b and c is
 * its mean plus independent Uniform[-tau, tau] noise.
 */
struct PopulationLaw {
  Mat a0;  // d x p
  Vec b0;  // d
  Vec c0;  // d
  double tau_a = 0.0;
  double tau_b = 0.0;
  double tau_c = 0.0;
  NoiseKind noise = NoiseKind::uniform_bounded;

  std::size_t param_dim() const { return static_cast<std::size_t>(a0.cols()); }
  std::size_t inner_dim() const { return static_cast<std::size_t>(a0.rows()); }
  void validate() const;

  /// g(x) = E_omega g_omega(x).
  Vec mean_inner(const Vec& x) const;
  /// Var_omega(g_omega(x)) = E ||g_omega(x) - g(x)||^2.
  double inner_variance(const Vec& x) const;
  /// E ||c_nu - c0||^2.
  double outer_variance() const;
};

Dataset sample_dataset(const PopulationLaw& law, std::size_t n, std::size_t m, Rng rng);
InnerSample sample_inner(const PopulationLaw& law, Rng& rng);
OuterSample sample_outer(const PopulationLaw& law, Rng& rng);

double population_risk(const PopulationLaw& law, const Vec& x);
Vec population_risk_grad(const PopulationLaw& law, const Vec& x);

/// Constants of the regularity assumptions, all finite and nonnegative.
struct BoundParams {
  double lf = 0.0;     // Lipschitz constant of f_nu on the operating region
  double lg = 0.0;     // Lipschitz constant of g_omega
  double cf = 0.0;     // Lipschitz constant of grad f_nu
  double l = 0.0;      // smoothness of f_nu(g_S(.))
  double sigma = 0.0;  // strong convexity of F_S
  double vg = 0.0;     // sup over the domain of the empirical inner variance
  double cg = 0.0;     // sup of the empirical Jacobian variance (Frobenius)
  double dx = 0.0;
  double dy = 0.0;
  double c = 2.0;      // free constant of the tracking bound
};

/**
 * Exact constants for the affine-quadratic dataset on the ball of the given
 * radius. `grid` random points of the ball cross-check the exact boundary
 * maximisation used for V_g and L_f. `dy` widens the L_f region by a tracker
 * ball of radius sqrt(dy).
 */
BoundParams compute_constants(const Dataset& s, double domain_radius, std::size_t grid,
                              double dy = 0.0);

/// Constants that hold for every dataset drawn from the law (sup over the noise support).
BoundParams law_constants(const PopulationLaw& law, double domain_radius);

/// max of x^T M x + 2 q^T x + r over ||x|| <= radius, for symmetric PSD M.
double max_quadratic_on_ball(const Mat& quad, const Vec& lin, double constant, double radius);

/// Default convex benchmark: p = 5, d = 4, rank-deficient so sigma = 0.
PopulationLaw convex_benchmark();
/// Strongly convex benchmark: p = 5, d = 5, lambda_min(A0^T A0) = 0.81.
PopulationLaw strongly_convex_benchmark();
/// g(x) = x, f_nu(y) = 0.5 ||y - c_nu||^2: the non-compositional reduction.
PopulationLaw identity_law(std::size_t dim, const Vec& c0, double tau_c);

void write_dataset_csv(const Dataset& s, const std::filesystem::path& dir);
Dataset read_dataset_csv(const std::filesystem::path& dir);

}  // namespace scolab
