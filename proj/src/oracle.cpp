#include "scolab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scolab {

std::string to_string(MinimizerMethod m) {
  return m == MinimizerMethod::closed_form ? "closed_form" : "projected_gradient_high_precision";
}

namespace {

/// min 0.5 ||A x - r||^2 over ||x|| <= radius (constant terms excluded).
struct BallLeastSquares {
  Mat a;
  Vec r;
  double radius;

  Vec gradient(const Vec& x) const { return a.transpose() * (a * x - r); }

  double residual(const Vec& x) const {
    Vec probe = x - gradient(x);
    project_ball_inplace(probe, radius);
    return (x - probe).norm();
  }

  double lipschitz() const {
    const Eigen::SelfAdjointEigenSolver<Mat> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
    return std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  }

  // Returns the number of iterations used, or -1 when the budget ran out.
  std::int64_t polish(Vec& x, double tolerance, std::int64_t max_iterations) const {
    const double step = 1.0 / lipschitz();
    for (std::int64_t it = 0; it < max_iterations; ++it) {
      if (residual(x) <= tolerance) return it;
      x -= step * gradient(x);
      project_ball_inplace(x, radius);
    }
    return residual(x) <= tolerance ? max_iterations : -1;
  }

  MinimizerCertificate solve(double tolerance) const {
    MinimizerCertificate cert;
    const Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
    cert.rank_deficient = cod.rank() < a.cols();
    Vec x = cod.solve(r);
    if (x.norm() <= radius) {
      cert.method = MinimizerMethod::closed_form;
      cert.x_star = x;
      cert.kkt_residual = residual(x);
      if (cert.kkt_residual > tolerance) {
        // Ill-conditioned solve; a few projected steps restore the certificate.
        polish(cert.x_star, tolerance, 1'000'000);
        cert.kkt_residual = residual(cert.x_star);
      }
      return cert;
    }

    // Boundary solution: x(mu) = (A^T A + mu I)^-1 A^T r with ||x(mu)|| = radius.
    const Mat gram = a.transpose() * a;
    const Vec rhs = a.transpose() * r;
    const Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    const Vec& lam = eig.eigenvalues();
    const Vec rt = eig.eigenvectors().transpose() * rhs;
    auto norm_at = [&](double mu) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double den = std::max(lam(i), 0.0) + mu;
        if (den > 0.0) s += (rt(i) / den) * (rt(i) / den);
      }
      return std::sqrt(s);
    };
    double lo = 0.0;
    double hi = rhs.norm() / radius + 1e-300;
    while (norm_at(hi) > radius) hi *= 2.0;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (norm_at(mid) > radius) lo = mid; else hi = mid;
    }
    Vec xt(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double den = std::max(lam(i), 0.0) + hi;
      xt(i) = den > 0.0 ? rt(i) / den : 0.0;
    }
    x = eig.eigenvectors() * xt;
    project_ball_inplace(x, radius);
    polish(x, tolerance, 5'000'000);
    cert.method = MinimizerMethod::projected_gradient_high_precision;
    cert.x_star = x;
    cert.kkt_residual = residual(x);
    return cert;
  }
};

}  // namespace

double kkt_residual(const Dataset& s, const Vec& x, double radius) {
  Vec probe = x - empirical_risk_grad(s, x);
  project_ball_inplace(probe, radius);
  return (x - probe).norm();
}

MinimizerCertificate erm_minimizer(const Dataset& s, double radius) {
  if (!(radius > 0.0)) throw Error("invalid domain");
  const BallLeastSquares ls{s.mean_a(), s.mean_c() - s.mean_b(), radius};
  MinimizerCertificate cert = ls.solve(kKktTolerance);
  cert.value = empirical_risk(s, cert.x_star);
  cert.kkt_residual = kkt_residual(s, cert.x_star, radius);
  return cert;
}

MinimizerCertificate population_minimizer(const PopulationLaw& law, double radius) {
  if (!(radius > 0.0)) throw Error("invalid domain");
  law.validate();
  const BallLeastSquares ls{law.a0, law.c0 - law.b0, radius};
  MinimizerCertificate cert = ls.solve(kKktTolerance);
  cert.value = population_risk(law, cert.x_star);
  return cert;
}

MinimizerCertificate projected_gradient_minimizer(const Dataset& s, double radius, const Vec& x0,
                                                  double tolerance, std::int64_t max_iterations) {
  if (!(radius > 0.0)) throw Error("invalid domain");
  const BallLeastSquares ls{s.mean_a(), s.mean_c() - s.mean_b(), radius};
  Vec x = project_ball(x0, radius);
  if (ls.polish(x, tolerance, max_iterations) < 0) {
    throw Error("projected gradient did not reach the requested residual");
  }
  MinimizerCertificate cert;
  cert.method = MinimizerMethod::projected_gradient_high_precision;
  cert.x_star = x;
  cert.value = empirical_risk(s, x);
  cert.kkt_residual = kkt_residual(s, x, radius);
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

double sum_of(const std::vector<double>& terms) {
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(what) + " must be > 0");
}

}  // namespace

BoundValue tracking_bound(Variant variant, std::int64_t t, const BoundParams& params, double eta,
                          double beta) {
  if (t <= 0) throw Error("bound undefined at t=0");
  require_positive(params.c, "c");
  require_positive(beta, "beta");
  if (!(eta >= 0.0)) throw Error("eta must be ≥ 0");
  const double c = params.c;
  const double tb = static_cast<double>(t) * beta;
  const double lead = std::pow(c / std::numbers::e, c) * std::pow(tb, -c) * params.dy;
  const double beta_power = variant == Variant::scgd ? beta * beta : beta;
  const double drift =
      params.lf * params.lf * std::pow(params.lg, 3) * eta * eta / beta_power;
  const double noise = 2.0 * params.vg * beta;
  BoundValue out;
  out.which = BoundKind::tracking;
  out.inputs = {variant, params, t, eta, beta, 0, 0};
  out.terms = {lead, drift, noise};
  out.value = sum_of(out.terms);
  return out;
}

BoundValue stability_bound(Variant variant, Convexity convexity, std::int64_t T, std::size_t n,
                           std::size_t m, double eta, double beta, const BoundParams& params) {
  if (T < 1) throw Error("T must be ≥ 1");
  if (n == 0 || m == 0) throw Error("empty dataset");
  require_positive(eta, "eta");
  require_positive(beta, "beta");
  require_positive(params.c, "c");
  const double t = static_cast<double>(T);
  const double c = params.c;
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  BoundValue out;
  out.inputs = {variant, params, T, eta, beta, n, m};
  if (convexity == Convexity::convex) {
    out.which = BoundKind::stability_convex;
    const double coupling = variant == Variant::scgd ? eta * eta / beta * t
                                                     : eta * eta / std::sqrt(beta) * t;
    out.terms = {eta * t / nn,
                 eta * t / mm,
                 eta * std::sqrt(t),
                 eta * std::pow(t, 1.0 - c / 2.0) * std::pow(beta, -c / 2.0),
                 coupling,
                 eta * std::sqrt(beta) * t};
  } else {
    out.which = BoundKind::stability_strongly_convex;
    const double coupling = variant == Variant::scgd ? eta / beta : eta / std::sqrt(beta);
    out.terms = {1.0 / nn,
                 1.0 / mm,
                 std::sqrt(eta),
                 coupling,
                 std::sqrt(beta),
                 std::pow(t, -c / 2.0) * std::pow(beta, -c / 2.0)};
  }
  out.value = sum_of(out.terms);
  return out;
}

BoundValue optimization_bound(Variant variant, Convexity convexity, std::int64_t T, double eta,
                              double beta, const BoundParams& k) {
  if (T < 1) throw Error("T must be ≥ 1");
  require_positive(eta, "eta");
  require_positive(beta, "beta");
  require_positive(k.c, "c");
  const double t = static_cast<double>(T);
  const double c = k.c;
  const double lf2 = k.lf * k.lf;
  const double lg2 = k.lg * k.lg;
  BoundValue out;
  out.inputs = {variant, k, T, eta, beta, 0, 0};
  if (convexity == Convexity::convex) {
    out.which = BoundKind::optimization_convex;
    if (variant == Variant::scgd) {
      out.terms = {k.dx / (eta * t),
                   lf2 * lg2 * eta,
                   k.cf * k.dy * std::pow(beta * t, 1.0 - c) / (eta * t),
                   k.cf * k.vg * beta * beta / eta,
                   k.cf * lf2 * lg2 * k.lg * k.dx * eta / beta};
    } else {
      out.terms = {k.dx / (eta * t),
                   lf2 * lg2 * eta,
                   k.cf * k.dy * std::pow(beta * t, -c) / std::sqrt(beta),
                   k.cf * k.vg * std::sqrt(beta),
                   k.cf * lf2 * lg2 * k.lg * eta * eta * std::pow(beta, -1.5),
                   k.cf * lg2 * k.dx * std::sqrt(beta)};
    }
  } else {
    out.which = BoundKind::optimization_strongly_convex;
    require_positive(k.sigma, "sigma");
    const double cf2 = k.cf * k.cf;
    const double coupling = variant == Variant::scgd ? eta * eta / (beta * beta) : eta * eta / beta;
    out.terms = {k.dx * std::pow(eta * t, -c),
                 lf2 * lg2 * eta,
                 cf2 * lg2 * k.dy / k.sigma * std::pow(beta * t, -c),
                 cf2 * lg2 * k.vg / k.sigma * beta,
                 cf2 * lf2 * lg2 * lg2 * k.lg / k.sigma * coupling};
  }
  out.value = sum_of(out.terms);
  return out;
}

double fd_gradient_check(const CompositionalProblem& s, const Vec& x, double h) {
  if (!(h > 0.0)) throw Error("h must be > 0");
  const Vec analytic = empirical_risk_grad(s, x);
  double worst = 0.0;
  Vec probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + h;
    const double up = empirical_risk(s, probe);
    probe(k) = x(k) - h;
    const double down = empirical_risk(s, probe);
    probe(k) = x(k);
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic(k) - fd) / (1.0 + std::abs(fd)));
  }
  return worst;
}

}  // namespace scolab
