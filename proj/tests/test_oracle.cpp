#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "scolab/oracle.hpp"

using namespace scolab;
using testing::make_dataset;
using testing::vec;

TEST_CASE("erm_minimizer examples") {
  SUBCASE("interior least squares") {
    // Targets average to (1, 2); the residual constant is the spread of the targets.
    const Dataset s = make_dataset({vec({0, 2}), vec({2, 2}), vec({1, 1}), vec({1, 3})},
                                   {{Mat::Identity(2, 2), Vec::Zero(2)}});
    const MinimizerCertificate c = erm_minimizer(s, 10.0);
    CHECK(c.x_star.isApprox(vec({1, 2}), 1e-14));
    CHECK(c.value == doctest::Approx(0.5 * (1 + 1 + 1 + 1) / 4.0));
    CHECK(c.method == MinimizerMethod::closed_form);
    CHECK(c.kkt_residual <= 1e-9);
  }
  SUBCASE("target outside the ball") {
    const Dataset s = make_dataset({vec({2, 0})}, {{Mat::Identity(2, 2), Vec::Zero(2)}});
    const MinimizerCertificate c = erm_minimizer(s, 1.0);
    CHECK(c.x_star.isApprox(vec({1, 0}), 1e-10));
    CHECK(c.x_star.norm() <= 1.0 + 1e-12);
    CHECK(c.kkt_residual <= 1e-9);
  }
  SUBCASE("rank-deficient normal equations") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 1.0;
    const Dataset s = make_dataset({vec({3, 1})}, {{a, Vec::Zero(2)}});
    const MinimizerCertificate c = erm_minimizer(s, 10.0);
    CHECK(c.rank_deficient);
    CHECK(c.x_star.isApprox(vec({3, 0}), 1e-12));
    CHECK(c.value == doctest::Approx(0.5));
  }
  CHECK_THROWS_WITH(erm_minimizer(make_dataset({vec({1})}, {{Mat::Identity(1, 1), vec({0})}}), 0.0),
                    "invalid domain");
}

TEST_CASE("erm certificate dominates random feasible points") {
  Rng rng(31);
  for (int inst = 0; inst < 10; ++inst) {
    Rng ir = rng.split("instance", static_cast<std::uint64_t>(inst));
    PopulationLaw law;
    law.a0 = testing::random_matrix(ir, 4 + inst % 3, 5);
    law.b0 = testing::random_matrix(ir, law.a0.rows(), 1);
    law.c0 = 3.0 * testing::random_matrix(ir, law.a0.rows(), 1);
    law.tau_a = law.tau_b = 0.2;
    law.tau_c = 1.0;
    const double radius = inst % 2 ? 0.5 : 10.0;
    const Dataset s = sample_dataset(law, 15, 15, ir.split("data"));
    const MinimizerCertificate c = erm_minimizer(s, radius);
    CHECK(c.x_star.norm() <= radius * (1.0 + 1e-12));
    CHECK(c.kkt_residual <= 1e-9);
    CHECK(kkt_residual(s, c.x_star, radius) <= 1e-9);
    CHECK(empirical_risk(s, c.x_star) == doctest::Approx(c.value).epsilon(1e-10));
    for (int k = 0; k < 1000; ++k) {
      REQUIRE(empirical_risk(s, testing::random_in_ball(ir, 5, radius)) >= c.value - 1e-10);
    }
    if (c.x_star.norm() < radius * (1 - 1e-9)) {
      const MinimizerCertificate pg = projected_gradient_minimizer(s, radius, Vec::Zero(5), 1e-13);
      CHECK(pg.method == MinimizerMethod::projected_gradient_high_precision);
      CHECK((pg.x_star - c.x_star).norm() <= 1e-8);
    } else {
      const MinimizerCertificate pg = projected_gradient_minimizer(s, radius, Vec::Zero(5), 1e-12);
      CHECK(pg.value == doctest::Approx(c.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("population_minimizer") {
  PopulationLaw law = strongly_convex_benchmark();
  SUBCASE("zero-noise law agrees with any sampled dataset") {
    law.tau_a = law.tau_b = law.tau_c = 0.0;
    const MinimizerCertificate pop = population_minimizer(law, 10.0);
    const MinimizerCertificate erm = erm_minimizer(sample_dataset(law, 3, 4, Rng(1)), 10.0);
    CHECK((pop.x_star - erm.x_star).norm() < 1e-10);
    CHECK(pop.value == doctest::Approx(erm.value).epsilon(1e-12));
  }
  SUBCASE("irreducible outer variance") {
    const MinimizerCertificate pop = population_minimizer(law, 10.0);
    const double floor = 0.5 * static_cast<double>(law.c0.size()) * law.tau_c * law.tau_c / 3.0;
    CHECK(pop.value >= floor - 1e-15);
    CHECK(pop.value == doctest::Approx(floor).epsilon(1e-10));  // consistent benchmark
  }
  SUBCASE("Monte Carlo check at and around the minimiser") {
    const MinimizerCertificate pop = population_minimizer(law, 1.0);  // boundary solution
    Rng rng(2);
    auto mc = [&](const Vec& x) {
      const Vec g = law.a0 * x + law.b0;
      const int k = 1'000'000;
      double sum = 0.0, sum2 = 0.0;
      for (int s = 0; s < k; ++s) {
        const double v = outer_eval(sample_outer(law, rng), g);
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / k;
      return std::pair{mean, std::sqrt((sum2 / k - mean * mean) / (k - 1))};
    };
    const auto [mean, se] = mc(pop.x_star);
    CHECK(std::abs(mean - pop.value) < 3.0 * se);
    Rng dir(3);
    for (int k = 0; k < 5; ++k) {
      const Vec nearby = project_ball(pop.x_star + 0.3 * testing::random_on_sphere(dir, 5, 1.0), 1.0);
      const auto [m2, se2] = mc(nearby);
      CHECK(m2 >= pop.value - 3.0 * se2);
    }
  }
}

TEST_CASE("tracking_bound") {
  BoundParams k;
  k.c = 1.0;
  k.dy = 1.0;
  k.lf = k.lg = 1.0;
  k.vg = 1.0;
  const double lead = 1.0 / std::numbers::e;
  CHECK(tracking_bound(Variant::scgd, 10, k, 0.01, 0.1).value == doctest::Approx(lead + 0.01 + 0.2));
  CHECK(tracking_bound(Variant::scgd, 10, k, 0.01, 0.1).value == doctest::Approx(0.57788).epsilon(1e-5));
  CHECK(tracking_bound(Variant::scsc, 10, k, 0.01, 0.1).value == doctest::Approx(lead + 0.001 + 0.2));
  CHECK(tracking_bound(Variant::scsc, 10, k, 0.01, 0.1).value == doctest::Approx(0.56888).epsilon(1e-5));

  BoundParams z;
  z.lf = 1.7;
  z.lg = 1.3;
  const double expected = 1.7 * 1.7 * 1.3 * 1.3 * 1.3 * 0.02 * 0.02 / (0.3 * 0.3);
  CHECK(tracking_bound(Variant::scgd, 5, z, 0.02, 0.3).value == doctest::Approx(expected).epsilon(1e-15));

  CHECK_THROWS_WITH(tracking_bound(Variant::scgd, 0, k, 0.01, 0.1), "bound undefined at t=0");

  BoundParams p;
  p.lf = 2.0;
  p.lg = 1.5;
  p.vg = 0.3;
  p.dy = 4.0;
  for (std::int64_t t = 1; t < 200; ++t) {
    CHECK(tracking_bound(Variant::scsc, t + 1, p, 0.01, 0.1).value <
          tracking_bound(Variant::scsc, t, p, 0.01, 0.1).value);
  }
  BoundParams more = p;
  more.vg *= 2.0;
  CHECK(tracking_bound(Variant::scgd, 7, more, 0.01, 0.1).value > tracking_bound(Variant::scgd, 7, p, 0.01, 0.1).value);
  more = p;
  more.dy *= 2.0;
  CHECK(tracking_bound(Variant::scgd, 7, more, 0.01, 0.1).value > tracking_bound(Variant::scgd, 7, p, 0.01, 0.1).value);
}

TEST_CASE("stability_bound shape proxy") {
  BoundParams k;
  k.c = 2.0;
  const auto a = stability_bound(Variant::scgd, Convexity::convex, 1000, 10, 20, 0.01, 0.1, k);
  const auto b = stability_bound(Variant::scgd, Convexity::convex, 1000, 20, 40, 0.01, 0.1, k);
  CHECK(b.terms[0] == doctest::Approx(a.terms[0] / 2.0));
  CHECK(b.terms[1] == doctest::Approx(a.terms[1] / 2.0));
  for (std::size_t i = 2; i < a.terms.size(); ++i) CHECK(a.terms[i] == b.terms[i]);

  const auto s = stability_bound(Variant::scsc, Convexity::convex, 1000, 10, 20, 0.01, 0.1, k);
  CHECK(s.terms[4] == doctest::Approx(a.terms[4] * std::sqrt(0.1)).epsilon(1e-14));

  // Independent evaluation of the convex SCSC expression at c = 2, eta = beta = T^-0.8, T = 1024.
  const double t = 1024.0, eta = std::pow(t, -0.8), beta = eta;
  const std::size_t n = 50, m = 70;
  const double expected = eta * t / 50.0 + eta * t / 70.0 + eta * std::sqrt(t) +
                          eta * std::pow(t, 0.0) / beta + eta * eta / std::sqrt(beta) * t +
                          eta * std::sqrt(beta) * t;
  const auto v = stability_bound(Variant::scsc, Convexity::convex, 1024, n, m, eta, beta, k);
  CHECK(std::abs(v.value - expected) <= 1e-12 * expected);

  const auto sc = stability_bound(Variant::scgd, Convexity::strongly_convex, 4096, 50, 50, 0.01, 0.1, k);
  const double sc_expected = 0.04 + std::sqrt(0.01) + 0.1 + std::sqrt(0.1) + 1.0 / (4096.0 * 0.1);
  CHECK(sc.value == doctest::Approx(sc_expected).epsilon(1e-14));
  for (double term : sc.terms) CHECK(term >= 0.0);
}

TEST_CASE("optimization_bound is finite and decreasing in T for fixed steps") {
  BoundParams k;
  k.lf = 3.0;
  k.lg = 2.0;
  k.cf = 1.0;
  k.vg = 0.5;
  k.dx = 10.0;
  k.dy = 1.0;
  k.sigma = 0.8;
  for (Variant v : {Variant::scgd, Variant::scsc}) {
    for (Convexity c : {Convexity::convex, Convexity::strongly_convex}) {
      const double lo = optimization_bound(v, c, 256, 0.01, 0.1, k).value;
      const double hi = optimization_bound(v, c, 4096, 0.01, 0.1, k).value;
      CHECK(std::isfinite(lo));
      CHECK(hi < lo);
      CHECK(hi > 0.0);
    }
  }
}

TEST_CASE("fd_gradient_check") {
  const Dataset s = sample_dataset(convex_benchmark(), 20, 20, Rng(41));
  Rng rng(41);
  for (int k = 0; k < 20; ++k) CHECK(fd_gradient_check(s, testing::random_in_ball(rng, 5, 10.0), 1e-5) < 1e-6);

  const Vec star = erm_minimizer(s, 1e6).x_star;
  CHECK(empirical_risk_grad(s, star).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(fd_gradient_check(s, star, 1e-5) < 1e-7);

  // A quadratic is differentiated exactly by central differences, so the
  // truncation ordering needs a curved inner map.
  GenericProblem::Callbacks cb;
  cb.inner_value = [](std::size_t, const Vec& x) {
    return vec({std::sin(2.0 * x(0)) + x(1), std::exp(0.5 * x(1)) * x(0)});
  };
  cb.inner_jacobian = [](std::size_t, const Vec& x) {
    Mat j(2, 2);  // p x d
    j(0, 0) = 2.0 * std::cos(2.0 * x(0));
    j(1, 0) = 1.0;
    j(0, 1) = std::exp(0.5 * x(1));
    j(1, 1) = 0.5 * std::exp(0.5 * x(1)) * x(0);
    return j;
  };
  cb.outer_value = [](std::size_t, const Vec& y) { return 0.5 * (y - vec({0.3, -0.2})).squaredNorm(); };
  cb.outer_gradient = [](std::size_t, const Vec& y) { return Vec(y - vec({0.3, -0.2})); };
  const GenericProblem curved(2, 2, 1, 1, cb);
  const Vec x = vec({0.7, -0.4});
  const double coarse = fd_gradient_check(curved, x, 1e-2);
  const double fine = fd_gradient_check(curved, x, 1e-5);
  CHECK(fine < 1e-8);
  CHECK(coarse > fine);
  CHECK_THROWS_AS(fd_gradient_check(curved, x, 0.0), Error);
}
