#pragma once

#include <cmath>

#include "scolab/core_math.hpp"
#include "scolab/problems.hpp"

namespace testing {

inline scolab::Vec random_in_ball(scolab::Rng& rng, Eigen::Index p, double radius) {
  scolab::Vec x(p);
  for (Eigen::Index i = 0; i < p; ++i) x(i) = rng.uniform(-1.0, 1.0);
  const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(p));
  return x * (r / x.norm());
}

inline scolab::Vec random_on_sphere(scolab::Rng& rng, Eigen::Index p, double radius) {
  scolab::Vec x(p);
  do {
    for (Eigen::Index i = 0; i < p; ++i) x(i) = rng.uniform(-1.0, 1.0);
  } while (x.norm() > 1.0 || x.norm() < 1e-3);
  return x * (radius / x.norm());
}

inline scolab::Mat random_matrix(scolab::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  scolab::Mat a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

// Hand-built dataset: every inner sample (a, b), outer targets as given.
inline scolab::Dataset make_dataset(const std::vector<scolab::Vec>& targets,
                                    const std::vector<std::pair<scolab::Mat, scolab::Vec>>& inner) {
  std::vector<scolab::OuterSample> outer;
  for (const auto& c : targets) outer.push_back({c});
  std::vector<scolab::InnerSample> in;
  for (const auto& [a, b] : inner) in.push_back({a, b});
  return scolab::Dataset(std::move(outer), std::move(in));
}

inline scolab::Vec vec(std::initializer_list<double> v) {
  scolab::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

// Central-difference gradient of the empirical risk, written independently of the library.
template <class F>
scolab::Vec fd_gradient(F&& f, const scolab::Vec& x, double h) {
  scolab::Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    scolab::Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace testing
