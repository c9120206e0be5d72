#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace scolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Every precondition or numerical failure in the library surfaces as this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output could not be written; the CLI maps this to exit code 1.
class WriteError : public Error {
 public:
  using Error::Error;
};

/// 17 significant digits, so every double round-trips exactly.
std::string format_real(double v);
/// Inverse of format_real; also accepts nan, inf and -inf. Throws Error on junk.
double parse_real(std::string_view s);

bool all_finite(const Vec& x);
bool all_finite(const Mat& a);

/// Euclidean projection onto the closed ball {x : ||x|| <= radius}.
Vec project_ball(const Vec& x, double radius);

/// In-place variant used on hot paths; same contract as project_ball.
void project_ball_inplace(Vec& x, double radius);

/// J (p x d) times v (d) -> p.
Vec mat_vec(const Mat& jac, const Vec& v);

/**
 * Splittable pseudo-random stream.
 *
 * A stream is identified by (seed, stream id). Children are keyed by the
 * parent's identity and a label, never by how many numbers the parent has
 * drawn, so the same child is obtained no matter when or on which thread
 * split() is called. All draws are implemented on top of the raw 64-bit
 * engine output, which the standard fixes bit-for-bit; the std
 * distributions are avoided because their algorithms are
 * implementation-defined.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::string_view label) const;
  Rng split(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Mean and standard error of a sample (sample standard deviation / sqrt(k)).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

MeanSe mean_se(std::span<const double> values);

/// Ordinary least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace scolab
