#include "scolab/core_math.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace scolab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t engine_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("not a number: '" + std::string(s) + "'");
  }
  return v;
}

bool all_finite(const Vec& x) { return x.allFinite(); }
bool all_finite(const Mat& a) { return a.allFinite(); }

void project_ball_inplace(Vec& x, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("invalid domain");
  if (!x.allFinite()) throw Error("non-finite vector");
  const double norm = x.norm();
  if (norm <= radius) return;
  x *= radius / norm;
  // Rounding can leave the result a few ulps outside; shrink until it is inside
  // so that projecting again is the identity.
  while (x.norm() > radius) x *= 1.0 - std::numeric_limits<double>::epsilon();
}

Vec project_ball(const Vec& x, double radius) {
  Vec out = x;
  project_ball_inplace(out, radius);
  return out;
}

Vec mat_vec(const Mat& jac, const Vec& v) {
  if (jac.cols() != v.size()) {
    throw Error("dimension mismatch: matrix has " + std::to_string(jac.cols()) +
                " columns, vector has " + std::to_string(v.size()) + " entries");
  }
  return jac * v;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(engine_key(seed, stream)) {}

Rng Rng::split(std::string_view label) const {
  const std::uint64_t child = splitmix64(stream_ ^ splitmix64(fnv1a(label)));
  return Rng(seed_, child);
}

Rng Rng::split(std::string_view label, std::uint64_t index) const {
  const std::uint64_t child =
      splitmix64(stream_ ^ splitmix64(fnv1a(label) + splitmix64(index)));
  return Rng(seed_, child);
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  // Lemire's multiply-shift with rejection; unbiased.
  const std::uint64_t range = n;
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  const auto k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace scolab
