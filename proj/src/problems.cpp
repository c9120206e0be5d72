#include "scolab/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace scolab {

namespace {

void require_dim(std::size_t expected, Eigen::Index got, const char* what) {
  if (static_cast<Eigen::Index>(expected) != got) {
    throw Error(std::string("dimension mismatch: ") + what + " expected " +
                std::to_string(expected) + ", got " + std::to_string(got));
  }
}

Mat householder(const Vec& u) {
  const auto k = u.size();
  return Mat::Identity(k, k) - 2.0 * u * u.transpose() / u.squaredNorm();
}

Mat rotated_diagonal(std::size_t d, std::size_t p, const Vec& singular, const Vec& left,
                     const Vec& right) {
  Mat diag = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(p));
  for (Eigen::Index k = 0; k < singular.size(); ++k) diag(k, k) = singular(k);
  return householder(left) * diag * householder(right);
}

}  // namespace

Vec inner_eval(const InnerSample& s, const Vec& x) {
  require_dim(static_cast<std::size_t>(s.a.cols()), x.size(), "inner argument");
  return s.a * x + s.b;
}

Mat inner_jac(const InnerSample& s, const Vec& x) {
  require_dim(static_cast<std::size_t>(s.a.cols()), x.size(), "inner argument");
  return s.a.transpose();
}

double outer_eval(const OuterSample& s, const Vec& y) {
  require_dim(static_cast<std::size_t>(s.c.size()), y.size(), "outer argument");
  return 0.5 * (y - s.c).squaredNorm();
}

Vec outer_grad(const OuterSample& s, const Vec& y) {
  require_dim(static_cast<std::size_t>(s.c.size()), y.size(), "outer argument");
  return y - s.c;
}

// ---------------------------------------------------------------------------

Vec CompositionalProblem::empirical_inner(const Vec& x) const {
  Vec sum = Vec::Zero(static_cast<Eigen::Index>(inner_dim()));
  Vec g(static_cast<Eigen::Index>(inner_dim()));
  for (std::size_t j = 0; j < inner_count(); ++j) {
    inner_value(j, x, g);
    sum += g;
  }
  return sum / static_cast<double>(inner_count());
}

Mat CompositionalProblem::empirical_jacobian(const Vec& x) const {
  Mat sum = Mat::Zero(static_cast<Eigen::Index>(param_dim()), static_cast<Eigen::Index>(inner_dim()));
  Mat jac;
  for (std::size_t j = 0; j < inner_count(); ++j) {
    inner_jacobian(j, x, jac);
    sum += jac;
  }
  return sum / static_cast<double>(inner_count());
}

Vec empirical_inner(const CompositionalProblem& s, const Vec& x) {
  require_dim(s.param_dim(), x.size(), "parameter");
  return s.empirical_inner(x);
}

double empirical_risk(const CompositionalProblem& s, const Vec& x) {
  const Vec g = empirical_inner(s, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.outer_count(); ++i) sum += s.outer_value(i, g);
  return sum / static_cast<double>(s.outer_count());
}

Vec empirical_risk_grad(const CompositionalProblem& s, const Vec& x) {
  const Vec g = empirical_inner(s, x);
  Vec mean_grad = Vec::Zero(static_cast<Eigen::Index>(s.inner_dim()));
  Vec grad(static_cast<Eigen::Index>(s.inner_dim()));
  for (std::size_t i = 0; i < s.outer_count(); ++i) {
    s.outer_gradient(i, g, grad);
    mean_grad += grad;
  }
  mean_grad /= static_cast<double>(s.outer_count());
  return mat_vec(s.empirical_jacobian(x), mean_grad);
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<OuterSample> outer, std::vector<InnerSample> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (outer_.empty() || inner_.empty()) throw Error("empty dataset");
  const auto d = inner_.front().a.rows();
  const auto p = inner_.front().a.cols();
  if (d == 0 || p == 0) throw Error("dimension mismatch: zero-sized inner sample");
  for (const auto& s : inner_) {
    if (s.a.rows() != d || s.a.cols() != p || s.b.size() != d) {
      throw Error("dimension mismatch: inconsistent inner samples");
    }
    if (!s.a.allFinite() || !s.b.allFinite()) throw Error("non-finite vector");
  }
  for (const auto& s : outer_) {
    if (s.c.size() != d) throw Error("dimension mismatch: outer sample vs inner output");
    if (!s.c.allFinite()) throw Error("non-finite vector");
  }
  refresh_means();
}

void Dataset::refresh_means() {
  mean_a_ = Mat::Zero(inner_.front().a.rows(), inner_.front().a.cols());
  mean_b_ = Vec::Zero(inner_.front().b.size());
  for (const auto& s : inner_) {
    mean_a_ += s.a;
    mean_b_ += s.b;
  }
  mean_a_ /= static_cast<double>(inner_.size());
  mean_b_ /= static_cast<double>(inner_.size());
  mean_c_ = Vec::Zero(outer_.front().c.size());
  for (const auto& s : outer_) mean_c_ += s.c;
  mean_c_ /= static_cast<double>(outer_.size());
}

Dataset Dataset::with_outer(std::size_t i, OuterSample replacement) const {
  if (i >= outer_.size()) throw Error("neighbor index out of range");
  auto outer = outer_;
  outer[i] = std::move(replacement);
  return Dataset(std::move(outer), inner_);
}

Dataset Dataset::with_inner(std::size_t j, InnerSample replacement) const {
  if (j >= inner_.size()) throw Error("neighbor index out of range");
  auto inner = inner_;
  inner[j] = std::move(replacement);
  return Dataset(outer_, std::move(inner));
}

void Dataset::inner_value(std::size_t j, const Vec& x, Vec& out) const {
  const auto& s = inner_[j];
  out.noalias() = s.a * x;
  out += s.b;
}

void Dataset::inner_jacobian(std::size_t j, const Vec&, Mat& out) const {
  out = inner_[j].a.transpose();
}

double Dataset::outer_value(std::size_t i, const Vec& y) const {
  return 0.5 * (y - outer_[i].c).squaredNorm();
}

void Dataset::outer_gradient(std::size_t i, const Vec& y, Vec& out) const {
  out = y - outer_[i].c;
}

Vec Dataset::empirical_inner(const Vec& x) const {
  Vec g = mean_a_ * x;
  g += mean_b_;
  return g;
}

Mat Dataset::empirical_jacobian(const Vec&) const { return mean_a_.transpose(); }

// ---------------------------------------------------------------------------

GenericProblem::GenericProblem(std::size_t p, std::size_t d, std::size_t n, std::size_t m,
                               Callbacks cb)
    : p_(p), d_(d), n_(n), m_(m), cb_(std::move(cb)) {
  if (n_ == 0 || m_ == 0) throw Error("empty dataset");
  if (!cb_.inner_value || !cb_.inner_jacobian || !cb_.outer_value || !cb_.outer_gradient) {
    throw Error("GenericProblem: every callback must be set");
  }
}

void GenericProblem::inner_value(std::size_t j, const Vec& x, Vec& out) const {
  out = cb_.inner_value(j, x);
}

void GenericProblem::inner_jacobian(std::size_t j, const Vec& x, Mat& out) const {
  out = cb_.inner_jacobian(j, x);
}

double GenericProblem::outer_value(std::size_t i, const Vec& y) const {
  return cb_.outer_value(i, y);
}

void GenericProblem::outer_gradient(std::size_t i, const Vec& y, Vec& out) const {
  out = cb_.outer_gradient(i, y);
}

// ---------------------------------------------------------------------------

void PopulationLaw::validate() const {
  if (a0.rows() == 0 || a0.cols() == 0) throw Error("population law: empty inner matrix");
  if (b0.size() != a0.rows() || c0.size() != a0.rows()) {
    throw Error("dimension mismatch: population law offsets");
  }
  if (!(tau_a >= 0.0) || !(tau_b >= 0.0) || !(tau_c >= 0.0)) {
    throw Error("population law: noise scales must be >= 0");
  }
  if (!a0.allFinite() || !b0.allFinite() || !c0.allFinite()) throw Error("non-finite vector");
}

Vec PopulationLaw::mean_inner(const Vec& x) const {
  require_dim(param_dim(), x.size(), "parameter");
  return a0 * x + b0;
}

double PopulationLaw::inner_variance(const Vec& x) const {
  // Each row of (a - a0) x is a sum of p independent terms x_k * U[-tau, tau].
  const auto d = static_cast<double>(inner_dim());
  return d * (tau_a * tau_a * x.squaredNorm() + tau_b * tau_b) / 3.0;
}

double PopulationLaw::outer_variance() const {
  return static_cast<double>(inner_dim()) * tau_c * tau_c / 3.0;
}

InnerSample sample_inner(const PopulationLaw& law, Rng& rng) {
  InnerSample s{law.a0, law.b0};
  for (Eigen::Index c = 0; c < s.a.cols(); ++c) {
    for (Eigen::Index r = 0; r < s.a.rows(); ++r) s.a(r, c) += rng.uniform(-law.tau_a, law.tau_a);
  }
  for (Eigen::Index r = 0; r < s.b.size(); ++r) s.b(r) += rng.uniform(-law.tau_b, law.tau_b);
  return s;
}

OuterSample sample_outer(const PopulationLaw& law, Rng& rng) {
  OuterSample s{law.c0};
  for (Eigen::Index r = 0; r < s.c.size(); ++r) s.c(r) += rng.uniform(-law.tau_c, law.tau_c);
  return s;
}

Dataset sample_dataset(const PopulationLaw& law, std::size_t n, std::size_t m, Rng rng) {
  if (n == 0 || m == 0) throw Error("empty dataset");
  law.validate();
  // Separate streams so the first k samples of each family do not depend on n or m.
  Rng outer_rng = rng.split("outer");
  Rng inner_rng = rng.split("inner");
  std::vector<OuterSample> outer;
  outer.reserve(n);
  for (std::size_t i = 0; i < n; ++i) outer.push_back(sample_outer(law, outer_rng));
  std::vector<InnerSample> inner;
  inner.reserve(m);
  for (std::size_t j = 0; j < m; ++j) inner.push_back(sample_inner(law, inner_rng));
  return Dataset(std::move(outer), std::move(inner));
}

double population_risk(const PopulationLaw& law, const Vec& x) {
  if (law.noise != NoiseKind::uniform_bounded) throw Error("no analytic population risk");
  const Vec r = law.mean_inner(x) - law.c0;
  return 0.5 * r.squaredNorm() + 0.5 * law.outer_variance();
}

Vec population_risk_grad(const PopulationLaw& law, const Vec& x) {
  if (law.noise != NoiseKind::uniform_bounded) throw Error("no analytic population risk");
  return law.a0.transpose() * (law.mean_inner(x) - law.c0);
}

// ---------------------------------------------------------------------------

namespace {

/// Global maximiser of x^T M x + 2 q^T x over the sphere ||x|| = radius, via the
/// secular equation (mu I - M) x = q with mu >= lambda_max.
class BallQuadraticMax {
 public:
  explicit BallQuadraticMax(const Mat& quad) : eig_(quad) {
    if (eig_.info() != Eigen::Success) throw Error("eigendecomposition failed");
  }

  double operator()(const Vec& lin, double constant, double radius) const {
    const Vec& lam = eig_.eigenvalues();
    const Mat& q = eig_.eigenvectors();
    const Vec qt = q.transpose() * lin;
    const auto k = lam.size();
    const double lmax = lam(k - 1);
    const double scale = std::max({1.0, std::abs(lmax), lin.norm()});
    const double tie = 1e-12 * scale;

    auto value_of = [&](const Vec& xt) {
      double v = constant;
      for (Eigen::Index i = 0; i < k; ++i) v += lam(i) * xt(i) * xt(i) + 2.0 * qt(i) * xt(i);
      return v;
    };

    // Norm of x(mu) restricted to components below the top eigenvalue cluster.
    auto norm_at = [&](double mu) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double den = mu - lam(i);
        s += (qt(i) / den) * (qt(i) / den);
      }
      return std::sqrt(s);
    };

    double top_weight = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (lam(i) >= lmax - tie) top_weight += qt(i) * qt(i);
    }

    Vec xt(k);
    if (std::sqrt(top_weight) <= tie) {
      // Possible hard case: top cluster is orthogonal to the linear term.
      double rest = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (lam(i) < lmax - tie) {
          const double v = qt(i) / (lmax - lam(i));
          rest += v * v;
        }
      }
      if (rest <= radius * radius) {
        for (Eigen::Index i = 0; i < k; ++i) {
          xt(i) = lam(i) < lmax - tie ? qt(i) / (lmax - lam(i)) : 0.0;
        }
        const double fill = std::sqrt(radius * radius - rest);
        xt(k - 1) = fill;  // any unit vector in the top cluster works
        return value_of(xt);
      }
    }

    double lo = lmax;
    double hi = lmax + lin.norm() / radius + tie;
    while (norm_at(hi) > radius) hi = lmax + 2.0 * (hi - lmax);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (norm_at(mid) > radius) lo = mid; else hi = mid;
    }
    for (Eigen::Index i = 0; i < k; ++i) xt(i) = qt(i) / (hi - lam(i));
    // Rescale onto the sphere to absorb the bisection residual.
    const double nrm = xt.norm();
    if (nrm > 0.0) xt *= radius / nrm;
    return value_of(xt);
  }

 private:
  Eigen::SelfAdjointEigenSolver<Mat> eig_;
};

double grid_max(const Mat& quad, const Vec& lin, double constant, double radius,
                std::size_t grid, Rng& rng) {
  const auto p = lin.size();
  double best = constant;
  Vec x(p);
  for (std::size_t g = 0; g < grid; ++g) {
    for (Eigen::Index k = 0; k < p; ++k) x(k) = rng.uniform(-1.0, 1.0);
    const double nrm = x.norm();
    if (nrm == 0.0) continue;
    // Alternate sphere and interior points.
    x *= (g % 2 == 0 ? radius : radius * rng.uniform01()) / nrm;
    best = std::max(best, x.dot(quad * x) + 2.0 * lin.dot(x) + constant);
  }
  return best;
}

}  // namespace

double max_quadratic_on_ball(const Mat& quad, const Vec& lin, double constant, double radius) {
  if (!(radius > 0.0)) throw Error("invalid domain");
  return BallQuadraticMax(quad)(lin, constant, radius);
}

BoundParams compute_constants(const Dataset& s, double domain_radius, std::size_t grid,
                              double dy) {
  if (!(domain_radius > 0.0)) throw Error("invalid domain");
  if (!(dy >= 0.0)) throw Error("compute_constants: dy must be >= 0");
  BoundParams out;
  const Mat& abar = s.mean_a();
  const Vec& bbar = s.mean_b();
  const auto p = abar.cols();

  for (const auto& w : s.inner()) {
    const Eigen::JacobiSVD<Mat> svd(w.a);
    out.lg = std::max(out.lg, svd.singularValues()(0));
  }
  out.cf = 1.0;

  Mat dev_quad = Mat::Zero(p, p);
  Vec dev_lin = Vec::Zero(p);
  double dev_const = 0.0;
  for (const auto& w : s.inner()) {
    const Mat da = w.a - abar;
    const Vec db = w.b - bbar;
    out.cg += da.squaredNorm();
    dev_quad += da.transpose() * da;
    dev_lin += da.transpose() * db;
    dev_const += db.squaredNorm();
  }
  const auto m = static_cast<double>(s.m());
  out.cg /= m;
  dev_quad /= m;
  dev_lin /= m;
  dev_const /= m;

  const Mat gram = abar.transpose() * abar;
  const Eigen::SelfAdjointEigenSolver<Mat> gram_eig(gram, Eigen::EigenvaluesOnly);
  out.sigma = std::max(0.0, gram_eig.eigenvalues()(0));
  out.l = std::max(out.sigma, gram_eig.eigenvalues()(p - 1));

  Rng grid_rng(0x5c01ab5eedULL);
  out.vg = std::max(BallQuadraticMax(dev_quad)(dev_lin, dev_const, domain_radius),
                    grid_max(dev_quad, dev_lin, dev_const, domain_radius, grid, grid_rng));
  out.vg = std::max(out.vg, 0.0);

  // L_f: max over i and x in the ball of ||abar x + bbar - c_i||, widened by sqrt(dy).
  const BallQuadraticMax residual_max(gram);
  double worst = 0.0;
  for (const auto& nu : s.outer()) {
    const Vec shift = bbar - nu.c;
    const Vec lin = abar.transpose() * shift;
    const double cst = shift.squaredNorm();
    double v = residual_max(lin, cst, domain_radius);
    if (grid > 0) {
      Rng r = grid_rng.split("lf");
      v = std::max(v, grid_max(gram, lin, cst, domain_radius, std::min<std::size_t>(grid, 256), r));
    }
    worst = std::max(worst, v);
  }
  out.lf = std::sqrt(std::max(worst, 0.0)) + std::sqrt(dy);

  out.dx = 4.0 * domain_radius * domain_radius;
  out.dy = dy;
  return out;
}

BoundParams law_constants(const PopulationLaw& law, double domain_radius) {
  law.validate();
  if (!(domain_radius > 0.0)) throw Error("invalid domain");
  BoundParams out;
  const auto d = static_cast<double>(law.inner_dim());
  const auto p = static_cast<double>(law.param_dim());
  const Eigen::JacobiSVD<Mat> svd(law.a0);
  const double a_noise = law.tau_a * std::sqrt(d * p);
  out.lg = svd.singularValues()(0) + a_noise;
  out.cf = 1.0;
  const Mat gram = law.a0.transpose() * law.a0;
  const Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  out.sigma = std::max(0.0, eig.eigenvalues()(0));
  out.l = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  // Region where f_nu is evaluated: g(x) and g_S(x) for x in the ball.
  const Vec shift = law.b0 - law.c0;
  const double center =
      std::sqrt(std::max(0.0, max_quadratic_on_ball(gram, law.a0.transpose() * shift,
                                                    shift.squaredNorm(), domain_radius)));
  out.lf = center + a_noise * domain_radius + law.tau_b * std::sqrt(d) + law.tau_c * std::sqrt(d);
  // Empirical variances are at most the mean squared distance to the noiseless
  // value, so the largest noise realisation bounds them for every dataset.
  const double reach = a_noise * domain_radius + law.tau_b * std::sqrt(d);
  out.vg = reach * reach;
  out.cg = d * p * law.tau_a * law.tau_a;
  out.dx = 4.0 * domain_radius * domain_radius;
  return out;
}

// ---------------------------------------------------------------------------

PopulationLaw convex_benchmark() {
  PopulationLaw law;
  Vec s(4);
  s << 2.0, 1.0, 0.5, 0.05;
  Vec u(4), v(5);
  u << 1.0, -2.0, 1.0, 3.0;
  v << 1.0, 1.0, -2.0, 1.0, 2.0;
  law.a0 = rotated_diagonal(4, 5, s, u, v);
  law.b0 = Vec(4);
  law.b0 << 0.5, -0.25, 0.2, 0.1;
  Vec target(5);
  target << 1.0, -1.0, 0.5, 0.75, -0.5;
  law.c0 = law.a0 * target + law.b0;
  law.tau_a = 0.05;
  law.tau_b = 0.1;
  law.tau_c = 0.5;
  return law;
}

PopulationLaw strongly_convex_benchmark() {
  PopulationLaw law;
  Vec s(5);
  s << 2.0, 1.6, 1.3, 1.0, 0.9;
  Vec u(5), v(5);
  u << 2.0, 1.0, -1.0, 1.0, -3.0;
  v << 1.0, 1.0, -2.0, 1.0, 2.0;
  law.a0 = rotated_diagonal(5, 5, s, u, v);
  law.b0 = Vec(5);
  law.b0 << 0.5, -0.25, 0.2, 0.1, -0.3;
  Vec target(5);
  target << 2.0, -1.5, 1.0, 0.5, -1.0;
  law.c0 = law.a0 * target + law.b0;
  law.tau_a = 0.05;
  law.tau_b = 0.1;
  law.tau_c = 0.5;
  return law;
}

PopulationLaw identity_law(std::size_t dim, const Vec& c0, double tau_c) {
  require_dim(dim, c0.size(), "identity law target");
  PopulationLaw law;
  law.a0 = Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  law.b0 = Vec::Zero(static_cast<Eigen::Index>(dim));
  law.c0 = c0;
  law.tau_c = tau_c;
  return law;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::size_t to_count(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("dataset csv: bad count '" + s + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  return rows;
}

}  // namespace

void write_dataset_csv(const Dataset& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto p = s.param_dim();
  const auto d = s.inner_dim();
  {
    std::ofstream out(dir / "inner.csv");
    if (!out) throw WriteError("cannot write " + (dir / "inner.csv").string());
    out << "p,d,m\n" << p << ',' << d << ',' << s.m() << '\n';
    bool first = true;
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        out << (first ? "" : ",") << "a_" << r << '_' << c;
        first = false;
      }
    }
    for (std::size_t r = 0; r < d; ++r) out << ",b_" << r;
    out << '\n';
    for (const auto& w : s.inner()) {
      first = true;
      for (Eigen::Index r = 0; r < w.a.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.a.cols(); ++c) {
          out << (first ? "" : ",") << format_real(w.a(r, c));
          first = false;
        }
      }
      for (Eigen::Index r = 0; r < w.b.size(); ++r) out << ',' << format_real(w.b(r));
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "outer.csv");
    if (!out) throw WriteError("cannot write " + (dir / "outer.csv").string());
    out << "d,n\n" << d << ',' << s.n() << '\n';
    for (std::size_t r = 0; r < d; ++r) out << (r ? "," : "") << "c_" << r;
    out << '\n';
    for (const auto& nu : s.outer()) {
      for (Eigen::Index r = 0; r < nu.c.size(); ++r) out << (r ? "," : "") << format_real(nu.c(r));
      out << '\n';
    }
  }
}

Dataset read_dataset_csv(const std::filesystem::path& dir) {
  const auto inner_rows = read_rows(dir / "inner.csv");
  if (inner_rows.size() < 3 || inner_rows[1].size() != 3) throw Error("inner.csv: bad header");
  const std::size_t p = to_count(inner_rows[1][0]);
  const std::size_t d = to_count(inner_rows[1][1]);
  const std::size_t m = to_count(inner_rows[1][2]);
  if (inner_rows.size() != m + 3) throw Error("inner.csv: row count does not match header");
  std::vector<InnerSample> inner;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& row = inner_rows[j + 3];
    if (row.size() != d * p + d) throw Error("inner.csv: bad row width");
    InnerSample w{Mat(d, p), Vec(d)};
    std::size_t k = 0;
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        w.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_real(row[k++]);
      }
    }
    for (std::size_t r = 0; r < d; ++r) w.b(static_cast<Eigen::Index>(r)) = parse_real(row[k++]);
    inner.push_back(std::move(w));
  }
  const auto outer_rows = read_rows(dir / "outer.csv");
  if (outer_rows.size() < 3 || outer_rows[1].size() != 2) throw Error("outer.csv: bad header");
  if (to_count(outer_rows[1][0]) != d) throw Error("dimension mismatch: outer.csv vs inner.csv");
  const std::size_t n = to_count(outer_rows[1][1]);
  if (outer_rows.size() != n + 3) throw Error("outer.csv: row count does not match header");
  std::vector<OuterSample> outer;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = outer_rows[i + 3];
    if (row.size() != d) throw Error("outer.csv: bad row width");
    OuterSample nu{Vec(d)};
    for (std::size_t r = 0; r < d; ++r) nu.c(static_cast<Eigen::Index>(r)) = parse_real(row[r]);
    outer.push_back(std::move(nu));
  }
  return Dataset(std::move(outer), std::move(inner));
}

}  // namespace scolab
