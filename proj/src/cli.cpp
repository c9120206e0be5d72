#include "scolab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "scolab/experiment_runner.hpp"
#include "scolab/oracle.hpp"
#include "scolab/report.hpp"
#include "scolab/stability_lab.hpp"

namespace scolab {

namespace {

namespace fs = std::filesystem;

// Every flag of every subcommand binds into this one struct; only the
// selected subcommand's flags are ever set.
struct Flags {
  std::uint64_t seed = 0;
  std::string config;
  unsigned threads = 0;
  std::string out = ".";
  bool svg = false;

  std::string benchmark;  // empty: the benchmark matching --convexity
  // NaN: keep the benchmark's value.
  double tau_a = std::nan(""), tau_b = std::nan(""), tau_c = std::nan("");

  std::string variant = "scgd";
  std::string convexity = "convex";
  std::string output_mode = "last";
  std::size_t n = 40;
  std::size_t m = 40;
  std::int64_t T = 1000;
  double eta = 1e-2;
  double beta = 0.1;
  double radius = 10.0;
  double sigma = 0.0;
  std::size_t replicates = 50;
  std::size_t max_recorded = 4096;
  std::string dataset;
  bool save_dataset = false;

  // gradcheck
  std::size_t points = 20;
  double h = 1e-5;
  double tolerance = 1e-5;

  // studies
  double c = 2.0;
  std::int64_t burn_in = 10;
  std::size_t log_points = 64;
  std::vector<std::int64_t> t_list;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> sizes;
  double schedule_scale = 1.0;
  std::optional<std::int64_t> t_max;
  bool uncoupled = false;
  bool generalization = false;
  bool assert_check = false;
};

struct UsageError : Error {
  using Error::Error;
};

struct AssertFailure : Error {
  using Error::Error;
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Appends `--key=value` for every config-file entry not already given on the
/// command line, so explicit flags win.
void merge_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].starts_with("--config=")) path = args[k].substr(9);
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (key.starts_with('-')) key.erase(0, 1);
    if (key.empty() || key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": invalid key");
    }
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (!given) extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

PopulationLaw build_law(const Flags& f) {
  PopulationLaw law;
  const std::string name = f.benchmark.empty() ? f.convexity : f.benchmark;
  if (name == "convex") {
    law = convex_benchmark();
  } else if (name == "strongly_convex") {
    law = strongly_convex_benchmark();
  } else if (name == "identity") {
    law = identity_law(5, Vec::LinSpaced(5, -1.0, 1.0), 0.5);
  } else {
    throw UsageError("unknown benchmark '" + name + "'");
  }
  if (!std::isnan(f.tau_a)) law.tau_a = f.tau_a;
  if (!std::isnan(f.tau_b)) law.tau_b = f.tau_b;
  if (!std::isnan(f.tau_c)) law.tau_c = f.tau_c;
  law.validate();
  return law;
}

Dataset load_or_sample(const Flags& f, const PopulationLaw& law) {
  if (!f.dataset.empty()) return read_dataset_csv(f.dataset);
  if (f.n == 0 || f.m == 0) throw UsageError("empty dataset");
  return sample_dataset(law, f.n, f.m, Rng(f.seed).split("dataset"));
}

fs::path out_file(const Flags& f, const std::string& name) { return fs::path(f.out) / name; }

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "Root seed; every random draw derives from it (default 0)");
  app->add_option("--config", f.config, "key=value file; command-line flags take precedence");
  app->add_option("--threads", f.threads, "Worker cap; 0 uses all hardware threads");
  app->add_option("--out", f.out, "Output directory");
  app->add_flag("--svg", f.svg, "Also write an SVG chart next to the CSV");
}

void add_law(CLI::App* app, Flags& f) {
  app->add_option("--benchmark", f.benchmark,
                  "convex | strongly_convex | identity (default: follows --convexity)");
  app->add_option("--tau-a", f.tau_a, "Half-width of the inner matrix noise");
  app->add_option("--tau-b", f.tau_b, "Half-width of the inner offset noise");
  app->add_option("--tau-c", f.tau_c, "Half-width of the outer target noise");
}

void add_steps(CLI::App* app, Flags& f) {
  app->add_option("--variant", f.variant, "scgd | scsc");
  app->add_option("--eta", f.eta, "Parameter step size");
  app->add_option("--beta", f.beta, "Tracker step size in (0, 1]");
  app->add_option("--radius", f.radius, "Radius of the feasible ball");
}

OptimizerConfig optimizer_config(const Flags& f) {
  OptimizerConfig oc;
  oc.variant = parse_variant(f.variant);
  oc.T = f.T;
  oc.eta = f.eta;
  oc.beta = f.beta;
  oc.domain_radius = f.radius;
  oc.output_mode = parse_output_mode(f.output_mode);
  oc.sigma = f.sigma;
  oc.max_recorded = f.max_recorded;
  return oc;
}

void require_positive_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw UsageError("eta must be > 0");
}

// ---------------------------------------------------------------------------

int cmd_gradcheck(const Flags& f, std::ostream& out) {
  const PopulationLaw law = build_law(f);
  const Dataset s = load_or_sample(f, law);
  if (f.points == 0) throw UsageError("points must be ≥ 1");
  if (!(f.h > 0.0)) throw UsageError("h must be > 0");
  if (!(f.radius > 0.0)) throw UsageError("invalid domain");
  Rng rng = Rng(f.seed).split("points");
  const auto p = static_cast<Eigen::Index>(s.param_dim());
  double worst = 0.0;
  for (std::size_t k = 0; k < f.points; ++k) {
    Vec x(p);
    for (Eigen::Index i = 0; i < p; ++i) x(i) = rng.uniform(-1.0, 1.0);
    const double r = f.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(p));
    x *= r / std::max(x.norm(), 1e-300);
    worst = std::max(worst, fd_gradient_check(s, x, f.h));
  }
  out << "max_relative_error=" << format_real(worst) << '\n';
  out << "tolerance=" << format_real(f.tolerance) << '\n';
  if (!(worst < f.tolerance)) {
    throw AssertFailure("gradient check failed: " + format_real(worst) + " ≥ " + format_real(f.tolerance));
  }
  return 0;
}

int cmd_optimize(const Flags& f, std::ostream& out) {
  const PopulationLaw law = build_law(f);
  OptimizerConfig oc = optimizer_config(f);
  const Dataset s = load_or_sample(f, law);
  if (oc.output_mode == OutputMode::sigma_weighted && !(oc.sigma > 0.0)) {
    oc.sigma = empirical_sigma(s);
  }
  oc.record_tracking = true;
  validate(oc, s);
  require_positive_eta(oc.eta);
  const Trajectory traj = run(s, oc, Rng(f.seed).split("indices"));
  const CsvTable table = trajectory_table(traj, s);
  write_csv(table, out_file(f, "trajectory.csv"));
  if (f.save_dataset) write_dataset_csv(s, f.out);
  if (f.svg) {
    SvgSeries series{"F_S(x_t)", {}, {}};
    for (std::size_t k = 0; k < traj.iterates.size(); ++k) {
      series.x.push_back(static_cast<double>(traj.steps[k]));
      series.y.push_back(parse_real(table.rows[k][1]));
    }
    write_svg({"Empirical risk along the trajectory", "t", "F_S", true, false, {series}},
              out_file(f, "trajectory.svg"));
  }
  out << output_record(traj, oc) << '\n';
  return 0;
}

StudyConfig study_base(const Flags& f, StudyKind kind) {
  StudyConfig sc;
  sc.study = kind;
  sc.variant = parse_variant(f.variant);
  sc.convexity = parse_convexity(f.convexity);
  sc.law = build_law(f);
  sc.n = f.n;
  sc.m = f.m;
  sc.replicates = f.replicates;
  sc.seed = f.seed;
  sc.threads = resolve_threads(f.threads);
  sc.domain_radius = f.radius;
  sc.output_mode = parse_output_mode(f.output_mode);
  sc.sigma = f.sigma;
  sc.c = f.c;
  sc.burn_in = f.burn_in;
  sc.log_points = f.log_points;
  sc.schedule_scale = f.schedule_scale;
  if (f.t_max) sc.t_max = *f.t_max;
  return sc;
}

int cmd_tracking(const Flags& f, std::ostream& out) {
  StudyConfig sc = study_base(f, StudyKind::tracking);
  sc.steps = {{f.T, f.eta, f.beta}};
  validate(sc);
  const StudyResult res = tracking_study(sc);
  write_csv(tracking_table(res), out_file(f, "tracking.csv"));
  if (f.svg) {
    SvgSeries mean{"mean ||y - g_S(x)||^2", {}, {}}, bound{"bound", {}, {}};
    for (const auto& r : res.rows) {
      mean.x.push_back(static_cast<double>(r.t));
      mean.y.push_back(r.mean);
      bound.x.push_back(static_cast<double>(r.t));
      bound.y.push_back(r.bound);
    }
    write_svg({"Tracking error", "t", "squared error", true, true, {mean, bound}},
              out_file(f, "tracking.svg"));
  }
  out << "rows_within_bound=" << res.rows_within_bound << '/' << res.rows.size() << '\n';
  if (f.assert_check && 100 * res.rows_within_bound < 95 * res.rows.size()) {
    throw AssertFailure("tracking bound held at fewer than 95% of logged steps");
  }
  return 0;
}

int cmd_stability(const Flags& f, std::ostream& out) {
  const PopulationLaw law = build_law(f);
  const Variant variant = parse_variant(f.variant);
  const Convexity convexity = parse_convexity(f.convexity);
  const std::vector<std::size_t> ns = f.n_list.empty() ? std::vector<std::size_t>{f.n} : f.n_list;
  const std::vector<std::int64_t> ts = f.t_list.empty() ? std::vector<std::int64_t>{f.T} : f.t_list;
  StabilityOptions opts;
  opts.replicates = f.replicates;
  opts.coupled = !f.uncoupled;
  opts.threads = resolve_threads(f.threads);
  if (opts.replicates < 2) throw UsageError("replicates must be ≥ 2");
  require_positive_eta(f.eta);

  // Validate every grid point before any work starts.
  std::vector<OptimizerConfig> configs;
  for (auto t : ts) {
    OptimizerConfig oc = optimizer_config(f);
    oc.T = t;
    oc.variant = variant;
    for (auto n : ns) {
      if (n == 0 || f.m == 0) throw UsageError("empty dataset");
      validate(oc, sample_dataset(law, n, f.m, Rng(f.seed).split("probe")));
    }
    configs.push_back(oc);
  }

  const Rng root(f.seed);
  CsvTable table = stability_table_header();
  std::vector<SvgSeries> series;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    SvgSeries s{"T=" + std::to_string(ts[ti]), {}, {}};
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const StabilityEstimate est = estimate_stability(
          law, ns[ni], f.m, configs[ti], opts, root.split("grid", ti * ns.size() + ni));
      append_stability_row(table, variant, convexity, ns[ni], f.m, configs[ti], est);
      s.x.push_back(static_cast<double>(ns[ni]));
      s.y.push_back(est.eps_nu_hat);
    }
    series.push_back(std::move(s));
  }
  write_csv(table, out_file(f, "stability.csv"));
  if (f.svg) {
    write_svg({"Outer-sample stability", "n", "eps_nu", true, true, series},
              out_file(f, "stability.svg"));
  }
  if (f.generalization) {
    const GeneralizationReport rep = check_generalization(law, ns.front(), f.m, configs.front(), opts,
                                              root.split("generalization"));
    out << "gap_mean=" << format_real(rep.gap_mean) << '\n'
        << "rhs=" << format_real(rep.rhs) << '\n'
        << "combined_se=" << format_real(rep.combined_se) << '\n'
        << "holds=" << (rep.holds ? "true" : "false") << '\n';
    if (f.assert_check && !rep.holds) throw AssertFailure("generalization inequality violated");
  }
  return 0;
}

int cmd_optimization(const Flags& f, std::ostream& out) {
  StudyConfig sc = study_base(f, StudyKind::optimization);
  const std::vector<std::int64_t> ts = f.t_list.empty() ? std::vector<std::int64_t>{f.T} : f.t_list;
  for (auto t : ts) sc.steps.push_back({t, f.eta, f.beta});
  validate(sc);
  const StudyResult res = optimization_study(sc);
  write_csv(optimization_table(res), out_file(f, "optimization.csv"));
  if (f.svg) {
    SvgSeries gap{"mean gap", {}, {}};
    for (const auto& r : res.rows) {
      gap.x.push_back(static_cast<double>(r.t));
      gap.y.push_back(r.mean);
    }
    write_svg({"Optimization error", "T", "F_S(A(S)) - F_S*", true, true, {gap}},
              out_file(f, "optimization.svg"));
  }
  out << "reference_value=" << format_real(res.reference_value) << '\n';
  return 0;
}

int cmd_excess(const Flags& f, std::ostream& out) {
  StudyConfig sc = study_base(f, StudyKind::excess_risk);
  sc.sizes = f.sizes.empty() ? std::vector<std::size_t>{20, 40, 80} : f.sizes;
  validate(sc);
  const StudyResult res = excess_risk_study(sc);
  write_csv(excess_table(res, sc.t_max), out_file(f, "excess.csv"));
  if (f.svg) {
    SvgSeries ex{"mean excess risk", {}, {}}, ref{"1/sqrt(n)", {}, {}};
    for (const auto& r : res.rows) {
      ex.x.push_back(static_cast<double>(r.n));
      ex.y.push_back(r.mean);
      ref.x.push_back(static_cast<double>(r.n));
      ref.y.push_back(1.0 / std::sqrt(static_cast<double>(r.n)));
    }
    write_svg({"Excess risk", "n = m", "F(A(S)) - F*", true, true, {ex, ref}},
              out_file(f, "excess.svg"));
  }
  out << "fitted_slope=" << format_real(res.fitted_slope) << '\n';
  return 0;
}

int cmd_schedule(const Flags& f, std::ostream& out) {
  if (f.n == 0 || f.m == 0) throw UsageError("empty dataset");
  if (!(f.schedule_scale > 0.0)) throw UsageError("schedule scale must be > 0");
  if (f.t_max && *f.t_max < 1) throw UsageError("t_max must be ≥ 1");
  const Schedule s = schedule_preset(parse_variant(f.variant), parse_convexity(f.convexity), f.n,
                                     f.m, f.schedule_scale, f.t_max);
  out << "T=" << s.T << '\n'
      << "eta=" << format_real(s.eta) << '\n'
      << "beta=" << format_real(s.beta) << '\n';
  if (s.capped) out << "capped=true\n";
  return 0;
}

std::string vec_text(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_real(v(k));
  return s + "]";
}

int cmd_oracle(const Flags& f, std::ostream& out) {
  const PopulationLaw law = build_law(f);
  if (!(f.radius > 0.0)) throw UsageError("invalid domain");
  const Dataset s = load_or_sample(f, law);
  const MinimizerCertificate erm = erm_minimizer(s, f.radius);
  out << "erm_value=" << format_real(erm.value) << '\n'
      << "erm_method=" << to_string(erm.method) << '\n'
      << "erm_kkt_residual=" << format_real(erm.kkt_residual) << '\n'
      << "erm_rank_deficient=" << (erm.rank_deficient ? "true" : "false") << '\n'
      << "erm_x=" << vec_text(erm.x_star) << '\n';
  if (f.dataset.empty()) {
    const MinimizerCertificate pop = population_minimizer(law, f.radius);
    out << "population_value=" << format_real(pop.value) << '\n'
        << "population_x=" << vec_text(pop.x_star) << '\n';
  }
  if (f.save_dataset) write_dataset_csv(s, f.out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& input, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Stochastic compositional optimization lab"};
  app.name("scolab");
  app.require_subcommand(1);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the empirical risk gradient");
  auto* optimize = app.add_subcommand("optimize", "Run SCGD or SCSC once and export the trajectory");
  auto* tracking = app.add_subcommand("tracking", "Tracking error study against the tracking bound");
  auto* stability = app.add_subcommand("stability", "Coupled-trajectory stability estimates");
  auto* optimization = app.add_subcommand("optimization", "Optimization error versus T");
  auto* excess = app.add_subcommand("excess-risk", "Excess risk versus n = m under the preset schedule");
  auto* schedule = app.add_subcommand("schedule", "Print the preset T, eta and beta");
  auto* oracle = app.add_subcommand("oracle", "Exact minimisers of the empirical and population risk");

  for (auto* sub : {gradcheck, optimize, tracking, stability, optimization, excess, schedule, oracle}) {
    add_common(sub, f);
  }
  for (auto* sub : {gradcheck, optimize, tracking, stability, optimization, excess, oracle}) {
    add_law(sub, f);
  }
  for (auto* sub : {optimize, tracking, stability, optimization, excess}) add_steps(sub, f);
  for (auto* sub : {gradcheck, optimize, tracking, stability, optimization, schedule, oracle}) {
    sub->add_option("--n", f.n, "Outer sample count");
    sub->add_option("--m", f.m, "Inner sample count");
  }
  for (auto* sub : {gradcheck, oracle, optimize}) {
    sub->add_option("--dataset", f.dataset, "Directory with inner.csv and outer.csv to load");
  }
  for (auto* sub : {optimize, oracle}) {
    sub->add_flag("--save-dataset", f.save_dataset, "Write inner.csv and outer.csv to --out");
  }
  for (auto* sub : {optimize, tracking, stability, optimization}) {
    sub->add_option("--T", f.T, "Iteration count");
  }
  for (auto* sub : {tracking, stability, optimization, excess}) {
    sub->add_option("--replicates", f.replicates, "Monte Carlo replicates per grid point");
  }
  for (auto* sub : {stability, optimization, excess, schedule}) {
    sub->add_option("--convexity", f.convexity, "convex | strongly_convex");
  }
  for (auto* sub : {optimize, stability, optimization}) {
    sub->add_option("--output-mode", f.output_mode,
                    "last | uniform_average | sigma_weighted | uniform_random");
  }
  for (auto* sub : {optimize, optimization}) {
    sub->add_option("--sigma", f.sigma, "Weight parameter; 0 uses lambda_min of the dataset");
  }
  for (auto* sub : {excess, schedule}) {
    sub->add_option("--schedule-scale", f.schedule_scale, "Multiplier on the preset T");
  }
  for (auto* sub : {tracking, stability}) {
    sub->add_flag("--assert", f.assert_check, "Exit 1 when the study's check fails");
  }

  gradcheck->add_option("--points", f.points, "Random feasible points");
  gradcheck->add_option("--fd-step", f.h, "Central-difference step");
  gradcheck->add_option("--assert", f.tolerance, "Maximum allowed relative error (default 1e-5)");
  gradcheck->add_option("--radius", f.radius, "Radius of the feasible ball");
  oracle->add_option("--radius", f.radius, "Radius of the feasible ball");

  optimize->add_option("--max-recorded", f.max_recorded, "Cap on stored iterates");

  tracking->add_option("--c", f.c, "Free constant of the tracking bound");
  tracking->add_option("--burn-in", f.burn_in, "First logged step");
  tracking->add_option("--log-points", f.log_points, "Log-spaced steps to report");

  stability->add_option("--n-list", f.n_list, "Comma-separated outer sample counts")->delimiter(',');
  stability->add_option("--T-list", f.t_list, "Comma-separated iteration counts")->delimiter(',');
  stability->add_flag("--uncoupled", f.uncoupled, "Draw independent index sequences for S and S'");
  stability->add_flag("--generalization", f.generalization, "Also check the generalization inequality");

  optimization->add_option("--T-list", f.t_list, "Comma-separated iteration counts")->delimiter(',');

  excess->add_option("--sizes", f.sizes, "Comma-separated n = m values")->delimiter(',');
  schedule->add_option("--variant", f.variant, "scgd | scsc");
  for (auto* sub : {excess, schedule}) sub->add_option("--t-max", f.t_max, "Cap on T");

  std::vector<std::string> args = input;
  try {
    merge_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;
    err << "scolab: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "scolab: " << e.what() << '\n';
    return 2;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->get_help_ptr() && sub->get_help_ptr()->count()) {
      out << sub->help();
      return 0;
    }
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const std::string name = sub->get_name();
    if (name == "gradcheck") return cmd_gradcheck(f, out);
    if (name == "optimize") return cmd_optimize(f, out);
    if (name == "tracking") return cmd_tracking(f, out);
    if (name == "stability") return cmd_stability(f, out);
    if (name == "optimization") return cmd_optimization(f, out);
    if (name == "excess-risk") return cmd_excess(f, out);
    if (name == "schedule") return cmd_schedule(f, out);
    if (name == "oracle") return cmd_oracle(f, out);
    err << "scolab: unknown subcommand\n";
    return 2;
  } catch (const AssertFailure& e) {
    err << "scolab: " << e.what() << '\n';
    return 1;
  } catch (const WriteError& e) {
    err << "scolab: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "scolab: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, out, err);
}

}  // namespace scolab
