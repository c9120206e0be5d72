#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scolab/experiment_runner.hpp"
#include "scolab/optimizer.hpp"
#include "scolab/stability_lab.hpp"

namespace scolab {

/// A CSV file: header, data rows, and `# key,value` footer records.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;

  void add_row(std::vector<std::string> cells);
  bool operator==(const CsvTable&) const = default;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);
/// Throws Error if the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

CsvTable tracking_table(const StudyResult& result);
CsvTable optimization_table(const StudyResult& result);
CsvTable excess_table(const StudyResult& result, std::int64_t t_max);
CsvTable stability_table_header();
void append_stability_row(CsvTable& table, Variant variant, Convexity convexity, std::size_t n,
                          std::size_t m, const OptimizerConfig& cfg, const StabilityEstimate& est);

/// trajectory.csv: t, f_empirical, tracking_sq_error, x_norm for each stored iterate.
/// tracking_sq_error at row t is ||y_t - g_S(x_{t-1})||^2 (nan when not recorded).
CsvTable trajectory_table(const Trajectory& traj, const CompositionalProblem& problem);

/// Single-line record of the selected output point.
std::string output_record(const Trajectory& traj, const OptimizerConfig& cfg);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;
};

/// Self-contained SVG line chart. Non-positive values are dropped on log axes.
std::string render_svg(const SvgChart& chart);
void write_svg(const SvgChart& chart, const std::filesystem::path& path);

}  // namespace scolab
