#include "scolab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace scolab {

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size()) throw Error("csv row does not match the schema");
  rows.push_back(std::move(cells));
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  for (const auto& f : table.footer) out += "# " + f + '\n';
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with("# ")) {
      table.footer.emplace_back(line.substr(2));
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                            : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      table.add_row(std::move(cells));
    }
  }
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw WriteError("cannot write " + path.string());
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  write_text(path, to_csv(table));
}

CsvTable tracking_table(const StudyResult& result) {
  CsvTable t{{"t", "mean_sq_error", "se", "bound"}, {}, {}};
  for (const auto& r : result.rows) {
    t.add_row({std::to_string(r.t), format_real(r.mean), format_real(r.se), format_real(r.bound)});
  }
  return t;
}

CsvTable optimization_table(const StudyResult& result) {
  CsvTable t{{"T", "eta", "beta", "gap_mean", "gap_se"}, {}, {}};
  for (const auto& r : result.rows) {
    t.add_row({std::to_string(r.t), format_real(r.eta), format_real(r.beta), format_real(r.mean),
               format_real(r.se)});
  }
  return t;
}

CsvTable excess_table(const StudyResult& result, std::int64_t t_max) {
  CsvTable t{{"n", "m", "T", "eta", "beta", "excess_mean", "excess_se"}, {}, {}};
  std::size_t capped = 0;
  for (const auto& r : result.rows) {
    t.add_row({std::to_string(r.n), std::to_string(r.m), std::to_string(r.t), format_real(r.eta),
               format_real(r.beta), format_real(r.mean), format_real(r.se)});
    if (r.capped) ++capped;
  }
  t.footer.push_back("fitted_slope," + format_real(result.fitted_slope));
  t.footer.push_back("t_cap," + std::to_string(t_max) + ",capped_points," + std::to_string(capped));
  return t;
}

CsvTable stability_table_header() {
  return CsvTable{{"variant", "convexity", "n", "m", "T", "eta", "beta", "replicates", "eps_nu_hat",
                   "eps_nu_se", "eps_omega_hat", "eps_omega_se"},
                  {},
                  {}};
}

void append_stability_row(CsvTable& table, Variant variant, Convexity convexity, std::size_t n,
                          std::size_t m, const OptimizerConfig& cfg, const StabilityEstimate& est) {
  table.add_row({to_string(variant), to_string(convexity), std::to_string(n), std::to_string(m),
                 std::to_string(cfg.T), format_real(cfg.eta), format_real(cfg.beta),
                 std::to_string(est.replicates), format_real(est.eps_nu_hat),
                 format_real(est.eps_nu_se), format_real(est.eps_omega_hat),
                 format_real(est.eps_omega_se)});
}

CsvTable trajectory_table(const Trajectory& traj, const CompositionalProblem& problem) {
  CsvTable t{{"t", "f_empirical", "tracking_sq_error", "x_norm"}, {}, {}};
  for (std::size_t k = 0; k < traj.iterates.size(); ++k) {
    const std::int64_t step = traj.steps[k];
    const auto idx = static_cast<std::size_t>(step - 1);
    const double track = idx < traj.tracking_sq_errors.size()
                             ? traj.tracking_sq_errors[idx]
                             : std::numeric_limits<double>::quiet_NaN();
    t.add_row({std::to_string(step), format_real(empirical_risk(problem, traj.iterates[k])),
               format_real(track), format_real(traj.iterates[k].norm())});
  }
  return t;
}

std::string output_record(const Trajectory& traj, const OptimizerConfig& cfg) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(cfg.output_mode);
  j["variant"] = to_string(cfg.variant);
  j["T"] = cfg.T;
  j["eta"] = cfg.eta;
  j["beta"] = cfg.beta;
  j["x"] = std::vector<double>(traj.final_output.data(),
                               traj.final_output.data() + traj.final_output.size());
  return j.dump();
}

// ---------------------------------------------------------------------------

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
  return std::string(buf, res.ptr);
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const SvgChart& chart) {
  constexpr double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 55;
  auto tx = [&](double v) { return chart.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!chart.log_x || x > 0) && (!chart.log_y || y > 0);
  };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : chart.series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      xmin = std::min(xmin, tx(s.x[k]));
      xmax = std::max(xmax, tx(s.x[k]));
      ymin = std::min(ymin, ty(s.y[k]));
      ymax = std::max(ymax, ty(s.y[k]));
    }
  }
  if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape_xml(chart.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double gx = left + pw * k / 4.0;
    const double gy = top + ph - ph * k / 4.0;
    o << "<line x1=\"" << num(gx) << "\" y1=\"" << top << "\" x2=\"" << num(gx) << "\" y2=\""
      << top + ph << "\" stroke=\"#eee\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << num(gy) << "\" x2=\"" << left + pw << "\" y2=\""
      << num(gy) << "\" stroke=\"#eee\"/>\n";
    o << "<text x=\"" << num(gx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << tick_label(chart.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
      << tick_label(chart.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << escape_xml(chart.x_label) << (chart.log_x ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto& s = chart.series[si];
    const char* colour = kPalette[si % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      o << (first ? "" : " ") << num(px(s.x[k])) << ',' << num(py(s.y[k]));
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(si);
    o << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << left + pw - 130
      << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw - 125 << "\" y=\"" << num(ly) << "\">" << escape_xml(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const SvgChart& chart, const std::filesystem::path& path) {
  write_text(path, render_svg(chart));
}

}  // namespace scolab
