#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cskin/functionals.hpp"
#include "cskin/model.hpp"

namespace cskin {

struct Trajectory;

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// diagnostics.csv: t, momentum_0..momentum_{d-1}, velocity_variance,
/// spatial_cohesion, moment_D_velocity, moment_D_position, exp_mass_alpha,
/// tail_mass_position, tail_mass_velocity, max_speed, dissipation_rate,
/// effective_radius. Absent values are empty fields.
std::string diagnostics_csv(const std::vector<DiagnosticRecord>& records, std::size_t dim);

/// x_0..x_{d-1}, v_0..v_{d-1}, one particle per row.
std::string ensemble_csv(const Ensemble& ens);

void ensure_directory(const std::filesystem::path& dir);
/// Writes the whole file or throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Static SVG line plot. Nonpositive values are dropped on log axes.
std::string render_svg(const Plot& plot);

}  // namespace cskin
