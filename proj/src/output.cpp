#include "cskin/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "cskin/config.hpp"

namespace cskin {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return "nan";
  return {buf.data(), ptr};
}

namespace {

void field(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += format_double(*v);
}

}  // namespace

std::string diagnostics_csv(const std::vector<DiagnosticRecord>& records, std::size_t dim) {
  std::string out = "t";
  for (std::size_t k = 0; k < dim; ++k) out += ",momentum_" + std::to_string(k);
  out +=
      ",velocity_variance,spatial_cohesion,moment_D_velocity,moment_D_position,exp_mass_alpha,"
      "tail_mass_position,tail_mass_velocity,max_speed,dissipation_rate,effective_radius\n";
  for (const auto& r : records) {
    out += format_double(r.t);
    for (std::size_t k = 0; k < dim; ++k) field(out, r.momentum.at(k));
    field(out, r.velocity_variance);
    field(out, r.spatial_cohesion);
    field(out, r.moment_D_velocity);
    field(out, r.moment_D_position);
    field(out, r.exp_mass_alpha);
    field(out, r.tail_mass_position);
    field(out, r.tail_mass_velocity);
    field(out, r.max_speed);
    field(out, r.dissipation_rate);
    field(out, r.effective_radius);
    out += '\n';
  }
  return out;
}

std::string ensemble_csv(const Ensemble& ens) {
  const std::size_t d = ens.dim();
  std::string out;
  for (std::size_t k = 0; k < d; ++k) out += (k ? ",x_" : "x_") + std::to_string(k);
  for (std::size_t k = 0; k < d; ++k) out += ",v_" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto x = ens.position(i);
    const auto v = ens.velocity(i);
    for (std::size_t k = 0; k < d; ++k) {
      if (k) out += ',';
      out += format_double(x[k]);
    }
    for (std::size_t k = 0; k < d; ++k) {
      out += ',';
      out += format_double(v[k]);
    }
    out += '\n';
  }
  return out;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  if (log_axis) std::snprintf(buf, sizeof buf, "%.3g", std::pow(10.0, v));
  else std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  if (plot.log_y) {
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
  }

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(plot.title) + "</text>\n";
  s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  const int nticks = 5;
  for (int k = 0; k <= nticks; ++k) {
    const double fx = x0 + (x1 - x0) * k / nticks;
    const double fy = y0 + (y1 - y0) * k / nticks;
    const double sx = kLeft + pw * k / nticks;
    const double sy = kTop + ph - ph * k / nticks;
    s += "<line x1=\"" + fmt(sx) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(sx) + "\" y2=\"" +
         fmt(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(sx) + "\" y=\"" + fmt(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(fx, plot.log_x) + "</text>\n";
    s += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(sy) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(sy) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(sy + 4) + "\" text-anchor=\"end\">" +
         tick_label(fy, plot.log_y) + "</text>\n";
  }
  const std::string xl = plot.x_label + (plot.log_x ? " (log scale)" : "");
  s += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 18) + "\" text-anchor=\"middle\">" +
       escape(xl) + "</text>\n";
  s += "<text transform=\"translate(18," + fmt(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(plot.y_label) + "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& ser = plot.series[si];
    const char* color = kColors[si % kColors.size()];
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!usable(ser.x[i], ser.y[i])) continue;
      pts += fmt(px(ser.x[i])) + "," + fmt(py(ser.y[i])) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"";
    if (ser.dashed) s += " stroke-dasharray=\"6,4\"";
    s += " points=\"" + pts + "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(si);
    const double lx = kLeft + pw + 12.0;
    s += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" + fmt(ly) +
         "\" stroke=\"" + color + "\"" + (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    s += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(ser.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cskin
