#include "calimetr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace calimetr::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 550.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick labels use a short fixed format so axes stay stable.
std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Data-to-canvas mapping over fixed data ranges.
struct Frame {
  double x_min, x_max, y_min, y_max;
  double sx(double x) const { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); }
  double sy(double y) const { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); }
};

void open_canvas(std::string& out, const std::string& title) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  out += "<text class=\"title\" x=\"400\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"16\">" +
         title + "</text>\n";
}

void draw_axes(std::string& out, const Frame& frame, const std::string& x_label,
               const std::string& y_label) {
  out += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
         num(kRight) + "\" y2=\"" + num(kBottom) + "\" stroke=\"#000000\"/>\n";
  out += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kBottom) + "\" stroke=\"#000000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = frame.x_min + (frame.x_max - frame.x_min) * i / 4.0;
    const double fy = frame.y_min + (frame.y_max - frame.y_min) * i / 4.0;
    out += "<text class=\"tick\" x=\"" + num(frame.sx(fx)) + "\" y=\"" + num(kBottom + 18.0) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" +
           tick_label(fx) + "</text>\n";
    out += "<text class=\"tick\" x=\"" + num(kLeft - 8.0) + "\" y=\"" + num(frame.sy(fy) + 4.0) +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" +
           tick_label(fy) + "</text>\n";
  }
  out += "<text class=\"xlabel\" x=\"" + num((kLeft + kRight) / 2.0) + "\" y=\"585.00\" "
         "text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
         x_label + "</text>\n";
  out += "<text class=\"ylabel\" x=\"16.00\" y=\"" + num((kTop + kBottom) / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         num((kTop + kBottom) / 2.0) + ")\">" + y_label + "</text>\n";
}

std::string polyline(const Frame& frame, std::span<const double> xs, std::span<const double> ys,
                     const std::string& cls, const std::string& color) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) pts.push_back(' ');
    pts += num(frame.sx(xs[i])) + "," + num(frame.sy(ys[i]));
  }
  return "<polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_reliability(const ReliabilityCurve& curve, const std::string& title) {
  std::string out;
  open_canvas(out, title);
  const Frame frame{0.0, 1.0, 0.0, 1.0};
  const bool conf = curve.mode == ReliabilityMode::confidence;
  draw_axes(out, frame, conf ? "mean confidence" : "mean uncertainty",
            conf ? "accuracy" : "error rate");

  for (const BinStats& bin : curve.bins) {
    if (bin.empty) continue;
    const double x0 = frame.sx(bin.lo);
    const double x1 = frame.sx(bin.hi);
    const double y = frame.sy(bin.outcome_rate);
    out += "<rect class=\"bin-bar\" x=\"" + num(x0 + 1.0) + "\" y=\"" + num(y) + "\" width=\"" +
           num(x1 - x0 - 2.0) + "\" height=\"" + num(frame.sy(0.0) - y) +
           "\" fill=\"#1f77b4\" fill-opacity=\"0.55\" stroke=\"#1f77b4\"/>\n";
  }
  out += "<line class=\"diagonal\" x1=\"" + num(frame.sx(0.0)) + "\" y1=\"" + num(frame.sy(0.0)) +
         "\" x2=\"" + num(frame.sx(1.0)) + "\" y2=\"" + num(frame.sy(1.0)) +
         "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";

  std::vector<double> xs{0.0}, ys{0.0};
  for (const BinStats& bin : curve.bins) {
    if (bin.empty) continue;
    xs.push_back(bin.mean_measure);
    ys.push_back(bin.outcome_rate);
  }
  xs.push_back(1.0);
  ys.push_back(1.0);
  out += polyline(frame, xs, ys, "reliability-curve", "#d62728");
  out += "</svg>\n";
  return out;
}

std::string render_sparsification(const CurveSeries& oracle, const CurveSeries& method,
                                  const std::string& title) {
  std::string out;
  open_canvas(out, title);
  double y_max = 1.0;
  for (double v : oracle.values) y_max = std::max(y_max, v);
  for (double v : method.values) y_max = std::max(y_max, v);
  const Frame frame{0.0, oracle.fractions.back(), 0.0, y_max};
  draw_axes(out, frame, "removed fraction", to_string(oracle.merit));

  // shaded gap between the curves
  std::string pts;
  for (std::size_t i = 0; i < oracle.fractions.size(); ++i) {
    pts += (i ? " " : "") + num(frame.sx(oracle.fractions[i])) + "," +
           num(frame.sy(oracle.values[i]));
  }
  for (std::size_t i = method.fractions.size(); i-- > 0;) {
    pts += " " + num(frame.sx(method.fractions[i])) + "," + num(frame.sy(method.values[i]));
  }
  out += "<polygon class=\"error-area\" fill=\"#ff7f0e\" fill-opacity=\"0.25\" stroke=\"none\" "
         "points=\"" +
         pts + "\"/>\n";
  out += polyline(frame, oracle.fractions, oracle.values, "curve-oracle", "#2ca02c");
  out += polyline(frame, method.fractions, method.values, "curve-method", "#1f77b4");
  out += "</svg>\n";
  return out;
}

std::string render_loss_surface(const SweepResult& sweep, const std::string& title) {
  std::string out;
  open_canvas(out, title);
  const Frame frame{sweep.grid.values.front(), sweep.grid.values.back(), 0.0, 1.0};
  draw_axes(out, frame, "temperature", "normalized loss");

  std::size_t color = 0;
  double legend_y = kTop + 14.0;
  for (const auto& [name, values] : sweep.normalized) {
    const std::string stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out += polyline(frame, sweep.grid.values, values, "metric-curve", stroke);

    const double t_opt = sweep.argmin_t.at(name);
    std::size_t t_idx = 0;
    for (std::size_t i = 0; i < sweep.grid.values.size(); ++i) {
      if (sweep.grid.values[i] == t_opt) t_idx = i;
    }
    out += "<circle class=\"argmin-marker\" cx=\"" + num(frame.sx(t_opt)) + "\" cy=\"" +
           num(frame.sy(values[t_idx])) + "\" r=\"4.00\" fill=\"" + stroke + "\"/>\n";
    out += "<text class=\"legend\" x=\"" + num(kRight - 150.0) + "\" y=\"" + num(legend_y) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"" + stroke + "\">" + name +
           " (T=" + tick_label(t_opt) + ")</text>\n";
    legend_y += 14.0;
    ++color;
  }
  out += "</svg>\n";
  return out;
}

std::string render_ause_over_runs(const std::vector<double>& xs, const std::vector<double>& values,
                                  const std::string& title) {
  std::string out;
  open_canvas(out, title);
  double y_min = 0.0, y_max = 0.0;
  for (double v : values) {
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
  }
  if (y_max == y_min) y_max = y_min + 1.0;
  const Frame frame{xs.front(), xs.back() > xs.front() ? xs.back() : xs.front() + 1.0, y_min,
                    y_max};
  draw_axes(out, frame, "run", "ause");
  out += polyline(frame, xs, values, "series", "#1f77b4");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += "<circle class=\"series-marker\" cx=\"" + num(frame.sx(xs[i])) + "\" cy=\"" +
           num(frame.sy(values[i])) + "\" r=\"3.00\" fill=\"#1f77b4\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace calimetr::svg
