#include "mzisim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "mzisim/constants.hpp"

namespace mzisim {
namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 55;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

// Maps data coordinates onto the plotting area and draws axes with ticks.
class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    o_ << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
       << R"(" font-family="sans-serif" font-size="12">)" << '\n';
    o_ << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title) {
    o_ << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(y0_)) << "\" x2=\"" << num(kWidth - kRight)
       << "\" y2=\"" << num(py(y0_)) << "\" stroke=\"black\"/>\n";
    o_ << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(py(y0_)) << "\" stroke=\"black\"/>\n";
    for (double t : ticks(x0_, x1_)) {
      o_ << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(py(y0_)) << "\" x2=\"" << num(px(t)) << "\" y2=\""
         << num(py(y0_) + 5) << "\" stroke=\"black\"/>";
      o_ << "<text x=\"" << num(px(t)) << "\" y=\"" << num(py(y0_) + 18) << "\" text-anchor=\"middle\">"
         << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(y0_, y1_)) {
      o_ << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
         << num(py(t)) << "\" stroke=\"black\"/>";
      o_ << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
         << tick_label(t) << "</text>\n";
    }
    o_ << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 15)
       << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    o_ << "<text x=\"18\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << num((kTop + kHeight - kBottom) / 2) << ")\">" << ylabel << "</text>\n";
    o_ << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title
       << "</text>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
                double width = 1.0, const std::string& dash = {}) {
    o_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"";
    if (!dash.empty()) o_ << " stroke-dasharray=\"" << dash << "\"";
    o_ << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) o_ << num(px(xs[i])) << ',' << num(py(ys[i])) << ' ';
    o_ << "\"/>\n";
  }

  void marker(double x, double y, double err, const std::string& color) {
    if (err > 0.0)
      o_ << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(py(y - err)) << "\" x2=\"" << num(px(x)) << "\" y2=\""
         << num(py(y + err)) << "\" stroke=\"" << color << "\"/>";
    o_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  }

  void legend(int row, const std::string& text, const std::string& color) {
    const double y = kTop + 10 + 18 * row;
    o_ << "<rect x=\"" << num(kWidth - kRight - 150) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
       << color << "\"/><text x=\"" << num(kWidth - kRight - 132) << "\" y=\"" << num(y + 2) << "\">" << text
       << "</text>\n";
  }

  std::string finish() {
    o_ << "</svg>\n";
    return o_.str();
  }

 private:
  static std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(t);
    return out;
  }

  double x0_, x1_, y0_, y1_;
  std::ostringstream o_;
};

const char* series_color(const std::string& label, std::size_t i) {
  if (label == "sp") return "red";
  if (label == "cw") return "black";
  static const char* palette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};
  return palette[i % 4];
}

}  // namespace

std::string visibility_plot_svg(const SummaryReport& report) {
  double x_hi = 1.0;
  for (const auto& s : report.series)
    for (const auto& p : s.points) x_hi = std::max(x_hi, p.delta_l_um);
  x_hi *= 1.1;
  Canvas c(0.0, x_hi, 0.0, 1.1);
  c.axes("path-length difference (um)", "visibility", "Visibility vs path-length difference");
  c.polyline({0.0, x_hi}, {kInvE, kInvE}, "gray", 1.0, "4 4");
  for (std::size_t i = 0; i < report.series.size(); ++i) {
    const auto& s = report.series[i];
    const std::string color = series_color(s.label, i);
    if (s.line) c.polyline({0.0, x_hi}, {s.line->at(0.0), std::max(0.0, s.line->at(x_hi))}, color, 1.5);
    for (const auto& p : s.points) c.marker(p.delta_l_um, p.visibility, p.sigma, color);
    std::string text = s.label;
    if (s.line) text += " (Lc " + tick_label(std::round(s.line->coherence_length_um * 10) / 10) + " um)";
    c.legend(static_cast<int>(i), text, color);
  }
  return c.finish();
}

std::string fringe_plot_svg(const FringeTrace& trace, const EnvelopeFit& fit) {
  const auto [lo, hi] = std::minmax_element(trace.values.begin(), trace.values.end());
  const double y_hi = std::max(*hi, fit.amplitude * (1 + fit.visibility) + fit.offset) * 1.05;
  Canvas c(trace.positions_mm.front(), trace.positions_mm.back(), std::min(0.0, *lo), y_hi > 0 ? y_hi : 1.0);
  c.axes("slit position (mm)", trace.mode == SourceMode::SinglePhoton ? "counts per bin" : "relative intensity",
         to_string(trace.mode) + " fringe, dL = " + tick_label(trace.delta_l_um) + " um, V = " +
             tick_label(std::round(fit.visibility * 1000) / 1000));
  c.polyline(trace.positions_mm, trace.values, trace.mode == SourceMode::SinglePhoton ? "red" : "black", 0.6);
  std::vector<double> model(trace.positions_mm.size());
  std::transform(trace.positions_mm.begin(), trace.positions_mm.end(), model.begin(), [&](double x) { return fit(x); });
  c.polyline(trace.positions_mm, model, "#1f77b4", 1.2);
  return c.finish();
}

}  // namespace mzisim
