#include "gridh2_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gridh2::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Ticks at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  const double left = 80.0, right = 160.0, top = 40.0, bottom = 56.0;
  const double w = spec.width - left - right;
  const double h = spec.height - top - bottom;

  auto ty = [&](double y) { return spec.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, ty(s.y[i]));
      y_hi = std::max(y_hi, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) {
    const double pad = std::max(std::abs(y_lo) * 1e-3, 1e-9);
    y_lo -= pad;
    y_hi += pad;
  }
  const double y_pad = 0.04 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * w; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y_lo) / (y_hi - y_lo)) * h; };
  auto py_raw = [&](double t) { return top + (1.0 - (t - y_lo) / (y_hi - y_lo)) * h; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(left + w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(spec.title) << "</text>\n";

  for (double t : nice_ticks(x_lo, x_hi, 8)) {
    out << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(px(t))
        << "\" y2=\"" << fmt(top + h) << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(top + h + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi, 6)) {
    const std::string label = spec.log_y ? "1e" + tick_label(t) : tick_label(t);
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(py_raw(t)) << "\" x2=\""
        << fmt(left + w) << "\" y2=\"" << fmt(py_raw(t)) << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py_raw(t) + 4)
        << "\" text-anchor=\"end\">" << xml_escape(label) << "</text>\n";
  }
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(w)
      << "\" height=\"" << fmt(h) << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << fmt(left + w / 2) << "\" y=\"" << fmt(spec.height - 12.0)
      << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n"
      << "<text transform=\"translate(18 " << fmt(top + h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << xml_escape(s.color)
        << "\" stroke-width=\"1.4\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_y && !(s.y[i] > 0.0))) continue;
      out << (first ? "" : " ") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
      first = false;
    }
    out << "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << fmt(left + w + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(left + w + 32) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << xml_escape(s.color)
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(left + w + 38) << "\" y=\"" << fmt(ly) << "\">"
        << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gridh2::cli
