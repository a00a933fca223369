#include "softq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace softq::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;
  double px0 = 0.0;  // pixel at lo
  double px1 = 1.0;  // pixel at hi

  double transform(double v) const { return log ? std::log10(v) : v; }

  double to_px(double v) const {
    const double t = transform(v);
    const double span = hi - lo;
    return px0 + (t - lo) / (span == 0.0 ? 1.0 : span) * (px1 - px0);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e) {
        const double t = static_cast<double>(e);
        if (t >= lo - 1e-9 && t <= hi + 1e-9) out.push_back(std::pow(10.0, t));
      }
      if (out.empty()) out.push_back(std::pow(10.0, 0.5 * (lo + hi)));
    } else {
      const double span = hi - lo;
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw > 0 ? raw : 1.0)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
          step = m * mag;
          break;
        }
      }
      for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
        out.push_back(t);
      }
    }
    return out;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
  const double ml = 78, mr = 22, mt = 40, mb = 58;
  const double w = spec.width, h = spec.height;

  // Data ranges in (possibly log-) transformed coordinates.
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : spec.series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], spec.log_y)) continue;
      xlo = std::min(xlo, spec.log_x ? std::log10(s.x[i]) : s.x[i]);
      xhi = std::max(xhi, spec.log_x ? std::log10(s.x[i]) : s.x[i]);
      double lo_v = s.y[i], hi_v = s.y[i];
      if (i < s.y_err.size()) {
        hi_v += s.y_err[i];
        if (!spec.log_y || s.y[i] - s.y_err[i] > 0.0) lo_v -= s.y_err[i];
      }
      ylo = std::min(ylo, spec.log_y ? std::log10(lo_v) : lo_v);
      yhi = std::max(yhi, spec.log_y ? std::log10(hi_v) : hi_v);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = spec.log_x ? 0.0 : 0.0;
    xhi = spec.log_x ? 1.0 : 1.0;
  }
  if (!std::isfinite(ylo)) {
    ylo = 0.0;
    yhi = 1.0;
  }
  const auto pad = [](double& lo, double& hi, double amount) {
    if (hi - lo < 1e-12) {
      lo -= amount;
      hi += amount;
    } else {
      const double p = 0.05 * (hi - lo);
      lo -= p;
      hi += p;
    }
  };
  pad(xlo, xhi, 0.5);
  pad(ylo, yhi, 0.5);

  Axis xaxis{spec.log_x, xlo, xhi, ml, w - mr};
  Axis yaxis{spec.log_y, ylo, yhi, h - mb, mt};

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << escape(spec.title) << "</text>\n";

  // Grid and tick labels.
  for (double t : xaxis.ticks()) {
    const double px = xaxis.to_px(t);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << fmt(h - mb) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(h - mb + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : yaxis.ticks()) {
    const double py = yaxis.to_px(t);
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(w - mr)
        << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }

  // Axes frame and labels.
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(w - ml - mr)
      << "\" height=\"" << fmt(h - mt - mb)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fmt((ml + w - mr) / 2) << "\" y=\"" << fmt(h - 14)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt((mt + h - mb) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << fmt((mt + h - mb) / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  // Series: optional error band, then line (or lone markers), then dots.
  for (const auto& s : spec.series) {
    std::vector<std::pair<double, double>> pts;
    std::vector<double> errs;
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], spec.log_y)) continue;
      pts.emplace_back(s.x[i], s.y[i]);
      errs.push_back(i < s.y_err.size() ? s.y_err[i] : 0.0);
    }
    if (pts.empty()) continue;

    bool any_err = false;
    for (double e : errs) any_err = any_err || e > 0.0;
    if (any_err && pts.size() >= 2) {
      out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (size_t i = 0; i < pts.size(); ++i) {
        double hi_v = pts[i].second + errs[i];
        out << fmt(xaxis.to_px(pts[i].first)) << "," << fmt(yaxis.to_px(hi_v)) << " ";
      }
      for (size_t i = pts.size(); i-- > 0;) {
        double lo_v = pts[i].second - errs[i];
        if (spec.log_y && lo_v <= 0.0) lo_v = pts[i].second;
        out << fmt(xaxis.to_px(pts[i].first)) << "," << fmt(yaxis.to_px(lo_v)) << " ";
      }
      out << "\"/>\n";
    }
    if (pts.size() >= 2) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [px, py] : pts) {
        out << fmt(xaxis.to_px(px)) << "," << fmt(yaxis.to_px(py)) << " ";
      }
      out << "\"/>\n";
    }
    for (const auto& [px, py] : pts) {
      out << "<circle cx=\"" << fmt(xaxis.to_px(px)) << "\" cy=\"" << fmt(yaxis.to_px(py))
          << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    }
  }

  // Legend.
  double ly = mt + 14;
  for (const auto& s : spec.series) {
    const double lx = w - mr - 170;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 26)
        << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(lx + 32) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace softq::svg
