#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace elmo::cli::svg {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
constexpr double kLeft = 78, kRight = 150, kTop = 34, kBottom = 46;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;  // in transformed units

  double tr(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
};

Axis fit(bool log, double lo, double hi) {
  Axis a{log};
  if (!(lo <= hi)) lo = hi = log ? 1.0 : 0.0;
  lo = a.tr(lo);
  hi = a.tr(hi);
  if (log) {
    lo = std::floor(lo);
    hi = std::max(std::ceil(hi), lo + 1);
  } else if (hi - lo < 1e-300) {
    const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

// Linear ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    const double stride = std::max(1.0, std::ceil((a.hi - a.lo) / 8));
    for (double e = a.lo; e <= a.hi + 1e-9; e += stride) t.push_back(e);
    return t;
  }
  const double raw = (a.hi - a.lo) / 6, mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0 : v);
  return t;
}

void panel(std::ostringstream& os, const Panel& p, double y0, double width, double height) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  Axis probe_x{p.logx}, probe_y{p.logy};
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (probe_x.usable(s.x[i]) && probe_y.usable(s.y[i])) {
        xlo = std::min(xlo, s.x[i]);
        xhi = std::max(xhi, s.x[i]);
        ylo = std::min(ylo, s.y[i]);
        yhi = std::max(yhi, s.y[i]);
      }
  const Axis ax = fit(p.logx, xlo, xhi), ay = fit(p.logy, ylo, yhi);
  const double w = width - kLeft - kRight, h = height - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.tr(v) - ax.lo) / (ax.hi - ax.lo) * w; };
  auto py = [&](double v) { return y0 + kTop + h - (ay.tr(v) - ay.lo) / (ay.hi - ay.lo) * h; };
  auto label = [](const Axis& a, double t) { return a.log ? "1e" + num(t) : num(t); };

  os << "<text x=\"" << num(kLeft + w / 2) << "\" y=\"" << num(y0 + 22)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << num(y0 + kTop) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double t : ticks(ax)) {
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * w;
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0 + kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(y0 + kTop + h)
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << num(x) << "\" y=\"" << num(y0 + kTop + h + 16)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << label(ax, t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = y0 + kTop + h - (t - ay.lo) / (ay.hi - ay.lo) * h;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + w) << "\" y2=\"" << num(y)
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << label(ay, t) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + w / 2) << "\" y=\"" << num(y0 + height - 8)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << num(y0 + kTop + h / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) os << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    os << "\"/>\n";
    const double ly = y0 + kTop + 14 + 18 * static_cast<double>(k), lx = kLeft + w + 12;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
       << "/>\n<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\" font-size=\"11\">" << escape(s.name)
       << "</text>\n";
  }
}

}  // namespace

std::string render(const std::vector<Panel>& panels, double width, double panel_height) {
  std::ostringstream os;
  const double height = panel_height * static_cast<double>(panels.size());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    panel(os, panels[i], panel_height * static_cast<double>(i), width, panel_height);
  os << "</svg>\n";
  return os.str();
}

}  // namespace elmo::cli::svg
