#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ncscli/commands.hpp"

namespace ncs::cli {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string plot_svg(const SweepResult& result) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 55;
  double x0 = 1.0, x1 = 0.0, y1 = 0.0;
  for (const auto& r : result.rows) {
    x0 = std::min(x0, r.q);
    x1 = std::max(x1, r.q);
    if (std::isfinite(r.gamma_op)) y1 = std::max(y1, r.gamma_op);
    if (std::isfinite(r.gamma_ro)) y1 = std::max(y1, r.gamma_ro);
  }
  if (x1 <= x0) {
    x0 -= 0.05;
    x1 += 0.05;
  }
  y1 = y1 > 0.0 ? 1.1 * y1 : 1.0;
  auto sx = [&](double q) { return left + (q - x0) / (x1 - x0) * (W - left - right); };
  auto sy = [&](double g) { return H - bottom - g / y1 * (H - top - bottom); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", H - bottom) + "\" x2=\"" +
       fmt("%.1f", W - right) + "\" y2=\"" + fmt("%.1f", H - bottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top) + "\" x2=\"" +
       fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", H - bottom) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double q = x0 + (x1 - x0) * k / 5.0;
    const double g = y1 * k / 5.0;
    s += "<text x=\"" + fmt("%.1f", sx(q)) + "\" y=\"" + fmt("%.1f", H - bottom + 18) +
         "\" text-anchor=\"middle\">" + fmt("%.3g", q) + "</text>\n";
    s += "<text x=\"" + fmt("%.1f", left - 6) + "\" y=\"" + fmt("%.1f", sy(g) + 4) +
         "\" text-anchor=\"end\">" + fmt("%.3g", g) + "</text>\n";
    s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", sy(g)) + "\" x2=\"" +
         fmt("%.1f", W - right) + "\" y2=\"" + fmt("%.1f", sy(g)) + "\" stroke=\"#ddd\"/>\n";
  }
  s += "<text x=\"" + fmt("%.1f", (left + W - right) / 2) + "\" y=\"" + fmt("%.1f", H - 12) +
       "\" text-anchor=\"middle\">success probability q</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.1f", (top + H - bottom) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + fmt("%.1f", (top + H - bottom) / 2) +
       ")\">guaranteed H-infinity cost</text>\n";

  auto series = [&](bool robust, const char* colour, const char* dash) {
    std::string pts;
    for (const auto& r : result.rows) {
      const double g = robust ? r.gamma_ro : r.gamma_op;
      if (!std::isfinite(g)) continue;
      pts += fmt("%.2f", sx(r.q)) + "," + fmt("%.2f", sy(g)) + " ";
    }
    if (pts.empty()) return;
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\"";
    if (*dash) s += " stroke-dasharray=\"" + std::string(dash) + "\"";
    s += " points=\"" + pts + "\"/>\n";
  };
  series(false, "#1f77b4", "");
  series(true, "#d62728", "6 4");
  s += "<text x=\"" + fmt("%.1f", W - right - 150) + "\" y=\"" + fmt("%.1f", top - 18) +
       "\" fill=\"#1f77b4\">optimal (known q)</text>\n";
  s += "<text x=\"" + fmt("%.1f", W - right - 150) + "\" y=\"" + fmt("%.1f", top - 4) +
       "\" fill=\"#d62728\">robust " + "[" + fmt("%.3g", result.q_lo) + ", " + fmt("%.3g", result.q_hi) +
       "]</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace ncs::cli
