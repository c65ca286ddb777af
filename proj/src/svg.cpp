#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ictk/harness.hpp"

namespace ictk {

namespace {

constexpr int kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

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

std::string header(int w, int h, const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" "
         "fill=\"white\"/>\n<text x=\"" + std::to_string(w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<SvgSeries>& series, bool x_is_log, bool y_is_log) {
  auto tx = [&](double x) { return x_is_log ? std::log10(x) : x; };
  auto ty = [&](double y) { return y_is_log ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  std::string o = header(kW, kH, title);
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  if (!std::isfinite(x0)) return o + "</svg>\n";
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double a) { return kLeft + (a - x0) / (x1 - x0) * pw; };
  auto py = [&](double b) { return kTop + ph - (b - y0) / (y1 - y0) * ph; };
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double a = x0 + (x1 - x0) * i / 4, b = y0 + (y1 - y0) * i / 4;
    o += "<text x=\"" + num(px(a)) + "\" y=\"" + num(kTop + ph + 15) + "\" text-anchor=\"middle\">" +
         (x_is_log ? "1e" + num(a) : num(a)) + "</text>\n";
    o += "<text x=\"" + num(kLeft - 5) + "\" y=\"" + num(py(b) + 4) + "\" text-anchor=\"end\">" +
         (y_is_log ? "1e" + num(b) : num(b)) + "</text>\n";
  }
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kH - 10) + "\" text-anchor=\"middle\">" + escape(xlabel) +
       "</text>\n";
  o += "<text x=\"15\" y=\"" + num(kTop + ph / 2) + "\" transform=\"rotate(-90 15 " + num(kTop + ph / 2) +
       ")\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kPalette[k % 8];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      pts += num(px(a)) + "," + num(py(b)) + " ";
    }
    o += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 10 + 16.0 * k;
    o += "<line x1=\"" + num(kW - kRight + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kW - kRight + 30) +
         "\" y2=\"" + num(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(kW - kRight + 35) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) + "</text>\n";
  }
  return o + "</svg>\n";
}

std::string svg_heatmap(const std::string& title, const std::vector<std::vector<double>>& values) {
  const int rows = static_cast<int>(values.size());
  const int cols = rows ? static_cast<int>(values[0].size()) : 0;
  const int cell = 24, w = kLeft + cols * cell + 40, h = kTop + rows * cell + 30;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : values)
    for (double v : r)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  std::string o = header(w, h, title);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols && j < static_cast<int>(values[i].size()); ++j) {
      const double v = values[i][j];
      std::string fill = "#eeeeee";
      if (std::isfinite(v)) {
        const double s = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * s), 64, static_cast<int>(255 * (1 - s)));
        fill = buf;
      }
      o += "<rect x=\"" + std::to_string(kLeft + j * cell) + "\" y=\"" + std::to_string(kTop + i * cell) +
           "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
           "\"><title>" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ": " + num(v) + "</title></rect>\n";
    }
    o += "<text x=\"" + std::to_string(kLeft - 5) + "\" y=\"" + std::to_string(kTop + i * cell + 16) +
         "\" text-anchor=\"end\">" + std::to_string(i + 1) + "</text>\n";
  }
  o += "<text x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(h - 8) + "\">range " + num(lo) + " .. " +
       num(hi) + "</text>\n";
  return o + "</svg>\n";
}

std::string svg_mask(const std::string& title, const std::vector<std::uint8_t>& mask, int n, int max_px) {
  if (static_cast<std::size_t>(n) * n != mask.size()) throw std::invalid_argument("svg_mask: size mismatch");
  const int step = std::max(1, n / max_px), m = n / step;
  std::string o = header(m + 20, m + 50, title);
  // one run-length rect per row of set cells, x1 horizontal
  for (int r = 0; r < m; ++r) {
    int c = 0;
    while (c < m) {
      auto on = [&](int cc) { return mask[static_cast<std::size_t>(cc * step) * n + static_cast<std::size_t>(r * step)] != 0; };
      if (!on(c)) {
        ++c;
        continue;
      }
      int e = c;
      while (e < m && on(e)) ++e;
      o += "<rect x=\"" + std::to_string(10 + c) + "\" y=\"" + std::to_string(40 + m - 1 - r) + "\" width=\"" +
           std::to_string(e - c) + "\" height=\"1\" fill=\"black\"/>\n";
      c = e;
    }
  }
  return o + "</svg>\n";
}

}  // namespace ictk
