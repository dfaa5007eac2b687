#include "bgs/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bgs/errors.hpp"
#include "bgs/matcore.hpp"

namespace bgs {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sci(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool drawable(double x, double y) { return std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0; }

}  // namespace

std::string emit_svg(const PlotData& plot) {
  if (plot.series.empty()) throw ContractError("emit_svg: no series");

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : plot.series)
    for (auto [x, y] : s.points) {
      if (!drawable(x, y)) continue;
      xlo = std::min(xlo, std::log10(x));
      xhi = std::max(xhi, std::log10(x));
      ylo = std::min(ylo, std::log10(y));
      yhi = std::max(yhi, std::log10(y));
    }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = -16, yhi = 0;
  const double eps10 = std::log10(machine_eps());
  if (plot.reference_lines) ylo = std::min(ylo, eps10);
  xlo = std::floor(xlo), xhi = std::max(std::ceil(xhi), xlo + 1);
  ylo = std::floor(ylo), yhi = std::max(std::ceil(yhi), ylo + 1);

  const double W = 720, H = 480, L = 80, R = 200, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double lx) { return L + (lx - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double ly) { return T + (yhi - ly) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(L + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double d = xlo; d <= xhi; d += 1) {
    o << "<line x1=\"" << num(px(d)) << "\" y1=\"" << T + ph << "\" x2=\"" << num(px(d)) << "\" y2=\"" << T + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(px(d)) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">1e" << d
      << "</text>\n";
  }
  const double ystep = std::max(1.0, std::ceil((yhi - ylo) / 12));
  for (double d = ylo; d <= yhi; d += ystep) {
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << num(py(d)) << "\" x2=\"" << L << "\" y2=\"" << num(py(d))
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << L - 8 << "\" y=\"" << num(py(d) + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << escape(plot.xlabel)
    << "</text>\n";
  o << "<text x=\"18\" y=\"" << num(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(T + ph / 2) << ")\">" << escape(plot.ylabel) << "</text>\n";

  o << "<defs><clipPath id=\"plot\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\"/></clipPath></defs>\n";
  if (plot.reference_lines) {
    // log10 of eps * kappa^k is a line of slope k
    const std::array<std::pair<int, const char*>, 3> refs = {{{0, "eps"}, {1, "eps*kappa"}, {2, "eps*kappa^2"}}};
    for (auto [k, label] : refs) {
      o << "<line class=\"reference\" clip-path=\"url(#plot)\" x1=\"" << num(px(xlo)) << "\" y1=\""
        << num(py(eps10 + k * xlo)) << "\" x2=\"" << num(px(xhi)) << "\" y2=\"" << num(py(eps10 + k * xhi))
        << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"><title>" << label << "</title></line>\n";
    }
  }

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % kPalette.size()];
    for (auto [x, y] : s.points) {
      if (!drawable(x, y)) continue;
      o << "<circle class=\"marker\" cx=\"" << num(px(std::log10(x))) << "\" cy=\"" << num(py(std::log10(y)))
        << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 14 + 18 * static_cast<double>(i);
    o << "<circle cx=\"" << W - R + 16 << "\" cy=\"" << num(ly - 4) << "\" r=\"4\" fill=\"" << color << "\"/>";
    o << "<text class=\"legend\" x=\"" << W - R + 26 << "\" y=\"" << num(ly) << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string emit_heat_svg(const HeatGrid& grid) {
  if (grid.rows.empty() || grid.cols.empty()) throw ContractError("emit_heat_svg: empty grid");
  if (grid.values.size() != grid.rows.size()) throw ContractError("emit_heat_svg: row count mismatch");

  const double cw = 70, ch = 26, L = 130, T = 110;
  const double W = L + cw * static_cast<double>(grid.cols.size()) + 20;
  const double H = T + ch * static_cast<double>(grid.rows.size()) + 20;

  // log10 binning between 1e-16 and 1e0
  auto color = [](double v) -> std::string {
    if (!std::isfinite(v)) return "#cccccc";
    const double l = std::clamp(std::log10(std::max(v, 1e-300)), -16.0, 0.0);
    const double t = (l + 16.0) / 16.0;
    const int r = static_cast<int>(255 * t), g = static_cast<int>(255 * (1 - std::abs(2 * t - 1))),
              b = static_cast<int>(255 * (1 - t));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(grid.title) << "</text>\n";
  for (std::size_t j = 0; j < grid.cols.size(); ++j) {
    const double x = L + cw * static_cast<double>(j) + cw / 2;
    o << "<text x=\"" << num(x) << "\" y=\"" << T - 6 << "\" transform=\"rotate(-45 " << num(x) << ' ' << T - 6
      << ")\">" << escape(grid.cols[j]) << "</text>\n";
  }
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    if (grid.values[i].size() != grid.cols.size()) throw ContractError("emit_heat_svg: column count mismatch");
    const double y = T + ch * static_cast<double>(i);
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(y + ch / 2 + 4) << "\" text-anchor=\"end\">"
      << escape(grid.rows[i]) << "</text>\n";
    for (std::size_t j = 0; j < grid.cols.size(); ++j) {
      const double v = grid.values[i][j];
      const double x = L + cw * static_cast<double>(j);
      o << "<rect class=\"cell\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << cw << "\" height=\"" << ch
        << "\" fill=\"" << color(v) << "\" stroke=\"white\"/>";
      o << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4) << "\" text-anchor=\"middle\">"
        << sci(v) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bgs
