/*
 * Copyright 2026 The AuscultaBase Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ausculta/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace ausculta::svg {
namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                    "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};

std::string Escape(const std::string& s) {
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

void Open(std::ostringstream& os, int w, int h, const std::string& title) {
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << Escape(title) << "</text>\n";
}

double MaxOf(const std::vector<Series>& series) {
  double mx = 0.0;
  for (const auto& s : series)
    for (double v : s.values) mx = std::max(mx, v);
  return mx > 0.0 ? mx : 1.0;
}

}  // namespace

std::string BarChart(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values) {
  std::vector<Series> series;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    series.push_back({labels[i], {i < values.size() ? values[i] : 0.0}});
  }
  return GroupedBarChart(title, {""}, series);
}

std::string GroupedBarChart(const std::string& title, const std::vector<std::string>& categories,
                            const std::vector<Series>& series) {
  const int left = 50, top = 40, plot_h = 240, legend_w = 140;
  const int group_w = std::max<int>(60, 24 * static_cast<int>(series.size()) + 20);
  const int w = left + group_w * static_cast<int>(categories.size()) + legend_w;
  const int h = top + plot_h + 50;
  const double mx = MaxOf(series);
  std::ostringstream os;
  Open(os, w, h, title);
  const int base = top + plot_h;
  os << "<line x1=\"" << left << "\" y1=\"" << base << "\" x2=\"" << w - legend_w << "\" y2=\""
     << base << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">"
     << mx << "</text>\n";
  const double bar_w = (group_w - 20.0) / std::max<std::size_t>(1, series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x0 = left + group_w * static_cast<double>(c) + 10.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = c < series[s].values.size() ? series[s].values[c] : 0.0;
      const double bh = plot_h * std::max(0.0, v) / mx;
      os << "<rect x=\"" << x0 + bar_w * s << "\" y=\"" << base - bh << "\" width=\""
         << bar_w - 2 << "\" height=\"" << bh << "\" fill=\"" << kPalette[s % 8] << "\"><title>"
         << Escape(series[s].name) << ": " << v << "</title></rect>\n";
    }
    os << "<text x=\"" << x0 + (group_w - 20.0) / 2 << "\" y=\"" << base + 16
       << "\" text-anchor=\"middle\">" << Escape(categories[c]) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const int y = top + 18 * static_cast<int>(s);
    os << "<rect x=\"" << w - legend_w + 10 << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
       << kPalette[s % 8] << "\"/><text x=\"" << w - legend_w + 28 << "\" y=\"" << y + 10 << "\">"
       << Escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string RadarChart(const std::string& title, const std::vector<std::string>& axes,
                       const std::vector<Series>& series) {
  const int w = 520, h = 440;
  const double cx = 200, cy = 230, radius = 160;
  const double mx = MaxOf(series);
  const std::size_t n = std::max<std::size_t>(1, axes.size());
  auto point = [&](std::size_t k, double frac) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / n - std::numbers::pi / 2;
    return std::pair{cx + radius * frac * std::cos(a), cy + radius * frac * std::sin(a)};
  };
  std::ostringstream os;
  Open(os, w, h, title);
  for (std::size_t k = 0; k < axes.size(); ++k) {
    auto [x, y] = point(k, 1.0);
    auto [lx, ly] = point(k, 1.1);
    os << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << x << "\" y2=\"" << y
       << "\" stroke=\"#bbb\"/><text x=\"" << lx << "\" y=\"" << ly
       << "\" text-anchor=\"middle\">" << Escape(axes[k]) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    os << "<polygon fill=\"none\" stroke-width=\"2\" stroke=\"" << kPalette[s % 8] << "\" points=\"";
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double v = k < series[s].values.size() ? series[s].values[k] : 0.0;
      auto [x, y] = point(k, std::max(0.0, v) / mx);
      os << x << ',' << y << ' ';
    }
    os << "\"><title>" << Escape(series[s].name) << "</title></polygon>\n";
    const int y = 40 + 18 * static_cast<int>(s);
    os << "<rect x=\"400\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[s % 8]
       << "\"/><text x=\"418\" y=\"" << y + 10 << "\">" << Escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ausculta::svg
