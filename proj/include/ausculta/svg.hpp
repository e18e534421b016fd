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

#pragma once

// Static SVG emitters for report figures: plain rects, polylines and text.

#include <string>
#include <vector>

namespace ausculta::svg {

struct Series {
  std::string name;
  std::vector<double> values;
};

// One bar per label.
std::string BarChart(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values);

// Categories along x, one bar per series inside each category.
std::string GroupedBarChart(const std::string& title, const std::vector<std::string>& categories,
                            const std::vector<Series>& series);

// Axes spread evenly around the circle; values are scaled by the largest
// value across all series.
std::string RadarChart(const std::string& title, const std::vector<std::string>& axes,
                       const std::vector<Series>& series);

}  // namespace ausculta::svg
