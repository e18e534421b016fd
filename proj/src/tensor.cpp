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

#include "ausculta/tensor.hpp"

#include <cmath>

#include "ausculta/error.hpp"

namespace ausculta {

std::size_t ShapeSize(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) Fail(Errc::kShapeMismatch, "negative dimension in " + ShapeString(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string ShapeString(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<int> dims, double fill)
    : shape(std::move(dims)), data(ShapeSize(shape), fill) {}

Tensor::Tensor(std::vector<int> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (data.size() != ShapeSize(shape)) {
    Fail(Errc::kShapeMismatch, std::to_string(data.size()) + " values for shape " +
                                   ShapeString(shape));
  }
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t cols = data.size() / shape.at(0);
  return {data.data() + r * cols, cols};
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t cols = data.size() / shape.at(0);
  return {data.data() + r * cols, cols};
}

bool Tensor::AllFinite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ausculta
