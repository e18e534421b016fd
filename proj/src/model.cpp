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

#include "ausculta/model.hpp"

#include <cmath>

#include "ausculta/error.hpp"
#include "ausculta/rng.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta::nn {
namespace {

Parameter MakeParam(std::string name, Tensor value) {
  Parameter p{std::move(name), std::move(value), {}};
  p.ZeroGrad();
  return p;
}

// The init stream is keyed by the parameter name, so adding a tensor does
// not reshuffle the others.
Parameter Kaiming(const std::string& name, std::vector<int> shape, int fan_in,
                  std::uint64_t seed) {
  return MakeParam(name, KaimingUniform(std::move(shape), fan_in, seed, name));
}

int Halve(int n) { return (n - 1) / 2 + 1; }

}  // namespace

Tensor KaimingUniform(std::vector<int> shape, int fan_in, std::uint64_t seed,
                      std::string_view key) {
  Tensor t(std::move(shape));
  Rng rng = Rng::Stream(seed, key);
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : t.data) v = rng.Uniform(-bound, bound);
  return t;
}

Var Bind(Graph& g, const Parameter& p, bool trainable) {
  // Graph::Param only records the address to deliver gradients into.
  return trainable ? g.Param(const_cast<Parameter&>(p)) : g.Constant(p.value);
}

ConvEncoder::ConvEncoder(const ModelDims& d, std::uint64_t seed) {
  if (d.n_mels < 1 || d.conv1_channels < 1 || d.conv2_channels < 1 || d.d_e < 1) {
    Fail(Errc::kInvalidArgument, "encoder dimensions must be positive");
  }
  const int c1 = d.conv1_channels, c2 = d.conv2_channels;
  const int pooled = c2 * Halve(Halve(d.n_mels));
  conv1_w_ = Kaiming("encoder.conv1.weight", {c1, 1, 3, 3}, 9, seed);
  conv1_b_ = MakeParam("encoder.conv1.bias", Tensor({c1}));
  conv2_w_ = Kaiming("encoder.conv2.weight", {c2, c1, 3, 3}, c1 * 9, seed);
  conv2_b_ = MakeParam("encoder.conv2.bias", Tensor({c2}));
  fc_w_ = Kaiming("encoder.fc.weight", {d.d_e, pooled}, pooled, seed);
  fc_b_ = MakeParam("encoder.fc.bias", Tensor({d.d_e}));
}

Var ConvEncoder::Forward(Graph& g, Var x, bool trainable) const {
  Var h = Relu(g, Conv2d3x3s2(g, x, Bind(g, conv1_w_, trainable), Bind(g, conv1_b_, trainable)));
  h = Relu(g, Conv2d3x3s2(g, h, Bind(g, conv2_w_, trainable), Bind(g, conv2_b_, trainable)));
  return Linear(g, MeanPoolTime(g, h), Bind(g, fc_w_, trainable), Bind(g, fc_b_, trainable));
}

std::vector<Parameter*> ConvEncoder::Parameters() {
  return {&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_, &fc_w_, &fc_b_};
}

std::vector<const Parameter*> ConvEncoder::Parameters() const {
  return {&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_, &fc_w_, &fc_b_};
}

Model::Model(const ModelDims& dims, std::uint64_t seed)
    : dims_(dims), encoder_(std::make_unique<ConvEncoder>(dims, seed)) {
  if (dims.d_p < 1) Fail(Errc::kInvalidArgument, "d_p must be positive");
  proj_w_ = Kaiming("projector.weight", {dims.d_p, dims.d_e}, dims.d_e, seed);
  proj_b_ = MakeParam("projector.bias", Tensor({dims.d_p}));
  Tensor w({dims.d_p, dims.d_p});
  for (int i = 0; i < dims.d_p; ++i) w[i * dims.d_p + i] = 0.1;
  bilinear_ = MakeParam("bilinear.W", std::move(w));
}

std::vector<Parameter*> Model::Parameters() {
  auto out = encoder_->Parameters();
  out.insert(out.end(), {&proj_w_, &proj_b_, &bilinear_});
  return out;
}

std::vector<const Parameter*> Model::Parameters() const {
  auto out = static_cast<const Encoder&>(*encoder_).Parameters();
  out.insert(out.end(), {&proj_w_, &proj_b_, &bilinear_});
  return out;
}

std::size_t Model::ParameterCount() const {
  std::size_t n = 0;
  for (const Parameter* p : Parameters()) n += p->value.size();
  return n;
}

Tensor StackSpectrograms(std::span<const LogMelSpectrogram> specs) {
  if (specs.empty()) Fail(Errc::kInvalidArgument, "empty spectrogram batch");
  const std::size_t t = specs[0].n_frames;
  const int m = specs[0].n_mels;
  if (t < 1) Fail(Errc::kDimMismatch, "spectrogram has no frames");
  Tensor x({static_cast<int>(specs.size()), 1, static_cast<int>(t), m});
  std::size_t k = 0;
  for (const auto& s : specs) {
    if (s.n_frames != t || s.n_mels != m) {
      Fail(Errc::kDimMismatch, "batch spectrograms differ in shape");
    }
    for (float v : s.values) x[k++] = v;
  }
  return x;
}

Var Model::EncodeBatch(Graph& g, std::span<const LogMelSpectrogram> specs, bool trainable) const {
  if (!specs.empty() && specs[0].n_mels != dims_.n_mels) {
    Fail(Errc::kDimMismatch, "spectrogram has " + std::to_string(specs[0].n_mels) +
                                 " mel bands, encoder expects " + std::to_string(dims_.n_mels));
  }
  return encoder_->Forward(g, g.Constant(StackSpectrograms(specs)), trainable);
}

Var Model::ProjectVar(Graph& g, Var emb, bool trainable) const {
  return Linear(g, emb, Bind(g, proj_w_, trainable), Bind(g, proj_b_, trainable));
}

Var Model::Similarities(Graph& g, Var a, Var b, bool trainable) const {
  return MatMulNT(g, a, MatMulNT(g, b, Bind(g, bilinear_, trainable)));
}

NamedTensors Model::State() const {
  NamedTensors out;
  out.emplace_back("model.dims",
                   Tensor({5}, {static_cast<double>(dims_.n_mels),
                                static_cast<double>(dims_.conv1_channels),
                                static_cast<double>(dims_.conv2_channels),
                                static_cast<double>(dims_.d_e), static_cast<double>(dims_.d_p)}));
  for (const Parameter* p : Parameters()) out.emplace_back(p->name, p->value);
  return out;
}

Model Model::FromState(const NamedTensors& state) {
  if (state.empty() || state[0].first != "model.dims" || state[0].second.size() != 5) {
    Fail(Errc::kMalformedContainer, "checkpoint lacks model.dims");
  }
  const Tensor& d = state[0].second;
  ModelDims dims{static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2]),
                 static_cast<int>(d[3]), static_cast<int>(d[4])};
  Model m(dims, 0);
  m.LoadValues(state);
  return m;
}

void Model::LoadValues(const NamedTensors& state) {
  for (Parameter* p : Parameters()) {
    const Tensor* found = nullptr;
    for (const auto& [name, t] : state) {
      if (name == p->name) found = &t;
    }
    if (!found) Fail(Errc::kMalformedContainer, "checkpoint lacks " + p->name);
    if (found->shape != p->value.shape) {
      Fail(Errc::kDimMismatch, p->name + ": checkpoint shape " + ShapeString(found->shape) +
                                   " vs model " + ShapeString(p->value.shape));
    }
    p->value = *found;
    p->ZeroGrad();
  }
}

std::vector<double> Encode(const Model& model, const LogMelSpectrogram& spec) {
  Graph g;
  Var e = model.EncodeBatch(g, std::span(&spec, 1), false);
  return g.value(e).data;
}

std::vector<double> Project(const Model& model, std::span<const double> emb) {
  if (emb.size() != static_cast<std::size_t>(model.dims().d_e)) {
    Fail(Errc::kDimMismatch, "embedding has dim " + std::to_string(emb.size()) +
                                 ", projector expects " + std::to_string(model.dims().d_e));
  }
  Graph g;
  Var x = g.Constant(Tensor({1, model.dims().d_e}, std::vector<double>(emb.begin(), emb.end())));
  return g.value(model.ProjectVar(g, x, false)).data;
}

double BilinearSimilarity(std::span<const double> u, std::span<const double> v, const Tensor& w) {
  if (w.rank() != 2 || w.dim(0) != w.dim(1) || u.size() != static_cast<std::size_t>(w.dim(0)) ||
      v.size() != u.size()) {
    Fail(Errc::kDimMismatch, "bilinear similarity dims: u " + std::to_string(u.size()) + ", v " +
                                 std::to_string(v.size()) + ", W " + ShapeString(w.shape));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * simd::Dot(w.row(i), v);
  return s;
}

}  // namespace ausculta::nn
