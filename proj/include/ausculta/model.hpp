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

// Encoder f, projector g and the bilinear matrix W of the contrastive stack.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ausculta/autograd.hpp"
#include "ausculta/features.hpp"

namespace ausculta::nn {

struct ModelDims {
  int n_mels = 64;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int d_e = 128;
  int d_p = 32;
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Pluggable encoder. Input [B,1,T,n_mels], output [B,out_dim()] for any T >= 1.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual int out_dim() const = 0;
  // trainable=false binds parameters as constants; no gradient reaches them.
  virtual Var Forward(Graph& g, Var x, bool trainable) const = 0;
  virtual std::vector<Parameter*> Parameters() = 0;
  virtual std::vector<const Parameter*> Parameters() const = 0;
};

// Two 3x3/stride-2 conv+ReLU blocks, mean over time, dense to d_e.
class ConvEncoder final : public Encoder {
 public:
  ConvEncoder(const ModelDims& dims, std::uint64_t seed);
  int out_dim() const override { return fc_w_.value.dim(0); }
  Var Forward(Graph& g, Var x, bool trainable) const override;
  std::vector<Parameter*> Parameters() override;
  std::vector<const Parameter*> Parameters() const override;

 private:
  Parameter conv1_w_, conv1_b_, conv2_w_, conv2_b_, fc_w_, fc_b_;
};

class Model {
 public:
  explicit Model(const ModelDims& dims = {}, std::uint64_t seed = 0);

  const ModelDims& dims() const { return dims_; }
  const Encoder& encoder() const { return *encoder_; }

  std::vector<Parameter*> Parameters();
  std::vector<Parameter*> EncoderParameters() { return encoder_->Parameters(); }
  std::vector<const Parameter*> Parameters() const;

  // Spectrograms must share one frame count.
  Var EncodeBatch(Graph& g, std::span<const LogMelSpectrogram> specs, bool trainable) const;
  Var ProjectVar(Graph& g, Var emb, bool trainable) const;
  // S[i][j] = a_i W b_j^T
  Var Similarities(Graph& g, Var a, Var b, bool trainable) const;

  std::size_t ParameterCount() const;

  // Parameter values plus a "model.dims" tensor describing the shape.
  NamedTensors State() const;
  static Model FromState(const NamedTensors& state);
  // Overwrites values in place; names and shapes must match.
  void LoadValues(const NamedTensors& state);

  const Parameter& projector_weight() const { return proj_w_; }
  const Parameter& projector_bias() const { return proj_b_; }
  const Parameter& bilinear() const { return bilinear_; }

 private:
  ModelDims dims_;
  std::unique_ptr<ConvEncoder> encoder_;
  Parameter proj_w_, proj_b_, bilinear_;
};

// Binds p into g, as a trainable leaf or as a constant copy.
Var Bind(Graph& g, const Parameter& p, bool trainable);

Tensor StackSpectrograms(std::span<const LogMelSpectrogram> specs);

// Plain evaluation, no tape retained.
std::vector<double> Encode(const Model& model, const LogMelSpectrogram& spec);
std::vector<double> Project(const Model& model, std::span<const double> emb);
double BilinearSimilarity(std::span<const double> u, std::span<const double> v, const Tensor& w);

// Uniform(-b, b) with b = sqrt(6 / fan_in).
Tensor KaimingUniform(std::vector<int> shape, int fan_in, std::uint64_t seed,
                      std::string_view key);

}  // namespace ausculta::nn
