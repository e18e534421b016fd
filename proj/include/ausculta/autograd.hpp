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

// Tape-based reverse-mode differentiation over Tensor. Nodes are appended in
// forward order; Backward walks the tape in reverse, so gradient
// accumulation order is fixed for a given forward pass.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ausculta/tensor.hpp"

namespace ausculta::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void ZeroGrad() { grad = Tensor(value.shape); }
};

struct Var {
  int id = -1;
};

class Graph {
 public:
  // Called with the node's own handle; reads grad(self), accumulates into inputs.
  using BackwardFn = std::function<void(Graph&, Var self)>;

  Var Constant(Tensor value);
  Var Param(Parameter& p);

  // Appends an op node. `backward` runs only if some input needs gradients.
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  // Gradient buffer of v, allocated on first use.
  Tensor& grad(Var v);

  // Seeds d(loss)/d(loss) = 1 and propagates; parameter gradients are
  // accumulated into Parameter::grad. Throws NonFiniteGradient.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// x [n,k] times y[m,k]^T -> [n,m]
Var MatMulNT(Graph& g, Var x, Var y);
// x [n,m] + b[m] broadcast over rows
Var AddBias(Graph& g, Var x, Var b);
// x [n,in], w [out,in], b [out] -> [n,out]
Var Linear(Graph& g, Var x, Var w, Var b);
// 3x3 kernel, stride 2, zero padding 1. x [B,C,H,W], w [Co,C,3,3], b [Co].
Var Conv2d3x3s2(Graph& g, Var x, Var w, Var b);
Var Relu(Graph& g, Var x);
// Mean over axis 2 (time) of [B,C,T,F] -> [B, C*F]; frequency position and
// channel survive, clip length does not.
Var MeanPoolTime(Graph& g, Var x);

// Mean over rows of -log softmax(sims)[i][i]; see ContrastiveLoss in
// pretrain.hpp for the plain evaluation. Scalar output, shape [1].
Var InfoNceLoss(Graph& g, Var sims, double* accuracy = nullptr);
// Mean softmax cross-entropy of logits [n,K] against class indices.
Var SoftmaxCrossEntropy(Graph& g, Var logits, std::span<const int> labels);
// Mean element-wise sigmoid cross-entropy; targets [n,K] in {0,1}.
Var SigmoidCrossEntropy(Graph& g, Var logits, const Tensor& targets);
// Mean squared error of pred [n,1] against targets.
Var MeanSquaredError(Graph& g, Var pred, std::span<const double> targets);

}  // namespace ausculta::nn
