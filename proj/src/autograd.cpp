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

#include "ausculta/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ausculta/error.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta::nn {
namespace {

void RequireFinite(const Tensor& t, const char* op, Errc code = Errc::kNonFiniteActivation) {
  if (!t.AllFinite()) Fail(code, std::string(op) + " produced non-finite values");
}

void RequireRank(const Tensor& t, int rank, const char* op) {
  if (t.rank() != rank) {
    Fail(Errc::kDimMismatch, std::string(op) + ": expected rank " + std::to_string(rank) +
                                 ", got " + ShapeString(t.shape));
  }
}

int ConvOut(int n) { return (n - 1) / 2 + 1; }

// Rows are output positions, columns (channel, ky, kx) taps.
void Im2Col(const double* x, int c, int h, int w, std::vector<double>& col) {
  const int ho = ConvOut(h), wo = ConvOut(w);
  const int k = c * 9;
  col.assign(static_cast<std::size_t>(ho) * wo * k, 0.0);
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      double* dst = col.data() + (static_cast<std::size_t>(oy) * wo + ox) * k;
      for (int ch = 0; ch < c; ++ch)
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = 2 * ox + kx - 1;
            if (ix < 0 || ix >= w) continue;
            dst[ch * 9 + ky * 3 + kx] = x[(static_cast<std::size_t>(ch) * h + iy) * w + ix];
          }
        }
    }
}

void Col2ImAdd(const std::vector<double>& col, int c, int h, int w, double* dx) {
  const int ho = ConvOut(h), wo = ConvOut(w);
  const int k = c * 9;
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      const double* src = col.data() + (static_cast<std::size_t>(oy) * wo + ox) * k;
      for (int ch = 0; ch < c; ++ch)
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = 2 * ox + kx - 1;
            if (ix < 0 || ix >= w) continue;
            dx[(static_cast<std::size_t>(ch) * h + iy) * w + ix] += src[ch * 9 + ky * 3 + kx];
          }
        }
    }
}

}  // namespace

Var Graph::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, false});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Param(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, nullptr, &p, true});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_.at(v.id).needs_grad;
  nodes_.push_back(
      Node{std::move(value), {}, needs ? std::move(backward) : nullptr, nullptr, needs});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Graph::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.shape != n.value.shape) n.grad = Tensor(n.value.shape);
  return n.grad;
}

void Graph::Backward(Var loss) {
  if (value(loss).size() != 1) Fail(Errc::kDimMismatch, "backward needs a scalar loss");
  grad(loss)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.data.empty()) continue;
    if (n.backward) {
      n.backward(*this, Var{i});
    } else if (n.param) {
      if (!n.grad.AllFinite()) Fail(Errc::kNonFiniteGradient, "gradient of " + n.param->name);
      if (n.param->grad.shape != n.param->value.shape) n.param->ZeroGrad();
      simd::Axpy(1.0, n.grad.data, n.param->grad.data);
    }
  }
}

Var MatMulNT(Graph& g, Var x, Var y) {
  const Tensor& a = g.value(x);
  const Tensor& b = g.value(y);
  RequireRank(a, 2, "matmul");
  RequireRank(b, 2, "matmul");
  if (a.dim(1) != b.dim(1)) {
    Fail(Errc::kDimMismatch,
         "matmul " + ShapeString(a.shape) + " x " + ShapeString(b.shape) + "^T");
  }
  const int n = a.dim(0), m = b.dim(0);
  Tensor out({n, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = simd::Dot(a.row(i), b.row(j));
  RequireFinite(out, "matmul");
  return g.Record(std::move(out), {x, y}, [x, y](Graph& gr, Var self) {
    const Tensor& a = gr.value(x);
    const Tensor& b = gr.value(y);
    const Tensor& go = gr.grad(self);
    const int n = a.dim(0), m = b.dim(0);
    if (gr.needs_grad(x)) {
      Tensor& ga = gr.grad(x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          const double s = go[i * m + j];
          if (s != 0.0) simd::Axpy(s, b.row(j), ga.row(i));
        }
    }
    if (gr.needs_grad(y)) {
      Tensor& gb = gr.grad(y);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          const double s = go[i * m + j];
          if (s != 0.0) simd::Axpy(s, a.row(i), gb.row(j));
        }
    }
  });
}

Var AddBias(Graph& g, Var x, Var b) {
  const Tensor& a = g.value(x);
  const Tensor& bias = g.value(b);
  RequireRank(a, 2, "add_bias");
  if (bias.size() != static_cast<std::size_t>(a.dim(1))) {
    Fail(Errc::kDimMismatch, "bias " + ShapeString(bias.shape) + " for " + ShapeString(a.shape));
  }
  Tensor out = a;
  for (int i = 0; i < a.dim(0); ++i) simd::Axpy(1.0, bias.data, out.row(i));
  return g.Record(std::move(out), {x, b}, [x, b](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.needs_grad(x)) simd::Axpy(1.0, go.data, gr.grad(x).data);
    if (gr.needs_grad(b)) {
      Tensor& gb = gr.grad(b);
      for (int i = 0; i < go.dim(0); ++i) simd::Axpy(1.0, go.row(i), gb.data);
    }
  });
}

Var Linear(Graph& g, Var x, Var w, Var b) { return AddBias(g, MatMulNT(g, x, w), b); }

Var Conv2d3x3s2(Graph& g, Var xv, Var wv, Var bv) {
  const Tensor& x = g.value(xv);
  const Tensor& w = g.value(wv);
  const Tensor& b = g.value(bv);
  RequireRank(x, 4, "conv2d");
  RequireRank(w, 4, "conv2d");
  const int batch = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0);
  if (w.dim(1) != c || w.dim(2) != 3 || w.dim(3) != 3 || b.size() != static_cast<std::size_t>(co)) {
    Fail(Errc::kDimMismatch, "conv2d weight " + ShapeString(w.shape) + " for input " +
                                 ShapeString(x.shape));
  }
  const int ho = ConvOut(h), wo = ConvOut(wd);
  const int positions = ho * wo;
  const int taps = c * 9;
  auto cols = std::make_shared<std::vector<std::vector<double>>>(batch);
  Tensor out({batch, co, ho, wo});
  const std::size_t in_stride = static_cast<std::size_t>(c) * h * wd;
  for (int n = 0; n < batch; ++n) {
    auto& col = (*cols)[n];
    Im2Col(x.data.data() + n * in_stride, c, h, wd, col);
    for (int o = 0; o < co; ++o) {
      std::span<const double> wrow(w.data.data() + static_cast<std::size_t>(o) * taps, taps);
      double* dst = out.data.data() + (static_cast<std::size_t>(n) * co + o) * positions;
      for (int p = 0; p < positions; ++p) {
        dst[p] = simd::Dot(wrow, {col.data() + static_cast<std::size_t>(p) * taps,
                                  static_cast<std::size_t>(taps)}) + b[o];
      }
    }
  }
  RequireFinite(out, "conv2d");
  return g.Record(std::move(out), {xv, wv, bv},
                  [=](Graph& gr, Var self) {
    const Tensor& w = gr.value(wv);
    const Tensor& go = gr.grad(self);
    const bool want_x = gr.needs_grad(xv);
    const bool want_w = gr.needs_grad(wv);
    const bool want_b = gr.needs_grad(bv);
    std::vector<double> dcol;
    for (int n = 0; n < batch; ++n) {
      const auto& col = (*cols)[n];
      if (want_x) dcol.assign(col.size(), 0.0);
      for (int o = 0; o < co; ++o) {
        const double* gsrc = go.data.data() + (static_cast<std::size_t>(n) * co + o) * positions;
        std::span<const double> wrow(w.data.data() + static_cast<std::size_t>(o) * taps, taps);
        for (int p = 0; p < positions; ++p) {
          const double s = gsrc[p];
          if (s == 0.0) continue;
          std::span<const double> crow(col.data() + static_cast<std::size_t>(p) * taps, taps);
          if (want_w) {
            simd::Axpy(s, crow, {gr.grad(wv).data.data() + static_cast<std::size_t>(o) * taps,
                                 static_cast<std::size_t>(taps)});
          }
          if (want_x) {
            simd::Axpy(s, wrow, {dcol.data() + static_cast<std::size_t>(p) * taps,
                                 static_cast<std::size_t>(taps)});
          }
        }
        if (want_b) {
          double acc = 0.0;
          for (int p = 0; p < positions; ++p) acc += gsrc[p];
          gr.grad(bv)[o] += acc;
        }
      }
      if (want_x) Col2ImAdd(dcol, c, h, wd, gr.grad(xv).data.data() + n * in_stride);
    }
  });
}

Var Relu(Graph& g, Var x) {
  Tensor out = g.value(x);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return g.Record(std::move(out), {x}, [x](Graph& gr, Var self) {
    const Tensor& in = gr.value(x);
    const Tensor& go = gr.grad(self);
    Tensor& gi = gr.grad(x);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] > 0.0) gi[i] += go[i];
    }
  });
}

Var MeanPoolTime(Graph& g, Var x) {
  const Tensor& in = g.value(x);
  RequireRank(in, 4, "mean_pool");
  const int batch = in.dim(0), c = in.dim(1), t = in.dim(2), f = in.dim(3);
  Tensor out({batch, c * f});
  for (int n = 0; n < batch; ++n)
    for (int ch = 0; ch < c; ++ch) {
      const double* src = in.data.data() + (static_cast<std::size_t>(n) * c + ch) * t * f;
      double* dst = out.data.data() + (static_cast<std::size_t>(n) * c + ch) * f;
      for (int i = 0; i < t; ++i)
        for (int j = 0; j < f; ++j) dst[j] += src[i * f + j];
      for (int j = 0; j < f; ++j) dst[j] /= t;
    }
  return g.Record(std::move(out), {x}, [x, batch, c, t, f](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    Tensor& gi = gr.grad(x);
    for (int n = 0; n < batch; ++n)
      for (int ch = 0; ch < c; ++ch) {
        const double* src = go.data.data() + (static_cast<std::size_t>(n) * c + ch) * f;
        double* dst = gi.data.data() + (static_cast<std::size_t>(n) * c + ch) * t * f;
        for (int i = 0; i < t; ++i)
          for (int j = 0; j < f; ++j) dst[i * f + j] += src[j] / t;
      }
  });
}

Var InfoNceLoss(Graph& g, Var sims, double* accuracy) {
  const Tensor& s = g.value(sims);
  RequireRank(s, 2, "info_nce");
  const int n = s.dim(0);
  if (n < 2 || s.dim(1) != n) Fail(Errc::kDimMismatch, "info_nce needs a square N>=2 matrix");
  if (!s.AllFinite()) Fail(Errc::kNonFiniteLoss, "non-finite similarities");
  auto probs = std::make_shared<Tensor>(std::vector<int>{n, n});
  double loss = 0.0;
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const auto row = s.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    loss += lse - row[i];
    for (int j = 0; j < n; ++j) (*probs)[i * n + j] = std::exp(row[j] - lse);
    bool strict_max = true;
    for (int j = 0; j < n; ++j) strict_max = strict_max && (j == i || row[j] < row[i]);
    correct += strict_max;
  }
  loss /= n;
  if (!std::isfinite(loss)) Fail(Errc::kNonFiniteLoss, "contrastive loss is not finite");
  if (accuracy) *accuracy = static_cast<double>(correct) / n;
  return g.Record(Tensor({1}, {loss}), {sims}, [sims, probs, n](Graph& gr, Var self) {
    const double scale = gr.grad(self)[0] / n;
    Tensor& gs = gr.grad(sims);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        gs[i * n + j] += scale * ((*probs)[i * n + j] - (i == j ? 1.0 : 0.0));
      }
  });
}

Var SoftmaxCrossEntropy(Graph& g, Var logits, std::span<const int> labels) {
  const Tensor& z = g.value(logits);
  RequireRank(z, 2, "softmax_ce");
  const int n = z.dim(0), k = z.dim(1);
  if (labels.size() != static_cast<std::size_t>(n)) Fail(Errc::kDimMismatch, "label count");
  auto probs = std::make_shared<Tensor>(z.shape);
  std::vector<int> y(labels.begin(), labels.end());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (y[i] < 0 || y[i] >= k) Fail(Errc::kLabelOutOfRange, "class label outside logits");
    const auto row = z.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    loss += lse - row[y[i]];
    for (int j = 0; j < k; ++j) (*probs)[i * k + j] = std::exp(row[j] - lse);
  }
  loss /= n;
  if (!std::isfinite(loss)) Fail(Errc::kNonFiniteLoss, "cross-entropy is not finite");
  return g.Record(Tensor({1}, {loss}), {logits}, [logits, probs, y, n, k](Graph& gr, Var self) {
    const double scale = gr.grad(self)[0] / n;
    Tensor& gz = gr.grad(logits);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) {
        gz[i * k + j] += scale * ((*probs)[i * k + j] - (j == y[i] ? 1.0 : 0.0));
      }
  });
}

Var SigmoidCrossEntropy(Graph& g, Var logits, const Tensor& targets) {
  const Tensor& z = g.value(logits);
  if (z.shape != targets.shape) Fail(Errc::kDimMismatch, "sigmoid_ce shape mismatch");
  const std::size_t total = z.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    // log(1 + exp(-|z|)) + max(z, 0) - z * t
    const double v = z[i];
    loss += std::log1p(std::exp(-std::abs(v))) + std::max(v, 0.0) - v * targets[i];
  }
  loss /= static_cast<double>(total);
  if (!std::isfinite(loss)) Fail(Errc::kNonFiniteLoss, "sigmoid cross-entropy is not finite");
  auto t = std::make_shared<Tensor>(targets);
  return g.Record(Tensor({1}, {loss}), {logits}, [logits, t, total](Graph& gr, Var self) {
    const double scale = gr.grad(self)[0] / static_cast<double>(total);
    const Tensor& z = gr.value(logits);
    Tensor& gz = gr.grad(logits);
    for (std::size_t i = 0; i < total; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-z[i]));
      gz[i] += scale * (p - (*t)[i]);
    }
  });
}

Var MeanSquaredError(Graph& g, Var pred, std::span<const double> targets) {
  const Tensor& p = g.value(pred);
  if (p.size() != targets.size()) Fail(Errc::kDimMismatch, "mse size mismatch");
  std::vector<double> t(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) loss += (p[i] - t[i]) * (p[i] - t[i]);
  loss /= static_cast<double>(t.size());
  if (!std::isfinite(loss)) Fail(Errc::kNonFiniteLoss, "mse is not finite");
  return g.Record(Tensor({1}, {loss}), {pred}, [pred, t](Graph& gr, Var self) {
    const double scale = 2.0 * gr.grad(self)[0] / static_cast<double>(t.size());
    const Tensor& p = gr.value(pred);
    Tensor& gp = gr.grad(pred);
    for (std::size_t i = 0; i < t.size(); ++i) gp[i] += scale * (p[i] - t[i]);
  });
}

}  // namespace ausculta::nn
