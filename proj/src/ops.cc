// Copyright 2026 The DRASIC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drasic/ops.h"

#include <cmath>
#include <string>

#include <Eigen/Core>

namespace drasic {
namespace {

template <typename T>
void CheckSameShape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                     ShapeString(b.shape()));
  }
}

// Vectorized through Eigen's packet math for float.
template <typename T>
void TanhInto(const T* in, T* out, std::size_t n) {
  using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
  Eigen::Map<Array>(out, n) = Eigen::Map<const Array>(in, n).tanh();
}

template <typename T>
void SigmoidInto(const T* in, T* out, std::size_t n) {
  using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
  Eigen::Map<Array>(out, n) = Eigen::Map<const Array>(in, n).logistic();
}

template <typename T>
Tensor<T> ScalarTensor(T v) {
  return Tensor<T>(Shape{1}, std::vector<T>{v});
}

// Views the (N, 4H, h, w) gate tensor one gate at a time.
struct GateLayout {
  int batch, hidden;
  std::size_t plane;

  std::size_t Gate(int n, int gate) const {
    return (static_cast<std::size_t>(n) * 4 + gate) * hidden * plane;
  }
  std::size_t State(int n) const { return static_cast<std::size_t>(n) * hidden * plane; }
  std::size_t Span() const { return static_cast<std::size_t>(hidden) * plane; }
};

template <typename T>
GateLayout CheckLstmShapes(const char* op, const Tensor<T>& gates, const Tensor<T>& cell) {
  const Shape& g = gates.shape();
  const Shape& c = cell.shape();
  if (g.size() != 4 || c.size() != 4 || g[0] != c[0] || g[1] != 4 * c[1] || g[2] != c[2] ||
      g[3] != c[3]) {
    throw ShapeError(std::string(op) + ": gates " + ShapeString(g) + " incompatible with state " +
                     ShapeString(c) + " (expected gates = [N, 4H, h, w])");
  }
  return {c[0], c[1], static_cast<std::size_t>(c[2]) * c[3]};
}

enum Gate { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

}  // namespace

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  CheckSameShape("add", a.value(), b.value());
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return MakeResult<T>(std::move(out), {a, b}, [](Node<T>& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      Tensor<T>& g = in->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b) {
  CheckSameShape("sub", a.value(), b.value());
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return MakeResult<T>(std::move(out), {a, b}, [](Node<T>& self) {
    if (self.inputs[0]->requires_grad) {
      Tensor<T>& g = self.inputs[0]->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.inputs[1]->requires_grad) {
      Tensor<T>& g = self.inputs[1]->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b) {
  CheckSameShape("mul", a.value(), b.value());
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return MakeResult<T>(std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& lhs = *self.inputs[0];
    Node<T>& rhs = *self.inputs[1];
    if (lhs.requires_grad) {
      Tensor<T>& g = lhs.GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * rhs.value[i];
    }
    if (rhs.requires_grad) {
      Tensor<T>& g = rhs.GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * lhs.value[i];
    }
  });
}

template <typename T>
Var<T> Scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.values()) v *= factor;
  return MakeResult<T>(std::move(out), {a}, [factor](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Var<T> Tanh(const Var<T>& x) {
  Tensor<T> out(x.shape());
  TanhInto(x.value().data(), out.data(), out.size());
  return MakeResult<T>(std::move(out), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T y = self.value[i];
      g[i] += self.grad[i] * (T{1} - y * y);
    }
  });
}

template <typename T>
Var<T> Sigmoid(const Var<T>& x) {
  Tensor<T> out(x.shape());
  SigmoidInto(x.value().data(), out.data(), out.size());
  return MakeResult<T>(std::move(out), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T y = self.value[i];
      g[i] += self.grad[i] * y * (T{1} - y);
    }
  });
}

template <typename T>
Var<T> Conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, const ConvSpec& spec) {
  const bool has_bias = bias.defined();
  Tensor<T> out = Conv2dForward(input.value(), weight.value(), has_bias ? &bias.value() : nullptr, spec);
  std::vector<Var<T>> inputs = {input, weight};
  if (has_bias) inputs.push_back(bias);
  return MakeResult<T>(std::move(out), std::move(inputs), [spec, has_bias](Node<T>& self) {
    Node<T>& x = *self.inputs[0];
    Node<T>& w = *self.inputs[1];
    Tensor<T>* gb = (has_bias && self.inputs[2]->requires_grad) ? &self.inputs[2]->GradBuffer() : nullptr;
    Conv2dBackward(x.value, w.value, spec, self.grad, x.requires_grad ? &x.GradBuffer() : nullptr,
                   w.requires_grad ? &w.GradBuffer() : nullptr, gb);
  });
}

template <typename T>
Var<T> LstmGates(const Var<T>& input, const Var<T>& input_weight, const Var<T>& input_bias,
                 const ConvSpec& input_spec, const Var<T>& hidden, const Var<T>& hidden_weight,
                 const ConvSpec& hidden_spec) {
  if (!input_bias.defined()) throw ShapeError("lstm_gates: the input convolution needs a bias");
  Tensor<T> act = Conv2dForward(input.value(), input_weight.value(), &input_bias.value(), input_spec);
  Conv2dAccumulate(hidden.value(), hidden_weight.value(), hidden_spec, act);
  const Shape& g = act.shape();
  if (g[1] % 4 != 0) throw ShapeError("lstm_gates: gate channels " + std::to_string(g[1]) + " not 4H");
  const GateLayout L{g[0], g[1] / 4, static_cast<std::size_t>(g[2]) * g[3]};
  for (int n = 0; n < L.batch; ++n) {
    T* sig = act.data() + L.Gate(n, kInput);
    T* cand = act.data() + L.Gate(n, kCandidate);
    SigmoidInto(sig, sig, 3 * L.Span());
    TanhInto(cand, cand, L.Span());
  }
  return MakeResult<T>(
      std::move(act), {input, input_weight, input_bias, hidden, hidden_weight},
      [L, input_spec, hidden_spec](Node<T>& self) {
        Tensor<T> dpre(self.value.shape());
        const T* y = self.value.data();
        const T* dy = self.grad.data();
        T* d = dpre.data();
        for (int n = 0; n < L.batch; ++n) {
          const std::size_t sig = L.Gate(n, kInput), cand = L.Gate(n, kCandidate);
          for (std::size_t k = sig; k < sig + 3 * L.Span(); ++k) d[k] = dy[k] * y[k] * (T{1} - y[k]);
          for (std::size_t k = cand; k < cand + L.Span(); ++k) d[k] = dy[k] * (T{1} - y[k] * y[k]);
        }
        auto grad_of = [](Node<T>& node) { return node.requires_grad ? &node.GradBuffer() : nullptr; };
        Node<T>& x = *self.inputs[0];
        Node<T>& h = *self.inputs[3];
        Conv2dBackward(x.value, self.inputs[1]->value, input_spec, dpre, grad_of(x),
                       grad_of(*self.inputs[1]), grad_of(*self.inputs[2]));
        Conv2dBackward(h.value, self.inputs[4]->value, hidden_spec, dpre, grad_of(h),
                       grad_of(*self.inputs[4]), static_cast<Tensor<T>*>(nullptr));
      });
}

template <typename T>
Var<T> LstmCellUpdate(const Var<T>& act, const Var<T>& cell) {
  const GateLayout L = CheckLstmShapes("lstm_cell_update", act.value(), cell.value());
  const T* a = act.value().data();
  const T* c = cell.value().data();
  Tensor<T> out(cell.shape());
  for (int n = 0; n < L.batch; ++n) {
    const T* si = a + L.Gate(n, kInput);
    const T* sf = a + L.Gate(n, kForget);
    const T* tg = a + L.Gate(n, kCandidate);
    const T* cn = c + L.State(n);
    T* o = out.data() + L.State(n);
    for (std::size_t k = 0; k < L.Span(); ++k) o[k] = sf[k] * cn[k] + si[k] * tg[k];
  }
  return MakeResult<T>(std::move(out), {act, cell}, [L](Node<T>& self) {
    Node<T>& act_node = *self.inputs[0];
    Node<T>& cell_node = *self.inputs[1];
    const T* a = act_node.value.data();
    const T* c = cell_node.value.data();
    T* da = act_node.requires_grad ? act_node.GradBuffer().data() : nullptr;
    T* dc = cell_node.requires_grad ? cell_node.GradBuffer().data() : nullptr;
    for (int n = 0; n < L.batch; ++n) {
      const std::size_t i0 = L.Gate(n, kInput), f0 = L.Gate(n, kForget), g0 = L.Gate(n, kCandidate);
      const std::size_t s0 = L.State(n);
      const T* dout = self.grad.data() + s0;
      if (da != nullptr) {
        for (std::size_t k = 0; k < L.Span(); ++k) {
          da[i0 + k] += dout[k] * a[g0 + k];
          da[f0 + k] += dout[k] * c[s0 + k];
          da[g0 + k] += dout[k] * a[i0 + k];
        }
      }
      if (dc != nullptr) {
        for (std::size_t k = 0; k < L.Span(); ++k) dc[s0 + k] += dout[k] * a[f0 + k];
      }
    }
  });
}

template <typename T>
Var<T> LstmHidden(const Var<T>& act, const Var<T>& cell) {
  const GateLayout L = CheckLstmShapes("lstm_hidden", act.value(), cell.value());
  const T* a = act.value().data();
  Tensor<T> tanh_cell(cell.shape());
  TanhInto(cell.value().data(), tanh_cell.data(), tanh_cell.size());
  Tensor<T> out(cell.shape());
  for (int n = 0; n < L.batch; ++n) {
    const T* so = a + L.Gate(n, kOutput);
    const T* tc = tanh_cell.data() + L.State(n);
    T* o = out.data() + L.State(n);
    for (std::size_t k = 0; k < L.Span(); ++k) o[k] = so[k] * tc[k];
  }
  return MakeResult<T>(std::move(out), {act, cell},
                       [L, tanh_cell = std::move(tanh_cell)](Node<T>& self) {
    Node<T>& act_node = *self.inputs[0];
    Node<T>& cell_node = *self.inputs[1];
    const T* a = act_node.value.data();
    T* da = act_node.requires_grad ? act_node.GradBuffer().data() : nullptr;
    T* dc = cell_node.requires_grad ? cell_node.GradBuffer().data() : nullptr;
    for (int n = 0; n < L.batch; ++n) {
      const std::size_t o0 = L.Gate(n, kOutput), s0 = L.State(n);
      const T* dh = self.grad.data() + s0;
      const T* tc = tanh_cell.data() + s0;
      if (da != nullptr) {
        for (std::size_t k = 0; k < L.Span(); ++k) da[o0 + k] += dh[k] * tc[k];
      }
      if (dc != nullptr) {
        for (std::size_t k = 0; k < L.Span(); ++k) {
          dc[s0 + k] += dh[k] * a[o0 + k] * (T{1} - tc[k] * tc[k]);
        }
      }
    }
  });
}

template <typename T>
Var<T> DepthToSpace(const Var<T>& x, int block) {
  const Shape& in = x.shape();
  if (block < 1 || in.size() != 4 || in[1] % (block * block) != 0) {
    throw ShapeError("depth_to_space: channel axis of " + ShapeString(in) +
                     " not divisible by block^2 = " + std::to_string(block * block));
  }
  const int n_img = in[0], c_out = in[1] / (block * block), h = in[2], w = in[3];
  Tensor<T> out(Shape{n_img, c_out, h * block, w * block});
  const Tensor<T>& xv = x.value();
  // Maps each output offset to its source offset; reused by the backward pass.
  auto source_index = [=](int n, int c, int oy, int ox) {
    const int i = oy % block, j = ox % block;
    return ((static_cast<std::size_t>(n) * in[1] + c * block * block + i * block + j) * h + oy / block) * w +
           ox / block;
  };
  std::size_t k = 0;
  for (int n = 0; n < n_img; ++n)
    for (int c = 0; c < c_out; ++c)
      for (int oy = 0; oy < h * block; ++oy)
        for (int ox = 0; ox < w * block; ++ox) out[k++] = xv[source_index(n, c, oy, ox)];
  return MakeResult<T>(std::move(out), {x}, [=](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    std::size_t k = 0;
    for (int n = 0; n < n_img; ++n)
      for (int c = 0; c < c_out; ++c)
        for (int oy = 0; oy < h * block; ++oy)
          for (int ox = 0; ox < w * block; ++ox) g[source_index(n, c, oy, ox)] += self.grad[k++];
  });
}

template <typename T>
Var<T> ConcatBatch(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_batch: no inputs");
  Shape shape = parts[0].shape();
  std::vector<T> values;
  std::vector<std::size_t> sizes;
  int batch = 0;
  for (const auto& p : parts) {
    Shape tail_a(p.shape().begin() + 1, p.shape().end());
    Shape tail_b(shape.begin() + 1, shape.end());
    if (tail_a != tail_b) {
      throw ShapeError("concat_batch: trailing axes differ, " + ShapeString(p.shape()) + " vs " +
                       ShapeString(shape));
    }
    batch += p.shape()[0];
    sizes.push_back(p.value().size());
    values.insert(values.end(), p.value().values().begin(), p.value().values().end());
  }
  shape[0] = batch;
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return MakeResult<T>(Tensor<T>(shape, std::move(values)), std::move(inputs),
                       [sizes](Node<T>& self) {
                         std::size_t offset = 0;
                         for (std::size_t p = 0; p < sizes.size(); ++p) {
                           Node<T>& in = *self.inputs[p];
                           if (in.requires_grad) {
                             Tensor<T>& g = in.GradBuffer();
                             for (std::size_t i = 0; i < sizes[p]; ++i) g[i] += self.grad[offset + i];
                           }
                           offset += sizes[p];
                         }
                       });
}

template <typename T>
Var<T> SliceBatch(const Var<T>& x, int begin, int count) {
  Tensor<T> out = SliceBatch(x.value(), begin, count);
  const std::size_t offset = (x.value().size() / x.shape()[0]) * begin;
  return MakeResult<T>(std::move(out), {x}, [offset](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
  });
}

template <typename T>
Var<T> StraightThrough(const Var<T>& x, Tensor<T> forward_value) {
  CheckSameShape("straight_through", x.value(), forward_value);
  return MakeResult<T>(std::move(forward_value), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Var<T> MeanSquaredError(const Var<T>& a, const Var<T>& b) {
  CheckSameShape("mse", a.value(), b.value());
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  double acc = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    acc += d * d;
  }
  const T n = static_cast<T>(av.size());
  return MakeResult<T>(ScalarTensor(static_cast<T>(acc / av.size())), {a, b}, [n](Node<T>& self) {
    Node<T>& lhs = *self.inputs[0];
    Node<T>& rhs = *self.inputs[1];
    T* gl = lhs.requires_grad ? lhs.GradBuffer().data() : nullptr;
    T* gr = rhs.requires_grad ? rhs.GradBuffer().data() : nullptr;
    const T scale = self.grad[0] * T{2} / n;
    for (std::size_t i = 0; i < lhs.value.size(); ++i) {
      const T d = scale * (lhs.value[i] - rhs.value[i]);
      if (gl) gl[i] += d;
      if (gr) gr[i] -= d;
    }
  });
}

template <typename T>
Var<T> MeanAbsoluteError(const Var<T>& a, const Var<T>& b) {
  CheckSameShape("mae", a.value(), b.value());
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  double acc = 0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(static_cast<double>(av[i]) - bv[i]);
  const T n = static_cast<T>(av.size());
  return MakeResult<T>(ScalarTensor(static_cast<T>(acc / av.size())), {a, b}, [n](Node<T>& self) {
    Node<T>& lhs = *self.inputs[0];
    Node<T>& rhs = *self.inputs[1];
    T* gl = lhs.requires_grad ? lhs.GradBuffer().data() : nullptr;
    T* gr = rhs.requires_grad ? rhs.GradBuffer().data() : nullptr;
    const T scale = self.grad[0] / n;
    for (std::size_t i = 0; i < lhs.value.size(); ++i) {
      const T diff = lhs.value[i] - rhs.value[i];
      const T d = diff > 0 ? scale : (diff < 0 ? -scale : T{0});
      if (gl) gl[i] += d;
      if (gr) gr[i] -= d;
    }
  });
}

template <typename T>
Var<T> MeanOf(std::span<const Var<T>> scalars) {
  if (scalars.empty()) throw ShapeError("mean_of: no inputs");
  T acc = 0;
  for (const auto& s : scalars) {
    if (s.value().size() != 1) throw ShapeError("mean_of expects scalars, got " + ShapeString(s.shape()));
    acc += s.value()[0];
  }
  const T n = static_cast<T>(scalars.size());
  std::vector<Var<T>> inputs(scalars.begin(), scalars.end());
  return MakeResult<T>(ScalarTensor(acc / n), std::move(inputs), [n](Node<T>& self) {
    for (auto& in : self.inputs) {
      if (in->requires_grad) in->GradBuffer()[0] += self.grad[0] / n;
    }
  });
}

template <typename T>
Var<T> WeightedSum(const Var<T>& x, const Tensor<T>& weights) {
  CheckSameShape("weighted_sum", x.value(), weights);
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += static_cast<double>(x.value()[i]) * weights[i];
  return MakeResult<T>(ScalarTensor(static_cast<T>(acc)), {x}, [weights](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * weights[i];
  });
}

#define DRASIC_INSTANTIATE_OPS(T)                                                        \
  template Var<T> Add(const Var<T>&, const Var<T>&);                                     \
  template Var<T> Sub(const Var<T>&, const Var<T>&);                                     \
  template Var<T> Mul(const Var<T>&, const Var<T>&);                                     \
  template Var<T> Scale(const Var<T>&, T);                                               \
  template Var<T> Tanh(const Var<T>&);                                                   \
  template Var<T> Sigmoid(const Var<T>&);                                                \
  template Var<T> Conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvSpec&);  \
  template Var<T> LstmGates(const Var<T>&, const Var<T>&, const Var<T>&, const ConvSpec&,      \
                            const Var<T>&, const Var<T>&, const ConvSpec&);                 \
  template Var<T> LstmCellUpdate(const Var<T>&, const Var<T>&);                          \
  template Var<T> LstmHidden(const Var<T>&, const Var<T>&);                              \
  template Var<T> DepthToSpace(const Var<T>&, int);                                      \
  template Var<T> ConcatBatch(std::span<const Var<T>>);                                  \
  template Var<T> SliceBatch(const Var<T>&, int, int);                                   \
  template Var<T> StraightThrough(const Var<T>&, Tensor<T>);                             \
  template Var<T> MeanSquaredError(const Var<T>&, const Var<T>&);                        \
  template Var<T> MeanAbsoluteError(const Var<T>&, const Var<T>&);                       \
  template Var<T> MeanOf(std::span<const Var<T>>);                                       \
  template Var<T> WeightedSum(const Var<T>&, const Tensor<T>&);

DRASIC_INSTANTIATE_OPS(float)
DRASIC_INSTANTIATE_OPS(double)

#undef DRASIC_INSTANTIATE_OPS

}  // namespace drasic
