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

// Reverse-mode automatic differentiation over dense tensors.
//
// Every operation returns a Var holding its value and, when any input
// requires a gradient, a closure that propagates the output gradient into
// the inputs. The graph is owned by the Vars that reference it and is
// released as soon as the last handle to the output goes away.

#ifndef DRASIC_AUTODIFF_H_
#define DRASIC_AUTODIFF_H_

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "drasic/tensor.h"

namespace drasic {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until the first gradient arrives
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Zero-initialised gradient buffer with the value's shape.
  Tensor<T>& GradBuffer() {
    if (grad.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var Constant(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    return Var(std::move(node));
  }

  static Var Parameter(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
  }

  bool defined() const noexcept { return node_ != nullptr; }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }

  const Tensor<T>& value() const { return node_->value; }
  // Parameter updates write through this handle; never used on interior nodes.
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }

  bool has_grad() const { return node_ && !node_->grad.empty(); }
  const Tensor<T>& grad() const { return node_->grad; }
  void ZeroGrad() {
    if (node_) node_->grad = Tensor<T>();
  }

  Node<T>* node() const noexcept { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// Wraps `value` as the result of an operation over `inputs`. The backward
// closure is kept only when recording is enabled and some input needs a
// gradient; it receives the output node with its gradient populated.
template <typename T>
Var<T> MakeResult(Tensor<T> value, std::vector<Var<T>> inputs,
                  std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (GradEnabled()) {
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& in : inputs) node->inputs.push_back(in.node_ptr());
      node->backward = std::move(backward);
    }
  }
  return Var<T>(std::move(node));
}

// Seeds d(output)/d(output) = 1 and propagates to every reachable leaf.
// `output` must hold exactly one value.
template <typename T>
void Backward(const Var<T>& output);

extern template void Backward<float>(const Var<float>&);
extern template void Backward<double>(const Var<double>&);

}  // namespace drasic

#endif  // DRASIC_AUTODIFF_H_
