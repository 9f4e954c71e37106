// Copyright 2026 The emorec Authors.
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

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace emorec {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles with an optional gradient buffer.
//
// Tensor is a handle: copies share storage. Values produced by ops are not
// modified after creation; only leaves (parameters) are written, by the
// optimizer and the checkpoint loader, through mutable_data().
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  void set_requires_grad(bool value);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Deep copy of shape, data and requires_grad; the gradient is not copied.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Graph;
  friend void accumulate_grad(const Tensor& t, std::span<const double> g);

  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Adds g into t's gradient buffer if t requires a gradient.
void accumulate_grad(const Tensor& t, std::span<const double> g);

// Tape of executed operations for one forward pass.
//
// Ops append a node only when at least one input requires a gradient, so an
// inference pass leaves the tape empty. backward() replays the nodes in
// reverse order; leaf gradients accumulate across graphs until zero_grad().
class Graph {
 public:
  using BackwardFn = std::function<void(std::span<const double> grad_out)>;

  Graph() = default;
  // A graph built with grad_enabled == false records nothing and produces
  // outputs that never require gradients (inference).
  explicit Graph(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  // Creates the output tensor of an op. `backward` is invoked with the
  // gradient of the output and must route it into the op's inputs.
  Tensor record(Shape shape, std::vector<double> data,
                std::initializer_list<const Tensor*> inputs,
                BackwardFn backward);
  Tensor record(Shape shape, std::vector<double> data,
                std::span<const Tensor> inputs, BackwardFn backward);

  void backward(const Tensor& loss);
  void reset();

  std::size_t num_nodes() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

 private:
  struct Node {
    Tensor output;
    BackwardFn backward;
  };
  Tensor push(Shape shape, std::vector<double> data, bool needs_grad,
              BackwardFn backward);

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  bool backward_done_ = false;
};

}  // namespace emorec
