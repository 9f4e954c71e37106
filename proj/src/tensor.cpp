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

#include "emorec/tensor.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "emorec/error.hpp"

namespace emorec {

void log_warning(const std::string& message) {
  std::cerr << "WARNING: " << message << '\n';
}

void log_info(const std::string& message) { std::cerr << message << '\n'; }

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<Impl>()) {
  if (shape_size(shape) != data.size()) {
    throw ValidationError("tensor shape " + shape_string(shape) +
                          " does not match data length " +
                          std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> data(shape_size(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw ValidationError("axis " + std::to_string(axis) +
                          " out of range for shape " +
                          shape_string(impl_->shape));
  }
  return impl_->shape[axis];
}

std::size_t Tensor::size() const { return impl_->data.size(); }

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  if (impl_->data.size() != 1) {
    throw ValidationError("item() on tensor of shape " +
                          shape_string(impl_->shape));
  }
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::clone() const {
  return Tensor(impl_->shape, impl_->data, impl_->requires_grad);
}

void accumulate_grad(const Tensor& t, std::span<const double> g) {
  if (!t.requires_grad()) return;
  auto& buf = t.impl_->grad;
  if (buf.empty()) {
    buf.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

Tensor Graph::push(Shape shape, std::vector<double> data, bool needs_grad,
                   BackwardFn backward) {
#ifndef NDEBUG
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in op output");
  }
#endif
  needs_grad = needs_grad && grad_enabled_;
  Tensor out(std::move(shape), std::move(data), needs_grad);
  if (needs_grad) nodes_.push_back({out, std::move(backward)});
  return out;
}

Tensor Graph::record(Shape shape, std::vector<double> data,
                     std::initializer_list<const Tensor*> inputs,
                     BackwardFn backward) {
  bool needs_grad = false;
  for (const Tensor* t : inputs) needs_grad = needs_grad || t->requires_grad();
  return push(std::move(shape), std::move(data), needs_grad,
              std::move(backward));
}

Tensor Graph::record(Shape shape, std::vector<double> data,
                     std::span<const Tensor> inputs, BackwardFn backward) {
  bool needs_grad = false;
  for (const Tensor& t : inputs) needs_grad = needs_grad || t.requires_grad();
  return push(std::move(shape), std::move(data), needs_grad,
              std::move(backward));
}

void Graph::backward(const Tensor& loss) {
  if (backward_done_) {
    throw Error("backward() called twice on the same graph without reset()");
  }
  if (loss.size() != 1) {
    throw ValidationError("backward() needs a scalar loss, got shape " +
                          shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw ValidationError("loss does not depend on any trainable tensor");
  }
  backward_done_ = true;
  const double one = 1.0;
  accumulate_grad(loss, std::span<const double>(&one, 1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->backward(it->output.grad());
  }
}

void Graph::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace emorec
