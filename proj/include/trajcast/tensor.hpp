// Copyright 2026 The Trajcast Authors
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

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace trajcast::ad {

/// Dense row-major tensor of 64-bit floats.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::int64_t i) { return data_[i]; }
  double operator[](std::int64_t i) const { return data_[i]; }
  double item() const;

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::int64_t shape_size(const std::vector<int>& shape);
std::string shape_string(const std::vector<int>& shape);

class Tape;

/// Handle to a node on a tape. Plain value semantics; the tape owns storage.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Tensor& grad() const;
  bool defined() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int index() const { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  int index_ = -1;
};

/// Reverse-mode tape. Nodes are created in forward order; backward visits
/// them in reverse creation order, accumulating into parent gradients.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Var input(Tensor value);
  Var make(Tensor value, std::vector<int> parents, BackwardFn backward);

  const Tensor& value_of(int index) const { return nodes_[index].value; }
  Tensor& grad_of(int index);
  bool has_grad(int index) const { return nodes_[index].grad_live; }
  void accumulate(int index, const Tensor& g);
  /// Marks the grad buffer live and returns it for in-place accumulation.
  Tensor& accumulator(int index);

  /// Seeds d(root)/d(root) = 1 (root must be scalar) and back-propagates.
  void backward(const Var& root);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool grad_live = false;
    std::vector<int> parents;
    BackwardFn backward;
  };
  // deque keeps value/grad references stable while new nodes are recorded
  std::deque<Node> nodes_;
};

// ---- elementwise and linear-algebra ops ----
Var add(Var a, Var b);       // equal shapes, or b broadcast over rows of a
Var sub(Var a, Var b);
Var mul(Var a, Var b);       // elementwise, equal shapes
Var div(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var matmul(Var a, Var b);    // (m x k) . (k x n)
Var relu(Var a);
Var leaky_relu(Var a, double alpha = 0.01);
Var tanh_op(Var a);
Var cos_op(Var a);
Var sqrt_op(Var a);
Var atan2_op(Var y, Var x);  // elementwise
Var softmax(Var a, int axis);
Var sum_all(Var a);          // scalar
Var mean_all(Var a);
Var sum_axis(Var a, int axis);   // 2-d only
Var mean_axis(Var a, int axis);  // 2-d only
Var smooth_l1(Var a, Var b, double beta = 1.0);  // elementwise
Var concat(const std::vector<Var>& parts, int axis);
Var slice(Var a, int axis, int start, int end);
Var reshape(Var a, std::vector<int> shape);

// ---- graph aggregation ops ----
Var gather_rows(Var m, const std::vector<int>& rows);
Var scatter_sum(Var rows, const std::vector<int>& segments, int num_segments);
Var scatter_mean(Var rows, const std::vector<int>& segments, int num_segments);
/// Softmax over rows sharing a segment id, independently per column.
Var scatter_softmax(Var rows, const std::vector<int>& segments, int num_segments);
Var row_scale(Var m, Var weights);  // m[r,:] * weights[r]

// ---- stochastic / normalization ops ----
Var dropout(Var a, double p, bool train, std::mt19937_64& rng);

struct BatchNormState {
  Tensor running_mean;  // per channel
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};
/// (N, C, H, W) batch normalization per channel. Training mode uses batch
/// statistics and updates the running buffers in `state`.
Var batchnorm2d(Var x, Var gamma, Var beta, BatchNormState& state, bool train);

// ---- convolution ops ----
/// x: (N, C, H, W), w: (F, C, kh, kw), bias: (F).
Var conv2d(Var x, Var w, Var bias, int stride, int pad);
/// Transposed convolution; x: (N, C, H, W), w: (C, F, kh, kw), bias: (F).
Var deconv2d(Var x, Var w, Var bias, int stride, int pad);

/// Worker count for the heavy kernels (1 = fully sequential). Partitioning is
/// static, so results are identical for any setting.
void set_num_threads(int n);
int num_threads();

/// Max relative error between analytic and central finite-difference
/// gradients of a scalar-valued function, over all coordinates of x.
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                  double epsilon = 1e-5);

}  // namespace trajcast::ad
