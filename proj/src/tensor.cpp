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

#include "trajcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "kernels.hpp"
#include "trajcast/errors.hpp"

namespace trajcast::ad {

namespace {
int g_num_threads = 1;
}

void set_num_threads(int n) { g_num_threads = std::max(1, n); }
int num_threads() { return g_num_threads; }

namespace detail {

void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c) {
  auto body = [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t i = r0; i < r1; ++i) {
      double* ci = c + i * n;
      const double* ai = a + i * k;
      for (int p = 0; p < k; ++p) {
        const double av = ai[p];
        if (av == 0.0) continue;
        const double* bp = b + static_cast<std::int64_t>(p) * n;
        for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
      }
    }
  };
  parallel_for(m, body);
}

void gemm_tn(int m, int k, int n, const double* a, const double* b, double* c) {
  // a is (k, m): c[i, j] += sum_p a[p, i] * b[p, j]
  auto body = [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t i = r0; i < r1; ++i) {
      double* ci = c + i * n;
      for (int p = 0; p < k; ++p) {
        const double av = a[static_cast<std::int64_t>(p) * m + i];
        if (av == 0.0) continue;
        const double* bp = b + static_cast<std::int64_t>(p) * n;
        for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
      }
    }
  };
  parallel_for(m, body);
}

void gemm_nt(int m, int k, int n, const double* a, const double* b, double* c) {
  // b is (n, k): c[i, j] += sum_p a[i, p] * b[j, p]
  auto body = [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t i = r0; i < r1; ++i) {
      const double* ai = a + i * k;
      double* ci = c + i * n;
      for (int j = 0; j < n; ++j) {
        const double* bj = b + static_cast<std::int64_t>(j) * k;
        double acc = 0.0;
        for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
        ci[j] += acc;
      }
    }
  };
  parallel_for(m, body);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const int workers = std::min<std::int64_t>(g_num_threads, n);
  if (workers <= 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min<std::int64_t>(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tensor

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ")";
  return out.str();
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  for (int d : shape_)
    if (d < 0) throw ValidationError("negative tensor dimension");
  data_.assign(static_cast<size_t>(shape_size(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != static_cast<std::int64_t>(data_.size()))
    throw ValidationError("tensor data length does not match shape " + shape_string(shape_));
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), v);
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ValidationError("item() on non-scalar tensor " + shape_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const { return tape_->value_of(index_); }
const Tensor& Var::grad() const { return tape_->grad_of(index_); }

Var Tape::input(Tensor value) { return make(std::move(value), {}, nullptr); }

Var Tape::make(Tensor value, std::vector<int> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.parents = std::move(parents);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Tensor& Tape::grad_of(int index) {
  Node& node = nodes_[index];
  if (node.grad.empty() && node.value.size() > 0) node.grad = Tensor(node.value.shape());
  if (node.grad.shape() != node.value.shape()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Tape::accumulate(int index, const Tensor& g) {
  Tensor& grad = grad_of(index);
  if (!grad.same_shape(g)) throw ValidationError("gradient shape mismatch");
  for (std::int64_t i = 0; i < g.size(); ++i) grad[i] += g[i];
  nodes_[index].grad_live = true;
}

Tensor& Tape::accumulator(int index) {
  nodes_[index].grad_live = true;
  return grad_of(index);
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw ValidationError("backward on foreign tape");
  if (value_of(root.index()).size() != 1)
    throw ValidationError("backward requires a scalar root");
  grad_of(root.index())[0] = 1.0;
  nodes_[root.index()].grad_live = true;
  for (int i = root.index(); i >= 0; --i) {
    if (!nodes_[i].grad_live || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// op helpers

namespace {

Tape& same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw ValidationError("operands belong to different tapes");
  return *a.tape();
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

// (outer, axis_len, inner) decomposition for axis-wise ops
struct AxisView {
  std::int64_t outer = 1;
  std::int64_t axis = 1;
  std::int64_t inner = 1;
};

AxisView axis_view(const std::vector<int>& shape, int axis) {
  require(axis >= 0 && axis < static_cast<int>(shape.size()), "axis out of range");
  AxisView v;
  for (int i = 0; i < axis; ++i) v.outer *= shape[i];
  v.axis = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

using Unary = double (*)(double);
using UnaryGrad = double (*)(double x, double y);  // dy/dx from input x and output y

Var elementwise(Var a, Unary f, UnaryGrad df) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const int pa = a.index();
  return tape.make(std::move(y), {pa}, [pa, df](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    const Tensor& y = t.value_of(self);
    Tensor& acc = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i) acc[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// arithmetic

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const int pa = a.index(), pb = b.index();
  if (x.same_shape(y)) {
    Tensor out(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
    return tape.make(std::move(out), {pa, pb}, [pa, pb](Tape& t, int self) {
      const Tensor& g = t.grad_of(self);
      Tensor& ga = t.accumulator(pa);
      Tensor& gb = t.accumulator(pb);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
    });
  }
  // row broadcast: (m, n) + (n)
  require(x.ndim() == 2 && y.ndim() == 1 && x.dim(1) == y.dim(0),
          "add: incompatible shapes " + shape_string(x.shape()) + " vs " +
              shape_string(y.shape()));
  const int m = x.dim(0), n = x.dim(1);
  Tensor out(x.shape());
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) out[r * n + c] = x[r * n + c] + y[c];
  return tape.make(std::move(out), {pa, pb}, [pa, pb, m, n](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    Tensor& gb = t.accumulator(pb);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) {
        ga[r * n + c] += g[r * n + c];
        gb[c] += g[r * n + c];
      }
  });
}

Var sub(Var a, Var b) { return add(a, neg(b)); }

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.same_shape(y), "mul: shape mismatch");
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  const int pa = a.index(), pb = b.index();
  return tape.make(std::move(out), {pa, pb}, [pa, pb](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    const Tensor& y = t.value_of(pb);
    Tensor& ga = t.accumulator(pa);
    Tensor& gb = t.accumulator(pb);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i];
      gb[i] += g[i] * x[i];
    }
  });
}

Var div(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.same_shape(y), "div: shape mismatch");
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] / y[i];
  const int pa = a.index(), pb = b.index();
  return tape.make(std::move(out), {pa, pb}, [pa, pb](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    const Tensor& y = t.value_of(pb);
    Tensor& ga = t.accumulator(pa);
    Tensor& gb = t.accumulator(pb);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] / y[i];
      gb[i] -= g[i] * x[i] / (y[i] * y[i]);
    }
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = c * x[i];
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa, c](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Var add_scalar(Var a, double c) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] + c;
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.ndim() == 2 && y.ndim() == 2 && x.dim(1) == y.dim(0),
          "matmul: incompatible shapes " + shape_string(x.shape()) + " vs " +
              shape_string(y.shape()));
  const int m = x.dim(0), k = x.dim(1), n = y.dim(1);
  Tensor out({m, n});
  detail::gemm_nn(m, k, n, x.data(), y.data(), out.data());
  const int pa = a.index(), pb = b.index();
  return tape.make(std::move(out), {pa, pb}, [pa, pb, m, k, n](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    const Tensor& y = t.value_of(pb);
    // dA += G . B^T ; dB += A^T . G
    detail::gemm_nt(m, n, k, g.data(), y.data(), t.accumulator(pa).data());
    detail::gemm_tn(k, m, n, x.data(), g.data(), t.accumulator(pb).data());
  });
}

// ---------------------------------------------------------------------------
// nonlinearities

Var relu(Var a) {
  return elementwise(
      a, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double alpha) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : alpha * x[i];
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa, alpha](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i)
      ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : alpha);
  });
}

Var tanh_op(Var a) {
  return elementwise(
      a, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var cos_op(Var a) {
  return elementwise(
      a, [](double v) { return std::cos(v); },
      [](double x, double) { return -std::sin(x); });
}

Var sqrt_op(Var a) {
  return elementwise(
      a, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Var atan2_op(Var y, Var x) {
  Tape& tape = same_tape(y, x);
  const Tensor& ty = y.value();
  const Tensor& tx = x.value();
  require(ty.same_shape(tx), "atan2: shape mismatch");
  Tensor out(ty.shape());
  for (std::int64_t i = 0; i < ty.size(); ++i) out[i] = std::atan2(ty[i], tx[i]);
  const int py = y.index(), px = x.index();
  return tape.make(std::move(out), {py, px}, [py, px](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& ty = t.value_of(py);
    const Tensor& tx = t.value_of(px);
    Tensor& gy = t.accumulator(py);
    Tensor& gx = t.accumulator(px);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double r2 = tx[i] * tx[i] + ty[i] * ty[i];
      gy[i] += g[i] * tx[i] / r2;
      gx[i] -= g[i] * ty[i] / r2;
    }
  });
}

// ---------------------------------------------------------------------------
// reductions / softmax

Var softmax(Var a, int axis) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  const AxisView v = axis_view(x.shape(), axis);
  Tensor out(x.shape());
  for (std::int64_t o = 0; o < v.outer; ++o) {
    for (std::int64_t in = 0; in < v.inner; ++in) {
      const std::int64_t base = o * v.axis * v.inner + in;
      double mx = -1e300;
      for (std::int64_t k = 0; k < v.axis; ++k) mx = std::max(mx, x[base + k * v.inner]);
      double denom = 0.0;
      for (std::int64_t k = 0; k < v.axis; ++k) {
        out[base + k * v.inner] = std::exp(x[base + k * v.inner] - mx);
        denom += out[base + k * v.inner];
      }
      for (std::int64_t k = 0; k < v.axis; ++k) out[base + k * v.inner] /= denom;
    }
  }
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa, v](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& y = t.value_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t o = 0; o < v.outer; ++o) {
      for (std::int64_t in = 0; in < v.inner; ++in) {
        const std::int64_t base = o * v.axis * v.inner + in;
        double dot = 0.0;
        for (std::int64_t k = 0; k < v.axis; ++k)
          dot += g[base + k * v.inner] * y[base + k * v.inner];
        for (std::int64_t k = 0; k < v.axis; ++k)
          ga[base + k * v.inner] += y[base + k * v.inner] * (g[base + k * v.inner] - dot);
      }
    }
  });
}

Var sum_all(Var a) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i];
  const int pa = a.index();
  return tape.make(Tensor::scalar(acc), {pa}, [pa](Tape& t, int self) {
    const double g = t.grad_of(self)[0];
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean_all(Var a) {
  const std::int64_t n = a.value().size();
  require(n > 0, "mean of empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(n));
}

Var sum_axis(Var a, int axis) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  require(x.ndim() == 2 && (axis == 0 || axis == 1), "sum_axis expects a 2-d tensor");
  const int m = x.dim(0), n = x.dim(1);
  const int pa = a.index();
  if (axis == 0) {
    Tensor out({n});
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) out[c] += x[r * n + c];
    return tape.make(std::move(out), {pa}, [pa, m, n](Tape& t, int self) {
      const Tensor& g = t.grad_of(self);
      Tensor& ga = t.accumulator(pa);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) ga[r * n + c] += g[c];
    });
  }
  Tensor out({m});
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) out[r] += x[r * n + c];
  return tape.make(std::move(out), {pa}, [pa, m, n](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) ga[r * n + c] += g[r];
  });
}

Var mean_axis(Var a, int axis) {
  const Tensor& x = a.value();
  require(x.ndim() == 2, "mean_axis expects a 2-d tensor");
  const double denom = axis == 0 ? x.dim(0) : x.dim(1);
  require(denom > 0, "mean over empty axis");
  return scale(sum_axis(a, axis), 1.0 / denom);
}

Var smooth_l1(Var a, Var b, double beta) {
  Tape& tape = same_tape(a, b);
  require(beta > 0.0, "smooth_l1 beta must be positive");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.same_shape(y), "smooth_l1: shape mismatch");
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    out[i] = std::abs(d) < beta ? 0.5 * d * d / beta : std::abs(d) - 0.5 * beta;
  }
  const int pa = a.index(), pb = b.index();
  return tape.make(std::move(out), {pa, pb}, [pa, pb, beta](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pa);
    const Tensor& y = t.value_of(pb);
    Tensor& ga = t.accumulator(pa);
    Tensor& gb = t.accumulator(pb);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double d = x[i] - y[i];
      const double slope = std::clamp(d / beta, -1.0, 1.0);
      ga[i] += g[i] * slope;
      gb[i] -= g[i] * slope;
    }
  });
}

// ---------------------------------------------------------------------------
// shape ops

Var concat(const std::vector<Var>& parts, int axis) {
  require(!parts.empty(), "concat of nothing");
  Tape& tape = *parts.front().tape();
  std::vector<int> shape = parts.front().value().shape();
  require(axis >= 0 && axis < static_cast<int>(shape.size()), "concat axis out of range");
  int total = 0;
  for (const Var& p : parts) {
    require(p.tape() == &tape, "concat across tapes");
    const auto& s = p.value().shape();
    require(s.size() == shape.size(), "concat rank mismatch");
    for (size_t i = 0; i < s.size(); ++i)
      require(static_cast<int>(i) == axis || s[i] == shape[i], "concat shape mismatch");
    total += s[axis];
  }
  std::vector<int> out_shape = shape;
  out_shape[axis] = total;
  Tensor out(out_shape);
  const AxisView vout = axis_view(out_shape, axis);
  std::vector<int> parents;
  std::vector<std::int64_t> extents;
  std::int64_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& x = p.value();
    const AxisView v = axis_view(x.shape(), axis);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t k = 0; k < v.axis; ++k)
        for (std::int64_t in = 0; in < v.inner; ++in)
          out[(o * vout.axis + offset + k) * vout.inner + in] =
              x[(o * v.axis + k) * v.inner + in];
    parents.push_back(p.index());
    extents.push_back(v.axis);
    offset += v.axis;
  }
  return tape.make(std::move(out), parents,
                   [parents, extents, vout](Tape& t, int self) {
                     const Tensor& g = t.grad_of(self);
                     std::int64_t offset = 0;
                     for (size_t pi = 0; pi < parents.size(); ++pi) {
                       Tensor& ga = t.accumulator(parents[pi]);
                       const std::int64_t ax = extents[pi];
                       for (std::int64_t o = 0; o < vout.outer; ++o)
                         for (std::int64_t k = 0; k < ax; ++k)
                           for (std::int64_t in = 0; in < vout.inner; ++in)
                             ga[(o * ax + k) * vout.inner + in] +=
                                 g[(o * vout.axis + offset + k) * vout.inner + in];
                       offset += ax;
                     }
                   });
}

Var slice(Var a, int axis, int start, int end) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  const AxisView v = axis_view(x.shape(), axis);
  require(start >= 0 && end <= v.axis && start < end, "slice bounds out of range");
  std::vector<int> out_shape = x.shape();
  out_shape[axis] = end - start;
  Tensor out(out_shape);
  const std::int64_t width = end - start;
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t k = 0; k < width; ++k)
      for (std::int64_t in = 0; in < v.inner; ++in)
        out[(o * width + k) * v.inner + in] = x[(o * v.axis + start + k) * v.inner + in];
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa, v, start, width](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t k = 0; k < width; ++k)
        for (std::int64_t in = 0; in < v.inner; ++in)
          ga[(o * v.axis + start + k) * v.inner + in] += g[(o * width + k) * v.inner + in];
  });
}

Var reshape(Var a, std::vector<int> shape) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  require(shape_size(shape) == x.size(), "reshape size mismatch");
  Tensor out(std::move(shape));
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i];
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

// ---------------------------------------------------------------------------
// graph aggregation

Var gather_rows(Var m, const std::vector<int>& rows) {
  Tape& tape = *m.tape();
  const Tensor& x = m.value();
  require(x.ndim() == 2, "gather_rows expects a 2-d tensor");
  const int d = x.dim(1);
  Tensor out({static_cast<int>(rows.size()), d});
  for (size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && rows[r] < x.dim(0), "gather_rows index out of range");
    for (int c = 0; c < d; ++c) out[r * d + c] = x[static_cast<std::int64_t>(rows[r]) * d + c];
  }
  const int pm = m.index();
  return tape.make(std::move(out), {pm}, [pm, rows, d](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& gm = t.accumulator(pm);
    for (size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < d; ++c)
        gm[static_cast<std::int64_t>(rows[r]) * d + c] += g[r * d + c];
  });
}

namespace {

void check_segments(const std::vector<int>& segments, int num_segments, std::int64_t rows) {
  require(static_cast<std::int64_t>(segments.size()) == rows,
          "segment list does not match row count");
  for (int s : segments) require(s >= 0 && s < num_segments, "segment id out of range");
}

}  // namespace

Var scatter_sum(Var rows, const std::vector<int>& segments, int num_segments) {
  Tape& tape = *rows.tape();
  const Tensor& x = rows.value();
  require(x.ndim() == 2, "scatter_sum expects a 2-d tensor");
  check_segments(segments, num_segments, x.dim(0));
  const int d = x.dim(1);
  Tensor out({num_segments, d});
  for (size_t r = 0; r < segments.size(); ++r)
    for (int c = 0; c < d; ++c) out[static_cast<std::int64_t>(segments[r]) * d + c] += x[r * d + c];
  const int pr = rows.index();
  return tape.make(std::move(out), {pr}, [pr, segments, d](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& gr = t.accumulator(pr);
    for (size_t r = 0; r < segments.size(); ++r)
      for (int c = 0; c < d; ++c)
        gr[r * d + c] += g[static_cast<std::int64_t>(segments[r]) * d + c];
  });
}

Var scatter_mean(Var rows, const std::vector<int>& segments, int num_segments) {
  Tape& tape = *rows.tape();
  const Tensor& x = rows.value();
  require(x.ndim() == 2, "scatter_mean expects a 2-d tensor");
  check_segments(segments, num_segments, x.dim(0));
  const int d = x.dim(1);
  std::vector<double> counts(num_segments, 0.0);
  for (int s : segments) counts[s] += 1.0;
  Tensor out({num_segments, d});
  for (size_t r = 0; r < segments.size(); ++r)
    for (int c = 0; c < d; ++c)
      out[static_cast<std::int64_t>(segments[r]) * d + c] += x[r * d + c] / counts[segments[r]];
  const int pr = rows.index();
  return tape.make(std::move(out), {pr}, [pr, segments, counts, d](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& gr = t.accumulator(pr);
    for (size_t r = 0; r < segments.size(); ++r)
      for (int c = 0; c < d; ++c)
        gr[r * d + c] +=
            g[static_cast<std::int64_t>(segments[r]) * d + c] / counts[segments[r]];
  });
}

Var scatter_softmax(Var rows, const std::vector<int>& segments, int num_segments) {
  Tape& tape = *rows.tape();
  const Tensor& x = rows.value();
  require(x.ndim() == 2, "scatter_softmax expects a 2-d tensor");
  check_segments(segments, num_segments, x.dim(0));
  const int d = x.dim(1);
  const std::int64_t e = x.dim(0);
  Tensor out(x.shape());
  std::vector<double> mx(static_cast<size_t>(num_segments) * d, -1e300);
  for (std::int64_t r = 0; r < e; ++r)
    for (int c = 0; c < d; ++c)
      mx[static_cast<size_t>(segments[r]) * d + c] =
          std::max(mx[static_cast<size_t>(segments[r]) * d + c], x[r * d + c]);
  std::vector<double> denom(static_cast<size_t>(num_segments) * d, 0.0);
  for (std::int64_t r = 0; r < e; ++r)
    for (int c = 0; c < d; ++c) {
      out[r * d + c] = std::exp(x[r * d + c] - mx[static_cast<size_t>(segments[r]) * d + c]);
      denom[static_cast<size_t>(segments[r]) * d + c] += out[r * d + c];
    }
  for (std::int64_t r = 0; r < e; ++r)
    for (int c = 0; c < d; ++c) out[r * d + c] /= denom[static_cast<size_t>(segments[r]) * d + c];
  const int pr = rows.index();
  return tape.make(std::move(out), {pr},
                   [pr, segments, num_segments, d](Tape& t, int self) {
                     const Tensor& g = t.grad_of(self);
                     const Tensor& y = t.value_of(self);
                     Tensor& gr = t.accumulator(pr);
                     std::vector<double> dot(static_cast<size_t>(num_segments) * d, 0.0);
                     const std::int64_t e = y.dim(0);
                     for (std::int64_t r = 0; r < e; ++r)
                       for (int c = 0; c < d; ++c)
                         dot[static_cast<size_t>(segments[r]) * d + c] +=
                             g[r * d + c] * y[r * d + c];
                     for (std::int64_t r = 0; r < e; ++r)
                       for (int c = 0; c < d; ++c)
                         gr[r * d + c] +=
                             y[r * d + c] *
                             (g[r * d + c] - dot[static_cast<size_t>(segments[r]) * d + c]);
                   });
}

Var row_scale(Var m, Var weights) {
  Tape& tape = same_tape(m, weights);
  const Tensor& x = m.value();
  const Tensor& w = weights.value();
  require(x.ndim() == 2, "row_scale expects a 2-d tensor");
  require(w.size() == x.dim(0), "row_scale weight length mismatch");
  const int d = x.dim(1);
  Tensor out(x.shape());
  for (std::int64_t r = 0; r < x.dim(0); ++r)
    for (int c = 0; c < d; ++c) out[r * d + c] = x[r * d + c] * w[r];
  const int pm = m.index(), pw = weights.index();
  return tape.make(std::move(out), {pm, pw}, [pm, pw, d](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& x = t.value_of(pm);
    const Tensor& w = t.value_of(pw);
    Tensor& gm = t.accumulator(pm);
    Tensor& gw = t.accumulator(pw);
    const std::int64_t rows = x.dim(0);
    for (std::int64_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int c = 0; c < d; ++c) {
        gm[r * d + c] += g[r * d + c] * w[r];
        acc += g[r * d + c] * x[r * d + c];
      }
      gw[r] += acc;
    }
  });
}

// ---------------------------------------------------------------------------
// dropout

Var dropout(Var a, double p, bool train, std::mt19937_64& rng) {
  require(p >= 0.0 && p < 1.0, "dropout rate must be in [0, 1)");
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  if (!train || p == 0.0) {
    Tensor out = x;
    const int pa = a.index();
    return tape.make(std::move(out), {pa}, [pa](Tape& t, int self) {
      const Tensor& g = t.grad_of(self);
      Tensor& ga = t.accumulator(pa);
      for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(static_cast<size_t>(x.size()));
  const double inv_keep = 1.0 / (1.0 - p);
  for (auto& m : mask) m = keep(rng) ? inv_keep : 0.0;
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  const int pa = a.index();
  return tape.make(std::move(out), {pa}, [pa, mask](Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    Tensor& ga = t.accumulator(pa);
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
  });
}

// ---------------------------------------------------------------------------
// gradient checking

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double epsilon) {
  Tape tape;
  Var vx = tape.input(x);
  Var out = f(tape, vx);
  if (out.value().size() != 1) throw ValidationError("grad_check requires a scalar function");
  tape.backward(out);
  const Tensor analytic = vx.grad();

  double max_err = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    Tensor xp = x;
    xp[i] += epsilon;
    Tensor xm = x;
    xm[i] -= epsilon;
    Tape tp, tm;
    const double fp = f(tp, tp.input(xp)).value().item();
    const double fm = f(tm, tm.input(xm)).value().item();
    const double fd = (fp - fm) / (2.0 * epsilon);
    const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace trajcast::ad
