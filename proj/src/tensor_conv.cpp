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

#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/tensor.hpp"

namespace trajcast::ad {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

// Unrolls (C, H, W) into a (C*kh*kw) x (oh*ow) matrix for a stride/pad grid.
void im2col(const double* x, int c, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, double* col) {
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        double* row = col + ((static_cast<std::int64_t>(ch) * kh + ki) * kw + kj) *
                                (static_cast<std::int64_t>(oh) * ow);
        for (int i = 0; i < oh; ++i) {
          const int src_i = i * stride + ki - pad;
          for (int j = 0; j < ow; ++j) {
            const int src_j = j * stride + kj - pad;
            row[static_cast<std::int64_t>(i) * ow + j] =
                (src_i >= 0 && src_i < h && src_j >= 0 && src_j < w)
                    ? x[(static_cast<std::int64_t>(ch) * h + src_i) * w + src_j]
                    : 0.0;
          }
        }
      }
    }
  }
}

// Transpose of im2col: accumulates the column matrix back into (C, H, W).
void col2im(const double* col, int c, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, double* x) {
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const double* row = col + ((static_cast<std::int64_t>(ch) * kh + ki) * kw + kj) *
                                      (static_cast<std::int64_t>(oh) * ow);
        for (int i = 0; i < oh; ++i) {
          const int dst_i = i * stride + ki - pad;
          if (dst_i < 0 || dst_i >= h) continue;
          for (int j = 0; j < ow; ++j) {
            const int dst_j = j * stride + kj - pad;
            if (dst_j < 0 || dst_j >= w) continue;
            x[(static_cast<std::int64_t>(ch) * h + dst_i) * w + dst_j] +=
                row[static_cast<std::int64_t>(i) * ow + j];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var x, Var w, Var bias, int stride, int pad) {
  Tape& tape = *x.tape();
  require(x.tape() == w.tape() && x.tape() == bias.tape(), "conv2d operands on different tapes");
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  const Tensor& tb = bias.value();
  require(tx.ndim() == 4 && tw.ndim() == 4, "conv2d expects (N,C,H,W) input and (F,C,kh,kw) kernel");
  require(tx.dim(1) == tw.dim(1), "conv2d channel mismatch");
  require(tb.ndim() == 1 && tb.dim(0) == tw.dim(0), "conv2d bias shape mismatch");
  require(stride >= 1 && pad >= 0, "conv2d bad stride/pad");
  const int n = tx.dim(0), c = tx.dim(1), h = tx.dim(2), wd = tx.dim(3);
  const int f = tw.dim(0), kh = tw.dim(2), kw = tw.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  require(oh >= 1 && ow >= 1, "conv2d output would be empty");
  const int ckk = c * kh * kw;
  const std::int64_t plane = static_cast<std::int64_t>(oh) * ow;

  Tensor out({n, f, oh, ow});
  std::vector<double> col(static_cast<size_t>(ckk) * plane);
  for (int s = 0; s < n; ++s) {
    im2col(tx.data() + static_cast<std::int64_t>(s) * c * h * wd, c, h, wd, kh, kw, stride, pad,
           oh, ow, col.data());
    double* out_s = out.data() + static_cast<std::int64_t>(s) * f * plane;
    detail::gemm_nn(f, ckk, static_cast<int>(plane), tw.data(), col.data(), out_s);
    for (int fc = 0; fc < f; ++fc)
      for (std::int64_t p = 0; p < plane; ++p) out_s[fc * plane + p] += tb[fc];
  }

  const int px = x.index(), pw = w.index(), pb = bias.index();
  return tape.make(std::move(out), {px, pw, pb},
                   [px, pw, pb, n, c, h, wd, f, kh, kw, stride, pad, oh, ow](Tape& t, int self) {
                     const Tensor& g = t.grad_of(self);
                     const Tensor& tx = t.value_of(px);
                     const Tensor& tw = t.value_of(pw);
                     Tensor& gx = t.accumulator(px);
                     Tensor& gw = t.accumulator(pw);
                     Tensor& gb = t.accumulator(pb);
                     const int ckk = c * kh * kw;
                     const std::int64_t plane = static_cast<std::int64_t>(oh) * ow;
                     std::vector<double> col(static_cast<size_t>(ckk) * plane);
                     std::vector<double> dcol(static_cast<size_t>(ckk) * plane);
                     for (int s = 0; s < n; ++s) {
                       const double* g_s = g.data() + static_cast<std::int64_t>(s) * f * plane;
                       im2col(tx.data() + static_cast<std::int64_t>(s) * c * h * wd, c, h, wd,
                              kh, kw, stride, pad, oh, ow, col.data());
                       // dW += G . col^T, dcol = W^T . G
                       detail::gemm_nt(f, static_cast<int>(plane), ckk, g_s, col.data(),
                                       gw.data());
                       std::fill(dcol.begin(), dcol.end(), 0.0);
                       detail::gemm_tn(ckk, f, static_cast<int>(plane), tw.data(), g_s,
                                       dcol.data());
                       col2im(dcol.data(), c, h, wd, kh, kw, stride, pad, oh, ow,
                              gx.data() + static_cast<std::int64_t>(s) * c * h * wd);
                       for (int fc = 0; fc < f; ++fc)
                         for (std::int64_t p = 0; p < plane; ++p) gb[fc] += g_s[fc * plane + p];
                     }
                   });
}

Var deconv2d(Var x, Var w, Var bias, int stride, int pad) {
  Tape& tape = *x.tape();
  require(x.tape() == w.tape() && x.tape() == bias.tape(),
          "deconv2d operands on different tapes");
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  const Tensor& tb = bias.value();
  require(tx.ndim() == 4 && tw.ndim() == 4,
          "deconv2d expects (N,C,H,W) input and (C,F,kh,kw) kernel");
  require(tx.dim(1) == tw.dim(0), "deconv2d channel mismatch");
  const int n = tx.dim(0), c = tx.dim(1), h = tx.dim(2), wd = tx.dim(3);
  const int f = tw.dim(1), kh = tw.dim(2), kw = tw.dim(3);
  require(tb.ndim() == 1 && tb.dim(0) == f, "deconv2d bias shape mismatch");
  require(stride >= 1 && pad >= 0, "deconv2d bad stride/pad");
  const int oh = (h - 1) * stride - 2 * pad + kh;
  const int ow = (wd - 1) * stride - 2 * pad + kw;
  require(oh >= 1 && ow >= 1, "deconv2d output would be empty");
  const int fkk = f * kh * kw;
  const std::int64_t in_plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t out_plane = static_cast<std::int64_t>(oh) * ow;

  Tensor out({n, f, oh, ow});
  std::vector<double> col(static_cast<size_t>(fkk) * in_plane);
  for (int s = 0; s < n; ++s) {
    const double* x_s = tx.data() + static_cast<std::int64_t>(s) * c * in_plane;
    std::fill(col.begin(), col.end(), 0.0);
    // col = W^T . x, then fold back onto the (larger) output grid
    detail::gemm_tn(fkk, c, static_cast<int>(in_plane), tw.data(), x_s, col.data());
    double* out_s = out.data() + static_cast<std::int64_t>(s) * f * out_plane;
    col2im(col.data(), f, oh, ow, kh, kw, stride, pad, h, wd, out_s);
    for (int fc = 0; fc < f; ++fc)
      for (std::int64_t p = 0; p < out_plane; ++p) out_s[fc * out_plane + p] += tb[fc];
  }

  const int px = x.index(), pw = w.index(), pb = bias.index();
  return tape.make(
      std::move(out), {px, pw, pb},
      [px, pw, pb, n, c, h, wd, f, kh, kw, stride, pad, oh, ow](Tape& t, int self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& tx = t.value_of(px);
        const Tensor& tw = t.value_of(pw);
        Tensor& gx = t.accumulator(px);
        Tensor& gw = t.accumulator(pw);
        Tensor& gb = t.accumulator(pb);
        const int fkk = f * kh * kw;
        const std::int64_t in_plane = static_cast<std::int64_t>(h) * wd;
        const std::int64_t out_plane = static_cast<std::int64_t>(oh) * ow;
        std::vector<double> gcol(static_cast<size_t>(fkk) * in_plane);
        for (int s = 0; s < n; ++s) {
          const double* g_s = g.data() + static_cast<std::int64_t>(s) * f * out_plane;
          im2col(g_s, f, oh, ow, kh, kw, stride, pad, h, wd, gcol.data());
          // dx += W . gcol ; dW += x . gcol^T
          detail::gemm_nn(c, fkk, static_cast<int>(in_plane), tw.data(), gcol.data(),
                          gx.data() + static_cast<std::int64_t>(s) * c * in_plane);
          detail::gemm_nt(c, static_cast<int>(in_plane), fkk,
                          tx.data() + static_cast<std::int64_t>(s) * c * in_plane, gcol.data(),
                          gw.data());
          for (int fc = 0; fc < f; ++fc)
            for (std::int64_t p = 0; p < out_plane; ++p) gb[fc] += g_s[fc * out_plane + p];
        }
      });
}

Var batchnorm2d(Var x, Var gamma, Var beta, BatchNormState& state, bool train) {
  Tape& tape = *x.tape();
  require(x.tape() == gamma.tape() && x.tape() == beta.tape(),
          "batchnorm2d operands on different tapes");
  const Tensor& tx = x.value();
  require(tx.ndim() == 4, "batchnorm2d expects (N,C,H,W)");
  const int n = tx.dim(0), c = tx.dim(1), h = tx.dim(2), w = tx.dim(3);
  require(n >= 1, "batchnorm2d on empty batch");
  require(gamma.value().size() == c && beta.value().size() == c,
          "batchnorm2d parameter shape mismatch");
  if (state.running_mean.size() != c) state.running_mean = Tensor({c});
  if (state.running_var.size() != c) state.running_var = Tensor::full({c}, 1.0);
  const std::int64_t m = static_cast<std::int64_t>(n) * h * w;
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;

  std::vector<double> mean(c, 0.0), invstd(c, 0.0);
  if (train) {
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int s = 0; s < n; ++s) {
        const double* p = tx.data() + (static_cast<std::int64_t>(s) * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) acc += p[i];
      }
      mean[ch] = acc / static_cast<double>(m);
      double var = 0.0;
      for (int s = 0; s < n; ++s) {
        const double* p = tx.data() + (static_cast<std::int64_t>(s) * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) {
          const double d = p[i] - mean[ch];
          var += d * d;
        }
      }
      var /= static_cast<double>(m);
      invstd[ch] = 1.0 / std::sqrt(var + state.eps);
      state.running_mean[ch] =
          (1.0 - state.momentum) * state.running_mean[ch] + state.momentum * mean[ch];
      state.running_var[ch] =
          (1.0 - state.momentum) * state.running_var[ch] + state.momentum * var;
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mean[ch] = state.running_mean[ch];
      invstd[ch] = 1.0 / std::sqrt(state.running_var[ch] + state.eps);
    }
  }

  const Tensor& tg = gamma.value();
  const Tensor& tbe = beta.value();
  Tensor out(tx.shape());
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch) {
      const double* p = tx.data() + (static_cast<std::int64_t>(s) * c + ch) * plane;
      double* o = out.data() + (static_cast<std::int64_t>(s) * c + ch) * plane;
      for (std::int64_t i = 0; i < plane; ++i)
        o[i] = tg[ch] * (p[i] - mean[ch]) * invstd[ch] + tbe[ch];
    }

  const int px = x.index(), pg = gamma.index(), pb = beta.index();
  return tape.make(
      std::move(out), {px, pg, pb},
      [px, pg, pb, n, c, plane, m, mean, invstd, train](Tape& t, int self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& tx = t.value_of(px);
        const Tensor& tg = t.value_of(pg);
        Tensor& gx = t.accumulator(px);
        Tensor& ggamma = t.accumulator(pg);
        Tensor& gbeta = t.accumulator(pb);
        for (int ch = 0; ch < c; ++ch) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (int s = 0; s < n; ++s) {
            const std::int64_t base = (static_cast<std::int64_t>(s) * c + ch) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
              const double xhat = (tx[base + i] - mean[ch]) * invstd[ch];
              sum_g += g[base + i];
              sum_gx += g[base + i] * xhat;
            }
          }
          gbeta[ch] += sum_g;
          ggamma[ch] += sum_gx;
          const double inv_m = 1.0 / static_cast<double>(m);
          for (int s = 0; s < n; ++s) {
            const std::int64_t base = (static_cast<std::int64_t>(s) * c + ch) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
              if (train) {
                const double xhat = (tx[base + i] - mean[ch]) * invstd[ch];
                gx[base + i] += tg[ch] * invstd[ch] *
                                (g[base + i] - inv_m * sum_g - xhat * inv_m * sum_gx);
              } else {
                gx[base + i] += tg[ch] * invstd[ch] * g[base + i];
              }
            }
          }
        }
      });
}

}  // namespace trajcast::ad
