// artic2ac/tensorkit/ops.h
//
// Forward and backward kernels for the layer set: Swish, 2-D/3-D
// cross-correlation, max pooling, fully connected, LSTM, MAE loss.
// Convolutions run as im2col + GEMM; everything else is direct loops.

// Copyright 2026  artic2ac authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef ARTIC2AC_TENSORKIT_OPS_H_
#define ARTIC2AC_TENSORKIT_OPS_H_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "artic2ac/tensorkit/ndarray.h"

namespace artic2ac {

enum class Padding { kSame, kValid };

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// ---------------------------------------------------------------------------
// Activations

template <typename T>
inline T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

// y = x * sigmoid(x)
template <typename T>
NdArray<T> swish(const NdArray<T>& x) {
  NdArray<T> y = x;
  for (auto& v : y.data) v = v * sigmoid(v);
  return y;
}

// dz given pre-activation z and upstream dy. d/dz [z*s(z)] = s(z)*(1 + z*(1 - s(z)))
template <typename T>
NdArray<T> swish_backward(const NdArray<T>& z, const NdArray<T>& dy) {
  check_same_shape(z, dy, "swish_backward");
  NdArray<T> dz = dy;
  for (int64_t i = 0; i < z.size(); ++i) {
    T s = sigmoid(z.data[i]);
    dz.data[i] = dy.data[i] * s * (T(1) + z.data[i] * (T(1) - s));
  }
  return dz;
}

// ---------------------------------------------------------------------------
// Convolution shape rule

struct ConvAxis {
  int out;
  int pad_before;
};

// `same`: out = ceil(n / stride), zero padding split evenly with the extra
// element on the trailing side. `valid`: no padding, kernel must fit.
inline ConvAxis conv_axis(int n, int k, int stride, Padding pad) {
  if (stride < 1) throw ShapeError("stride must be >= 1");
  if (k < 1) throw ShapeError("kernel extent must be >= 1");
  if (pad == Padding::kValid) {
    if (k > n)
      throw ShapeError("kernel extent " + std::to_string(k) + " exceeds input extent " +
                       std::to_string(n));
    return {(n - k) / stride + 1, 0};
  }
  int out = (n + stride - 1) / stride;
  int total = std::max((out - 1) * stride + k - n, 0);
  return {out, total / 2};
}

// ---------------------------------------------------------------------------
// Conv2D over a leading batch/time axis. x (B,H,W,Ci), w (kh,kw,Ci,Co),
// bias (Co) -> y (B,Ho,Wo,Co). Cross-correlation plus bias, no activation.

namespace detail {

// Gathers the patch matrix (B*Ho*Wo rows, kh*kw*Ci cols) for conv2d.
template <typename T>
void im2col2d(const NdArray<T>& x, int kh, int kw, int sh, int sw, int pt, int pl, int ho, int wo,
              std::vector<T>& col) {
  const int b_n = x.dim(0), h = x.dim(1), w = x.dim(2), ci = x.dim(3);
  const int64_t k_cols = static_cast<int64_t>(kh) * kw * ci;
  col.resize(static_cast<size_t>(b_n) * ho * wo * k_cols);
  const T* xp = x.ptr();
  T* cp = col.data();
  for (int b = 0; b < b_n; ++b) {
    for (int oh = 0; oh < ho; ++oh) {
      for (int ow = 0; ow < wo; ++ow) {
        T* row = cp;
        const int iw_base = ow * sw - pl;
        for (int dkh = 0; dkh < kh; ++dkh) {
          T* dst = row + static_cast<int64_t>(dkh) * kw * ci;
          const int ih = oh * sh - pt + dkh;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + static_cast<int64_t>(kw) * ci, T(0));
            continue;
          }
          const int dkw0 = std::max(0, -iw_base);
          const int dkw1 = std::min(kw, w - iw_base);
          if (dkw0 > 0) std::fill(dst, dst + static_cast<int64_t>(dkw0) * ci, T(0));
          if (dkw1 < kw)
            std::fill(dst + static_cast<int64_t>(dkw1) * ci, dst + static_cast<int64_t>(kw) * ci,
                      T(0));
          if (dkw1 > dkw0) {
            const T* src = xp + ((static_cast<int64_t>(b) * h + ih) * w + (iw_base + dkw0)) * ci;
            std::memcpy(dst + static_cast<int64_t>(dkw0) * ci, src,
                        sizeof(T) * static_cast<size_t>(dkw1 - dkw0) * ci);
          }
        }
        cp += k_cols;
      }
    }
  }
}

// Scatter-add of the patch-gradient matrix back onto the input grid.
template <typename T>
void col2im2d(const std::vector<T>& col, int kh, int kw, int sh, int sw, int pt, int pl, int ho,
              int wo, NdArray<T>& dx) {
  const int b_n = dx.dim(0), h = dx.dim(1), w = dx.dim(2), ci = dx.dim(3);
  const int64_t k_cols = static_cast<int64_t>(kh) * kw * ci;
  const T* cp = col.data();
  T* xp = dx.ptr();
  for (int b = 0; b < b_n; ++b) {
    for (int oh = 0; oh < ho; ++oh) {
      for (int ow = 0; ow < wo; ++ow) {
        const int iw_base = ow * sw - pl;
        for (int dkh = 0; dkh < kh; ++dkh) {
          const int ih = oh * sh - pt + dkh;
          if (ih < 0 || ih >= h) continue;
          const int dkw0 = std::max(0, -iw_base);
          const int dkw1 = std::min(kw, w - iw_base);
          if (dkw1 <= dkw0) continue;
          const T* src = cp + static_cast<int64_t>(dkh) * kw * ci + static_cast<int64_t>(dkw0) * ci;
          T* dst = xp + ((static_cast<int64_t>(b) * h + ih) * w + (iw_base + dkw0)) * ci;
          const int64_t n = static_cast<int64_t>(dkw1 - dkw0) * ci;
          for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
        }
        cp += k_cols;
      }
    }
  }
}

}  // namespace detail

template <typename T>
NdArray<T> conv2d_batched_forward(const NdArray<T>& x, const NdArray<T>& w, const NdArray<T>& bias,
                                  int sh, int sw, Padding pad) {
  if (x.rank() != 4) throw ShapeError("conv2d: input must be (B,H,W,Cin), got " + shape_str(x.shape));
  if (w.rank() != 4) throw ShapeError("conv2d: weights must be (kh,kw,Cin,Cout)");
  const int kh = w.dim(0), kw = w.dim(1), ci = w.dim(2), co = w.dim(3);
  if (x.dim(3) != ci) throw ShapeError("conv2d: channel mismatch");
  if (bias.size() != co) throw ShapeError("conv2d: bias length mismatch");
  ConvAxis ah = conv_axis(x.dim(1), kh, sh, pad);
  ConvAxis aw = conv_axis(x.dim(2), kw, sw, pad);

  std::vector<T> col;
  detail::im2col2d(x, kh, kw, sh, sw, ah.pad_before, aw.pad_before, ah.out, aw.out, col);
  const int64_t rows = static_cast<int64_t>(x.dim(0)) * ah.out * aw.out;
  const int64_t k_cols = static_cast<int64_t>(kh) * kw * ci;

  NdArray<T> y({x.dim(0), ah.out, aw.out, co});
  ConstMatMap<T> cm(col.data(), rows, k_cols);
  ConstMatMap<T> wm(w.ptr(), k_cols, co);
  MatMap<T> ym(y.ptr(), rows, co);
  ym.noalias() = cm * wm;
  ym.rowwise() += ConstVecMap<T>(bias.ptr(), co).transpose();
  return y;
}

// Accumulates into *dw and *db when non-null; returns dL/dx.
template <typename T>
NdArray<T> conv2d_batched_backward(const NdArray<T>& x, const NdArray<T>& w, int sh, int sw,
                                   Padding pad, const NdArray<T>& dy, NdArray<T>* dw,
                                   NdArray<T>* db) {
  const int kh = w.dim(0), kw = w.dim(1), ci = w.dim(2), co = w.dim(3);
  ConvAxis ah = conv_axis(x.dim(1), kh, sh, pad);
  ConvAxis aw = conv_axis(x.dim(2), kw, sw, pad);
  const int64_t rows = static_cast<int64_t>(x.dim(0)) * ah.out * aw.out;
  const int64_t k_cols = static_cast<int64_t>(kh) * kw * ci;
  ConstMatMap<T> dym(dy.ptr(), rows, co);

  if (db != nullptr) {
    VecMap<T> dbm(db->ptr(), co);
    dbm.noalias() += dym.colwise().sum().transpose();
  }
  std::vector<T> col;
  if (dw != nullptr) {
    detail::im2col2d(x, kh, kw, sh, sw, ah.pad_before, aw.pad_before, ah.out, aw.out, col);
    ConstMatMap<T> cm(col.data(), rows, k_cols);
    MatMap<T> dwm(dw->ptr(), k_cols, co);
    dwm.noalias() += cm.transpose() * dym;
  }
  // dcol = dy * w^T, then scatter back.
  col.resize(static_cast<size_t>(rows) * k_cols);
  MatMap<T> cm(col.data(), rows, k_cols);
  ConstMatMap<T> wm(w.ptr(), k_cols, co);
  cm.noalias() = dym * wm.transpose();
  NdArray<T> dx(x.shape);
  detail::col2im2d(col, kh, kw, sh, sw, ah.pad_before, aw.pad_before, ah.out, aw.out, dx);
  return dx;
}

// Spec-level single-image surface: x (H,W,Cin).
template <typename T>
NdArray<T> conv2d_forward(const NdArray<T>& x, const NdArray<T>& w, const NdArray<T>& bias, int sh,
                          int sw, Padding pad) {
  if (x.rank() != 3) throw ShapeError("conv2d: input must be (H,W,Cin)");
  NdArray<T> xb = x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  NdArray<T> y = conv2d_batched_forward(xb, w, bias, sh, sw, pad);
  return y.reshaped({y.dim(1), y.dim(2), y.dim(3)});
}

template <typename T>
NdArray<T> conv2d_backward(const NdArray<T>& x, const NdArray<T>& w, int sh, int sw, Padding pad,
                           const NdArray<T>& dy, NdArray<T>* dw, NdArray<T>* db) {
  NdArray<T> xb = x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  NdArray<T> dyb = dy.reshaped({1, dy.dim(0), dy.dim(1), dy.dim(2)});
  NdArray<T> dx = conv2d_batched_backward(xb, w, sh, sw, pad, dyb, dw, db);
  return dx.reshaped({x.dim(0), x.dim(1), x.dim(2)});
}

// ---------------------------------------------------------------------------
// Conv3D. x (D,H,W,Ci), w (kt,kh,kw,Ci,Co), bias (Co) -> y (Do,Ho,Wo,Co).

namespace detail {

template <typename T>
void im2col3d(const NdArray<T>& x, int kt, int kh, int kw, int st, int sh, int sw, int pd, int pt,
              int pl, int od, int oh_n, int ow_n, std::vector<T>& col) {
  const int d = x.dim(0), h = x.dim(1), w = x.dim(2), ci = x.dim(3);
  const int64_t k_cols = static_cast<int64_t>(kt) * kh * kw * ci;
  col.resize(static_cast<size_t>(od) * oh_n * ow_n * k_cols);
  const T* xp = x.ptr();
  T* cp = col.data();
  for (int ot = 0; ot < od; ++ot) {
    for (int oh = 0; oh < oh_n; ++oh) {
      for (int ow = 0; ow < ow_n; ++ow) {
        const int iw_base = ow * sw - pl;
        for (int dkt = 0; dkt < kt; ++dkt) {
          const int it = ot * st - pd + dkt;
          T* plane = cp + static_cast<int64_t>(dkt) * kh * kw * ci;
          if (it < 0 || it >= d) {
            std::fill(plane, plane + static_cast<int64_t>(kh) * kw * ci, T(0));
            continue;
          }
          for (int dkh = 0; dkh < kh; ++dkh) {
            T* dst = plane + static_cast<int64_t>(dkh) * kw * ci;
            const int ih = oh * sh - pt + dkh;
            if (ih < 0 || ih >= h) {
              std::fill(dst, dst + static_cast<int64_t>(kw) * ci, T(0));
              continue;
            }
            const int dkw0 = std::max(0, -iw_base);
            const int dkw1 = std::min(kw, w - iw_base);
            if (dkw0 > 0) std::fill(dst, dst + static_cast<int64_t>(dkw0) * ci, T(0));
            if (dkw1 < kw)
              std::fill(dst + static_cast<int64_t>(dkw1) * ci, dst + static_cast<int64_t>(kw) * ci,
                        T(0));
            if (dkw1 > dkw0) {
              const T* src =
                  xp + ((static_cast<int64_t>(it) * h + ih) * w + (iw_base + dkw0)) * ci;
              std::memcpy(dst + static_cast<int64_t>(dkw0) * ci, src,
                          sizeof(T) * static_cast<size_t>(dkw1 - dkw0) * ci);
            }
          }
        }
        cp += k_cols;
      }
    }
  }
}

template <typename T>
void col2im3d(const std::vector<T>& col, int kt, int kh, int kw, int st, int sh, int sw, int pd,
              int pt, int pl, int od, int oh_n, int ow_n, NdArray<T>& dx) {
  const int d = dx.dim(0), h = dx.dim(1), w = dx.dim(2), ci = dx.dim(3);
  const int64_t k_cols = static_cast<int64_t>(kt) * kh * kw * ci;
  const T* cp = col.data();
  T* xp = dx.ptr();
  for (int ot = 0; ot < od; ++ot) {
    for (int oh = 0; oh < oh_n; ++oh) {
      for (int ow = 0; ow < ow_n; ++ow) {
        const int iw_base = ow * sw - pl;
        for (int dkt = 0; dkt < kt; ++dkt) {
          const int it = ot * st - pd + dkt;
          if (it < 0 || it >= d) continue;
          const T* plane = cp + static_cast<int64_t>(dkt) * kh * kw * ci;
          for (int dkh = 0; dkh < kh; ++dkh) {
            const int ih = oh * sh - pt + dkh;
            if (ih < 0 || ih >= h) continue;
            const int dkw0 = std::max(0, -iw_base);
            const int dkw1 = std::min(kw, w - iw_base);
            if (dkw1 <= dkw0) continue;
            const T* src = plane + static_cast<int64_t>(dkh) * kw * ci + static_cast<int64_t>(dkw0) * ci;
            T* dst = xp + ((static_cast<int64_t>(it) * h + ih) * w + (iw_base + dkw0)) * ci;
            const int64_t n = static_cast<int64_t>(dkw1 - dkw0) * ci;
            for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
          }
        }
        cp += k_cols;
      }
    }
  }
}

}  // namespace detail

template <typename T>
NdArray<T> conv3d_forward(const NdArray<T>& x, const NdArray<T>& w, const NdArray<T>& bias, int st,
                          int sh, int sw, Padding pad) {
  if (x.rank() != 4) throw ShapeError("conv3d: input must be (T,H,W,Cin), got " + shape_str(x.shape));
  if (w.rank() != 5) throw ShapeError("conv3d: weights must be (kt,kh,kw,Cin,Cout)");
  const int kt = w.dim(0), kh = w.dim(1), kw = w.dim(2), ci = w.dim(3), co = w.dim(4);
  if (x.dim(3) != ci) throw ShapeError("conv3d: channel mismatch");
  if (bias.size() != co) throw ShapeError("conv3d: bias length mismatch");
  ConvAxis ad = conv_axis(x.dim(0), kt, st, pad);
  ConvAxis ah = conv_axis(x.dim(1), kh, sh, pad);
  ConvAxis aw = conv_axis(x.dim(2), kw, sw, pad);

  std::vector<T> col;
  detail::im2col3d(x, kt, kh, kw, st, sh, sw, ad.pad_before, ah.pad_before, aw.pad_before, ad.out,
                   ah.out, aw.out, col);
  const int64_t rows = static_cast<int64_t>(ad.out) * ah.out * aw.out;
  const int64_t k_cols = static_cast<int64_t>(kt) * kh * kw * ci;

  NdArray<T> y({ad.out, ah.out, aw.out, co});
  ConstMatMap<T> cm(col.data(), rows, k_cols);
  ConstMatMap<T> wm(w.ptr(), k_cols, co);
  MatMap<T> ym(y.ptr(), rows, co);
  ym.noalias() = cm * wm;
  ym.rowwise() += ConstVecMap<T>(bias.ptr(), co).transpose();
  return y;
}

template <typename T>
NdArray<T> conv3d_backward(const NdArray<T>& x, const NdArray<T>& w, int st, int sh, int sw,
                           Padding pad, const NdArray<T>& dy, NdArray<T>* dw, NdArray<T>* db) {
  const int kt = w.dim(0), kh = w.dim(1), kw = w.dim(2), ci = w.dim(3), co = w.dim(4);
  ConvAxis ad = conv_axis(x.dim(0), kt, st, pad);
  ConvAxis ah = conv_axis(x.dim(1), kh, sh, pad);
  ConvAxis aw = conv_axis(x.dim(2), kw, sw, pad);
  const int64_t rows = static_cast<int64_t>(ad.out) * ah.out * aw.out;
  const int64_t k_cols = static_cast<int64_t>(kt) * kh * kw * ci;
  ConstMatMap<T> dym(dy.ptr(), rows, co);

  if (db != nullptr) {
    VecMap<T> dbm(db->ptr(), co);
    dbm.noalias() += dym.colwise().sum().transpose();
  }
  std::vector<T> col;
  if (dw != nullptr) {
    detail::im2col3d(x, kt, kh, kw, st, sh, sw, ad.pad_before, ah.pad_before, aw.pad_before,
                     ad.out, ah.out, aw.out, col);
    ConstMatMap<T> cm(col.data(), rows, k_cols);
    MatMap<T> dwm(dw->ptr(), k_cols, co);
    dwm.noalias() += cm.transpose() * dym;
  }
  col.resize(static_cast<size_t>(rows) * k_cols);
  MatMap<T> cm(col.data(), rows, k_cols);
  ConstMatMap<T> wm(w.ptr(), k_cols, co);
  cm.noalias() = dym * wm.transpose();
  NdArray<T> dx(x.shape);
  detail::col2im3d(col, kt, kh, kw, st, sh, sw, ad.pad_before, ah.pad_before, aw.pad_before,
                   ad.out, ah.out, aw.out, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// Max pooling, channel-last, pad-free. Pooled extents must divide evenly.
// Backward routes each gradient to the first-scanned maximum of its window.

template <typename T>
NdArray<T> maxpool2d_batched_forward(const NdArray<T>& x, int ph, int pw,
                                     std::vector<int32_t>* argmax) {
  if (x.rank() != 4) throw ShapeError("maxpool2d: input must be (B,H,W,C)");
  const int b_n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  if (ph < 1 || pw < 1 || h % ph != 0 || w % pw != 0)
    throw ShapeError("maxpool2d: extents " + shape_str(x.shape) + " not divisible by window (" +
                     std::to_string(ph) + "," + std::to_string(pw) + ")");
  const int ho = h / ph, wo = w / pw;
  NdArray<T> y({b_n, ho, wo, c});
  if (argmax) argmax->assign(y.data.size(), 0);
  const T* xp = x.ptr();
  T* yp = y.ptr();
  int64_t oi = 0;
  for (int b = 0; b < b_n; ++b)
    for (int oh = 0; oh < ho; ++oh)
      for (int ow = 0; ow < wo; ++ow) {
        for (int ch = 0; ch < c; ++ch) {
          T best{};
          int32_t besti = -1;
          for (int dh = 0; dh < ph; ++dh)
            for (int dw = 0; dw < pw; ++dw) {
              int64_t idx = ((static_cast<int64_t>(b) * h + oh * ph + dh) * w + ow * pw + dw) * c + ch;
              if (besti < 0 || xp[idx] > best) {
                best = xp[idx];
                besti = static_cast<int32_t>(idx);
              }
            }
          yp[oi] = best;
          if (argmax) (*argmax)[oi] = besti;
          ++oi;
        }
      }
  return y;
}

template <typename T>
NdArray<T> maxpool_backward(const std::vector<int32_t>& argmax, const NdArray<T>& dy,
                            const std::vector<int>& in_shape) {
  NdArray<T> dx(in_shape);
  for (size_t i = 0; i < argmax.size(); ++i) dx.data[argmax[i]] += dy.data[i];
  return dx;
}

template <typename T>
NdArray<T> maxpool3d_forward(const NdArray<T>& x, int pt, int ph, int pw,
                             std::vector<int32_t>* argmax) {
  if (x.rank() != 4) throw ShapeError("maxpool3d: input must be (T,H,W,C)");
  const int d = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  if (pt < 1 || ph < 1 || pw < 1 || d % pt != 0 || h % ph != 0 || w % pw != 0)
    throw ShapeError("maxpool3d: extents " + shape_str(x.shape) + " not divisible by window");
  const int od = d / pt, ho = h / ph, wo = w / pw;
  NdArray<T> y({od, ho, wo, c});
  if (argmax) argmax->assign(y.data.size(), 0);
  const T* xp = x.ptr();
  T* yp = y.ptr();
  int64_t oi = 0;
  for (int ot = 0; ot < od; ++ot)
    for (int oh = 0; oh < ho; ++oh)
      for (int ow = 0; ow < wo; ++ow)
        for (int ch = 0; ch < c; ++ch) {
          T best{};
          int32_t besti = -1;
          for (int dt = 0; dt < pt; ++dt)
            for (int dh = 0; dh < ph; ++dh)
              for (int dw = 0; dw < pw; ++dw) {
                int64_t idx =
                    ((static_cast<int64_t>(ot * pt + dt) * h + oh * ph + dh) * w + ow * pw + dw) *
                        c +
                    ch;
                if (besti < 0 || xp[idx] > best) {
                  best = xp[idx];
                  besti = static_cast<int32_t>(idx);
                }
              }
          yp[oi] = best;
          if (argmax) (*argmax)[oi] = besti;
          ++oi;
        }
  return y;
}

// ---------------------------------------------------------------------------
// Fully connected: y = W x + b with W (m,n).

template <typename T>
NdArray<T> dense_forward(const NdArray<T>& x, const NdArray<T>& w, const NdArray<T>& bias) {
  if (w.rank() != 2) throw ShapeError("dense: weights must be (m,n)");
  const int m = w.dim(0), n = w.dim(1);
  if (x.size() != n)
    throw ShapeError("dense: input length " + std::to_string(x.size()) + " != " + std::to_string(n));
  if (bias.size() != m) throw ShapeError("dense: bias length mismatch");
  NdArray<T> y({m});
  ConstMatMap<T> wm(w.ptr(), m, n);
  ConstVecMap<T> xv(x.ptr(), n);
  VecMap<T> yv(y.ptr(), m);
  yv.noalias() = wm * xv + ConstVecMap<T>(bias.ptr(), m);
  return y;
}

template <typename T>
NdArray<T> dense_backward(const NdArray<T>& x, const NdArray<T>& w, const NdArray<T>& dy,
                          NdArray<T>* dw, NdArray<T>* db) {
  const int m = w.dim(0), n = w.dim(1);
  ConstMatMap<T> wm(w.ptr(), m, n);
  ConstVecMap<T> dyv(dy.ptr(), m);
  if (dw != nullptr) {
    MatMap<T> dwm(dw->ptr(), m, n);
    dwm.noalias() += dyv * ConstVecMap<T>(x.ptr(), n).transpose();
  }
  if (db != nullptr) VecMap<T>(db->ptr(), m).noalias() += dyv;
  NdArray<T> dx({n});
  VecMap<T>(dx.ptr(), n).noalias() = wm.transpose() * dyv;
  return dx;
}

// ---------------------------------------------------------------------------
// LSTM, one direction. Gate rows packed [i; f; g; o]. Initial h, c are zero.
//   i,f,o = sigmoid, g = tanh, c_t = f*c_{t-1} + i*g, h_t = o*tanh(c_t)

template <typename T>
struct LstmCache {
  NdArray<T> gates;  // (T, 4u) post-activation
  NdArray<T> c;      // (T, u)
  NdArray<T> h;      // (T, u)
};

template <typename T>
NdArray<T> lstm_forward(const NdArray<T>& seq, const NdArray<T>& w_ih, const NdArray<T>& w_hh,
                        const NdArray<T>& bias, bool return_sequence, LstmCache<T>* cache) {
  if (seq.rank() != 2) throw ShapeError("lstm: input must be (T,n)");
  const int steps = seq.dim(0), n = seq.dim(1);
  if (w_ih.rank() != 2 || w_ih.dim(0) % 4 != 0) throw ShapeError("lstm: w_ih must be (4u,n)");
  const int u = w_ih.dim(0) / 4;
  if (w_ih.dim(1) != n) throw ShapeError("lstm: w_ih input width mismatch");
  if (w_hh.rank() != 2 || w_hh.dim(0) != 4 * u || w_hh.dim(1) != u)
    throw ShapeError("lstm: w_hh must be (4u,u)");
  if (bias.size() != 4 * u) throw ShapeError("lstm: bias length mismatch");
  if (steps < 1) throw ShapeError("lstm: empty sequence");

  NdArray<T> gates({steps, 4 * u});
  NdArray<T> cs({steps, u});
  NdArray<T> hs({steps, u});
  std::vector<T> h(u, T(0)), c(u, T(0));
  ConstMatMap<T> wim(w_ih.ptr(), 4 * u, n);
  ConstMatMap<T> whm(w_hh.ptr(), 4 * u, u);
  ConstVecMap<T> bv(bias.ptr(), 4 * u);
  std::vector<T> z(4 * u);
  for (int t = 0; t < steps; ++t) {
    VecMap<T> zv(z.data(), 4 * u);
    zv.noalias() = wim * ConstVecMap<T>(seq.ptr() + static_cast<int64_t>(t) * n, n) +
                   whm * ConstVecMap<T>(h.data(), u) + bv;
    T* g = gates.ptr() + static_cast<int64_t>(t) * 4 * u;
    for (int j = 0; j < u; ++j) {
      T gi = sigmoid(z[j]);
      T gf = sigmoid(z[u + j]);
      T gg = std::tanh(z[2 * u + j]);
      T go = sigmoid(z[3 * u + j]);
      g[j] = gi;
      g[u + j] = gf;
      g[2 * u + j] = gg;
      g[3 * u + j] = go;
      c[j] = gf * c[j] + gi * gg;
      h[j] = go * std::tanh(c[j]);
    }
    std::memcpy(cs.ptr() + static_cast<int64_t>(t) * u, c.data(), sizeof(T) * u);
    std::memcpy(hs.ptr() + static_cast<int64_t>(t) * u, h.data(), sizeof(T) * u);
  }
  NdArray<T> out;
  if (return_sequence) {
    out = hs;
  } else {
    out = NdArray<T>({u});
    std::memcpy(out.ptr(), h.data(), sizeof(T) * u);
  }
  if (cache != nullptr) {
    cache->gates = std::move(gates);
    cache->c = std::move(cs);
    cache->h = std::move(hs);
  }
  return out;
}

// dh_out is (u) when return_sequence was false, else (T,u).
template <typename T>
NdArray<T> lstm_backward(const NdArray<T>& seq, const NdArray<T>& w_ih, const NdArray<T>& w_hh,
                         const LstmCache<T>& cache, const NdArray<T>& dh_out,
                         bool return_sequence, NdArray<T>* dw_ih, NdArray<T>* dw_hh,
                         NdArray<T>* db) {
  const int steps = seq.dim(0), n = seq.dim(1);
  const int u = w_ih.dim(0) / 4;
  ConstMatMap<T> wim(w_ih.ptr(), 4 * u, n);
  ConstMatMap<T> whm(w_hh.ptr(), 4 * u, u);

  NdArray<T> dseq(seq.shape);
  std::vector<T> dh(u, T(0)), dc(u, T(0)), dz(4 * u);
  for (int t = steps - 1; t >= 0; --t) {
    const T* g = cache.gates.ptr() + static_cast<int64_t>(t) * 4 * u;
    const T* ct = cache.c.ptr() + static_cast<int64_t>(t) * u;
    if (return_sequence) {
      const T* d = dh_out.ptr() + static_cast<int64_t>(t) * u;
      for (int j = 0; j < u; ++j) dh[j] += d[j];
    } else if (t == steps - 1) {
      for (int j = 0; j < u; ++j) dh[j] += dh_out.data[j];
    }
    for (int j = 0; j < u; ++j) {
      T gi = g[j], gf = g[u + j], gg = g[2 * u + j], go = g[3 * u + j];
      T tc = std::tanh(ct[j]);
      T do_ = dh[j] * tc;
      T dcj = dc[j] + dh[j] * go * (T(1) - tc * tc);
      T cprev = (t > 0) ? cache.c.data[static_cast<int64_t>(t - 1) * u + j] : T(0);
      T di = dcj * gg;
      T dg = dcj * gi;
      T df = dcj * cprev;
      dz[j] = di * gi * (T(1) - gi);
      dz[u + j] = df * gf * (T(1) - gf);
      dz[2 * u + j] = dg * (T(1) - gg * gg);
      dz[3 * u + j] = do_ * go * (T(1) - go);
      dc[j] = dcj * gf;
    }
    ConstVecMap<T> dzv(dz.data(), 4 * u);
    ConstVecMap<T> xv(seq.ptr() + static_cast<int64_t>(t) * n, n);
    if (dw_ih != nullptr) {
      MatMap<T> m(dw_ih->ptr(), 4 * u, n);
      m.noalias() += dzv * xv.transpose();
    }
    if (dw_hh != nullptr && t > 0) {
      ConstVecMap<T> hprev(cache.h.ptr() + static_cast<int64_t>(t - 1) * u, u);
      MatMap<T> m(dw_hh->ptr(), 4 * u, u);
      m.noalias() += dzv * hprev.transpose();
    }
    if (db != nullptr) VecMap<T>(db->ptr(), 4 * u).noalias() += dzv;
    VecMap<T>(dseq.ptr() + static_cast<int64_t>(t) * n, n).noalias() = wim.transpose() * dzv;
    VecMap<T> dhv(dh.data(), u);
    dhv.noalias() = whm.transpose() * dzv;
  }
  return dseq;
}

// Reverses the row order of a (T,n) sequence.
template <typename T>
NdArray<T> reverse_rows(const NdArray<T>& seq) {
  if (seq.rank() != 2) throw ShapeError("reverse_rows: rank-2 input expected");
  const int steps = seq.dim(0), n = seq.dim(1);
  NdArray<T> out(seq.shape);
  for (int t = 0; t < steps; ++t)
    std::memcpy(out.ptr() + static_cast<int64_t>(t) * n,
                seq.ptr() + static_cast<int64_t>(steps - 1 - t) * n, sizeof(T) * n);
  return out;
}

// ---------------------------------------------------------------------------
// Mean absolute error over all elements. Subgradient at zero is zero.
// The reduction runs in double regardless of T.

template <typename T>
double mae_loss(const NdArray<T>& pred, const NdArray<T>& target, NdArray<T>* grad) {
  check_same_shape(pred, target, "mae_loss");
  const int64_t n = pred.size();
  if (n == 0) throw ShapeError("mae_loss: empty input");
  if (grad != nullptr && !grad->same_shape(pred)) *grad = NdArray<T>(pred.shape);
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    acc += std::abs(d);
    if (grad != nullptr)
      grad->data[i] = d > 0.0 ? T(1.0 / static_cast<double>(n))
                              : (d < 0.0 ? T(-1.0 / static_cast<double>(n)) : T(0));
  }
  return acc / static_cast<double>(n);
}

}  // namespace artic2ac

#endif  // ARTIC2AC_TENSORKIT_OPS_H_
