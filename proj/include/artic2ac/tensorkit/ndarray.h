// artic2ac/tensorkit/ndarray.h

// Copyright 2026  artic2ac authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef ARTIC2AC_TENSORKIT_NDARRAY_H_
#define ARTIC2AC_TENSORKIT_NDARRAY_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "artic2ac/common/error.h"

namespace artic2ac {

inline int64_t numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int e : shape) {
    if (e < 0) throw ShapeError("negative tensor extent");
    n *= e;
  }
  return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

// Dense row-major n-dimensional array. double in test mode, float in fast
// mode; everything downstream is templated on the scalar.
template <typename T>
struct NdArray {
  std::vector<int> shape;
  std::vector<T> data;

  NdArray() = default;
  explicit NdArray(std::vector<int> s) : shape(std::move(s)), data(numel(shape), T(0)) {}
  NdArray(std::vector<int> s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
    if (static_cast<int64_t>(data.size()) != numel(shape))
      throw ShapeError("data length does not match shape " + shape_str(shape));
  }

  static NdArray zeros(std::vector<int> s) { return NdArray(std::move(s)); }
  static NdArray full(std::vector<int> s, T value) {
    NdArray a(std::move(s));
    std::fill(a.data.begin(), a.data.end(), value);
    return a;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(data.size()); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool same_shape(const NdArray& other) const { return shape == other.shape; }

  NdArray reshaped(std::vector<int> s) const {
    if (numel(s) != size())
      throw ShapeError("reshape " + shape_str(shape) + " -> " + shape_str(s));
    NdArray out;
    out.shape = std::move(s);
    out.data = data;
    return out;
  }

  template <typename U>
  NdArray<U> cast() const {
    NdArray<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

template <typename T>
bool all_finite(const NdArray<T>& a) {
  for (T v : a.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename T>
void check_same_shape(const NdArray<T>& a, const NdArray<T>& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
}

}  // namespace artic2ac

#endif  // ARTIC2AC_TENSORKIT_NDARRAY_H_
