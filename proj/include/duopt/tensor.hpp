#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "duopt/errors.hpp"
#include "duopt/types.hpp"

namespace duopt {

/// Dense row-major n-dimensional array. A scalar has an empty shape and one
/// element. The value type is generic so the same broadcasting/reduction
/// machinery serves numeric evaluation and bi-affine lowering.
template <typename T>
class TensorT {
 public:
  TensorT() : data_(1) {}  // scalar zero

  explicit TensorT(Shape shape)
      : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_size(shape_))) {
    check_shape();
  }

  TensorT(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (static_cast<std::int64_t>(data_.size()) != shape_size(shape_))
      fail("ShapeMismatch", "data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }

  static TensorT scalar(T v) {
    TensorT t;
    t.data_[0] = std::move(v);
    return t;
  }

  static TensorT full(Shape shape, const T& v) {
    TensorT t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool is_scalar() const { return shape_.empty(); }

  T& flat(std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& flat(std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const TensorT& o) const { return shape_ == o.shape_ && data_ == o.data_; }

 private:
  void check_shape() const {
    for (auto d : shape_)
      if (d <= 0) fail("ShapeMismatch", "non-positive dimension in shape " + shape_to_string(shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<double>;

/// Right-aligned broadcast of two shapes; nullopt when incompatible.
std::optional<Shape> broadcast_shapes(const Shape& a, const Shape& b);

/// Row-major strides (in elements) for a shape.
std::vector<std::int64_t> row_major_strides(const Shape& s);

/// Strides of an operand viewed through a broadcast result shape: size-1 and
/// missing leading dimensions get stride 0.
std::vector<std::int64_t> broadcast_strides(const Shape& operand, const Shape& result);

namespace detail {

template <typename T, typename F>
TensorT<T> zip_impl(const TensorT<T>& a, const TensorT<T>& b, F&& f) {
  auto shape = broadcast_shapes(a.shape(), b.shape());
  if (!shape)
    fail("BroadcastError",
         "shapes " + shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()) +
             " are not broadcast-compatible");
  TensorT<T> out(*shape);
  const auto sa = broadcast_strides(a.shape(), *shape);
  const auto sb = broadcast_strides(b.shape(), *shape);
  const int nd = out.ndim();
  std::vector<std::int64_t> idx(static_cast<std::size_t>(nd), 0);
  std::int64_t ia = 0, ib = 0;
  for (std::int64_t flat = 0; flat < out.size(); ++flat) {
    out.flat(flat) = f(a.flat(ia), b.flat(ib));
    for (int d = nd - 1; d >= 0; --d) {
      idx[d]++;
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < (*shape)[d]) break;
      ia -= sa[d] * (*shape)[d];
      ib -= sb[d] * (*shape)[d];
      idx[d] = 0;
    }
  }
  return out;
}

}  // namespace detail

/// Elementwise combination with broadcasting.
template <typename T, typename F>
TensorT<T> zip_with(const TensorT<T>& a, const TensorT<T>& b, F&& f) {
  return detail::zip_impl(a, b, std::forward<F>(f));
}

template <typename T, typename F>
TensorT<T> map_tensor(const TensorT<T>& a, F&& f) {
  TensorT<T> out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out.flat(i) = f(a.flat(i));
  return out;
}

/// Full reduction with operator+; result is a scalar tensor.
template <typename T>
TensorT<T> sum_all(const TensorT<T>& a) {
  T acc{};
  for (std::int64_t i = 0; i < a.size(); ++i) acc = acc + a.flat(i);
  return TensorT<T>::scalar(std::move(acc));
}

/// Reduction along one axis. Negative axes count from the end.
template <typename T>
TensorT<T> sum_axis(const TensorT<T>& a, std::int64_t axis) {
  const int nd = a.ndim();
  if (axis < -nd || axis >= nd)
    fail("AxisOutOfRange", "axis " + std::to_string(axis) + " out of range for shape " +
                               shape_to_string(a.shape()));
  if (axis < 0) axis += nd;
  Shape out_shape;
  for (int d = 0; d < nd; ++d)
    if (d != axis) out_shape.push_back(a.shape()[d]);
  TensorT<T> out(out_shape);
  std::fill(out.data().begin(), out.data().end(), T{});
  const auto strides = row_major_strides(a.shape());
  const std::int64_t axis_stride = strides[static_cast<std::size_t>(axis)];
  const std::int64_t axis_len = a.shape()[static_cast<std::size_t>(axis)];
  // outer runs over all indices with the reduced axis fixed at 0
  std::int64_t outer_count = a.size() / axis_len;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(nd), 0);
  std::int64_t base = 0;
  for (std::int64_t o = 0; o < outer_count; ++o) {
    T acc{};
    for (std::int64_t k = 0; k < axis_len; ++k) acc = acc + a.flat(base + k * axis_stride);
    out.flat(o) = std::move(acc);
    for (int d = nd - 1; d >= 0; --d) {
      if (d == axis) continue;
      idx[d]++;
      base += strides[d];
      if (idx[d] < a.shape()[d]) break;
      base -= strides[d] * a.shape()[d];
      idx[d] = 0;
    }
  }
  return out;
}

/// Matrix product with the usual 1-D/2-D semantics: (m,k)@(k,n) -> (m,n),
/// (m,k)@(k) -> (m), (k)@(k,n) -> (n), (k)@(k) -> scalar.
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.ndim() == 0 || b.ndim() == 0 || a.ndim() > 2 || b.ndim() > 2)
    fail("BroadcastError", "matmul requires 1-D or 2-D operands, got " +
                               shape_to_string(a.shape()) + " @ " + shape_to_string(b.shape()));
  const std::int64_t m = a.ndim() == 2 ? a.shape()[0] : 1;
  const std::int64_t ka = a.ndim() == 2 ? a.shape()[1] : a.shape()[0];
  const std::int64_t kb = b.ndim() == 2 ? b.shape()[0] : b.shape()[0];
  const std::int64_t n = b.ndim() == 2 ? b.shape()[1] : 1;
  if (ka != kb)
    fail("BroadcastError", "matmul inner dimensions disagree: " + shape_to_string(a.shape()) +
                               " @ " + shape_to_string(b.shape()));
  Shape out_shape;
  if (a.ndim() == 2 && b.ndim() == 2) out_shape = {m, n};
  else if (a.ndim() == 2) out_shape = {m};
  else if (b.ndim() == 2) out_shape = {n};
  TensorT<T> out(out_shape);
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      T acc{};
      for (std::int64_t k = 0; k < ka; ++k) {
        const T& av = a.ndim() == 2 ? a.flat(i * ka + k) : a.flat(k);
        const T& bv = b.ndim() == 2 ? b.flat(k * n + j) : b.flat(k);
        acc = acc + av * bv;
      }
      out.flat(i * n + j) = std::move(acc);
    }
  }
  return out;
}

/// Stack equal-shaped tensors along a new leading axis.
template <typename T>
TensorT<T> stack(const std::vector<TensorT<T>>& parts) {
  if (parts.empty()) fail("ShapeMismatch", "cannot stack zero tensors");
  const Shape& inner = parts.front().shape();
  for (const auto& p : parts)
    if (p.shape() != inner)
      fail("ShapeMismatch", "stacked elements must share a shape, got " +
                                shape_to_string(inner) + " and " + shape_to_string(p.shape()));
  Shape out_shape;
  out_shape.push_back(static_cast<std::int64_t>(parts.size()));
  out_shape.insert(out_shape.end(), inner.begin(), inner.end());
  TensorT<T> out(out_shape);
  std::int64_t pos = 0;
  for (const auto& p : parts)
    for (std::int64_t i = 0; i < p.size(); ++i) out.flat(pos++) = p.flat(i);
  return out;
}

}  // namespace duopt
