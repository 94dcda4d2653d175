#ifndef CPFYM_TENSOR_HPP
#define CPFYM_TENSOR_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpfym/dual.hpp"

namespace cpfym {

/// Largest supported complex dimension of the chart.
inline constexpr int kMaxComplexDim = 4;
inline constexpr int kMaxRealDim = 2 * kMaxComplexDim;

/// Point of the chart U_0 in real coordinates (x_1..x_n, y_1..y_n).
template <class T>
struct Point {
  int dim = 0;
  std::array<T, kMaxRealDim> x{};

  T& operator[](int a) { return x[static_cast<std::size_t>(a)]; }
  const T& operator[](int a) const { return x[static_cast<std::size_t>(a)]; }
  int complex_dim() const { return dim / 2; }
};

/// Point whose scalars carry a unit derivative along coordinate `a`.
template <class T>
Point<Dual<T>> seed(const Point<T>& p, int a) {
  Point<Dual<T>> q;
  q.dim = p.dim;
  for (int i = 0; i < p.dim; ++i) q[i] = Dual<T>(p[i], T(i == a ? 1.0 : 0.0));
  return q;
}

template <class T>
Point<Dual<T>> seed_direction(const Point<T>& p, const double* dir) {
  Point<Dual<T>> q;
  q.dim = p.dim;
  for (int i = 0; i < p.dim; ++i) q[i] = Dual<T>(p[i], T(dir[i]));
  return q;
}

template <class T>
Point<T> lift(const Point<double>& p) {
  Point<T> q;
  q.dim = p.dim;
  for (int i = 0; i < p.dim; ++i) q[i] = T(p[i]);
  return q;
}

inline Point<double> make_point(std::initializer_list<double> coords) {
  Point<double> p;
  p.dim = static_cast<int>(coords.size());
  if (p.dim > kMaxRealDim || p.dim % 2 != 0) throw std::invalid_argument("point: bad real dimension");
  int i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

inline Point<double> origin(int n) {
  Point<double> p;
  p.dim = 2 * n;
  return p;
}

/// Dense tensor of chart components. Every tangent slot ranges over the 2n
/// real coordinates; each component is a `block` x `block` row-major matrix
/// (block = 1 for scalar-valued tensors). Bit k of `upper` marks slot k as
/// contravariant.
template <class T>
struct Tensor {
  int dim = 0;
  int slots = 0;
  int block = 1;
  std::uint32_t upper = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int dim_, int slots_, int block_ = 1, std::uint32_t upper_ = 0)
      : dim(dim_), slots(slots_), block(block_), upper(upper_) {
    std::size_t sz = static_cast<std::size_t>(block_ * block_);
    for (int k = 0; k < slots_; ++k) sz *= static_cast<std::size_t>(dim_);
    data.assign(sz, T(0.0));
  }

  std::size_t block_size() const { return static_cast<std::size_t>(block * block); }
  std::size_t components() const { return data.size() / block_size(); }

  /// Offset of the block addressed by a flat slot index.
  std::size_t offset(std::size_t flat) const { return flat * block_size(); }

  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t f = 0;
    ((f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  /// Scalar entry (i, j) of the block at slot indices idx.
  template <class... I>
  T& at(int i, int j, I... idx) {
    return data[offset(flat(idx...)) + static_cast<std::size_t>(i * block + j)];
  }
  template <class... I>
  const T& at(int i, int j, I... idx) const {
    return data[offset(flat(idx...)) + static_cast<std::size_t>(i * block + j)];
  }

  /// Scalar component (block == 1).
  template <class... I>
  T& operator()(I... idx) { return data[offset(flat(idx...))]; }
  template <class... I>
  const T& operator()(I... idx) const { return data[offset(flat(idx...))]; }

  T* block_ptr(std::size_t flat_index) { return data.data() + offset(flat_index); }
  const T* block_ptr(std::size_t flat_index) const { return data.data() + offset(flat_index); }
};

template <class T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.dim == b.dim && a.slots == b.slots && a.block == b.block;
}

/// Component-wise derivative part of a tensor of duals.
template <class T>
Tensor<T> tangent(const Tensor<Dual<T>>& t) {
  Tensor<T> out;
  out.dim = t.dim;
  out.slots = t.slots;
  out.block = t.block;
  out.upper = t.upper;
  out.data.resize(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) out.data[i] = t.data[i].d;
  return out;
}

template <class T>
Tensor<T> primal(const Tensor<Dual<T>>& t) {
  Tensor<T> out;
  out.dim = t.dim;
  out.slots = t.slots;
  out.block = t.block;
  out.upper = t.upper;
  out.data.resize(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) out.data[i] = t.data[i].v;
  return out;
}

/// out += [a, b] for row-major square blocks of size r.
template <class T>
void add_commutator(T* out, const T* a, const T* b, int r, double scale = 1.0) {
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      T acc(0.0);
      for (int k = 0; k < r; ++k) acc += a[i * r + k] * b[k * r + j] - b[i * r + k] * a[k * r + j];
      out[i * r + j] += scale * acc;
    }
}

/// Trace inner product tr(a^T b) of row-major square blocks.
template <class T>
T block_inner(const T* a, const T* b, int r) {
  T acc(0.0);
  for (int k = 0; k < r * r; ++k) acc += a[k] * b[k];
  return acc;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<RowMatrix> block_map(Tensor<double>& t, std::size_t flat_index) {
  return {t.block_ptr(flat_index), t.block, t.block};
}
inline Eigen::Map<const RowMatrix> block_map(const Tensor<double>& t, std::size_t flat_index) {
  return {t.block_ptr(flat_index), t.block, t.block};
}

/// Largest absolute entry difference; shapes must agree.
double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b);
double max_abs(const Tensor<double>& a);

}  // namespace cpfym

#endif  // CPFYM_TENSOR_HPP
