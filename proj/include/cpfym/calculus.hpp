#ifndef CPFYM_CALCULUS_HPP
#define CPFYM_CALCULUS_HPP

// Differential operators on analytic tensor fields over the chart.
//
// A field value is a Tensor whose slots range over real coordinates and whose
// blocks are r x r matrices (r = 1 for ordinary tensors). An optional
// connection potential A (one slot, block r) acts on blocks by commutator.

#include <Eigen/Dense>

#include "cpfym/geometry.hpp"

namespace cpfym {

/// Total covariant derivative. The derivative direction becomes slot 0.
/// Lower slots are corrected with -Gamma, upper slots (bits in `upper`)
/// with +Gamma; blocks get [A_c, .] when `potential` is valid.
Field covariant_derivative(const Field& phi, const Field& potential = Field());

/// Exterior covariant derivative of a form (all slots lower and
/// antisymmetric): (d phi)_{a0..ap} = sum_i (-1)^i D_{a_i} phi_{..^a_i..}.
Field exterior_derivative(const Field& phi, const Field& potential = Field());

/// delta phi = -g^{bc} (nabla phi)_{b c ...}.
Field codifferential(const Field& phi, const Field& potential = Field());

/// Rough Laplacian -g^{bc} (nabla nabla phi)_{b c ...}.
Field rough_laplacian(const Field& phi, const Field& potential = Field());

/// Hodge-type Laplacian d delta + delta d of a form field.
Field hodge_laplacian(const Field& phi, const Field& potential = Field());

/// Sum of two fields of equal shape.
Field add_fields(const Field& a, const Field& b, double scale_b = 1.0);

/// Components in an orthonormal frame: lower slots contract with the frame
/// vectors, upper slots with the dual coframe.
Tensor<double> to_frame(const Tensor<double>& t, const Frame& frame);
/// Inverse of to_frame.
Tensor<double> from_frame(const Tensor<double>& t, const Frame& frame);

/// Frame-component tensors: sum over every slot of block inner products.
double full_contraction(const Tensor<double>& a, const Tensor<double>& b);

/// Generic-level helpers shared by operator implementations.
namespace detail {

template <class T>
T block_dot(const Tensor<T>& a, std::size_t ka, const Tensor<T>& b, std::size_t kb) {
  const std::size_t bs = a.block_size();
  const T* pa = a.data.data() + ka * bs;
  const T* pb = b.data.data() + kb * bs;
  T acc(0.0);
  for (std::size_t i = 0; i < bs; ++i) acc += pa[i] * pb[i];
  return acc;
}

inline std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

/// Contract slots 0 and 1 of `t` with the inverse metric gi (two upper slots).
template <class T>
Tensor<T> trace01(const Tensor<T>& t, const Tensor<T>& gi) {
  const int m = t.dim;
  Tensor<T> out(m, t.slots - 2, t.block, t.upper >> 2);
  const std::size_t inner = out.data.size();
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < m; ++c) {
      const T& w = gi(b, c);
      const std::size_t base = (static_cast<std::size_t>(b) * m + c) * inner;
      for (std::size_t k = 0; k < inner; ++k) out.data[k] += w * t.data[base + k];
    }
  return out;
}

/// Scalar <phi, psi> of two p-forms in coordinate components,
/// (1/p!) g^{a1 b1}..g^{ap bp} tr(phi_a^T psi_b).
template <class T>
T form_inner_coord(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& gi) {
  const int m = a.dim;
  if (a.slots == 0) return block_dot(a, 0, b, 0);
  if (a.slots == 1) {
    T acc(0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) acc += gi(i, j) * block_dot(a, i, b, j);
    return acc;
  }
  if (a.slots == 2) {
    T acc(0.0);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        for (int k = 0; k < m; ++k)
          for (int l = k + 1; l < m; ++l) {
            T w = gi(i, k) * gi(j, l) - gi(i, l) * gi(j, k);
            acc += w * block_dot(a, static_cast<std::size_t>(i * m + j), b, static_cast<std::size_t>(k * m + l));
          }
      }
    return acc;
  }
  throw std::invalid_argument("form inner product: degree > 2 not supported in coordinates");
}

}  // namespace detail

}  // namespace cpfym

#endif  // CPFYM_CALCULUS_HPP
