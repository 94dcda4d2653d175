#ifndef CPFYM_GEOMETRY_HPP
#define CPFYM_GEOMETRY_HPP

// Fubini-Study geometry of CP^n on the affine chart U_0 = {[1:z_1:...:z_n]}.
//
// Real coordinates are ordered (x_1..x_n, y_1..y_n) with z_j = x_j + i y_j.
// The real metric extends the Hermitian matrix by g(Z_i, conj Z_j) = g_{i bar j}
// and g(Z_i, Z_j) = 0, so g(d/dx_j, d/dx_j) = 2 at the origin, the volume of
// CP^n is (2 pi)^n / n! and the holomorphic sectional curvature is 2.
// Curvature convention: R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z.

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cpfym/field.hpp"

namespace cpfym {

using ChartPoint = Point<double>;
using Tangent = Eigen::VectorXd;

/// Chart point from complex coordinates z_1..z_n.
ChartPoint chart_point(const std::vector<std::complex<double>>& z);
std::vector<std::complex<double>> complex_coords(const ChartPoint& p);

struct MetricAtPoint {
  int n = 0;
  Eigen::MatrixXcd hermitian;   // g_{i bar j}
  Eigen::MatrixXd real_metric;  // 2n x 2n
  Eigen::MatrixXd inverse;      // 2n x 2n
  Tensor<double> christoffel;   // christoffel(c, a, b) = Gamma^c_{ab}
};

/// Fields describing the Fubini-Study metric for one dimension n. Instances
/// are shared; use `geometry(n)`.
class Geometry {
 public:
  explicit Geometry(int n);

  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }

  /// Real metric g_{ab}; depth 3.
  const Field& metric() const { return metric_; }
  /// Inverse real metric g^{ab}; depth 3.
  const Field& inverse_metric() const { return inverse_; }
  /// Levi-Civita symbols, component (c, a, b) = Gamma^c_{ab}; depth 2.
  const Field& christoffel() const { return christoffel_; }
  /// Riemann tensor, component (a, b, c, d) = dx^d(R(d_a, d_b) d_c); depth 1.
  const Field& riemann() const { return riemann_; }

 private:
  int n_;
  Field metric_;
  Field inverse_;
  Field christoffel_;
  Field riemann_;
};

/// Shared geometry for dimension n (1 <= n <= kMaxComplexDim).
const Geometry& geometry(int n);

MetricAtPoint fs_metric(const ChartPoint& p);

Eigen::MatrixXd real_metric_at(const ChartPoint& p);
double metric_inner(const ChartPoint& p, const Tangent& X, const Tangent& Y);

/// Almost complex structure: d/dx_j -> d/dy_j, d/dy_j -> -d/dx_j.
Tangent j_apply(const ChartPoint& p, const Tangent& X);
/// Matrix of J in coordinate components (independent of the point).
Eigen::MatrixXd j_matrix(int n);

/// Riemann tensor at p as a (2n)^4 array, see Geometry::riemann.
Tensor<double> riemann_at(const ChartPoint& p);
Tangent riemann(const ChartPoint& p, const Tangent& X, const Tangent& Y, const Tangent& Z);
/// sum_j R(X, e_j) e_j over a g-orthonormal frame.
Tangent ricci(const ChartPoint& p, const Tangent& X);
/// sum_j R(JX, e_j) J e_j over a g-orthonormal frame.
Tangent curvature_identity_iii(const ChartPoint& p, const Tangent& X);

/// Orthonormal frame stored as columns in coordinate components.
struct Frame {
  ChartPoint base;
  Eigen::MatrixXd vectors;  // 2n x 2n, column i = e_i
  Eigen::MatrixXd inverse;  // coordinate components -> frame components
};

/// The frame e_a = (Z_a + conj Z_a)/sqrt2, e_{n+a} = i(Z_a - conj Z_a)/sqrt2 at z = 0.
Frame canonical_frame(int n);
/// g-orthonormal frame at p with J e_a = e_{n+a}, from unitary Gram-Schmidt
/// of the coordinate vectors Z_1..Z_n. Reduces to canonical_frame at z = 0.
Frame adapted_frame(const ChartPoint& p);
/// Frame whose vectors are `frame.vectors * rotation` for an orthogonal rotation.
Frame rotate_frame(const Frame& frame, const Eigen::MatrixXd& rotation);

/// J in frame components of a J-adapted frame: J e_a = e_{n+a}, J e_{n+a} = -e_a.
Eigen::MatrixXd standard_j(int n);

/// Frame components of the Riemann tensor: R(e_i,e_j)e_k = sum_l out(i,j,k,l) e_l.
Tensor<double> riemann_in_frame(const ChartPoint& p, const Frame& frame);

/// Riemann tensor of constant holomorphic sectional curvature 2 written in a
/// J-adapted orthonormal frame; closed form used as a cross-check.
Tensor<double> model_riemann_frame(int n);

/// The six closed-form families of R(e_i, e_j) e_k at z = 0 in the canonical
/// frame, written out entry by entry (antisymmetry in the first pair fills
/// the remaining index patterns).
Tensor<double> curvature_table_z0(int n);

/// Christoffel symbols from the holomorphic closed form
/// Gamma^k_{ij} = -(conj z_i delta_jk + conj z_j delta_ik)/(1+|z|^2), converted to real components.
Tensor<double> kahler_christoffel(const ChartPoint& p);

/// Random chart point with i.i.d. normal coordinates of the given scale.
ChartPoint random_point(int n, std::mt19937_64& rng, double scale = 1.0);
Tangent random_tangent(int n, std::mt19937_64& rng);
/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix).
Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64& rng);

}  // namespace cpfym

#endif  // CPFYM_GEOMETRY_HPP
