#ifndef CPFYM_KILLING_HPP
#define CPFYM_KILLING_HPP

// Killing fields of the Fubini-Study metric induced by su(n+1).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpfym/geometry.hpp"

namespace cpfym {

/// (n+1) x (n+1) anti-Hermitian traceless matrix, rows/columns indexed 0..n.
using SuMatrix = Eigen::MatrixXcd;

struct KillingField {
  SuMatrix generator;
  std::string label;
  char family = '?';  // 'A', 'B', 'C' for basis elements
  int k = -1;         // A_kl, B_kl indices; C_t stores t in k
  int l = -1;
};

struct KillingBasis {
  int n = 0;
  std::vector<KillingField> elements;  // A_kl (k<l), then B_kl, then C_t
};

struct IsotropyDecomposition {
  ChartPoint point;
  std::vector<KillingField> f_part;  // vanish at the point
  std::vector<KillingField> p_part;  // covariantly constant at the point
  Eigen::MatrixXd f_coefficients;    // columns: coordinates in the input basis
  Eigen::MatrixXd p_coefficients;
  double rank_gap = 0.0;  // smallest kept singular value over largest dropped one
};

bool is_su(const SuMatrix& A, double tol = 1e-12);

KillingBasis su_basis(int n);

/// <V_A, V_B> = Re tr(conj(A)^T B) for every pair.
Eigen::MatrixXd killing_gram(const KillingBasis& basis);

/// Fields built from a generator. The vector field has one upper slot with
/// components (Re v, Im v) for V = v^j Z_j + conj; J V has holomorphic part i v.
Field killing_vector_field(const SuMatrix& A);
Field j_killing_field(const SuMatrix& A);

Tangent killing_eval(const KillingField& V, const ChartPoint& p);
Tangent j_killing_eval(const KillingField& V, const ChartPoint& p);

/// D_X V at p.
Tangent killing_cov_deriv(const KillingField& V, const ChartPoint& p, const Tangent& X);
/// D_X (J V) at p.
Tangent j_killing_cov_deriv(const KillingField& V, const ChartPoint& p, const Tangent& X);

/// g(D_X V, Y) + g(X, D_Y V).
double killing_equation_residual(const KillingField& V, const ChartPoint& p, const Tangent& X, const Tangent& Y);

/// |D^2_{X,Y} V - R(X,V) Y| with D^2_{X,Y}V = D_X D_Y V - D_{D_X Y} V, measured in g.
double killing_second_identity_residual(const KillingField& V, const ChartPoint& p, const Tangent& X, const Tangent& Y);

/// |D*D V - (n+1) V| in g.
double killing_rough_laplacian_residual(const KillingField& V, const ChartPoint& p);

/// Linear recombination sum_k c_k V_k (coefficients index the basis).
KillingField combine(const KillingBasis& basis, const Eigen::VectorXd& coefficients, const std::string& label);

/// Basis rotated by an orthogonal matrix Q: element i = sum_k Q(k, i) V_k.
KillingBasis recombine(const KillingBasis& basis, const Eigen::MatrixXd& Q);

IsotropyDecomposition isotropy_decompose(const KillingBasis& basis, const ChartPoint& p);

/// Largest principal angle (radians) between the spans of two sets of
/// generators, measured in the Killing inner product.
double subspace_angle(const std::vector<KillingField>& a, const std::vector<KillingField>& b);

/// Frame components of D_{e_i} J V at the origin in the canonical frame, as
/// given by the closed-form table; column i is D_{e_i} J V. Only defined for
/// the families A_kl, B_kl (0 <= k < l) and C_t; k = 0 gives zero.
Eigen::MatrixXd djv_table_z0(const KillingField& V, int n);

}  // namespace cpfym

#endif  // CPFYM_KILLING_HPP
