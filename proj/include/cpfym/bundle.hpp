#ifndef CPFYM_BUNDLE_HPP
#define CPFYM_BUNDLE_HPP

// Forms with values in the adjoint bundle (so(r) fibers), connections
// d + A on the chart, and their curvature operators.

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpfym/calculus.hpp"

namespace cpfym {

using AlgValue = Eigen::MatrixXd;  // r x r antisymmetric

/// A form at a point: `comps` holds coordinate components (slots = degree,
/// block = r) unless stated otherwise.
struct AlgForm {
  ChartPoint base;
  Tensor<double> comps;
  int degree() const { return comps.slots; }
  int rank() const { return comps.block; }
};

double alg_inner(const AlgValue& a, const AlgValue& b);
AlgValue bracket(const AlgValue& a, const AlgValue& b);

/// Rank-r rotation generator in the (0, 1) plane: [[0, -1], [1, 0]] padded.
AlgValue sigma0(int r);
/// Rotation generators of the (1,2), (2,0) and (0,1) planes for r >= 3;
/// for r = 2 every entry is sigma0.
std::vector<AlgValue> test_generators(int r);

AlgValue random_so(int r, std::mt19937_64& rng, double scale = 1.0);

/// (1/p!) sum over frame-index tuples of alg_inner of the evaluated slots.
double form_inner(const AlgForm& a, const AlgForm& b, const Frame& frame);
double form_norm(const AlgForm& a, const Frame& frame);

/// Polynomial bump prod_a (1 - u_a^2)^power, u_a = (x_a - c_a)/h, times
/// so(r) coefficients that are affine in u. Components are antisymmetric.
struct BumpForm {
  int degree = 1;
  int rank = 2;
  ChartPoint center;
  double half_width = 0.5;
  int power = 5;
  std::vector<AlgValue> constant;             // per flat component index
  std::vector<std::vector<AlgValue>> linear;  // [component][coordinate]
};

BumpForm random_bump(int n, int rank, int degree, std::mt19937_64& rng, const ChartPoint& center, double half_width,
                     double scale = 1.0);
Field bump_field(const BumpForm& bump);

enum class ConnectionKind { flat, kahler_abelian, nonabelian_test, perturbed, custom };

const char* connection_kind_name(ConnectionKind k);
ConnectionKind parse_connection_kind(const std::string& name);

struct ConnectionSpec {
  ConnectionKind kind = ConnectionKind::flat;
  int n = 1;
  int rank = 2;
  double strength = 0.0;   // k
  double amplitude = 0.0;  // epsilon
  ConnectionKind base_kind = ConnectionKind::kahler_abelian;  // for perturbed
  std::optional<BumpForm> bump;                                // for perturbed
  Field custom_potential;                                      // for custom
};

/// A connection d + A with its curvature as analytic fields.
class Connection {
 public:
  explicit Connection(const ConnectionSpec& spec);

  const ConnectionSpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  int rank() const { return spec_.rank; }
  /// Potential A (one lower slot, block r); depth 3.
  const Field& potential() const { return potential_; }
  /// R = dA + [A, A] componentwise: R_ab = d_a A_b - d_b A_a + [A_a, A_b]; depth 2.
  const Field& curvature() const { return curvature_; }

  /// Same base data with potential A + t B.
  Connection shifted(const Field& B, double t) const;

 private:
  ConnectionSpec spec_;
  Field potential_;
  Field curvature_;
};

/// Potential theta = sum (x_j dy_j - y_j dx_j)/(1+|z|^2) with d theta = omega.
Field kahler_theta();
/// omega(X, Y) = g(JX, Y) as a two-form field.
Field kahler_form();

/// Curvature field of an arbitrary potential.
Field curvature_of(const Field& potential);

AlgForm curvature(const Connection& C, const ChartPoint& p);
AlgForm evaluate(const Field& phi, const ChartPoint& p);

AlgForm cov_deriv_form(const Connection& C, const Field& phi, const ChartPoint& p, const Tangent& X);
AlgForm d_nabla(const Connection& C, const Field& phi, const ChartPoint& p);
AlgForm delta_nabla(const Connection& C, const Field& phi, const ChartPoint& p);
AlgForm rough_laplacian(const Connection& C, const Field& phi, const ChartPoint& p);
AlgForm hodge_laplacian(const Connection& C, const Field& phi, const ChartPoint& p);

/// Frame-component algebra (orthonormal frame, g = identity). `rpt` is a
/// two-form with block r.
Tensor<double> frak_r_frame(const Tensor<double>& rpt, const Tensor<double>& phi);
/// Coordinate-component version at a point (converted through the adapted frame).
AlgForm frak_R(const AlgForm& rpt, const AlgForm& phi);

/// R(X,Y) phi = [R(X,Y), phi(..)] - sum_i phi(.., R_M(X,Y) X_i, ..).
AlgForm curvature_action(const AlgForm& rpt, const AlgForm& phi, const Tangent& X, const Tangent& Y);

/// phi o Ric (degree 1) or phi o (Ric ^ I + 2R) (degree 2), in the frame of `frame`.
Tensor<double> ricci_correction_frame(const Tensor<double>& phi, const Tensor<double>& riemann_frame);

struct BochnerBreakdown {
  double residual = 0.0;  // |Delta phi - (rough + frak R + correction)|
  double scale = 0.0;     // |Delta phi|
};

BochnerBreakdown bochner_residual(const Connection& C, const Field& phi, const ChartPoint& p);

/// |R^{A+tB} - (R + t d B + t^2 [B_a, B_b])| (max abs component).
double t_expansion_check(const Connection& C, const Field& B, const ChartPoint& p, double t);

/// Field [B ^ B]/2 with components [B_a, B_b].
Field half_wedge_bracket(const Field& B);

}  // namespace cpfym

#endif  // CPFYM_BUNDLE_HPP
