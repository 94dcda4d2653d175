#ifndef CPFYM_FYM_HPP
#define CPFYM_FYM_HPP

// F-Yang-Mills functional, its second variation along Killing contractions
// B_V = i_{JV} R, the pointwise estimate quantities and the gap analysis.

#include <random>
#include <string>
#include <vector>

#include "cpfym/bundle.hpp"
#include "cpfym/killing.hpp"
#include "cpfym/quadrature.hpp"

namespace cpfym {

enum class ProfileKind { linear, power, regularized_power, exponential };

const char* profile_kind_name(ProfileKind k);
ProfileKind parse_profile_kind(const std::string& name);

/// F on x >= 0. power: x^a; regularized_power: (x + eps)^a - eps^a;
/// exponential: e^x - 1.
struct Profile {
  ProfileKind kind = ProfileKind::linear;
  double alpha = 1.0;
  double epsilon = 1e-6;

  template <class T>
  T F(const T& x) const {
    switch (kind) {
      case ProfileKind::linear: return x;
      case ProfileKind::power: return pow(x, alpha);
      case ProfileKind::regularized_power: return pow(x + epsilon, alpha) - std::pow(epsilon, alpha);
      case ProfileKind::exponential: return exp(x) - 1.0;
    }
    return x;
  }
  template <class T>
  T F1(const T& x) const {
    switch (kind) {
      case ProfileKind::linear: return T(1.0);
      case ProfileKind::power: return alpha * pow(x, alpha - 1.0);
      case ProfileKind::regularized_power: return alpha * pow(x + epsilon, alpha - 1.0);
      case ProfileKind::exponential: return exp(x);
    }
    return T(1.0);
  }
  template <class T>
  T F2(const T& x) const {
    switch (kind) {
      case ProfileKind::linear: return T(0.0);
      case ProfileKind::power: return alpha * (alpha - 1.0) * pow(x, alpha - 2.0);
      case ProfileKind::regularized_power: return alpha * (alpha - 1.0) * pow(x + epsilon, alpha - 2.0);
      case ProfileKind::exponential: return exp(x);
    }
    return T(0.0);
  }

  /// Throws std::domain_error when x is outside the evaluation domain.
  void check_domain(double x) const;
  std::string describe() const;
};

/// x = |R|^2 / 2 as a scalar field.
Field half_norm_field(const Connection& C);

/// Integral of F(|R|^2 / 2).
double functional(const Connection& C, const Profile& F, const QuadratureRule& Q);

struct ElResidual {
  double direct = 0.0;     // |delta(F' R)|
  double split = 0.0;      // |F' delta R - F'' i_{X0} R|
  double agreement = 0.0;  // |delta(F' R) - (F' delta R - F'' i_{X0} R)|
};
ElResidual el_residual(const Connection& C, const Profile& F, const ChartPoint& p);

enum class VariationPath { by_parts, direct };

/// Pointwise second-variation integrand; by_parts uses F'|d B|^2, direct
/// uses <delta(F' d B), B>.
double second_variation_density(const Connection& C, const Profile& F, const Field& B, const ChartPoint& p,
                                VariationPath path);
double second_variation(const Connection& C, const Profile& F, const Field& B, const QuadratureRule& Q,
                        VariationPath path = VariationPath::by_parts);

/// d^2/dt^2 of the functional along A + tB at t = 0 from central differences
/// of the exact quadratic curvature expansion, Richardson-extrapolated.
double second_variation_fd(const Connection& C, const Profile& F, const Field& B, const QuadratureRule& Q,
                           double step = 1e-2);

/// B_V(X) = R(JV, X).
Field variation_field(const Connection& C, const KillingField& V);

/// Curvature data at one point in the adapted frame there.
struct CurvaturePoint {
  ChartPoint p;
  Frame frame;
  Tensor<double> R;          // R(e_i, e_j)
  Tensor<double> nabla_R;    // (nabla_{e_c} R)(e_i, e_j), slot 0 = c
  Tensor<double> delta_R;    // (delta R)(e_j)
  Tensor<double> nabla_delta_R;
  Tensor<double> riemann;    // R_M in the frame
  double x = 0.0;
};
CurvaturePoint curvature_point(const Connection& C, const ChartPoint& p);

/// J V and its covariant derivatives at a point in a frame.
struct KillingPoint {
  Eigen::VectorXd jv;               // J V
  Eigen::MatrixXd djv;              // column i = D_{e_i} J V
  std::vector<Eigen::MatrixXd> d2;  // d2[i] column j = D^2_{e_i, e_j} J V
  Eigen::VectorXd rough;            // D* D J V
};
KillingPoint killing_point(const KillingField& V, const ChartPoint& p, const Frame& frame);

struct JTermBreakdown {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0, j4 = 0.0;
  /// The terms dropped by using the F-Yang-Mills equation; zero on critical
  /// connections. Direct-path density = j1 + j2 + j3 + j4 + fym_defect.
  double fym_defect = 0.0;
  double p_v = 0.0;  // sum_ij <R(e_i,e_j), R(D_{e_i} J V, e_j)>
};
JTermBreakdown j_terms(const CurvaturePoint& cp, const KillingPoint& kp, const Profile& F);
JTermBreakdown j_terms(const Connection& C, const Profile& F, const KillingField& V, const ChartPoint& p);

struct KillingSums {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0, j4 = 0.0;
  double p_v_squares = 0.0;  // sum_k p_V^2
  double scale = 0.0;        // (|F'| + |F''| |R|^2) (|R|^2 + |nabla R|^2 + |nabla delta R| |R|)
};
KillingSums killing_sums(const CurvaturePoint& cp, const Profile& F, const KillingBasis& basis);

/// Pointwise algebra on curvature samples: frame components (2n x 2n slots)
/// in a J-adapted orthonormal frame (J e_a = e_{n+a}).
struct EstimateQuantities {
  double q1 = 0.0;
  double q2 = 0.0;
  double r_norm2 = 0.0;
  double equality_residual = 0.0;  // min_sigma |R - g(., J.) sigma| / |R|
};
EstimateQuantities estimate_quantities(const Tensor<double>& R, int n);

double sum_j4_closed_form(const Tensor<double>& R, const Profile& F, int n);

/// p_V at the origin with the closed-form D J V table, canonical frame.
double djv_contraction_z0(const Tensor<double>& R, const KillingField& V, int n);

/// Family sums of p_V^2 at the origin next to their closed forms in terms of
/// the contraction Gram matrix.
struct DjvFamilySums {
  double a = 0.0, b = 0.0, c = 0.0;
  double a_expected = 0.0, b_expected = 0.0, c_expected = 0.0;
};
DjvFamilySums djv_family_sums(const Tensor<double>& R, int n);

/// Random frame-component curvature with |R| = 1; entries i.i.d. normal,
/// antisymmetrized in the frame pair and in the fiber.
Tensor<double> random_curvature_sample(int n, int rank, std::mt19937_64& rng);
/// R(X, Y) = g(X, JY) sigma, |R| = 1.
Tensor<double> equality_curvature_sample(int n, int rank, std::mt19937_64& rng);

/// Gap-chain pieces on a frame sample with the model curvature of CP^n.
struct GapPointwise {
  double r_norm = 0.0;
  double ric_term = 0.0;           // <R o (Ric ^ I), R>
  double two_r_term = 0.0;         // <R o 2R, R>
  double expansion_residual = 0.0; // max |R o 2R - (-R(X,Y) - R(JX,JY) - sum_j R(e_j,Je_j) g(JX,Y))|
  double frak_term = 0.0;          // <frak R(R), R>
  double integrand = 0.0;          // (2n - 1 - c_n |R|) |R|^2
};
GapPointwise gap_pointwise(const Tensor<double>& R, int n);

/// 8(n-1)/sqrt(2n(2n-1)).
double gap_frak_constant(int n);
/// (2n-1) sqrt(2n(2n-1)) / (8(n-1)); n = 1 rejected.
double gap_threshold(int n);

/// Root of (2 + 4/n) a (a - 1) + (n + 1) a = 0 other than a = 0.
double power_threshold(int n);
/// Zero crossing of the Killing-summed second variation for equality-case
/// curvature under F = x^a.
double power_crossing_closed_form(int n);

/// F-independent per-node, per-V data: second variation of B_V under any
/// profile is sum_nodes w (F'' a + F' (b + c)).
struct StabilityCache {
  int n = 0;
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::vector<double> x;       // per node
  std::vector<double> q1, q2;  // per node, closed-form pieces
  std::vector<double> a, b, c; // [node * q + k]: <R,dB>^2, |dB|^2, <frak R B, B>
};
StabilityCache build_stability_cache(const Connection& C, const KillingBasis& basis, const QuadratureRule& Q);

struct StabilityReport {
  std::vector<std::string> labels;
  std::vector<double> per_v;
  double sum = 0.0;
  double sum_j4_integral = 0.0;  // integral of F' q1 + F'' q2
  double condition_min = 0.0;    // (2 + 4/n) F'' x + (n + 1) F' over nodes
  double condition_max = 0.0;
  std::string classification;
};
StabilityReport stability_report(const StabilityCache& cache, const Profile& F, double tolerance);

/// Bisection for the zero of the Killing-summed second variation in the
/// power exponent on [lo, hi].
double power_zero_crossing(const StabilityCache& cache, double lo, double hi, double width = 1e-6);

struct GapReport {
  int n = 0;
  double threshold = 0.0;
  double sup_norm = 0.0;
  double lap_f_residual = 0.0;  // max over sample points, relative
  double ric_residual = 0.0;    // max |<R o Ric^I, R> - (2n+2)|R|^2| over nodes
  double expansion_residual = 0.0;
  double min_two_r_ratio = 0.0;  // min <R o 2R, R> / |R|^2
  double min_frak_margin = 0.0;  // min <frak R(R), R> + c_n |R|^3
  double min_integrand = 0.0;
  double balance = 0.0;          // integral of F' <R o (Ric^I + 2R) + frak R(R), R>
  bool f2_nonnegative = true;
};
/// lap F residual at `samples`; the remaining fields over the rule's nodes.
GapReport gap_report(const Connection& C, const Profile& F, const QuadratureRule& Q,
                     const std::vector<ChartPoint>& samples);

/// Delta F(x) - (-F''|X0|^2 - F'|nabla R|^2 + F'<nabla* nabla R, R>), with the
/// magnitude of the largest term.
struct LapFCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
};
LapFCheck lap_f_check(const Connection& C, const Profile& F, const ChartPoint& p);

}  // namespace cpfym

#endif  // CPFYM_FYM_HPP
