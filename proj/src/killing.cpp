#include "cpfym/killing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpfym/calculus.hpp"

namespace cpfym {
namespace {

template <class T>
struct Cx {
  T re, im;
};

template <class T>
Cx<T> cmul(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
Cx<T> cscale(const std::complex<double>& c, const Cx<T>& b) {
  return {c.real() * b.re - c.imag() * b.im, c.real() * b.im + c.imag() * b.re};
}

// v_j = a_j0 + a_ji z_i - z_j (a_00 + a_0i z_i)
template <class T>
std::vector<Cx<T>> holomorphic_components(const SuMatrix& A, const Point<T>& p) {
  const int n = p.dim / 2;
  std::vector<Cx<T>> z(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) z[j] = {p[j], p[n + j]};
  Cx<T> w0{T(A(0, 0).real()), T(A(0, 0).imag())};
  for (int i = 0; i < n; ++i) {
    Cx<T> t = cscale(A(0, i + 1), z[i]);
    w0.re += t.re;
    w0.im += t.im;
  }
  std::vector<Cx<T>> v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Cx<T> wj{T(A(j + 1, 0).real()), T(A(j + 1, 0).imag())};
    for (int i = 0; i < n; ++i) {
      Cx<T> t = cscale(A(j + 1, i + 1), z[i]);
      wj.re += t.re;
      wj.im += t.im;
    }
    Cx<T> zw = cmul(z[j], w0);
    v[j] = {wj.re - zw.re, wj.im - zw.im};
  }
  return v;
}

void check_generator(const SuMatrix& A) {
  if (A.rows() != A.cols() || A.rows() < 2 || A.rows() > kMaxComplexDim + 1)
    throw std::invalid_argument("killing: generator must be square of size n+1 with 1 <= n <= " + std::to_string(kMaxComplexDim));
}

Tangent apply_slot(const Tensor<double>& t, const Tangent& X) {
  // t(c, k): returns sum_c X^c t(c, .)
  const int m = t.dim;
  Tangent out = Tangent::Zero(m);
  for (int c = 0; c < m; ++c)
    for (int k = 0; k < m; ++k) out[k] += X[c] * t(c, k);
  return out;
}

double g_norm(const ChartPoint& p, const Tangent& v) { return std::sqrt(std::max(0.0, metric_inner(p, v, v))); }

Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, int expected, double& gap) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const int q = static_cast<int>(M.cols());
  Eigen::VectorXd sv = Eigen::VectorXd::Zero(q);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  const int keep = q - expected;  // number of nonzero singular values
  double smallest_kept = keep > 0 ? sv[keep - 1] : 1.0;
  double largest_dropped = expected > 0 ? sv[keep] : 0.0;
  gap = largest_dropped > 0 ? smallest_kept / largest_dropped : INFINITY;
  if (keep > 0 && !(smallest_kept > 1e-8 * sv[0]) ) throw std::runtime_error("isotropy decomposition: rank deficiency beyond tolerance");
  if (largest_dropped > 1e-8 * std::max(1.0, sv[0])) throw std::runtime_error("isotropy decomposition: null space larger than expected tolerance");
  return svd.matrixV().rightCols(expected);
}

}  // namespace

bool is_su(const SuMatrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  return (A.adjoint() + A).norm() <= tol && std::abs(A.trace()) <= tol;
}

KillingBasis su_basis(int n) {
  if (n < 1 || n > kMaxComplexDim) throw std::invalid_argument("su_basis: dimension out of range");
  KillingBasis basis;
  basis.n = n;
  const int N = n + 1;
  const double r2 = 1.0 / std::sqrt(2.0);
  const std::complex<double> I(0.0, 1.0);
  for (int k = 0; k < N; ++k)
    for (int l = k + 1; l < N; ++l) {
      SuMatrix A = SuMatrix::Zero(N, N);
      A(k, l) = r2;
      A(l, k) = -r2;
      basis.elements.push_back({A, "A" + std::to_string(k) + std::to_string(l), 'A', k, l});
    }
  for (int k = 0; k < N; ++k)
    for (int l = k + 1; l < N; ++l) {
      SuMatrix B = SuMatrix::Zero(N, N);
      B(k, l) = I * r2;
      B(l, k) = I * r2;
      basis.elements.push_back({B, "B" + std::to_string(k) + std::to_string(l), 'B', k, l});
    }
  for (int t = 1; t <= n; ++t) {
    SuMatrix C = SuMatrix::Zero(N, N);
    const double c = 1.0 / std::sqrt(static_cast<double>(t) * (t + 1));
    for (int s = 0; s < t; ++s) C(s, s) = I * c;
    C(t, t) = -I * (c * t);
    basis.elements.push_back({C, "C" + std::to_string(t), 'C', t, -1});
  }
  return basis;
}

Eigen::MatrixXd killing_gram(const KillingBasis& basis) {
  const int q = static_cast<int>(basis.elements.size());
  Eigen::MatrixXd G(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      G(i, j) = (basis.elements[i].generator.adjoint() * basis.elements[j].generator).trace().real();
  return G;
}

Field killing_vector_field(const SuMatrix& A) {
  check_generator(A);
  return Field::make(kMaxFieldLevel, [A](const auto& p) {
    using T = std::decay_t<decltype(p[0])>;
    const int n = p.dim / 2;
    if (A.rows() != n + 1) throw std::invalid_argument("killing: generator size does not match the chart dimension");
    auto v = holomorphic_components(A, p);
    Tensor<T> out(p.dim, 1, 1, 0b1);
    for (int j = 0; j < n; ++j) {
      out(j) = v[j].re;
      out(n + j) = v[j].im;
    }
    return out;
  });
}

Field j_killing_field(const SuMatrix& A) {
  check_generator(A);
  return Field::make(kMaxFieldLevel, [A](const auto& p) {
    using T = std::decay_t<decltype(p[0])>;
    const int n = p.dim / 2;
    if (A.rows() != n + 1) throw std::invalid_argument("killing: generator size does not match the chart dimension");
    auto v = holomorphic_components(A, p);
    Tensor<T> out(p.dim, 1, 1, 0b1);
    for (int j = 0; j < n; ++j) {
      out(j) = -v[j].im;
      out(n + j) = v[j].re;
    }
    return out;
  });
}

Tangent killing_eval(const KillingField& V, const ChartPoint& p) {
  Tensor<double> t = killing_vector_field(V.generator)(p);
  return Eigen::Map<const Tangent>(t.data.data(), p.dim);
}

Tangent j_killing_eval(const KillingField& V, const ChartPoint& p) {
  Tensor<double> t = j_killing_field(V.generator)(p);
  return Eigen::Map<const Tangent>(t.data.data(), p.dim);
}

Tangent killing_cov_deriv(const KillingField& V, const ChartPoint& p, const Tangent& X) {
  return apply_slot(covariant_derivative(killing_vector_field(V.generator))(p), X);
}

Tangent j_killing_cov_deriv(const KillingField& V, const ChartPoint& p, const Tangent& X) {
  return apply_slot(covariant_derivative(j_killing_field(V.generator))(p), X);
}

double killing_equation_residual(const KillingField& V, const ChartPoint& p, const Tangent& X, const Tangent& Y) {
  Tensor<double> dv = covariant_derivative(killing_vector_field(V.generator))(p);
  return metric_inner(p, apply_slot(dv, X), Y) + metric_inner(p, X, apply_slot(dv, Y));
}

double killing_second_identity_residual(const KillingField& V, const ChartPoint& p, const Tangent& X, const Tangent& Y) {
  Field vf = killing_vector_field(V.generator);
  Tensor<double> d2 = covariant_derivative(covariant_derivative(vf))(p);
  const int m = p.dim;
  Tangent lhs = Tangent::Zero(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double w = X[a] * Y[b];
      if (w == 0.0) continue;
      for (int k = 0; k < m; ++k) lhs[k] += w * d2(a, b, k);
    }
  Tangent rhs = riemann(p, X, killing_eval(V, p), Y);
  return g_norm(p, lhs - rhs);
}

double killing_rough_laplacian_residual(const KillingField& V, const ChartPoint& p) {
  Tensor<double> lap = rough_laplacian(killing_vector_field(V.generator))(p);
  Tangent l = Eigen::Map<const Tangent>(lap.data.data(), p.dim);
  return g_norm(p, l - (p.complex_dim() + 1.0) * killing_eval(V, p));
}

KillingField combine(const KillingBasis& basis, const Eigen::VectorXd& coefficients, const std::string& label) {
  if (coefficients.size() != static_cast<Eigen::Index>(basis.elements.size())) throw std::invalid_argument("combine: coefficient count mismatch");
  SuMatrix A = SuMatrix::Zero(basis.n + 1, basis.n + 1);
  for (std::size_t k = 0; k < basis.elements.size(); ++k) A += coefficients[static_cast<Eigen::Index>(k)] * basis.elements[k].generator;
  KillingField V;
  V.generator = A;
  V.label = label;
  return V;
}

KillingBasis recombine(const KillingBasis& basis, const Eigen::MatrixXd& Q) {
  KillingBasis out;
  out.n = basis.n;
  for (Eigen::Index i = 0; i < Q.cols(); ++i) out.elements.push_back(combine(basis, Q.col(i), "R" + std::to_string(i)));
  return out;
}

IsotropyDecomposition isotropy_decompose(const KillingBasis& basis, const ChartPoint& p) {
  const int n = basis.n;
  if (p.complex_dim() != n) throw std::invalid_argument("isotropy_decompose: point dimension mismatch");
  const int m = 2 * n;
  const int q = static_cast<int>(basis.elements.size());
  Frame frame = adapted_frame(p);
  Eigen::MatrixXd E(m, q), D(m * m, q);
  for (int k = 0; k < q; ++k) {
    Field vf = killing_vector_field(basis.elements[k].generator);
    Tensor<double> dv = covariant_derivative(vf)(p);
    Tangent v = killing_eval(basis.elements[k], p);
    E.col(k) = frame.inverse * v;
    Tensor<double> dvf = to_frame(dv, frame);
    for (int i = 0; i < m * m; ++i) D(i, k) = dvf.data[static_cast<std::size_t>(i)];
  }
  IsotropyDecomposition out;
  out.point = p;
  double gap_f = 0.0, gap_p = 0.0;
  out.f_coefficients = null_space(E, q - m, gap_f);
  out.p_coefficients = null_space(D, m, gap_p);
  out.rank_gap = std::min(gap_f, gap_p);
  for (int i = 0; i < out.f_coefficients.cols(); ++i) out.f_part.push_back(combine(basis, out.f_coefficients.col(i), "f" + std::to_string(i)));
  for (int i = 0; i < out.p_coefficients.cols(); ++i) out.p_part.push_back(combine(basis, out.p_coefficients.col(i), "p" + std::to_string(i)));
  return out;
}

double subspace_angle(const std::vector<KillingField>& a, const std::vector<KillingField>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("subspace_angle: empty span");
  const Eigen::Index N = a.front().generator.rows();
  // real coordinates of generators: (Re, Im) entries; Re tr(A^* B) is the Euclidean product
  auto flatten = [N](const std::vector<KillingField>& fs) {
    Eigen::MatrixXd M(2 * N * N, static_cast<Eigen::Index>(fs.size()));
    for (std::size_t k = 0; k < fs.size(); ++k) {
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) {
          M(r++, static_cast<Eigen::Index>(k)) = fs[k].generator(i, j).real();
          M(r++, static_cast<Eigen::Index>(k)) = fs[k].generator(i, j).imag();
        }
    }
    return Eigen::MatrixXd(Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  };
  Eigen::MatrixXd Qa = flatten(a), Qb = flatten(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qa.transpose() * Qb);
  double smin = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smin, -1.0, 1.0));
}

Eigen::MatrixXd djv_table_z0(const KillingField& V, int n) {
  const int m = 2 * n;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  const double r2 = 1.0 / std::sqrt(2.0);
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  if (V.family == 'A' || V.family == 'B') {
    if (V.k == 0) return out;
    const int k = V.k - 1, l = V.l - 1;
    for (int a = 0; a < n; ++a) {
      if (V.family == 'A') {
        out(n + k, a) += r2 * d(a, l);
        out(n + l, a) -= r2 * d(a, k);
        out(l, n + a) += r2 * d(a, k);
        out(k, n + a) -= r2 * d(a, l);
      } else {
        out(k, a) -= r2 * d(a, l);
        out(l, a) -= r2 * d(a, k);
        out(n + k, n + a) -= r2 * d(a, l);
        out(n + l, n + a) -= r2 * d(a, k);
      }
    }
    return out;
  }
  if (V.family == 'C') {
    const int t = V.k;
    for (int a = 1; a <= n; ++a) {
      double lam = 0.0;
      if (a == t) lam = std::sqrt((t + 1.0) / t);
      if (a > t) lam = 1.0 / std::sqrt(t * (t + 1.0));
      out(a - 1, a - 1) = lam;
      out(n + a - 1, n + a - 1) = lam;
    }
    return out;
  }
  throw std::invalid_argument("djv_table_z0: field is not a basis element");
}

}  // namespace cpfym
