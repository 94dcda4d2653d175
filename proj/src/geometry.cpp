#include "cpfym/geometry.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace cpfym {
namespace {

// Real metric 2 rho(h) with h_{ij} = delta_ij/s - conj(z_i) z_j / s^2.
template <class T>
Tensor<T> fs_metric_components(const Point<T>& p) {
  const int n = p.dim / 2;
  T s(1.0);
  for (int a = 0; a < p.dim; ++a) s += p[a] * p[a];
  T inv_s = T(1.0) / s;
  T inv_s2 = inv_s * inv_s;
  Tensor<T> g(p.dim, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const T& xi = p[i];
      const T& yi = p[n + i];
      const T& xj = p[j];
      const T& yj = p[n + j];
      T re = -((xi * xj + yi * yj) * inv_s2);
      if (i == j) re += inv_s;
      T im = -((xi * yj - yi * xj) * inv_s2);
      g(i, j) = 2.0 * re;
      g(n + i, n + j) = 2.0 * re;
      g(i, n + j) = 2.0 * im;
      g(n + i, j) = -(2.0 * im);
    }
  }
  return g;
}

// Inverse: (1/2) rho(h^{-1}) with h^{-1}_{ij} = s (delta_ij + conj(z_i) z_j).
template <class T>
Tensor<T> fs_inverse_components(const Point<T>& p) {
  const int n = p.dim / 2;
  T s(1.0);
  for (int a = 0; a < p.dim; ++a) s += p[a] * p[a];
  Tensor<T> gi(p.dim, 2, 1, 0b11);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const T& xi = p[i];
      const T& yi = p[n + i];
      const T& xj = p[j];
      const T& yj = p[n + j];
      T re = xi * xj + yi * yj;
      if (i == j) re += 1.0;
      re = 0.5 * (s * re);
      T im = 0.5 * (s * (xi * yj - yi * xj));
      gi(i, j) = re;
      gi(n + i, n + j) = re;
      gi(i, n + j) = im;
      gi(n + i, j) = -im;
    }
  }
  return gi;
}

template <class T>
Tensor<T> christoffel_from_metric(const Field& metric, const Field& inverse, const Point<T>& p) {
  const int m = p.dim;
  Tensor<T> dg = gradient_at(metric, p);  // dg(c, a, b) = d_c g_ab
  Tensor<T> gi = inverse(p);
  Tensor<T> gam(m, 3, 1, 0b001);
  std::vector<T> lowered(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      for (int d = 0; d < m; ++d) lowered[d] = 0.5 * (dg(a, d, b) + dg(b, d, a) - dg(d, a, b));
      for (int c = 0; c < m; ++c) {
        T acc(0.0);
        for (int d = 0; d < m; ++d) acc += gi(c, d) * lowered[d];
        gam(c, a, b) = acc;
        gam(c, b, a) = acc;
      }
    }
  }
  return gam;
}

template <class T>
Tensor<T> riemann_from_christoffel(const Field& christoffel, const Point<T>& p) {
  const int m = p.dim;
  Tensor<T> gam;
  Tensor<T> dgam = gradient_at(christoffel, p, &gam);  // dgam(a, d, b, c) = d_a Gamma^d_bc
  Tensor<T> rm(m, 4, 1, 0b0001);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          T acc = dgam(a, d, b, c) - dgam(b, d, a, c);
          for (int e = 0; e < m; ++e) acc += gam(d, a, e) * gam(e, b, c) - gam(d, b, e) * gam(e, a, c);
          rm(a, b, c, d) = acc;
        }
    }
  return rm;
}

void check_dim(int n) {
  if (n < 1 || n > kMaxComplexDim) throw std::invalid_argument("dimension n must be in [1, " + std::to_string(kMaxComplexDim) + "]");
}

}  // namespace

ChartPoint chart_point(const std::vector<std::complex<double>>& z) {
  const int n = static_cast<int>(z.size());
  check_dim(n);
  ChartPoint p;
  p.dim = 2 * n;
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(z[j].real()) || !std::isfinite(z[j].imag())) throw std::invalid_argument("chart point: non-finite coordinate");
    p[j] = z[j].real();
    p[n + j] = z[j].imag();
  }
  return p;
}

std::vector<std::complex<double>> complex_coords(const ChartPoint& p) {
  const int n = p.dim / 2;
  std::vector<std::complex<double>> z(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) z[j] = {p[j], p[n + j]};
  return z;
}

Geometry::Geometry(int n) : n_(n) {
  check_dim(n);
  metric_ = Field::make(kMaxFieldLevel, [](const auto& p) { return fs_metric_components(p); });
  inverse_ = Field::make(kMaxFieldLevel, [](const auto& p) { return fs_inverse_components(p); });
  Field g = metric_;
  Field gi = inverse_;
  christoffel_ = Field::make(kMaxFieldLevel - 1, [g, gi](const auto& p) { return christoffel_from_metric(g, gi, p); });
  Field gam = christoffel_;
  riemann_ = Field::make(kMaxFieldLevel - 2, [gam](const auto& p) { return riemann_from_christoffel(gam, p); });
}

const Geometry& geometry(int n) {
  check_dim(n);
  static std::array<std::unique_ptr<Geometry>, kMaxComplexDim + 1> cache;
  static std::once_flag flags[kMaxComplexDim + 1];
  std::call_once(flags[n], [n] { cache[n] = std::make_unique<Geometry>(n); });
  return *cache[n];
}

Eigen::MatrixXd real_metric_at(const ChartPoint& p) {
  Tensor<double> g = geometry(p.complex_dim()).metric()(p);
  Eigen::MatrixXd out(p.dim, p.dim);
  for (int a = 0; a < p.dim; ++a)
    for (int b = 0; b < p.dim; ++b) out(a, b) = g(a, b);
  return out;
}

MetricAtPoint fs_metric(const ChartPoint& p) {
  const int n = p.complex_dim();
  const Geometry& geo = geometry(n);
  MetricAtPoint out;
  out.n = n;
  out.hermitian.resize(n, n);
  const auto z = complex_coords(p);
  double s = 1.0;
  for (const auto& zj : z) s += std::norm(zj);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.hermitian(i, j) = (i == j ? 1.0 / s : 0.0) - std::conj(z[i]) * z[j] / (s * s);
  out.real_metric = real_metric_at(p);
  Tensor<double> gi = geo.inverse_metric()(p);
  out.inverse.resize(p.dim, p.dim);
  for (int a = 0; a < p.dim; ++a)
    for (int b = 0; b < p.dim; ++b) out.inverse(a, b) = gi(a, b);
  out.christoffel = geo.christoffel()(p);
  return out;
}

double metric_inner(const ChartPoint& p, const Tangent& X, const Tangent& Y) { return X.dot(real_metric_at(p) * Y); }

Eigen::MatrixXd j_matrix(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    J(n + a, a) = 1.0;
    J(a, n + a) = -1.0;
  }
  return J;
}

Eigen::MatrixXd standard_j(int n) { return j_matrix(n); }

Tangent j_apply(const ChartPoint& p, const Tangent& X) {
  if (X.size() != p.dim) throw std::invalid_argument("j_apply: tangent dimension mismatch");
  return j_matrix(p.complex_dim()) * X;
}

Tensor<double> riemann_at(const ChartPoint& p) { return geometry(p.complex_dim()).riemann()(p); }

namespace {
Tangent apply_riemann(const Tensor<double>& rm, const Tangent& X, const Tangent& Y, const Tangent& Z) {
  const int m = rm.dim;
  Tangent out = Tangent::Zero(m);
  for (int a = 0; a < m; ++a) {
    if (X[a] == 0.0) continue;
    for (int b = 0; b < m; ++b) {
      double xy = X[a] * Y[b];
      if (xy == 0.0) continue;
      for (int c = 0; c < m; ++c) {
        double w = xy * Z[c];
        if (w == 0.0) continue;
        for (int d = 0; d < m; ++d) out[d] += w * rm(a, b, c, d);
      }
    }
  }
  return out;
}
}  // namespace

Tangent riemann(const ChartPoint& p, const Tangent& X, const Tangent& Y, const Tangent& Z) {
  return apply_riemann(riemann_at(p), X, Y, Z);
}

Tangent ricci(const ChartPoint& p, const Tangent& X) {
  Tensor<double> rm = riemann_at(p);
  Frame f = adapted_frame(p);
  Tangent out = Tangent::Zero(p.dim);
  for (int j = 0; j < p.dim; ++j) {
    Tangent e = f.vectors.col(j);
    out += apply_riemann(rm, X, e, e);
  }
  return out;
}

Tangent curvature_identity_iii(const ChartPoint& p, const Tangent& X) {
  Tensor<double> rm = riemann_at(p);
  Frame f = adapted_frame(p);
  Eigen::MatrixXd J = j_matrix(p.complex_dim());
  Tangent JX = J * X;
  Tangent out = Tangent::Zero(p.dim);
  for (int j = 0; j < p.dim; ++j) {
    Tangent e = f.vectors.col(j);
    out += apply_riemann(rm, JX, e, J * e);
  }
  return out;
}

Frame canonical_frame(int n) {
  check_dim(n);
  Frame f;
  f.base = origin(n);
  f.vectors = Eigen::MatrixXd::Identity(2 * n, 2 * n) / std::sqrt(2.0);
  f.inverse = Eigen::MatrixXd::Identity(2 * n, 2 * n) * std::sqrt(2.0);
  return f;
}

Frame adapted_frame(const ChartPoint& p) {
  const int n = p.complex_dim();
  const Eigen::MatrixXcd h = fs_metric(p).hermitian;
  // <u, v>_h = u^T h conj(v)
  auto inner = [&h](const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
    return (u.transpose() * h * v.conjugate())(0, 0);
  };
  std::vector<Eigen::VectorXcd> us;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
    u[k] = 1.0;
    for (const auto& w : us) u -= inner(u, w) * w;
    u /= std::sqrt(inner(u, u).real());
    us.push_back(u);
  }
  Frame f;
  f.base = p;
  f.vectors.resize(2 * n, 2 * n);
  const double r = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < n; ++j) {
      f.vectors(j, a) = r * us[a][j].real();
      f.vectors(n + j, a) = r * us[a][j].imag();
      f.vectors(j, n + a) = -r * us[a][j].imag();
      f.vectors(n + j, n + a) = r * us[a][j].real();
    }
  }
  f.inverse = f.vectors.inverse();
  return f;
}

Frame rotate_frame(const Frame& frame, const Eigen::MatrixXd& rotation) {
  Frame f;
  f.base = frame.base;
  f.vectors = frame.vectors * rotation;
  f.inverse = f.vectors.inverse();
  return f;
}

Tensor<double> riemann_in_frame(const ChartPoint& p, const Frame& frame) {
  const int m = p.dim;
  Tensor<double> rm = riemann_at(p);
  Tensor<double> out(m, 4);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        Tangent v = apply_riemann(rm, frame.vectors.col(i), frame.vectors.col(j), frame.vectors.col(k));
        Tangent c = frame.inverse * v;
        for (int l = 0; l < m; ++l) out(i, j, k, l) = c[l];
      }
  return out;
}

Tensor<double> model_riemann_frame(int n) {
  const int m = 2 * n;
  Eigen::MatrixXd J = standard_j(n);
  Tensor<double> out(m, 4);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        // R(X,Y)Z = 1/2 [g(Y,Z)X - g(X,Z)Y + g(JY,Z)JX - g(JX,Z)JY + 2 g(X,JY) JZ]
        Tangent v = Tangent::Zero(m);
        if (j == k) v[i] += 0.5;
        if (i == k) v[j] -= 0.5;
        v += 0.5 * J(k, j) * J.col(i);
        v -= 0.5 * J(k, i) * J.col(j);
        v += J(i, j) * J.col(k);
        for (int l = 0; l < m; ++l) out(i, j, k, l) = v[l];
      }
  return out;
}

Tensor<double> curvature_table_z0(int n) {
  if (n < 1 || n > kMaxComplexDim) throw std::invalid_argument("curvature table: dimension out of range");
  const int m = 2 * n;
  Tensor<double> out(m, 4);
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double ab = d(a, b), bc = d(b, c), ac = d(a, c);
        // R(e_a, e_b) e_c = (d_bc e_a - d_ac e_b) / 2
        out(a, b, c, a) += 0.5 * bc;
        out(a, b, c, b) -= 0.5 * ac;
        // R(e_a, e_b) e_{n+c} = (d_bc e_{n+a} - d_ac e_{n+b}) / 2
        out(a, b, n + c, n + a) += 0.5 * bc;
        out(a, b, n + c, n + b) -= 0.5 * ac;
        // R(e_{n+a}, e_b) e_c = d_ab e_{n+c} + (d_bc e_{n+a} + d_ac e_{n+b}) / 2
        out(n + a, b, c, n + c) += ab;
        out(n + a, b, c, n + a) += 0.5 * bc;
        out(n + a, b, c, n + b) += 0.5 * ac;
        // R(e_{n+a}, e_b) e_{n+c} = -d_ab e_c - (d_bc e_a + d_ac e_b) / 2
        out(n + a, b, n + c, c) -= ab;
        out(n + a, b, n + c, a) -= 0.5 * bc;
        out(n + a, b, n + c, b) -= 0.5 * ac;
        // R(e_{n+a}, e_{n+b}) e_c = (d_bc e_a - d_ac e_b) / 2
        out(n + a, n + b, c, a) += 0.5 * bc;
        out(n + a, n + b, c, b) -= 0.5 * ac;
        // R(e_{n+a}, e_{n+b}) e_{n+c} = (d_bc e_{n+a} - d_ac e_{n+b}) / 2
        out(n + a, n + b, n + c, n + a) += 0.5 * bc;
        out(n + a, n + b, n + c, n + b) -= 0.5 * ac;
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) out(b, n + a, k, l) = -out(n + a, b, k, l);
  return out;
}

Tensor<double> kahler_christoffel(const ChartPoint& p) {
  const int n = p.complex_dim();
  const int m = p.dim;
  const auto z = complex_coords(p);
  double s = 1.0;
  for (const auto& zj : z) s += std::norm(zj);
  Tensor<double> gam(m, 3, 1, 0b001);
  const std::complex<double> I(0.0, 1.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k) {
        std::complex<double> hol = 0.0;
        if (b == k) hol -= std::conj(z[a]);
        if (a == k) hol -= std::conj(z[b]);
        hol /= s;
        const std::array<std::complex<double>, 4> w = {hol, I * hol, I * hol, -hol};  // xx, xy, yx, yy
        const std::array<std::pair<int, int>, 4> idx = {std::pair{a, b}, {a, n + b}, {n + a, b}, {n + a, n + b}};
        for (int t = 0; t < 4; ++t) {
          gam(k, idx[t].first, idx[t].second) = w[t].real();
          gam(n + k, idx[t].first, idx[t].second) = w[t].imag();
        }
      }
  return gam;
}

ChartPoint random_point(int n, std::mt19937_64& rng, double scale) {
  check_dim(n);
  std::normal_distribution<double> nd(0.0, scale);
  ChartPoint p;
  p.dim = 2 * n;
  for (int a = 0; a < p.dim; ++a) p[a] = nd(rng);
  return p;
}

Tangent random_tangent(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Tangent t(2 * n);
  for (int a = 0; a < 2 * n; ++a) t[a] = nd(rng);
  return t;
}

Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace cpfym
