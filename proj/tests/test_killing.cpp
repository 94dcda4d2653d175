#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cpfym/calculus.hpp"
#include "cpfym/killing.hpp"

using namespace cpfym;

namespace {

// exp(tA) by a long Taylor series (small t)
Eigen::MatrixXcd expm_series(const Eigen::MatrixXcd& A, double t) {
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * A * (t / k);
    sum += term;
  }
  return sum;
}

// chart velocity of t -> [exp(tA)(1, z)] by central differences
Tangent flow_velocity(const SuMatrix& A, const ChartPoint& p, double h) {
  const int n = p.complex_dim();
  Eigen::VectorXcd w(n + 1);
  w[0] = 1.0;
  for (int j = 0; j < n; ++j) w[j + 1] = {p[j], p[n + j]};
  auto chart = [&](double t) {
    Eigen::VectorXcd u = expm_series(A, t) * w;
    Tangent x(2 * n);
    for (int j = 0; j < n; ++j) {
      std::complex<double> zj = u[j + 1] / u[0];
      x[j] = zj.real();
      x[n + j] = zj.imag();
    }
    return x;
  };
  return (chart(h) - chart(-h)) / (2 * h);
}

// the table of D_{e_a} J V at the origin, written out per family
Eigen::MatrixXd table_oracle(const KillingField& V, int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const double s = 1.0 / std::sqrt(2.0);
  for (int a = 1; a <= n; ++a) {
    int ca = a - 1, cna = n + a - 1;
    if (V.family == 'A' && V.k >= 1) {
      int k = V.k, l = V.l;
      if (a == l) out(n + k - 1, ca) += s;
      if (a == k) out(n + l - 1, ca) -= s;
      if (a == k) out(l - 1, cna) += s;
      if (a == l) out(k - 1, cna) -= s;
    } else if (V.family == 'B' && V.k >= 1) {
      int k = V.k, l = V.l;
      if (a == l) out(k - 1, ca) -= s;
      if (a == k) out(l - 1, ca) -= s;
      if (a == l) out(n + k - 1, cna) -= s;
      if (a == k) out(n + l - 1, cna) -= s;
    } else if (V.family == 'C') {
      int t = V.k;
      if (a == t) {
        out(t - 1, ca) = std::sqrt((t + 1.0) / t);
        out(n + t - 1, cna) = std::sqrt((t + 1.0) / t);
      } else if (a > t) {
        out(ca, ca) = 1.0 / std::sqrt(t * (t + 1.0));
        out(cna, cna) = 1.0 / std::sqrt(t * (t + 1.0));
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("basis size, membership and Gram matrix") {
  for (int n = 1; n <= 3; ++n) {
    KillingBasis b = su_basis(n);
    CHECK(b.elements.size() == static_cast<std::size_t>(n * n + 2 * n));
    for (const auto& V : b.elements) CHECK(is_su(V.generator));
    // direct trace computation
    double worst = 0.0;
    for (std::size_t i = 0; i < b.elements.size(); ++i)
      for (std::size_t j = 0; j < b.elements.size(); ++j) {
        std::complex<double> tr = 0.0;
        const auto& A = b.elements[i].generator;
        const auto& B = b.elements[j].generator;
        for (int r = 0; r <= n; ++r)
          for (int c = 0; c <= n; ++c) tr += std::conj(A(r, c)) * B(r, c);
        worst = std::max(worst, std::abs(tr.real() - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst < 1e-12);
    CHECK((killing_gram(b) - Eigen::MatrixXd::Identity(n * n + 2 * n, n * n + 2 * n)).norm() < 1e-12);
  }
}

TEST_CASE("chart formula at the origin and against the flow") {
  KillingBasis b = su_basis(2);
  Tangent v = killing_eval(b.elements[0], origin(2));
  Frame f = canonical_frame(2);
  CHECK((v + f.vectors.col(0)).norm() < 1e-15);
  KillingField zero{SuMatrix::Zero(3, 3), "0"};
  CHECK(killing_eval(zero, origin(2)).norm() == 0.0);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    ChartPoint p = random_point(2, rng, 0.7);
    const auto& V = b.elements[static_cast<std::size_t>(t) % b.elements.size()];
    CHECK((killing_eval(V, p) - flow_velocity(V.generator, p, 1e-5)).norm() < 1e-8);
  }
}

TEST_CASE("Killing equation and second-derivative identity") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  double worst_eq = 0.0, worst_d2 = 0.0, worst_lap = 0.0;
  for (int t = 0; t < 200; ++t) {
    int n = 1 + t % 2;
    KillingBasis b = su_basis(n);
    Eigen::VectorXd c(static_cast<Eigen::Index>(b.elements.size()));
    for (auto& x : c) x = nd(rng);
    KillingField V = combine(b, c, "V");
    ChartPoint p = random_point(n, rng, 1.0);
    Tangent X = random_tangent(n, rng), Y = random_tangent(n, rng);
    worst_eq = std::max(worst_eq, std::abs(killing_equation_residual(V, p, X, Y)));
    worst_d2 = std::max(worst_d2, killing_second_identity_residual(V, p, X, Y));
    if (t < 40) worst_lap = std::max(worst_lap, killing_rough_laplacian_residual(V, p));
  }
  CHECK(worst_eq < 1e-8);
  CHECK(worst_d2 < 1e-6);
  CHECK(worst_lap < 1e-6);
  KillingField zero{SuMatrix::Zero(2, 2), "0"};
  CHECK(killing_second_identity_residual(zero, origin(1), random_tangent(1, rng), random_tangent(1, rng)) == 0.0);
}

TEST_CASE("covariant derivative of J V at the origin matches the table") {
  for (int n = 1; n <= 3; ++n) {
    KillingBasis b = su_basis(n);
    Frame f = canonical_frame(n);
    for (const auto& V : b.elements) {
      Eigen::MatrixXd got(2 * n, 2 * n);
      for (int i = 0; i < 2 * n; ++i) got.col(i) = f.inverse * j_killing_cov_deriv(V, origin(n), f.vectors.col(i));
      CHECK((got - table_oracle(V, n)).norm() < 1e-8);
      CHECK((got - djv_table_z0(V, n)).norm() < 1e-8);
    }
  }
}

TEST_CASE("isotropy decomposition") {
  KillingBasis b = su_basis(2);
  IsotropyDecomposition d0 = isotropy_decompose(b, origin(2));
  std::vector<KillingField> expected;
  for (const auto& V : b.elements)
    if ((V.family == 'A' || V.family == 'B') && V.k == 0) expected.push_back(V);
  CHECK(subspace_angle(d0.p_part, expected) < 1e-8);
  std::mt19937_64 rng(29);
  for (int t = 0; t < 5; ++t) {
    ChartPoint p = random_point(2, rng, 1.0);
    IsotropyDecomposition d = isotropy_decompose(b, p);
    CHECK(d.f_part.size() == 4);
    CHECK(d.p_part.size() == 4);
    for (const auto& V : d.f_part) CHECK(killing_eval(V, p).norm() < 1e-10);
    for (const auto& V : d.p_part) {
      Tensor<double> dv = covariant_derivative(killing_vector_field(V.generator))(p);
      CHECK(max_abs(dv) < 1e-10);
    }
    // J V(p) over the p-part forms an orthonormal tangent basis
    Eigen::MatrixXd G = real_metric_at(p);
    Eigen::MatrixXd W(4, 4);
    for (int i = 0; i < 4; ++i) W.col(i) = j_killing_eval(d.p_part[static_cast<std::size_t>(i)], p);
    CHECK((W.transpose() * G * W - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-10);
    Eigen::MatrixXd all(8, 8);
    all << d.f_coefficients, d.p_coefficients;
    CHECK((all.transpose() * all - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-10);
  }
}
