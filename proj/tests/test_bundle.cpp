#include <doctest.h>

#include <cmath>
#include <random>

#include "cpfym/bundle.hpp"
#include "cpfym/quadrature.hpp"

using namespace cpfym;

namespace {

ConnectionSpec model_spec(ConnectionKind kind, int n, int rank, double k, double eps) {
  ConnectionSpec s;
  s.kind = kind;
  s.n = n;
  s.rank = rank;
  s.strength = k;
  s.amplitude = eps;
  return s;
}

ConnectionSpec perturbed_spec(int n, int rank, std::mt19937_64& rng, const ChartPoint& c, double h) {
  ConnectionSpec s = model_spec(ConnectionKind::perturbed, n, rank, 1.3, 0.0);
  s.base_kind = rank > 2 ? ConnectionKind::nonabelian_test : ConnectionKind::kahler_abelian;
  s.amplitude = 0.4;
  s.bump = random_bump(n, rank, 1, rng, c, h, 0.7);
  return s;
}

ChartPoint near(const ChartPoint& c, double h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  ChartPoint p = c;
  for (int a = 0; a < p.dim; ++a) p[a] += h * u(rng);
  return p;
}

// central-difference curvature of a potential, no derivative engine
Tensor<double> fd_curvature(const Field& A, const ChartPoint& p) {
  const int m = p.dim;
  const double h = 1e-5;
  Tensor<double> a0 = A(p);
  const int r = a0.block;
  std::vector<Tensor<double>> dA;
  for (int c = 0; c < m; ++c) {
    ChartPoint pp = p, pm = p;
    pp[c] += h;
    pm[c] -= h;
    Tensor<double> ap = A(pp), am = A(pm);
    for (std::size_t i = 0; i < ap.data.size(); ++i) ap.data[i] = (ap.data[i] - am.data[i]) / (2 * h);
    dA.push_back(ap);
  }
  Tensor<double> R(m, 2, r);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      RowMatrix Aa = block_map(a0, static_cast<std::size_t>(a)), Ab = block_map(a0, static_cast<std::size_t>(b));
      RowMatrix v = block_map(dA[static_cast<std::size_t>(a)], static_cast<std::size_t>(b)) -
                    block_map(dA[static_cast<std::size_t>(b)], static_cast<std::size_t>(a)) + Aa * Ab - Ab * Aa;
      block_map(R, static_cast<std::size_t>(a * m + b)) = v;
    }
  return R;
}

Tensor<double> random_frame_form(int m, int degree, int r, std::mt19937_64& rng) {
  Tensor<double> t(m, degree, r);
  if (degree == 1) {
    for (int i = 0; i < m; ++i) block_map(t, static_cast<std::size_t>(i)) = random_so(r, rng);
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        AlgValue a = random_so(r, rng);
        block_map(t, static_cast<std::size_t>(i * m + j)) = a;
        block_map(t, static_cast<std::size_t>(j * m + i)) = -a;
      }
  }
  return t;
}

}  // namespace

TEST_CASE("fiber algebra") {
  std::mt19937_64 rng(11);
  CHECK(alg_inner(sigma0(2), sigma0(2)) == doctest::Approx(2.0));
  CHECK(alg_inner(sigma0(4), sigma0(4)) == doctest::Approx(2.0));
  for (int r : {2, 3, 4}) {
    AlgValue x = random_so(r, rng), a = random_so(r, rng), b = random_so(r, rng);
    CHECK(std::abs(alg_inner(bracket(x, a), b) + alg_inner(a, bracket(x, b))) < 1e-12);
    CHECK((a + a.transpose()).norm() == 0.0);
  }
  auto T = test_generators(3);
  // so(3) structure constants
  CHECK((bracket(T[0], T[1]) - T[2]).norm() < 1e-14);
  CHECK((bracket(T[1], T[2]) - T[0]).norm() < 1e-14);
  CHECK(bracket(test_generators(2)[0], test_generators(2)[1]).norm() == 0.0);
}

TEST_CASE("kahler connection curvature") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    const double k = 1.7;
    Connection C(model_spec(ConnectionKind::kahler_abelian, n, 2, k, 0.0));
    for (int trial = 0; trial < 5; ++trial) {
      ChartPoint p = random_point(n, rng, 0.7);
      AlgForm R = curvature(C, p);
      Frame f = adapted_frame(p);
      CHECK(form_inner(R, R, f) == doctest::Approx(2.0 * n * k * k).epsilon(1e-11));
      // R(X, Y) = -k g(X, JY) sigma0 with g from the metric field
      Eigen::MatrixXd g = fs_metric(p).real_metric;
      Eigen::MatrixXd J = j_matrix(n);
      Tangent X = random_tangent(n, rng), Y = random_tangent(n, rng);
      Tangent JY = J * Y;
      double gxjy = 0.0;
      for (int a = 0; a < p.dim; ++a)
        for (int b = 0; b < p.dim; ++b) gxjy += X[a] * JY[b] * g(a, b);
      AlgValue rxy = AlgValue::Zero(2, 2);
      for (int a = 0; a < p.dim; ++a)
        for (int b = 0; b < p.dim; ++b) rxy += X[a] * Y[b] * AlgValue(block_map(R.comps, static_cast<std::size_t>(a * p.dim + b)));
      CHECK((rxy + k * gxjy * sigma0(2)).norm() < 1e-12);
      CHECK(max_abs(covariant_derivative(C.curvature(), C.potential())(p)) < 1e-11);
      CHECK(max_abs(codifferential(C.curvature(), C.potential())(p)) < 1e-11);
    }
  }
}

TEST_CASE("curvature matches finite differences of the potential") {
  std::mt19937_64 rng(5);
  ChartPoint c = random_point(2, rng, 0.4);
  for (int rank : {2, 3}) {
    std::vector<ConnectionSpec> specs = {model_spec(ConnectionKind::nonabelian_test, 2, rank, 0.9, 0.6),
                                         perturbed_spec(2, rank, rng, c, 0.5)};
    for (const auto& s : specs) {
      Connection C(s);
      for (int trial = 0; trial < 4; ++trial) {
        ChartPoint p = near(c, 0.5, rng);
        CHECK(max_abs_diff(C.curvature()(p), fd_curvature(C.potential(), p)) < 1e-8);
      }
    }
  }
}

TEST_CASE("second Bianchi identity and Leibniz rule") {
  std::mt19937_64 rng(8);
  for (int n : {1, 2}) {
    ChartPoint c = random_point(n, rng, 0.3);
    for (int rank : {2, 3}) {
      Connection C(perturbed_spec(n, rank, rng, c, 0.6));
      Connection N(model_spec(ConnectionKind::nonabelian_test, n, rank, 1.1, 0.8));
      for (int trial = 0; trial < 3; ++trial) {
        ChartPoint p = near(c, 0.6, rng);
        CHECK(max_abs(exterior_derivative(C.curvature(), C.potential())(p)) < 1e-10);
        CHECK(max_abs(exterior_derivative(N.curvature(), N.potential())(p)) < 1e-10);
      }
      // D_X <phi, psi> = <D_X phi, psi> + <phi, D_X psi> for adjoint-valued 1-forms
      Field phi = bump_field(random_bump(n, rank, 1, rng, c, 0.6));
      Field psi = bump_field(random_bump(n, rank, 1, rng, c, 0.6));
      Field inner = Field::make(kMaxFieldLevel, [phi, psi](const auto& p) {
        using S = std::decay_t<decltype(p[0])>;
        auto gi = geometry(p.dim / 2).inverse_metric()(p);
        Tensor<S> out(p.dim, 0);
        out.data[0] = detail::form_inner_coord(phi(p), psi(p), gi);
        return out;
      });
      ChartPoint p = near(c, 0.6, rng);
      Tangent X = random_tangent(n, rng);
      double lhs = 0.0;
      Tensor<double> di = gradient_at(inner, p);
      for (int a = 0; a < p.dim; ++a) lhs += X[a] * di.data[static_cast<std::size_t>(a)];
      Frame f = adapted_frame(p);
      double rhs = form_inner(cov_deriv_form(N, phi, p, X), evaluate(psi, p), f) +
                   form_inner(evaluate(phi, p), cov_deriv_form(N, psi, p, X), f);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("exterior derivative and codifferential are adjoint") {
  std::mt19937_64 rng(21);
  for (int n : {1, 2}) {
    ChartPoint c = random_point(n, rng, 0.3);
    const double h = 0.5;
    Connection C(model_spec(ConnectionKind::nonabelian_test, n, 3, 0.8, 0.7));
    for (int deg : {0, 1}) {
      Field phi = bump_field(random_bump(n, 3, deg, rng, c, h));
      Field psi = bump_field(random_bump(n, 3, deg + 1, rng, c, h));
      Field dphi = exterior_derivative(phi, C.potential());
      Field dpsi = codifferential(psi, C.potential());
      QuadratureRule rule = box_quadrature(c, h, n == 1 ? 24 : 12);
      auto v = integrate_many(rule, 2, [&](const ChartPoint& p, double* out) {
        Frame f = adapted_frame(p);
        out[0] = form_inner(evaluate(dphi, p), evaluate(psi, p), f);
        out[1] = form_inner(evaluate(phi, p), evaluate(dpsi, p), f);
      });
      CHECK(std::abs(v[0]) > 1e-4);
      CHECK(v[0] == doctest::Approx(v[1]).epsilon(1e-7));
    }
  }
}

TEST_CASE("rough laplacian does not depend on the frame") {
  std::mt19937_64 rng(4);
  const int n = 2;
  ChartPoint c = random_point(n, rng, 0.3);
  Connection C(model_spec(ConnectionKind::nonabelian_test, n, 3, 0.8, 0.7));
  Field phi = bump_field(random_bump(n, 3, 1, rng, c, 0.5));
  ChartPoint p = near(c, 0.5, rng);
  Tensor<double> nn = covariant_derivative(covariant_derivative(phi, C.potential()), C.potential())(p);
  Frame f = rotate_frame(adapted_frame(p), random_orthogonal(2 * n, rng));
  Tensor<double> nf = to_frame(nn, f);
  const int m = 2 * n;
  const std::size_t inner = nf.data.size() / static_cast<std::size_t>(m * m);
  Tensor<double> trace(m, 1, 3);
  for (int i = 0; i < m; ++i)
    for (std::size_t q = 0; q < inner; ++q) trace.data[q] -= nf.data[static_cast<std::size_t>(i * m + i) * inner + q];
  AlgForm lap = rough_laplacian(C, phi, p);
  CHECK(max_abs_diff(to_frame(lap.comps, f), trace) < 1e-10);
}

TEST_CASE("curvature operator on forms") {
  std::mt19937_64 rng(9);
  for (int m : {2, 4, 6}) {
    for (int r : {2, 3, 4}) {
      Tensor<double> R = random_frame_form(m, 2, r, rng);
      for (int deg : {1, 2}) {
        Tensor<double> a = random_frame_form(m, deg, r, rng), b = random_frame_form(m, deg, r, rng);
        double ab = full_contraction(frak_r_frame(R, a), b), ba = full_contraction(a, frak_r_frame(R, b));
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      }
      // <frak R B, B> = sum_ij <R_ij, [B_i, B_j]>
      Tensor<double> B = random_frame_form(m, 1, r, rng);
      double direct = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          RowMatrix bi = block_map(B, static_cast<std::size_t>(i)), bj = block_map(B, static_cast<std::size_t>(j));
          RowMatrix rij = block_map(R, static_cast<std::size_t>(i * m + j));
          direct += (rij.transpose() * (bi * bj - bj * bi)).trace();
        }
      CHECK(full_contraction(frak_r_frame(R, B), B) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("curvature action equals the commutator of second derivatives") {
  std::mt19937_64 rng(13);
  for (int n : {1, 2}) {
    ChartPoint c = random_point(n, rng, 0.3);
    Connection C(perturbed_spec(n, 3, rng, c, 0.5));
    for (int deg : {1, 2}) {
      Field phi = bump_field(random_bump(n, 3, deg, rng, c, 0.5));
      ChartPoint p = near(c, 0.5, rng);
      Tensor<double> nn = covariant_derivative(covariant_derivative(phi, C.potential()), C.potential())(p);
      Tangent X = random_tangent(n, rng), Y = random_tangent(n, rng);
      const int m = p.dim;
      const std::size_t inner = nn.data.size() / static_cast<std::size_t>(m * m);
      Tensor<double> comm(m, deg, 3);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double w = X[a] * Y[b];
          for (std::size_t q = 0; q < inner; ++q)
            comm.data[q] += w * (nn.data[static_cast<std::size_t>(a * m + b) * inner + q] -
                                 nn.data[static_cast<std::size_t>(b * m + a) * inner + q]);
        }
      AlgForm act = curvature_action(curvature(C, p), evaluate(phi, p), X, Y);
      CHECK(max_abs(comm) > 1e-3);
      CHECK(max_abs_diff(act.comps, comm) < 1e-9 * (1.0 + max_abs(comm)));
    }
  }
}

TEST_CASE("Bochner formula for one- and two-forms") {
  std::mt19937_64 rng(17);
  for (int n : {1, 2}) {
    for (int rank : {2, 3}) {
      ChartPoint c = random_point(n, rng, 0.3);
      std::vector<Connection> conns = {Connection(model_spec(ConnectionKind::nonabelian_test, n, rank, 0.9, 0.5)),
                                       Connection(perturbed_spec(n, rank, rng, c, 0.5))};
      for (const Connection& C : conns)
        for (int deg : {1, 2}) {
          Field phi = bump_field(random_bump(n, rank, deg, rng, c, 0.5));
          ChartPoint p = near(c, 0.5, rng);
          BochnerBreakdown b = bochner_residual(C, phi, p);
          CHECK(b.scale > 1e-3);
          CHECK(b.residual < 1e-9 * (1.0 + b.scale));
        }
      // the curvature itself, a global two-form
      Connection N(model_spec(ConnectionKind::nonabelian_test, n, rank, 0.9, 0.5));
      BochnerBreakdown b = bochner_residual(N, N.curvature(), random_point(n, rng, 0.6));
      CHECK(b.residual < 1e-9 * (1.0 + b.scale));
    }
  }
}

TEST_CASE("curvature of a shifted connection is quadratic in t") {
  std::mt19937_64 rng(23);
  for (int n : {1, 2}) {
    ChartPoint c = random_point(n, rng, 0.3);
    Connection C(model_spec(ConnectionKind::nonabelian_test, n, 3, 1.2, 0.4));
    Field B = bump_field(random_bump(n, 3, 1, rng, c, 0.5));
    for (double t : {-2.0, 0.3, 1.0, 5.0}) {
      ChartPoint p = near(c, 0.5, rng);
      CHECK(t_expansion_check(C, B, p, t) < 1e-10 * (1.0 + t * t));
    }
  }
}

TEST_CASE("connection input validation") {
  CHECK_THROWS_AS(Connection(model_spec(ConnectionKind::flat, 1, 1, 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(Connection(model_spec(ConnectionKind::perturbed, 1, 2, 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(parse_connection_kind("bogus"), std::invalid_argument);
  CHECK(parse_connection_kind("nonabelian_test") == ConnectionKind::nonabelian_test);
}
