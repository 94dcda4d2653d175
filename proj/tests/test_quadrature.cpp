#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cpfym/quadrature.hpp"

using namespace cpfym;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(7, x, w);
  double s0 = 0, s12 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s12 += w[i] * std::pow(x[i], 12);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s12 == doctest::Approx(2.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("volume of CP^1 and CP^2") {
  const double pi = std::numbers::pi;
  auto one = [](const ChartPoint&) { return 1.0; };
  CHECK(std::abs(integrate(make_quadrature(1, 16, QuadratureScheme::spherical_gauss), one) - 2 * pi) < 1e-6);
  CHECK(std::abs(integrate(make_quadrature(2, 12, QuadratureScheme::spherical_gauss), one) - 2 * pi * pi) < 1e-4);
  CHECK(std::abs(integrate(make_quadrature(3, 8, QuadratureScheme::spherical_gauss), one) - cp_volume(3)) < 1e-6);
  CHECK(std::abs(integrate(make_quadrature(1, 128, QuadratureScheme::tensor_gauss), one) - 2 * pi) < 1e-6);
  double mc = integrate(make_quadrature(2, 20000, QuadratureScheme::monte_carlo), one);
  CHECK(mc == doctest::Approx(2 * pi * pi));
}

TEST_CASE("tensor rule converges at the observed algebraic order") {
  auto one = [](const ChartPoint&) { return 1.0; };
  double e1 = std::abs(integrate(make_quadrature(1, 32, QuadratureScheme::tensor_gauss), one) - 2 * std::numbers::pi);
  double e2 = std::abs(integrate(make_quadrature(1, 64, QuadratureScheme::tensor_gauss), one) - 2 * std::numbers::pi);
  double order = std::log2(e1 / e2);
  CHECK(order > 3.0);
}

TEST_CASE("spherical rule integrates a moment exactly") {
  // int |z_1|^2/(1+|z|^2) dV = Vol / (n+1) by symmetry of the homogeneous coordinates
  for (int n = 1; n <= 2; ++n) {
    auto rule = make_quadrature(n, 12, QuadratureScheme::spherical_gauss);
    double v = integrate(rule, [n](const ChartPoint& p) {
      double s = 1.0;
      for (int a = 0; a < p.dim; ++a) s += p[a] * p[a];
      return (p[0] * p[0] + p[n] * p[n]) / s;
    });
    CHECK(v == doctest::Approx(cp_volume(n) / (n + 1)).epsilon(1e-12));
  }
}

TEST_CASE("compactly supported bump against a box reference") {
  ChartPoint c = make_point({0.3, -0.2});
  const double h = 0.5;
  auto bump = [&](const ChartPoint& p) {
    double v = 1.0;
    for (int a = 0; a < p.dim; ++a) {
      double u = (p[a] - c[a]) / h;
      if (std::abs(u) >= 1.0) return 0.0;
      v *= std::pow(1.0 - u * u, 4);
    }
    return v;
  };
  double ref = integrate(box_quadrature(c, h, 40), bump);
  double coarse = integrate(box_quadrature(c, h, 20), bump);
  CHECK(std::abs(ref - coarse) < 1e-12);
  double sph = integrate(make_quadrature(1, 400, QuadratureScheme::spherical_gauss), bump);
  CHECK(std::abs(sph - ref) < 1e-6);
}

TEST_CASE("resolution zero is rejected") {
  CHECK_THROWS_AS(make_quadrature(1, 0, QuadratureScheme::tensor_gauss), std::invalid_argument);
}
