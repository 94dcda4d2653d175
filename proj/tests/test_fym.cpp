#include <doctest.h>

#include <cmath>
#include <random>

#include "cpfym/calculus.hpp"
#include "cpfym/fym.hpp"

using namespace cpfym;

namespace {

ConnectionSpec spec_of(ConnectionKind kind, int n, int rank, double k, double eps) {
  ConnectionSpec s;
  s.kind = kind;
  s.n = n;
  s.rank = rank;
  s.strength = k;
  s.amplitude = eps;
  return s;
}

Profile profile(ProfileKind kind, double alpha = 1.0) {
  Profile F;
  F.kind = kind;
  F.alpha = alpha;
  return F;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// <i_{e_a} R, i_{e_b} R> straight from the frame components
double gram(const Tensor<double>& R, int a, int b) {
  const int m = R.dim;
  double s = 0.0;
  for (int j = 0; j < m; ++j)
    for (int p = 0; p < R.block; ++p)
      for (int q = 0; q < R.block; ++q) s += R.at(p, q, a, j) * R.at(p, q, b, j);
  return s;
}

double norm2(const Tensor<double>& R) {
  double s = 0.0;
  for (double v : R.data) s += v * v;
  return 0.5 * s;
}

}  // namespace

TEST_CASE("profiles: derivatives match finite differences and domains are enforced") {
  const double h = 1e-5;
  for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::power, 2.0 / 3.0),
                    profile(ProfileKind::regularized_power, 0.25), profile(ProfileKind::exponential)}) {
    for (double x : {0.3, 1.0, 2.5}) {
      double d1 = (F.F(x + h) - F.F(x - h)) / (2 * h);
      double d2 = (F.F1(x + h) - F.F1(x - h)) / (2 * h);
      CHECK(std::abs(d1 - F.F1(x)) < 1e-7);
      CHECK(std::abs(d2 - F.F2(x)) < 1e-6);
    }
    CHECK(parse_profile_kind(profile_kind_name(F.kind)) == F.kind);
  }
  CHECK_THROWS_AS(profile(ProfileKind::power, 0.5).check_domain(0.0), std::domain_error);
  CHECK_THROWS_AS(profile(ProfileKind::linear).check_domain(-1.0), std::domain_error);
  CHECK_NOTHROW(profile(ProfileKind::regularized_power, 0.5).check_domain(0.0));
  CHECK_THROWS(parse_profile_kind("cubic"));
}

TEST_CASE("functional on the Kahler connection is F(2k^2/2) times the volume") {
  Connection C(spec_of(ConnectionKind::kahler_abelian, 1, 2, 2.0, 0.0));
  QuadratureRule Q = make_quadrature(1, default_resolution(1, QuadratureScheme::spherical_gauss),
                                     QuadratureScheme::spherical_gauss);
  // |R|^2 = 2 k^2 = 8, x = 4, Vol = 2 pi
  CHECK(rel(functional(C, profile(ProfileKind::linear), Q), 8.0 * M_PI) < 1e-8);
  CHECK(rel(functional(C, profile(ProfileKind::power, 0.5), Q), 4.0 * M_PI) < 1e-8);
  Connection flat(spec_of(ConnectionKind::flat, 1, 2, 0.0, 0.0));
  CHECK(std::abs(functional(flat, profile(ProfileKind::linear), Q)) < 1e-14);
}

TEST_CASE("Euler-Lagrange residual vanishes on Kahler connections and both forms agree elsewhere") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2}) {
    Connection C(spec_of(ConnectionKind::kahler_abelian, n, 3, 1.7, 0.0));
    for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::power, 2.0 / 3.0),
                      profile(ProfileKind::power, 0.25)}) {
      ChartPoint p = random_point(n, rng, 0.7);
      ElResidual e = el_residual(C, F, p);
      CHECK(e.direct < 1e-8);
      CHECK(e.split < 1e-8);
    }
    ConnectionSpec s = spec_of(ConnectionKind::perturbed, n, 3, 1.1, 0.5);
    s.base_kind = ConnectionKind::nonabelian_test;
    s.bump = random_bump(n, 3, 1, rng, origin(n), 0.8, 0.6);
    Connection P(s);
    ChartPoint p = origin(n);
    p[0] = 0.2;
    for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::exponential),
                      profile(ProfileKind::regularized_power, 0.5)}) {
      ElResidual e = el_residual(P, F, p);
      CHECK(e.direct > 1e-3);
      CHECK(e.agreement < 1e-6 * std::max(1.0, e.direct));
    }
  }
}

TEST_CASE("second variation matches finite differences of the functional") {
  std::mt19937_64 rng(5);
  const ChartPoint c = [] {
    ChartPoint q = origin(1);
    q[0] = 0.3;
    q[1] = -0.2;
    return q;
  }();
  const double h = 0.6;
  QuadratureRule box = box_quadrature(c, h, 16);
  Connection C(spec_of(ConnectionKind::nonabelian_test, 1, 3, 1.2, 0.6));
  for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::exponential),
                    profile(ProfileKind::regularized_power, 0.6)}) {
    for (int trial = 0; trial < 2; ++trial) {
      Field B = bump_field(random_bump(1, 3, 1, rng, c, h, 0.8));
      double by_parts = second_variation(C, F, B, box, VariationPath::by_parts);
      double direct = second_variation(C, F, B, box, VariationPath::direct);
      double fd = second_variation_fd(C, F, B, box);
      CHECK(std::abs(by_parts - fd) < 1e-4 * std::abs(fd));
      CHECK(std::abs(direct - by_parts) < 1e-6 * std::abs(by_parts));
    }
  }
}

TEST_CASE("second variation of a Killing contraction agrees with finite differences") {
  Connection C(spec_of(ConnectionKind::kahler_abelian, 1, 2, 1.5, 0.0));
  QuadratureRule Q = make_quadrature(1, default_resolution(1, QuadratureScheme::spherical_gauss),
                                     QuadratureScheme::spherical_gauss);
  KillingBasis kb = su_basis(1);
  Profile F = profile(ProfileKind::exponential);
  Field B = variation_field(C, kb.elements[0]);
  double sv = second_variation(C, F, B, Q);
  double fd = second_variation_fd(C, F, B, Q);
  CHECK(std::abs(sv - fd) < 1e-4 * std::abs(fd));
}

TEST_CASE("gauge directions are null at a critical connection") {
  std::mt19937_64 rng(21);
  ChartPoint c = origin(1);
  c[1] = 0.25;
  const double h = 0.7;
  QuadratureRule box = box_quadrature(c, h, 16);
  Connection C(spec_of(ConnectionKind::kahler_abelian, 1, 3, 1.4, 0.0));
  Profile F = profile(ProfileKind::linear);
  Field phi = bump_field(random_bump(1, 3, 0, rng, c, h, 1.0));
  Field B = exterior_derivative(phi, C.potential());
  double lv = second_variation(C, F, B, box);
  // scale: the two nonvanishing pieces that cancel
  double scale = integrate(box, [&](const ChartPoint& p) {
    AlgForm dB = d_nabla(C, B, p);
    Frame f = adapted_frame(p);
    return form_inner(dB, dB, f);
  });
  CHECK(scale > 1e-2);
  CHECK(std::abs(lv) < 1e-4 * scale);
}

TEST_CASE("Killing contraction on the Kahler connection is -k g(V, .) sigma0") {
  const double k = 1.3;
  Connection C(spec_of(ConnectionKind::kahler_abelian, 2, 2, k, 0.0));
  KillingBasis kb = su_basis(2);
  std::mt19937_64 rng(3);
  for (const KillingField& V : kb.elements) {
    Field B = variation_field(C, V);
    ChartPoint p = random_point(2, rng, 0.6);
    AlgForm b = evaluate(B, p);
    Tangent v = killing_eval(V, p);
    Eigen::MatrixXd g = real_metric_at(p);
    Eigen::VectorXd gv = g * v;
    double worst = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double expect = -k * gv(a) * sigma0(2)(i, j);
          worst = std::max(worst, std::abs(b.comps.at(i, j, a) - expect));
        }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("J-terms reassemble the direct second-variation density") {
  std::mt19937_64 rng(8);
  for (int n : {1, 2}) {
    Connection K(spec_of(ConnectionKind::kahler_abelian, n, 2, 1.2, 0.0));
    KillingBasis kb = su_basis(n);
    Profile F = profile(ProfileKind::exponential);
    ChartPoint p = random_point(n, rng, 0.5);
    for (const KillingField& V : kb.elements) {
      JTermBreakdown t = j_terms(K, F, V, p);
      CHECK(std::abs(t.j1) < 1e-10);
      CHECK(std::abs(t.j2) < 1e-10);
      CHECK(std::abs(t.j3) < 1e-10);
      CHECK(std::abs(t.fym_defect) < 1e-10);
    }
    Connection C(spec_of(ConnectionKind::nonabelian_test, n, 3, 0.9, 0.5));
    CurvaturePoint cp = curvature_point(C, p);
    for (const KillingField& V : kb.elements) {
      JTermBreakdown t = j_terms(cp, killing_point(V, p, cp.frame), F);
      double direct = second_variation_density(C, F, variation_field(C, V), p, VariationPath::direct);
      CHECK(rel(t.j1 + t.j2 + t.j3 + t.j4 + t.fym_defect, direct) < 1e-9);
    }
  }
}

TEST_CASE("per-V second variation equals the integrated J-terms on the Kahler connection") {
  Connection C(spec_of(ConnectionKind::kahler_abelian, 1, 2, 1.1, 0.0));
  QuadratureRule Q = make_quadrature(1, default_resolution(1, QuadratureScheme::spherical_gauss),
                                     QuadratureScheme::spherical_gauss);
  Profile F = profile(ProfileKind::power, 0.8);
  for (const KillingField& V : su_basis(1).elements) {
    double lv = second_variation(C, F, variation_field(C, V), Q);
    double jint = integrate(Q, [&](const ChartPoint& p) {
      JTermBreakdown t = j_terms(C, F, V, p);
      return t.j1 + t.j2 + t.j3 + t.j4;
    });
    CHECK(std::abs(lv - jint) < 1e-3 * std::abs(lv));
  }
}

TEST_CASE("Killing sums: first two vanish, basis independence, closed-form fourth") {
  std::mt19937_64 rng(13);
  for (int n : {1, 2}) {
    ConnectionSpec s = spec_of(ConnectionKind::perturbed, n, 3, 1.0, 0.4);
    s.base_kind = ConnectionKind::nonabelian_test;
    s.bump = random_bump(n, 3, 1, rng, origin(n), 0.9, 0.7);
    Connection C(s);
    KillingBasis kb = su_basis(n);
    KillingBasis rot = recombine(kb, random_orthogonal(static_cast<int>(kb.elements.size()), rng));
    for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::exponential)}) {
      ChartPoint p = random_point(n, rng, 0.3);
      CurvaturePoint cp = curvature_point(C, p);
      KillingSums a = killing_sums(cp, F, kb);
      KillingSums b = killing_sums(cp, F, rot);
      CHECK(std::abs(a.j1) < 1e-6 * a.scale);
      CHECK(std::abs(a.j2) < 1e-6 * a.scale);
      CHECK(std::abs(a.j1 - b.j1) < 1e-10 * std::max(1.0, a.scale));
      CHECK(std::abs(a.j2 - b.j2) < 1e-10 * std::max(1.0, a.scale));
      CHECK(std::abs(a.j3 - b.j3) < 1e-10 * std::max(1.0, a.scale));
      CHECK(std::abs(a.j4 - b.j4) < 1e-10 * std::max(1.0, a.scale));
      CHECK(rel(a.j4, sum_j4_closed_form(cp.R, F, n)) < 1e-8);
    }
  }
}

TEST_CASE("family sums of the D JV contraction at the origin") {
  std::mt19937_64 rng(17);
  for (int n : {1, 2, 3}) {
    KillingBasis kb = su_basis(n);
    for (int trial = 0; trial < 5; ++trial) {
      Tensor<double> R = random_curvature_sample(n, 3, rng);
      double fa = 0.0, fb = 0.0, fc = 0.0;
      for (const KillingField& V : kb.elements) {
        double pv = djv_contraction_z0(R, V, n);
        if (V.family == 'A') fa += pv * pv;
        if (V.family == 'B') fb += pv * pv;
        if (V.family == 'C') fc += pv * pv;
      }
      double ea = 0.0, eb = 0.0, diag = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          double u = gram(R, a, n + b) - gram(R, n + a, b);
          double w = gram(R, a, b) + gram(R, n + a, n + b);
          ea += u * u;
          eb += w * w;
        }
      }
      for (int i = 0; i < 2 * n; ++i) {
        int ji = i < n ? i + n : i - n;
        double w = gram(R, i, i) + gram(R, ji, ji);
        diag += 0.5 * w * w;
      }
      const double r2 = norm2(R);
      CHECK(std::abs(fa - ea) < 1e-8);
      CHECK(std::abs(fb - (eb - diag)) < 1e-8);
      CHECK(std::abs(fc - (diag + 4.0 * r2 * r2)) < 1e-8);
      CHECK(std::abs(fa + fb + fc - estimate_quantities(R, n).q2) < 1e-8);
      DjvFamilySums lib = djv_family_sums(R, n);
      CHECK(std::abs(lib.a - fa) < 1e-12);
      CHECK(std::abs(lib.a_expected - ea) < 1e-12);
      CHECK(std::abs(lib.b_expected - (eb - diag)) < 1e-12);
      CHECK(std::abs(lib.c_expected - (diag + 4.0 * r2 * r2)) < 1e-12);
    }
    Tensor<double> zero(2 * n, 2, 3);
    for (const KillingField& V : kb.elements) CHECK(djv_contraction_z0(zero, V, n) == 0.0);
  }
}

TEST_CASE("estimate quantities: bounds on random samples and equality on the Kahler family") {
  std::mt19937_64 rng(23);
  for (int n : {1, 2, 3}) {
    const double b1 = 4.0 + 4.0 * n, b2 = 4.0 + 4.0 / n;
    int v1 = 0, v2 = 0;
    for (int s = 0; s < 2000; ++s) {
      Tensor<double> R = random_curvature_sample(n, 3, rng);
      EstimateQuantities e = estimate_quantities(R, n);
      if (e.q1 > b1 * e.r_norm2 + 1e-12) ++v1;
      if (e.q2 < b2 * e.r_norm2 * e.r_norm2 - 1e-12) ++v2;
      // Gram oracle: q2 = 4|R|^4 + |A|_F^2 / 2 with A = G + J^T G J and tr A = 4|R|^2
      Eigen::MatrixXd G(2 * n, 2 * n);
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) G(a, b) = gram(R, a, b);
      Eigen::MatrixXd J = standard_j(n);
      Eigen::MatrixXd A = G + J.transpose() * G * J;
      CHECK(std::abs(e.q2 - (4.0 * e.r_norm2 * e.r_norm2 + 0.5 * A.squaredNorm())) < 1e-10);
      CHECK(std::abs(A.trace() - 4.0 * e.r_norm2) < 1e-10);
    }
    CHECK(v1 == 0);
    CHECK(v2 == 0);
    Tensor<double> E = equality_curvature_sample(n, 3, rng);
    EstimateQuantities e = estimate_quantities(E, n);
    CHECK(std::abs(e.q1 - b1 * e.r_norm2) < 1e-10);
    CHECK(std::abs(e.q2 - b2 * e.r_norm2 * e.r_norm2) < 1e-10);
    CHECK(e.equality_residual < 1e-12);
    // on CP^1 every two-form is a multiple of the Kahler form
    if (n > 1) CHECK(estimate_quantities(random_curvature_sample(n, 3, rng), n).equality_residual > 0.1);
  }
}

TEST_CASE("threshold formulas") {
  CHECK(power_threshold(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(power_threshold(2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(power_threshold(3) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(power_crossing_closed_form(1) == 0.5);
  CHECK(std::abs(gap_threshold(2) - 3.0 * std::sqrt(3.0) / 4.0) < 1e-12);
  CHECK_THROWS(gap_threshold(1));
  for (int n : {1, 2, 3}) {
    // a solves the condition (2 + 4/n) a (a - 1) + (n + 1) a = 0
    double a = power_threshold(n);
    CHECK(std::abs((2.0 + 4.0 / n) * a * (a - 1.0) + (n + 1.0) * a) < 1e-12);
  }
}

TEST_CASE("gap identities on random samples") {
  std::mt19937_64 rng(29);
  for (int n : {2, 3}) {
    for (int s = 0; s < 200; ++s) {
      Tensor<double> R = random_curvature_sample(n, 3, rng);
      GapPointwise g = gap_pointwise(R, n);
      CHECK(std::abs(g.ric_term - (2.0 * n + 2.0) * g.r_norm * g.r_norm) < 1e-10);
      CHECK(g.expansion_residual < 1e-12);
      CHECK(g.frak_term + gap_frak_constant(n) * std::pow(g.r_norm, 3) >= -1e-12);
    }
    GapPointwise e = gap_pointwise(equality_curvature_sample(n, 3, rng), n);
    CHECK(std::abs(e.two_r_term + (2.0 * n + 2.0)) < 1e-10);
  }
}

TEST_CASE("Laplacian of F(x) matches the curvature identity") {
  std::mt19937_64 rng(31);
  for (int n : {1, 2}) {
    Connection C(spec_of(ConnectionKind::nonabelian_test, n, 3, 0.8, 0.6));
    for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::exponential)}) {
      ChartPoint p = random_point(n, rng, 0.5);
      LapFCheck l = lap_f_check(C, F, p);
      CHECK(std::abs(l.lhs - l.rhs) < 1e-8 * std::max(1.0, l.scale));
    }
  }
}

TEST_CASE("stability desk numbers on CP^1") {
  Connection C(spec_of(ConnectionKind::kahler_abelian, 1, 2, 2.0, 0.0));
  QuadratureRule Q = make_quadrature(1, default_resolution(1, QuadratureScheme::spherical_gauss),
                                     QuadratureScheme::spherical_gauss);
  StabilityCache cache = build_stability_cache(C, su_basis(1), Q);
  StabilityReport r = stability_report(cache, profile(ProfileKind::linear), 1e-8);
  CHECK(rel(r.sum, 128.0 * M_PI) < 1e-8);
  CHECK(rel(r.sum_j4_integral, r.sum) < 1e-8);
  CHECK(r.classification == "inconclusive/consistent-with-stability");
  CHECK(r.condition_min > 0.0);
  CHECK(std::abs(power_zero_crossing(cache, 0.05, 1.5) - 0.5) < 1e-5);
  // below the crossing the average turns negative
  StabilityReport low = stability_report(cache, profile(ProfileKind::power, 0.3), 1e-8);
  CHECK(low.sum < 0.0);
  CHECK(low.classification != "inconclusive/consistent-with-stability");
  CHECK_THROWS(power_zero_crossing(cache, 0.6, 1.5));
}

TEST_CASE("summed second variation equals the integrated closed form on CP^2") {
  Connection C(spec_of(ConnectionKind::kahler_abelian, 2, 2, 1.0, 0.0));
  QuadratureRule Q = make_quadrature(2, default_resolution(2, QuadratureScheme::spherical_gauss),
                                     QuadratureScheme::spherical_gauss);
  StabilityCache cache = build_stability_cache(C, su_basis(2), Q);
  for (Profile F : {profile(ProfileKind::linear), profile(ProfileKind::power, 0.7)}) {
    StabilityReport r = stability_report(cache, F, 1e-8);
    CHECK(rel(r.sum, r.sum_j4_integral) < 1e-3);
  }
}
