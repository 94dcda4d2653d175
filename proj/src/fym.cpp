#include "cpfym/fym.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cpfym/parallel.hpp"

namespace cpfym {
namespace {

using Blocks = Tensor<double>;

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// frame two-form helpers; slot pair flat index i*m+j
const double* blk(const Blocks& t, int i) { return t.block_ptr(static_cast<std::size_t>(i)); }
const double* blk(const Blocks& t, int i, int j) { return t.block_ptr(static_cast<std::size_t>(i * t.dim + j)); }

double inner2(const Blocks& a, const Blocks& b) { return 0.5 * full_contraction(a, b); }
double inner1(const Blocks& a, const Blocks& b) { return full_contraction(a, b); }

// i_Y R as a frame 1-form
Blocks contract(const Blocks& R, const Eigen::VectorXd& Y) {
  const int m = R.dim;
  const std::size_t bs = R.block_size();
  Blocks out(m, 1, R.block);
  for (int j = 0; j < m; ++j) {
    double* o = out.block_ptr(static_cast<std::size_t>(j));
    for (int a = 0; a < m; ++a) {
      if (Y[a] == 0.0) continue;
      const double* r = blk(R, a, j);
      for (std::size_t q = 0; q < bs; ++q) o[q] += Y[a] * r[q];
    }
  }
  return out;
}

// X0_c = <nabla_c R, R>
Eigen::VectorXd grad_half_norm(const Blocks& nablaR, const Blocks& R) {
  const int m = R.dim;
  const std::size_t inner = R.data.size();
  Eigen::VectorXd x0(m);
  for (int c = 0; c < m; ++c) x0[c] = 0.5 * dot(nablaR.data.data() + static_cast<std::size_t>(c) * inner, R.data.data(), inner);
  return x0;
}

// sum_c Y_c T(c, ...) for a tensor whose slot 0 is a derivative direction
Blocks along(const Blocks& T, const Eigen::VectorXd& Y) {
  Blocks out(T.dim, T.slots - 1, T.block);
  const std::size_t inner = out.data.size();
  for (int c = 0; c < T.dim; ++c)
    for (std::size_t k = 0; k < inner; ++k) out.data[k] += Y[c] * T.data[static_cast<std::size_t>(c) * inner + k];
  return out;
}

Eigen::MatrixXd ricci_matrix(const Blocks& rmf) {
  const int m = rmf.dim;
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l)
      for (int j = 0; j < m; ++j) ric(i, l) += rmf(i, j, j, l);
  return ric;
}

// R(Je_i, Je_j)
Blocks j_rotated(const Blocks& R, const Eigen::MatrixXd& J) {
  const int m = R.dim;
  const std::size_t bs = R.block_size();
  Blocks out(m, 2, R.block);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double* o = out.block_ptr(static_cast<std::size_t>(i * m + j));
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double w = J(a, i) * J(b, j);
          if (w == 0.0) continue;
          const double* r = blk(R, a, b);
          for (std::size_t q = 0; q < bs; ++q) o[q] += w * r[q];
        }
    }
  return out;
}

// G_ij = <i_{e_i} R, i_{e_j} R>
Eigen::MatrixXd contraction_gram(const Blocks& R) {
  const int m = R.dim;
  const std::size_t bs = R.block_size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) G(i, j) += dot(blk(R, i, k), blk(R, j, k), bs);
  return G;
}

double norm2_of(const Blocks& R) { return inner2(R, R); }

Tensor<double> frame_value(const Field& f, const ChartPoint& p, const Frame& frame) { return to_frame(f(p), frame); }

struct VariationFields {
  Field R, dB, fdB, delta_fdB;
};

VariationFields variation_fields(const Connection& C, const Profile& F, const Field& B, bool direct) {
  VariationFields v;
  v.R = C.curvature();
  v.dB = exterior_derivative(B, C.potential());
  if (direct) {
    Field x = half_norm_field(C);
    Field dB = v.dB;
    v.fdB = Field::make(std::min(x.depth(), dB.depth()), [x, dB, F](const auto& p) {
      auto t = dB(p);
      auto f1 = F.F1(x(p).data[0]);
      for (auto& e : t.data) e = f1 * e;
      return t;
    });
    v.delta_fdB = codifferential(v.fdB, C.potential());
  }
  return v;
}

double density(const VariationFields& v, const Profile& F, const Field& B, const ChartPoint& p,
               VariationPath path) {
  Frame f = adapted_frame(p);
  Blocks R = frame_value(v.R, p, f);
  Blocks dB = frame_value(v.dB, p, f);
  Blocks b = frame_value(B, p, f);
  const double x = 0.5 * inner2(R, R);
  F.check_domain(x);
  const double f1 = F.F1(x), f2 = F.F2(x);
  const double rdb = inner2(R, dB);
  double middle = 0.0;
  if (path == VariationPath::by_parts)
    middle = f1 * inner2(dB, dB);
  else
    middle = inner1(frame_value(v.delta_fdB, p, f), b);
  return f2 * rdb * rdb + middle + f1 * inner1(frak_r_frame(R, b), b);
}

double weighted_sum(const QuadratureRule& Q, const std::function<double(const ChartPoint&)>& f) { return integrate(Q, f); }

}  // namespace

const char* profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::linear: return "linear";
    case ProfileKind::power: return "power";
    case ProfileKind::regularized_power: return "regularized_power";
    case ProfileKind::exponential: return "exponential";
  }
  return "unknown";
}

ProfileKind parse_profile_kind(const std::string& name) {
  if (name == "linear") return ProfileKind::linear;
  if (name == "power") return ProfileKind::power;
  if (name == "regularized_power") return ProfileKind::regularized_power;
  if (name == "exponential") return ProfileKind::exponential;
  throw std::invalid_argument("unknown profile '" + name + "'");
}

void Profile::check_domain(double x) const {
  if (!std::isfinite(x) || x < 0.0) throw std::domain_error("profile: x outside [0, inf)");
  if (kind == ProfileKind::power && alpha < 2.0 && x <= 1e-300)
    throw std::domain_error("profile: power with alpha < 2 evaluated at x = 0");
  if (kind == ProfileKind::regularized_power && !(epsilon > 0.0))
    throw std::domain_error("profile: regularized power needs epsilon > 0");
}

std::string Profile::describe() const {
  std::ostringstream os;
  os << profile_kind_name(kind);
  if (kind == ProfileKind::power || kind == ProfileKind::regularized_power) os << "(alpha=" << alpha;
  if (kind == ProfileKind::regularized_power) os << ", epsilon=" << epsilon;
  if (kind == ProfileKind::power || kind == ProfileKind::regularized_power) os << ")";
  return os.str();
}

Field half_norm_field(const Connection& C) {
  Field R = C.curvature();
  const int n = C.n();
  return Field::make(R.depth(), [R, n](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    auto r = R(p);
    auto gi = geometry(n).inverse_metric()(p);
    Tensor<S> out(p.dim, 0);
    out.data[0] = 0.5 * detail::form_inner_coord(r, r, gi);
    return out;
  });
}

double functional(const Connection& C, const Profile& F, const QuadratureRule& Q) {
  Field x = half_norm_field(C);
  return weighted_sum(Q, [&](const ChartPoint& p) {
    double v = x(p).data[0];
    F.check_domain(v);
    return F.F(v);
  });
}

ElResidual el_residual(const Connection& C, const Profile& F, const ChartPoint& p) {
  Field R = C.curvature();
  Field x = half_norm_field(C);
  Field fR = Field::make(std::min(R.depth(), x.depth()), [R, x, F](const auto& q) {
    auto t = R(q);
    auto f1 = F.F1(x(q).data[0]);
    for (auto& e : t.data) e = f1 * e;
    return t;
  });
  Frame f = adapted_frame(p);
  Blocks direct = frame_value(codifferential(fR, C.potential()), p, f);
  Blocks Rf = frame_value(R, p, f);
  Blocks nR = frame_value(covariant_derivative(R, C.potential()), p, f);
  Blocks dR = frame_value(codifferential(R, C.potential()), p, f);
  const double xv = 0.5 * inner2(Rf, Rf);
  F.check_domain(xv);
  Blocks iX0 = contract(Rf, grad_half_norm(nR, Rf));
  Blocks split(dR.dim, 1, dR.block);
  for (std::size_t i = 0; i < split.data.size(); ++i) split.data[i] = F.F1(xv) * dR.data[i] - F.F2(xv) * iX0.data[i];
  ElResidual out;
  out.direct = std::sqrt(inner1(direct, direct));
  out.split = std::sqrt(inner1(split, split));
  Blocks diff = direct;
  for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= split.data[i];
  out.agreement = std::sqrt(inner1(diff, diff));
  return out;
}

double second_variation_density(const Connection& C, const Profile& F, const Field& B, const ChartPoint& p,
                                VariationPath path) {
  VariationFields v = variation_fields(C, F, B, path == VariationPath::direct);
  return density(v, F, B, p, path);
}

double second_variation(const Connection& C, const Profile& F, const Field& B, const QuadratureRule& Q,
                        VariationPath path) {
  VariationFields v = variation_fields(C, F, B, path == VariationPath::direct);
  return weighted_sum(Q, [&](const ChartPoint& p) { return density(v, F, B, p, path); });
}

double second_variation_fd(const Connection& C, const Profile& F, const Field& B, const QuadratureRule& Q,
                           double step) {
  Field R = C.curvature();
  Field dB = exterior_derivative(B, C.potential());
  Field bb = half_wedge_bracket(B);
  const std::array<double, 5> ts = {-step, -0.5 * step, 0.0, 0.5 * step, step};
  auto vals = integrate_many(Q, ts.size(), [&](const ChartPoint& p, double* out) {
    Frame f = adapted_frame(p);
    Blocks r = frame_value(R, p, f), d = frame_value(dB, p, f), b = frame_value(bb, p, f);
    Blocks rt = r;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double t = ts[k];
      for (std::size_t i = 0; i < rt.data.size(); ++i) rt.data[i] = r.data[i] + t * d.data[i] + t * t * b.data[i];
      const double x = 0.5 * inner2(rt, rt);
      F.check_domain(x);
      out[k] = F.F(x);
    }
  });
  const double dh = (vals[4] - 2.0 * vals[2] + vals[0]) / (step * step);
  const double dh2 = (vals[3] - 2.0 * vals[2] + vals[1]) / (0.25 * step * step);
  return (4.0 * dh2 - dh) / 3.0;
}

Field variation_field(const Connection& C, const KillingField& V) {
  Field R = C.curvature();
  Field jv = j_killing_field(V.generator);
  return Field::make(std::min(R.depth(), jv.depth()), [R, jv](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    auto r = R(p);
    auto v = jv(p);
    const int m = p.dim;
    const std::size_t bs = r.block_size();
    Tensor<S> out(m, 1, r.block);
    for (int b = 0; b < m; ++b) {
      S* o = out.block_ptr(static_cast<std::size_t>(b));
      for (int a = 0; a < m; ++a) {
        const S* x = r.block_ptr(static_cast<std::size_t>(a * m + b));
        for (std::size_t q = 0; q < bs; ++q) o[q] += v.data[static_cast<std::size_t>(a)] * x[q];
      }
    }
    return out;
  });
}

CurvaturePoint curvature_point(const Connection& C, const ChartPoint& p) {
  CurvaturePoint cp;
  cp.p = p;
  cp.frame = adapted_frame(p);
  Field R = C.curvature();
  Field dR = codifferential(R, C.potential());
  cp.R = frame_value(R, p, cp.frame);
  cp.nabla_R = frame_value(covariant_derivative(R, C.potential()), p, cp.frame);
  cp.delta_R = frame_value(dR, p, cp.frame);
  cp.nabla_delta_R = frame_value(covariant_derivative(dR, C.potential()), p, cp.frame);
  cp.riemann = riemann_in_frame(p, cp.frame);
  cp.x = 0.5 * inner2(cp.R, cp.R);
  return cp;
}

KillingPoint killing_point(const KillingField& V, const ChartPoint& p, const Frame& frame) {
  Field jv = j_killing_field(V.generator);
  Field d1 = covariant_derivative(jv);
  Field d2 = covariant_derivative(d1);
  const int m = p.dim;
  KillingPoint kp;
  Tensor<double> v = to_frame(jv(p), frame);
  Tensor<double> t1 = to_frame(d1(p), frame);
  Tensor<double> t2 = to_frame(d2(p), frame);
  kp.jv = Eigen::Map<const Eigen::VectorXd>(v.data.data(), m);
  kp.djv.resize(m, m);
  for (int c = 0; c < m; ++c)
    for (int l = 0; l < m; ++l) kp.djv(l, c) = t1(c, l);
  kp.d2.assign(static_cast<std::size_t>(m), Eigen::MatrixXd(m, m));
  kp.rough = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c)
      for (int l = 0; l < m; ++l) kp.d2[static_cast<std::size_t>(a)](l, c) = t2(a, c, l);
  for (int a = 0; a < m; ++a) kp.rough -= kp.d2[static_cast<std::size_t>(a)].col(a);
  return kp;
}

JTermBreakdown j_terms(const CurvaturePoint& cp, const KillingPoint& kp, const Profile& F) {
  const Blocks& R = cp.R;
  const int m = R.dim;
  const std::size_t bs = R.block_size();
  F.check_domain(cp.x);
  const double f1 = F.F1(cp.x), f2 = F.F2(cp.x);
  const Eigen::VectorXd& v = kp.jv;
  const Eigen::MatrixXd& D = kp.djv;

  Blocks N = along(cp.nabla_R, v);  // nabla_{JV} R
  Blocks B = contract(R, v);        // i_{JV} R
  Eigen::VectorXd x0 = grad_half_norm(cp.nabla_R, R);
  const double s = inner2(R, N);

  // R(D_{e_i} JV, e_j) assembled as a two-form in (i, j)
  Blocks RD(m, 2, R.block);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double* o = RD.block_ptr(static_cast<std::size_t>(i * m + j));
      for (int l = 0; l < m; ++l) {
        if (D(l, i) == 0.0) continue;
        const double* r = blk(R, l, j);
        for (std::size_t q = 0; q < bs; ++q) o[q] += D(l, i) * r[q];
      }
    }
  const double pv = full_contraction(R, RD);

  JTermBreakdown out;
  out.p_v = pv;
  out.j1 = f2 * (s * s - inner1(contract(N, x0), B));

  double t2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) {
        if (D(l, i) == 0.0) continue;
        const double* bj = blk(B, j);
        t2 += D(l, i) * (dot(cp.nabla_R.block_ptr(static_cast<std::size_t>((i * m + l) * m + j)), bj, bs) +
                         dot(cp.nabla_R.block_ptr(static_cast<std::size_t>((l * m + i) * m + j)), bj, bs));
      }
  Eigen::VectorXd dx0 = D * x0;
  out.j2 = f2 * (2.0 * s * pv - inner1(contract(R, dx0), B)) - f1 * t2;

  out.j3 = f1 * inner1(along(cp.nabla_delta_R, v), B);

  Eigen::MatrixXd ric = ricci_matrix(cp.riemann);
  Eigen::VectorXd ric_v = ric.transpose() * v;
  double t4 = 0.0;
  for (int j = 0; j < m; ++j) {
    const double* bj = blk(B, j);
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd u = kp.d2[static_cast<std::size_t>(i)].col(j);
      for (int a = 0; a < m; ++a)
        if (u[a] != 0.0) t4 += u[a] * dot(blk(R, a, i), bj, bs);
      for (int l = 0; l < m; ++l) {
        double y = 0.0;
        for (int a = 0; a < m; ++a) y += v[a] * cp.riemann(i, a, j, l);
        if (y != 0.0) t4 += y * dot(blk(R, i, l), bj, bs);
      }
    }
  }
  out.j4 = f2 * pv * pv + f1 * inner1(contract(R, kp.rough - ric_v), B) + f1 * t4;

  double defect = 0.0;
  for (int j = 0; j < m; ++j) {
    const double* bj = blk(B, j);
    for (int a = 0; a < m; ++a) {
      if (D(a, j) == 0.0) continue;
      double acc = f1 * dot(blk(cp.delta_R, a), bj, bs);
      for (int c = 0; c < m; ++c)
        if (x0[c] != 0.0) acc += f2 * x0[c] * dot(blk(R, a, c), bj, bs);
      defect += D(a, j) * acc;
    }
  }
  out.fym_defect = defect;
  return out;
}

JTermBreakdown j_terms(const Connection& C, const Profile& F, const KillingField& V, const ChartPoint& p) {
  CurvaturePoint cp = curvature_point(C, p);
  return j_terms(cp, killing_point(V, p, cp.frame), F);
}

KillingSums killing_sums(const CurvaturePoint& cp, const Profile& F, const KillingBasis& basis) {
  KillingSums s;
  for (const KillingField& V : basis.elements) {
    JTermBreakdown t = j_terms(cp, killing_point(V, cp.p, cp.frame), F);
    s.j1 += t.j1;
    s.j2 += t.j2;
    s.j3 += t.j3;
    s.j4 += t.j4;
    s.p_v_squares += t.p_v * t.p_v;
  }
  const double r2 = 2.0 * cp.x;
  const double nr2 = 0.5 * full_contraction(cp.nabla_R, cp.nabla_R);
  const double ndr = std::sqrt(full_contraction(cp.nabla_delta_R, cp.nabla_delta_R));
  s.scale = (std::abs(F.F1(cp.x)) + std::abs(F.F2(cp.x)) * r2) * (r2 + nr2 + ndr * std::sqrt(r2));
  return s;
}

EstimateQuantities estimate_quantities(const Tensor<double>& R, int n) {
  const int m = 2 * n;
  if (R.dim != m || R.slots != 2) throw std::invalid_argument("estimate_quantities: expected a frame two-form");
  const std::size_t bs = R.block_size();
  const Eigen::MatrixXd J = standard_j(n);
  EstimateQuantities e;
  e.r_norm2 = norm2_of(R);
  Blocks RJ = j_rotated(R, J);
  std::vector<double> trace(bs, 0.0);  // sum_i R(e_i, J e_i)
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < m; ++a) {
      if (J(a, i) == 0.0) continue;
      const double* r = blk(R, i, a);
      for (std::size_t q = 0; q < bs; ++q) trace[q] += J(a, i) * r[q];
    }
  e.q1 = 2.0 * e.r_norm2 + full_contraction(R, RJ) + dot(trace.data(), trace.data(), bs);
  Eigen::MatrixXd G = contraction_gram(R);
  Eigen::MatrixXd GJ = J.transpose() * G * J;
  e.q2 = 4.0 * e.r_norm2 * e.r_norm2 + (G.array() * G.array()).sum() + (G.array() * GJ.array()).sum();
  // least squares sigma for R_ij = W_ij sigma, W_ij = g(e_i, J e_j) = J(i, j)
  std::vector<double> sigma(bs, 0.0);
  const double w2 = (J.array() * J.array()).sum();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (J(i, j) != 0.0)
        for (std::size_t q = 0; q < bs; ++q) sigma[q] += J(i, j) * blk(R, i, j)[q] / w2;
  double res = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (std::size_t q = 0; q < bs; ++q) {
        double d = blk(R, i, j)[q] - J(i, j) * sigma[q];
        res += d * d;
      }
  e.equality_residual = e.r_norm2 > 0.0 ? std::sqrt(0.5 * res / e.r_norm2) : 0.0;
  return e;
}

double sum_j4_closed_form(const Tensor<double>& R, const Profile& F, int n) {
  EstimateQuantities e = estimate_quantities(R, n);
  const double x = 0.5 * e.r_norm2;
  F.check_domain(x);
  return F.F1(x) * e.q1 + F.F2(x) * e.q2;
}

double djv_contraction_z0(const Tensor<double>& R, const KillingField& V, int n) {
  const Eigen::MatrixXd D = djv_table_z0(V, n);
  const int m = 2 * n;
  const std::size_t bs = R.block_size();
  double pv = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l)
        if (D(l, i) != 0.0) pv += D(l, i) * dot(blk(R, i, j), blk(R, l, j), bs);
  return pv;
}

DjvFamilySums djv_family_sums(const Tensor<double>& R, int n) {
  DjvFamilySums s;
  for (const KillingField& V : su_basis(n).elements) {
    const double pv = djv_contraction_z0(R, V, n);
    if (V.family == 'A') s.a += pv * pv;
    if (V.family == 'B') s.b += pv * pv;
    if (V.family == 'C') s.c += pv * pv;
  }
  const Eigen::MatrixXd G = contraction_gram(R);
  double diag = 0.0;
  for (int al = 0; al < n; ++al) {
    for (int be = 0; be < n; ++be) {
      const double u = G(al, n + be) - G(n + al, be);
      const double w = G(al, be) + G(n + al, n + be);
      s.a_expected += u * u;
      s.b_expected += w * w;
    }
    // i = alpha and i = n + alpha give the same term
    const double w = G(al, al) + G(n + al, n + al);
    diag += w * w;
  }
  const double r2 = norm2_of(R);
  s.b_expected -= diag;
  s.c_expected = diag + 4.0 * r2 * r2;
  return s;
}

Tensor<double> random_curvature_sample(int n, int rank, std::mt19937_64& rng) {
  const int m = 2 * n;
  Blocks R(m, 2, rank);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      AlgValue a = random_so(rank, rng);
      block_map(R, static_cast<std::size_t>(i * m + j)) = a;
      block_map(R, static_cast<std::size_t>(j * m + i)) = -a;
    }
  const double s = std::sqrt(norm2_of(R));
  for (auto& e : R.data) e /= s;
  return R;
}

Tensor<double> equality_curvature_sample(int n, int rank, std::mt19937_64& rng) {
  const int m = 2 * n;
  const Eigen::MatrixXd J = standard_j(n);
  AlgValue sigma = random_so(rank, rng);
  Blocks R(m, 2, rank);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (J(i, j) != 0.0) block_map(R, static_cast<std::size_t>(i * m + j)) = J(i, j) * sigma;
  const double s = std::sqrt(norm2_of(R));
  for (auto& e : R.data) e /= s;
  return R;
}

double gap_frak_constant(int n) { return 8.0 * (n - 1) / std::sqrt(2.0 * n * (2.0 * n - 1.0)); }

double gap_threshold(int n) {
  if (n < 2) throw std::invalid_argument("gap threshold requires n >= 2");
  return (2.0 * n - 1.0) * std::sqrt(2.0 * n * (2.0 * n - 1.0)) / (8.0 * (n - 1));
}

GapPointwise gap_pointwise(const Tensor<double>& R, int n) {
  const int m = 2 * n;
  const std::size_t bs = R.block_size();
  static thread_local std::vector<Blocks> models(kMaxComplexDim + 1);
  if (models[static_cast<std::size_t>(n)].data.empty()) models[static_cast<std::size_t>(n)] = model_riemann_frame(n);
  const Blocks& rmf = models[static_cast<std::size_t>(n)];
  const Eigen::MatrixXd J = standard_j(n);
  const Eigen::MatrixXd ric = ricci_matrix(rmf);
  Blocks ricR(m, 2, R.block), twoR(m, 2, R.block);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      double* o = ricR.block_ptr(static_cast<std::size_t>(i * m + k));
      double* t = twoR.block_ptr(static_cast<std::size_t>(i * m + k));
      for (int l = 0; l < m; ++l)
        for (std::size_t q = 0; q < bs; ++q) o[q] += ric(i, l) * blk(R, l, k)[q] + ric(k, l) * blk(R, i, l)[q];
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
          double w = rmf(i, k, j, l);
          if (w == 0.0) continue;
          for (std::size_t q = 0; q < bs; ++q) t[q] += w * blk(R, j, l)[q];
        }
    }
  Blocks RJ = j_rotated(R, J);
  std::vector<double> trace(bs, 0.0);
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < m; ++a)
      if (J(a, j) != 0.0)
        for (std::size_t q = 0; q < bs; ++q) trace[q] += J(a, j) * blk(R, j, a)[q];
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      const double gjik = J(k, i);  // g(J e_i, e_k)
      for (std::size_t q = 0; q < bs; ++q) {
        double e = -blk(R, i, k)[q] - blk(RJ, i, k)[q] - trace[q] * gjik;
        worst = std::max(worst, std::abs(blk(twoR, i, k)[q] - e));
      }
    }
  GapPointwise g;
  const double r2 = norm2_of(R);
  g.r_norm = std::sqrt(r2);
  g.ric_term = inner2(ricR, R);
  g.two_r_term = inner2(twoR, R);
  g.expansion_residual = worst;
  g.frak_term = inner2(frak_r_frame(R, R), R);
  g.integrand = (2.0 * n - 1.0 - gap_frak_constant(n) * g.r_norm) * r2;
  return g;
}

double power_threshold(int n) {
  if (n < 1) throw std::invalid_argument("power threshold requires n >= 1");
  return (-static_cast<double>(n) * n + n + 4.0) / (2.0 * n + 4.0);
}

double power_crossing_closed_form(int n) { return 1.0 - 0.5 * n; }

StabilityCache build_stability_cache(const Connection& C, const KillingBasis& basis, const QuadratureRule& Q) {
  const std::size_t q = basis.elements.size();
  const std::size_t N = Q.nodes.size();
  const int n = C.n();
  StabilityCache cache;
  cache.n = n;
  cache.weights = Q.weights;
  cache.x.assign(N, 0.0);
  cache.q1.assign(N, 0.0);
  cache.q2.assign(N, 0.0);
  cache.a.assign(N * q, 0.0);
  cache.b.assign(N * q, 0.0);
  cache.c.assign(N * q, 0.0);
  std::vector<Field> Bs, dBs;
  for (const KillingField& V : basis.elements) {
    cache.labels.push_back(V.label);
    Bs.push_back(variation_field(C, V));
    dBs.push_back(exterior_derivative(Bs.back(), C.potential()));
  }
  Field R = C.curvature();
  parallel_for(N, [&](std::size_t node) {
    const ChartPoint& p = Q.nodes[node];
    Frame f = adapted_frame(p);
    Blocks r = frame_value(R, p, f);
    EstimateQuantities e = estimate_quantities(r, n);
    cache.x[node] = 0.5 * e.r_norm2;
    cache.q1[node] = e.q1;
    cache.q2[node] = e.q2;
    for (std::size_t k = 0; k < q; ++k) {
      Blocks b = frame_value(Bs[k], p, f);
      Blocks d = frame_value(dBs[k], p, f);
      const double rd = inner2(r, d);
      cache.a[node * q + k] = rd * rd;
      cache.b[node * q + k] = inner2(d, d);
      cache.c[node * q + k] = inner1(frak_r_frame(r, b), b);
    }
  });
  return cache;
}

StabilityReport stability_report(const StabilityCache& cache, const Profile& F, double tolerance) {
  const std::size_t N = cache.weights.size();
  const std::size_t q = cache.labels.size();
  const int n = cache.n;
  StabilityReport rep;
  rep.labels = cache.labels;
  std::vector<std::vector<double>> terms(q, std::vector<double>(N));
  std::vector<double> j4(N);
  rep.condition_min = std::numeric_limits<double>::infinity();
  rep.condition_max = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < N; ++node) {
    const double x = cache.x[node];
    F.check_domain(x);
    const double f1 = F.F1(x), f2 = F.F2(x), w = cache.weights[node];
    for (std::size_t k = 0; k < q; ++k)
      terms[k][node] = w * (f2 * cache.a[node * q + k] + f1 * (cache.b[node * q + k] + cache.c[node * q + k]));
    j4[node] = w * (f1 * cache.q1[node] + f2 * cache.q2[node]);
    const double cond = (2.0 + 4.0 / n) * f2 * x + (n + 1.0) * f1;
    rep.condition_min = std::min(rep.condition_min, cond);
    rep.condition_max = std::max(rep.condition_max, cond);
  }
  double mag = 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    rep.per_v.push_back(stable_sum(terms[k]));
    mag += std::abs(rep.per_v.back());
  }
  rep.sum = stable_sum(rep.per_v);
  rep.sum_j4_integral = stable_sum(j4);
  const double thr = tolerance * std::max(1.0, mag);
  bool some_negative = std::any_of(rep.per_v.begin(), rep.per_v.end(), [thr](double v) { return v < -thr; });
  if (some_negative)
    rep.classification = "instability certificate";
  else if (rep.sum < -thr)
    rep.classification = "average-nonpositive";
  else
    rep.classification = "inconclusive/consistent-with-stability";
  return rep;
}

double power_zero_crossing(const StabilityCache& cache, double lo, double hi, double width) {
  auto g = [&](double alpha) {
    Profile F;
    F.kind = ProfileKind::power;
    F.alpha = alpha;
    return stability_report(cache, F, 0.0).sum;
  };
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo < 0.0) == (ghi < 0.0)) throw std::runtime_error("power_zero_crossing: no sign change on the bracket");
  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LapFCheck lap_f_check(const Connection& C, const Profile& F, const ChartPoint& p) {
  Field x = half_norm_field(C);
  Field f = Field::make(x.depth(), [x, F](const auto& q) {
    auto t = x(q);
    t.data[0] = F.F(t.data[0]);
    return t;
  });
  LapFCheck out;
  out.lhs = rough_laplacian(f)(p).data[0];
  Frame fr = adapted_frame(p);
  Field R = C.curvature();
  Blocks r = frame_value(R, p, fr);
  Blocks nr = frame_value(covariant_derivative(R, C.potential()), p, fr);
  Blocks rough = frame_value(rough_laplacian(R, C.potential()), p, fr);
  const double xv = 0.5 * inner2(r, r);
  F.check_domain(xv);
  const double f1 = F.F1(xv), f2 = F.F2(xv);
  Eigen::VectorXd x0 = grad_half_norm(nr, r);
  const double t1 = f2 * x0.squaredNorm();
  const double t2 = f1 * 0.5 * full_contraction(nr, nr);
  const double t3 = f1 * inner2(rough, r);
  out.rhs = -t1 - t2 + t3;
  out.scale = std::max({std::abs(out.lhs), std::abs(t1), std::abs(t2), std::abs(t3)});
  return out;
}

GapReport gap_report(const Connection& C, const Profile& F, const QuadratureRule& Q,
                     const std::vector<ChartPoint>& samples) {
  const int n = C.n();
  GapReport g;
  g.n = n;
  g.threshold = gap_threshold(n);
  for (const ChartPoint& p : samples) {
    LapFCheck l = lap_f_check(C, F, p);
    g.lap_f_residual = std::max(g.lap_f_residual, std::abs(l.lhs - l.rhs) / std::max(1.0, l.scale));
  }
  const std::size_t N = Q.nodes.size();
  Field R = C.curvature();
  std::vector<GapPointwise> pts(N);
  std::vector<double> bal(N), f2(N);
  parallel_for(N, [&](std::size_t k) {
    const ChartPoint& p = Q.nodes[k];
    Blocks r = frame_value(R, p, adapted_frame(p));
    pts[k] = gap_pointwise(r, n);
    const double x = 0.5 * pts[k].r_norm * pts[k].r_norm;
    F.check_domain(x);
    f2[k] = F.F2(x);
    bal[k] = Q.weights[k] * F.F1(x) * (pts[k].ric_term + pts[k].two_r_term + pts[k].frak_term);
  });
  g.min_two_r_ratio = std::numeric_limits<double>::infinity();
  g.min_frak_margin = std::numeric_limits<double>::infinity();
  g.min_integrand = std::numeric_limits<double>::infinity();
  const double cn = gap_frak_constant(n);
  for (std::size_t k = 0; k < N; ++k) {
    const GapPointwise& pt = pts[k];
    const double r2 = pt.r_norm * pt.r_norm;
    g.sup_norm = std::max(g.sup_norm, pt.r_norm);
    g.ric_residual = std::max(g.ric_residual, std::abs(pt.ric_term - (2.0 * n + 2.0) * r2));
    g.expansion_residual = std::max(g.expansion_residual, pt.expansion_residual);
    if (r2 > 1e-24) g.min_two_r_ratio = std::min(g.min_two_r_ratio, pt.two_r_term / r2);
    g.min_frak_margin = std::min(g.min_frak_margin, pt.frak_term + cn * r2 * pt.r_norm);
    g.min_integrand = std::min(g.min_integrand, pt.integrand);
    if (f2[k] < 0.0) g.f2_nonnegative = false;
  }
  if (!std::isfinite(g.min_two_r_ratio)) g.min_two_r_ratio = 0.0;
  g.balance = stable_sum(bal);
  return g;
}

}  // namespace cpfym
