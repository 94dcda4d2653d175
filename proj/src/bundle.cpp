#include "cpfym/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpfym {
namespace {

template <class T>
T ipow(const T& x, int e) {
  T r(1.0);
  for (int i = 0; i < e; ++i) r = r * x;
  return r;
}

double factorial(int p) {
  double f = 1.0;
  for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

void check_rank(int r) {
  if (r < 2 || r > 8) throw std::invalid_argument("bundle rank must be in [2, 8]");
}

AlgValue rotation(int r, int i, int j) {
  AlgValue s = AlgValue::Zero(r, r);
  s(j, i) = 1.0;
  s(i, j) = -1.0;
  return s;
}

// Multiply a scalar field by a constant block.
template <class T>
void add_scaled_block(Tensor<T>& out, int slot_index, const T& coeff, const AlgValue& M) {
  const int r = out.block;
  T* b = out.block_ptr(static_cast<std::size_t>(slot_index));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (M(i, j) != 0.0) b[i * r + j] += coeff * M(i, j);
}

template <class T>
T chart_s(const Point<T>& p) {
  T s(1.0);
  for (int a = 0; a < p.dim; ++a) s += p[a] * p[a];
  return s;
}

Field model_potential(ConnectionKind kind, int rank, double k, double eps) {
  check_rank(rank);
  const AlgValue s0 = sigma0(rank);
  const std::vector<AlgValue> T = test_generators(rank);
  switch (kind) {
    case ConnectionKind::flat:
      return Field::make(kMaxFieldLevel, [rank](const auto& p) {
        using S = std::decay_t<decltype(p[0])>;
        return Tensor<S>(p.dim, 1, rank);
      });
    case ConnectionKind::kahler_abelian:
    case ConnectionKind::nonabelian_test:
      return Field::make(kMaxFieldLevel, [rank, k, eps, s0, T, kind](const auto& p) {
        using S = std::decay_t<decltype(p[0])>;
        const int n = p.dim / 2;
        Tensor<S> out(p.dim, 1, rank);
        S s = chart_s(p);
        S inv = S(1.0) / s;
        for (int j = 0; j < n; ++j) {
          add_scaled_block(out, j, -(k * p[n + j]) * inv, s0);
          add_scaled_block(out, n + j, (k * p[j]) * inv, s0);
        }
        if (kind == ConnectionKind::nonabelian_test && eps != 0.0) {
          add_scaled_block(out, 0, eps * inv, T[0]);
          add_scaled_block(out, n, eps * inv, T[1]);
          add_scaled_block(out, n - 1, eps * p[n - 1] * inv * inv, T[2]);
        }
        return out;
      });
    default:
      throw std::invalid_argument("model potential: unsupported kind");
  }
}

}  // namespace

double alg_inner(const AlgValue& a, const AlgValue& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("alg_inner: dimension mismatch");
  return (a.transpose() * b).trace();
}

AlgValue bracket(const AlgValue& a, const AlgValue& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("bracket: dimension mismatch");
  return a * b - b * a;
}

AlgValue sigma0(int r) { return rotation(r, 0, 1); }

std::vector<AlgValue> test_generators(int r) {
  check_rank(r);
  if (r == 2) return {sigma0(2), sigma0(2), sigma0(2)};
  return {rotation(r, 1, 2), rotation(r, 2, 0), rotation(r, 0, 1)};
}

AlgValue random_so(int r, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  AlgValue a = AlgValue::Zero(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      a(i, j) = nd(rng);
      a(j, i) = -a(i, j);
    }
  return a;
}

double form_inner(const AlgForm& a, const AlgForm& b, const Frame& frame) {
  if (a.degree() != b.degree()) throw std::invalid_argument("form_inner: degree mismatch");
  if (a.rank() != b.rank()) throw std::invalid_argument("form_inner: rank mismatch");
  return full_contraction(to_frame(a.comps, frame), to_frame(b.comps, frame)) / factorial(a.degree());
}

double form_norm(const AlgForm& a, const Frame& frame) { return std::sqrt(std::max(0.0, form_inner(a, a, frame))); }

BumpForm random_bump(int n, int rank, int degree, std::mt19937_64& rng, const ChartPoint& center, double half_width,
                     double scale) {
  if (degree < 0 || degree > 2) throw std::invalid_argument("random_bump: degree must be 0, 1 or 2");
  check_rank(rank);
  const int m = 2 * n;
  BumpForm b;
  b.degree = degree;
  b.rank = rank;
  b.center = center;
  b.half_width = half_width;
  const std::size_t comps = detail::ipow(m, degree);
  b.constant.assign(comps, AlgValue::Zero(rank, rank));
  b.linear.assign(comps, std::vector<AlgValue>(static_cast<std::size_t>(m), AlgValue::Zero(rank, rank)));
  auto fill = [&](std::size_t f) {
    b.constant[f] = random_so(rank, rng, scale);
    for (int a = 0; a < m; ++a) b.linear[f][static_cast<std::size_t>(a)] = random_so(rank, rng, 0.5 * scale);
  };
  if (degree < 2) {
    for (std::size_t f = 0; f < comps; ++f) fill(f);
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        std::size_t f = static_cast<std::size_t>(i * m + j), g = static_cast<std::size_t>(j * m + i);
        fill(f);
        b.constant[g] = -b.constant[f];
        for (int a = 0; a < m; ++a) b.linear[g][static_cast<std::size_t>(a)] = -b.linear[f][static_cast<std::size_t>(a)];
      }
  }
  return b;
}

Field bump_field(const BumpForm& b) {
  return Field::make(kMaxFieldLevel, [b](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    const int m = p.dim;
    const int r = b.rank;
    if (b.center.dim != m) throw std::invalid_argument("bump: dimension mismatch");
    Tensor<S> out(m, b.degree, r);
    std::array<S, kMaxRealDim> u{};
    S prof(1.0);
    for (int a = 0; a < m; ++a) {
      u[static_cast<std::size_t>(a)] = (p[a] - b.center[a]) * (1.0 / b.half_width);
      if (std::abs(value_of(u[static_cast<std::size_t>(a)])) >= 1.0) return out;
      prof = prof * ipow(1.0 - u[static_cast<std::size_t>(a)] * u[static_cast<std::size_t>(a)], b.power);
    }
    const std::size_t comps = out.components();
    for (std::size_t f = 0; f < comps; ++f) {
      S* blk = out.block_ptr(f);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          S v(b.constant[f](i, j));
          for (int a = 0; a < m; ++a) {
            double c = b.linear[f][static_cast<std::size_t>(a)](i, j);
            if (c != 0.0) v += c * u[static_cast<std::size_t>(a)];
          }
          blk[i * r + j] = prof * v;
        }
    }
    return out;
  });
}

const char* connection_kind_name(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::flat: return "flat";
    case ConnectionKind::kahler_abelian: return "kahler_abelian";
    case ConnectionKind::nonabelian_test: return "nonabelian_test";
    case ConnectionKind::perturbed: return "perturbed";
    case ConnectionKind::custom: return "custom";
  }
  return "unknown";
}

ConnectionKind parse_connection_kind(const std::string& name) {
  if (name == "flat") return ConnectionKind::flat;
  if (name == "kahler_abelian") return ConnectionKind::kahler_abelian;
  if (name == "nonabelian_test") return ConnectionKind::nonabelian_test;
  if (name == "perturbed") return ConnectionKind::perturbed;
  throw std::invalid_argument("unknown connection kind '" + name + "'");
}

Field kahler_theta() {
  return Field::make(kMaxFieldLevel, [](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    const int n = p.dim / 2;
    Tensor<S> out(p.dim, 1);
    S inv = S(1.0) / chart_s(p);
    for (int j = 0; j < n; ++j) {
      out(j) = -(p[n + j] * inv);
      out(n + j) = p[j] * inv;
    }
    return out;
  });
}

Field kahler_form() {
  return Field::make(kMaxFieldLevel, [](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    const int n = p.dim / 2;
    Tensor<S> g = geometry(n).metric()(p);
    // omega(d_a, d_b) = g(J d_a, d_b); J d_{x_j} = d_{y_j}, J d_{y_j} = -d_{x_j}
    Tensor<S> out(p.dim, 2);
    for (int a = 0; a < p.dim; ++a) {
      const bool is_x = a < n;
      const int ja = is_x ? a + n : a - n;
      const double sign = is_x ? 1.0 : -1.0;
      for (int b = 0; b < p.dim; ++b) out(a, b) = sign * g(ja, b);
    }
    return out;
  });
}

Field curvature_of(const Field& potential) {
  return Field::make(potential.depth() - 1, [potential](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    Tensor<S> A;
    Tensor<S> dA = gradient_at(potential, p, &A);  // dA(c, b) = d_c A_b
    const int m = p.dim;
    const int r = A.block;
    Tensor<S> R(m, 2, r);
    const std::size_t bs = A.block_size();
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        S* out = R.block_ptr(static_cast<std::size_t>(a * m + b));
        const S* x = dA.block_ptr(static_cast<std::size_t>(a * m + b));
        const S* y = dA.block_ptr(static_cast<std::size_t>(b * m + a));
        for (std::size_t q = 0; q < bs; ++q) out[q] = x[q] - y[q];
        if (r > 1) add_commutator(out, A.block_ptr(static_cast<std::size_t>(a)), A.block_ptr(static_cast<std::size_t>(b)), r);
        S* twin = R.block_ptr(static_cast<std::size_t>(b * m + a));
        for (std::size_t q = 0; q < bs; ++q) twin[q] = -out[q];
      }
    return R;
  });
}

Connection::Connection(const ConnectionSpec& spec) : spec_(spec) {
  if (spec.n < 1 || spec.n > kMaxComplexDim) throw std::invalid_argument("connection: dimension out of range");
  check_rank(spec.rank);
  switch (spec.kind) {
    case ConnectionKind::flat:
    case ConnectionKind::kahler_abelian:
    case ConnectionKind::nonabelian_test:
      potential_ = model_potential(spec.kind, spec.rank, spec.strength, spec.amplitude);
      break;
    case ConnectionKind::perturbed: {
      if (!spec.bump) throw std::invalid_argument("perturbed connection: missing bump");
      if (spec.bump->degree != 1 || spec.bump->rank != spec.rank) throw std::invalid_argument("perturbed connection: bump must be a rank-matched 1-form");
      if (spec.base_kind == ConnectionKind::perturbed || spec.base_kind == ConnectionKind::custom)
        throw std::invalid_argument("perturbed connection: unsupported base kind");
      potential_ = add_fields(model_potential(spec.base_kind, spec.rank, spec.strength, spec.amplitude), bump_field(*spec.bump));
      break;
    }
    case ConnectionKind::custom:
      if (!spec.custom_potential.valid()) throw std::invalid_argument("custom connection: missing potential");
      potential_ = spec.custom_potential;
      break;
  }
  curvature_ = curvature_of(potential_);
}

Connection Connection::shifted(const Field& B, double t) const {
  ConnectionSpec s;
  s.kind = ConnectionKind::custom;
  s.n = spec_.n;
  s.rank = spec_.rank;
  s.custom_potential = add_fields(potential_, B, t);
  return Connection(s);
}

AlgForm evaluate(const Field& phi, const ChartPoint& p) { return {p, phi(p)}; }

AlgForm curvature(const Connection& C, const ChartPoint& p) { return evaluate(C.curvature(), p); }

AlgForm cov_deriv_form(const Connection& C, const Field& phi, const ChartPoint& p, const Tangent& X) {
  Tensor<double> D = covariant_derivative(phi, C.potential())(p);
  const std::size_t inner = D.data.size() / static_cast<std::size_t>(p.dim);
  Tensor<double> out(D.dim, D.slots - 1, D.block, D.upper >> 1);
  for (int c = 0; c < p.dim; ++c)
    for (std::size_t k = 0; k < inner; ++k) out.data[k] += X[c] * D.data[static_cast<std::size_t>(c) * inner + k];
  return {p, out};
}

AlgForm d_nabla(const Connection& C, const Field& phi, const ChartPoint& p) {
  return evaluate(exterior_derivative(phi, C.potential()), p);
}

AlgForm delta_nabla(const Connection& C, const Field& phi, const ChartPoint& p) {
  return evaluate(codifferential(phi, C.potential()), p);
}

AlgForm rough_laplacian(const Connection& C, const Field& phi, const ChartPoint& p) {
  return evaluate(rough_laplacian(phi, C.potential()), p);
}

AlgForm hodge_laplacian(const Connection& C, const Field& phi, const ChartPoint& p) {
  return evaluate(hodge_laplacian(phi, C.potential()), p);
}

Tensor<double> frak_r_frame(const Tensor<double>& R, const Tensor<double>& phi) {
  const int m = R.dim;
  const int r = R.block;
  Tensor<double> out(m, phi.slots, r);
  if (phi.slots == 1) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) add_commutator(out.block_ptr(i), R.block_ptr(j * m + i), phi.block_ptr(j), r);
    return out;
  }
  if (phi.slots == 2) {
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        double* o = out.block_ptr(i * m + k);
        for (int j = 0; j < m; ++j) {
          add_commutator(o, R.block_ptr(j * m + i), phi.block_ptr(j * m + k), r);
          add_commutator(o, R.block_ptr(j * m + k), phi.block_ptr(j * m + i), r, -1.0);
        }
      }
    return out;
  }
  throw std::invalid_argument("frak_R: unsupported degree (must be 1 or 2)");
}

AlgForm frak_R(const AlgForm& rpt, const AlgForm& phi) {
  if (phi.degree() != 1 && phi.degree() != 2) throw std::invalid_argument("frak_R: unsupported degree (must be 1 or 2)");
  Frame f = adapted_frame(rpt.base);
  return {rpt.base, from_frame(frak_r_frame(to_frame(rpt.comps, f), to_frame(phi.comps, f)), f)};
}

AlgForm curvature_action(const AlgForm& rpt, const AlgForm& phi, const Tangent& X, const Tangent& Y) {
  const ChartPoint& p = rpt.base;
  const int m = p.dim;
  const int r = phi.rank();
  Tensor<double> rm = riemann_at(p);
  AlgValue RXY = AlgValue::Zero(r, r);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);  // R_M(X,Y) d_i = sum_d M(i, d) d_d
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double w = X[a] * Y[b];
      if (w == 0.0) continue;
      RXY += w * block_map(rpt.comps, static_cast<std::size_t>(a * m + b));
      for (int i = 0; i < m; ++i)
        for (int d = 0; d < m; ++d) M(i, d) += w * rm(a, b, i, d);
    }
  const Tensor<double>& t = phi.comps;
  Tensor<double> out(m, t.slots, r);
  const std::size_t K = t.components();
  const std::size_t bs = t.block_size();
  const RowMatrix rowR = RXY;
  for (std::size_t k = 0; k < K; ++k) add_commutator(out.block_ptr(k), rowR.data(), t.block_ptr(k), r);
  for (int s = 0; s < t.slots; ++s) {
    const std::size_t stride = detail::ipow(m, t.slots - 1 - s);
    for (std::size_t k = 0; k < K; ++k) {
      const int i = static_cast<int>((k / stride) % static_cast<std::size_t>(m));
      const std::size_t base = k - static_cast<std::size_t>(i) * stride;
      double* o = out.block_ptr(k);
      for (int d = 0; d < m; ++d) {
        double w = M(i, d);
        if (w == 0.0) continue;
        const double* v = t.block_ptr(base + static_cast<std::size_t>(d) * stride);
        for (std::size_t q = 0; q < bs; ++q) o[q] -= w * v[q];
      }
    }
  }
  return {p, out};
}

Tensor<double> ricci_correction_frame(const Tensor<double>& phi, const Tensor<double>& rmf) {
  const int m = phi.dim;
  const int r = phi.block;
  const std::size_t bs = phi.block_size();
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(m, m);  // Ric e_i = sum_l ric(i, l) e_l
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l)
      for (int j = 0; j < m; ++j) ric(i, l) += rmf(i, j, j, l);
  Tensor<double> out(m, phi.slots, r);
  auto axpy = [bs](double* o, double w, const double* v) {
    if (w == 0.0) return;
    for (std::size_t q = 0; q < bs; ++q) o[q] += w * v[q];
  };
  if (phi.slots == 1) {
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < m; ++l) axpy(out.block_ptr(i), ric(i, l), phi.block_ptr(l));
    return out;
  }
  if (phi.slots == 2) {
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        double* o = out.block_ptr(i * m + k);
        for (int l = 0; l < m; ++l) {
          axpy(o, ric(i, l), phi.block_ptr(l * m + k));
          axpy(o, ric(k, l), phi.block_ptr(i * m + l));
        }
        for (int j = 0; j < m; ++j)
          for (int l = 0; l < m; ++l) axpy(o, rmf(i, k, j, l), phi.block_ptr(j * m + l));
      }
    return out;
  }
  throw std::invalid_argument("ricci correction: unsupported degree (must be 1 or 2)");
}

BochnerBreakdown bochner_residual(const Connection& C, const Field& phi, const ChartPoint& p) {
  Tensor<double> val = phi(p);
  if (val.slots != 1 && val.slots != 2) throw std::invalid_argument("bochner_residual: unsupported degree (must be 1 or 2)");
  Frame f = adapted_frame(p);
  Tensor<double> lap = to_frame(hodge_laplacian(phi, C.potential())(p), f);
  Tensor<double> rough = to_frame(rough_laplacian(phi, C.potential())(p), f);
  Tensor<double> Rf = to_frame(C.curvature()(p), f);
  Tensor<double> phif = to_frame(val, f);
  Tensor<double> rmf = riemann_in_frame(p, f);
  Tensor<double> fr = frak_r_frame(Rf, phif);
  Tensor<double> corr = ricci_correction_frame(phif, rmf);
  double res2 = 0.0, scale2 = 0.0;
  for (std::size_t i = 0; i < lap.data.size(); ++i) {
    double d = lap.data[i] - (rough.data[i] + fr.data[i] + corr.data[i]);
    res2 += d * d;
    scale2 += lap.data[i] * lap.data[i];
  }
  const double pf = factorial(val.slots);
  return {std::sqrt(res2 / pf), std::sqrt(scale2 / pf)};
}

Field half_wedge_bracket(const Field& B) {
  return Field::make(B.depth(), [B](const auto& p) {
    using S = std::decay_t<decltype(p[0])>;
    Tensor<S> b = B(p);
    const int m = p.dim;
    const int r = b.block;
    Tensor<S> out(m, 2, r);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c)
        if (a != c) add_commutator(out.block_ptr(static_cast<std::size_t>(a * m + c)), b.block_ptr(a), b.block_ptr(c), r);
    return out;
  });
}

double t_expansion_check(const Connection& C, const Field& B, const ChartPoint& p, double t) {
  Tensor<double> lhs = C.shifted(B, t).curvature()(p);
  Tensor<double> R = C.curvature()(p);
  Tensor<double> dB = exterior_derivative(B, C.potential())(p);
  Tensor<double> bb = half_wedge_bracket(B)(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.data.size(); ++i) {
    double rhs = R.data[i] + t * dB.data[i] + t * t * bb.data[i];
    worst = std::max(worst, std::abs(lhs.data[i] - rhs));
  }
  return worst;
}

}  // namespace cpfym
