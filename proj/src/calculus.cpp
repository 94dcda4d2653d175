#include "cpfym/calculus.hpp"

#include <algorithm>
#include <array>

namespace cpfym {
namespace {

int min_depth(std::initializer_list<int> ds) {
  int d = kMaxFieldLevel;
  for (int x : ds) d = std::min(d, x);
  return d;
}

template <class T>
Tensor<T> nabla_impl(const Field& phi, const Field& pot, const Point<T>& p, bool levi_civita) {
  Tensor<T> val;
  Tensor<T> out = gradient_at(phi, p, &val);
  const int m = p.dim;
  const int S = val.slots;
  const int r = val.block;
  const std::size_t K = val.components();
  const std::size_t bs = val.block_size();
  if (pot.valid() && r > 1) {
    Tensor<T> A = pot(p);
    for (int c = 0; c < m; ++c)
      for (std::size_t k = 0; k < K; ++k) add_commutator(out.block_ptr(c * K + k), A.block_ptr(c), val.block_ptr(k), r);
  }
  if (levi_civita && S > 0) {
    Tensor<T> gam = geometry(m / 2).christoffel()(p);
    for (int s = 0; s < S; ++s) {
      const std::size_t stride = detail::ipow(m, S - 1 - s);
      const bool up = (val.upper >> s) & 1u;
      for (int c = 0; c < m; ++c)
        for (std::size_t k = 0; k < K; ++k) {
          const int i = static_cast<int>((k / stride) % static_cast<std::size_t>(m));
          const std::size_t base = k - static_cast<std::size_t>(i) * stride;
          T* o = out.block_ptr(c * K + k);
          for (int e = 0; e < m; ++e) {
            T w = up ? gam(i, c, e) : -gam(e, c, i);
            const T* v = val.block_ptr(base + static_cast<std::size_t>(e) * stride);
            for (std::size_t q = 0; q < bs; ++q) o[q] += w * v[q];
          }
        }
    }
  }
  return out;
}

template <class T>
Tensor<T> exterior_impl(const Field& phi, const Field& pot, const Point<T>& p) {
  Tensor<T> D = nabla_impl(phi, pot, p, false);
  const int m = p.dim;
  const int deg = D.slots - 1;
  Tensor<T> out(m, deg + 1, D.block);
  const std::size_t bs = D.block_size();
  const std::size_t total = out.components();
  std::array<int, 8> idx{};
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int s = deg; s >= 0; --s) {
      idx[static_cast<std::size_t>(s)] = static_cast<int>(rem % static_cast<std::size_t>(m));
      rem /= static_cast<std::size_t>(m);
    }
    T* o = out.block_ptr(f);
    for (int i = 0; i <= deg; ++i) {
      std::size_t g = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
      for (int s = 0; s <= deg; ++s)
        if (s != i) g = g * static_cast<std::size_t>(m) + static_cast<std::size_t>(idx[static_cast<std::size_t>(s)]);
      const T* d = D.block_ptr(g);
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t q = 0; q < bs; ++q) o[q] += sign * d[q];
    }
  }
  return out;
}

Tensor<double> transform_slots(const Tensor<double>& t, const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper) {
  // new(..i..) = sum_a M(i, a) old(..a..), slot by slot
  Tensor<double> cur = t;
  const int m = t.dim;
  const std::size_t bs = t.block_size();
  for (int s = 0; s < t.slots; ++s) {
    const Eigen::MatrixXd& M = ((t.upper >> s) & 1u) ? upper : lower;
    Tensor<double> next(m, t.slots, t.block, t.upper);
    const std::size_t stride = detail::ipow(m, t.slots - 1 - s);
    const std::size_t K = t.components();
    for (std::size_t k = 0; k < K; ++k) {
      const int i = static_cast<int>((k / stride) % static_cast<std::size_t>(m));
      const std::size_t base = k - static_cast<std::size_t>(i) * stride;
      double* o = next.block_ptr(k);
      for (int a = 0; a < m; ++a) {
        const double w = M(i, a);
        if (w == 0.0) continue;
        const double* v = cur.block_ptr(base + static_cast<std::size_t>(a) * stride);
        for (std::size_t q = 0; q < bs; ++q) o[q] += w * v[q];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

Field covariant_derivative(const Field& phi, const Field& potential) {
  int d = min_depth({phi.depth() - 1, potential.valid() ? potential.depth() : kMaxFieldLevel, kMaxFieldLevel - 1});
  return Field::make(d, [phi, potential](const auto& p) { return nabla_impl(phi, potential, p, true); });
}

Field exterior_derivative(const Field& phi, const Field& potential) {
  int d = min_depth({phi.depth() - 1, potential.valid() ? potential.depth() : kMaxFieldLevel});
  return Field::make(d, [phi, potential](const auto& p) { return exterior_impl(phi, potential, p); });
}

Field codifferential(const Field& phi, const Field& potential) {
  Field nab = covariant_derivative(phi, potential);
  return Field::make(nab.depth(), [nab](const auto& p) {
    auto gi = geometry(p.dim / 2).inverse_metric()(p);
    auto t = detail::trace01(nab(p), gi);
    for (auto& v : t.data) v = -v;
    return t;
  });
}

Field rough_laplacian(const Field& phi, const Field& potential) {
  Field nab2 = covariant_derivative(covariant_derivative(phi, potential), potential);
  return Field::make(nab2.depth(), [nab2](const auto& p) {
    auto gi = geometry(p.dim / 2).inverse_metric()(p);
    auto t = detail::trace01(nab2(p), gi);
    for (auto& v : t.data) v = -v;
    return t;
  });
}

Field add_fields(const Field& a, const Field& b, double scale_b) {
  return Field::make(std::min(a.depth(), b.depth()), [a, b, scale_b](const auto& p) {
    auto x = a(p);
    auto y = b(p);
    if (x.data.size() != y.data.size()) throw std::invalid_argument("add_fields: shape mismatch");
    for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += scale_b * y.data[i];
    return x;
  });
}

Field hodge_laplacian(const Field& phi, const Field& potential) {
  Field dd = codifferential(exterior_derivative(phi, potential), potential);
  return Field::make(dd.depth(), [phi, potential, dd](const auto& p) {
    auto out = dd(p);
    if (out.slots >= 1) {
      Field dl = exterior_derivative(codifferential(phi, potential), potential);
      auto other = dl(p);
      for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += other.data[i];
    }
    return out;
  });
}

Tensor<double> to_frame(const Tensor<double>& t, const Frame& frame) {
  return transform_slots(t, frame.vectors.transpose(), frame.inverse);
}

Tensor<double> from_frame(const Tensor<double>& t, const Frame& frame) {
  return transform_slots(t, frame.inverse.transpose(), frame.vectors);
}

double full_contraction(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.data.size() != b.data.size()) throw std::invalid_argument("full_contraction: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

}  // namespace cpfym
