#include "cpfym/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cpfym/parallel.hpp"

namespace cpfym {
namespace {

constexpr std::size_t kMaxNodes = 20'000'000;

std::size_t checked_count(int base, int exponent) {
  double c = std::pow(static_cast<double>(base), exponent);
  if (c > static_cast<double>(kMaxNodes)) throw std::invalid_argument("quadrature: resolution too large (node count exceeds limit)");
  return static_cast<std::size_t>(c);
}

double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::size_t>(base));
    i /= static_cast<std::size_t>(base);
    f *= inv;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

QuadratureRule tensor_rule(int n, int N) {
  std::vector<double> x, w;
  gauss_legendre(N, x, w);
  const double half = std::numbers::pi / 2;
  std::vector<double> coord(N), cw(N);
  for (int k = 0; k < N; ++k) {
    double u = half * x[k];
    double c = std::cos(u);
    coord[k] = std::tan(u);
    cw[k] = half * w[k] / (c * c);
  }
  QuadratureRule rule;
  const int m = 2 * n;
  const std::size_t total = checked_count(N, m);
  rule.nodes.resize(total);
  rule.weights.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    ChartPoint p = origin(n);
    double wt = 1.0;
    std::size_t rem = f;
    for (int a = m - 1; a >= 0; --a) {
      int k = static_cast<int>(rem % static_cast<std::size_t>(N));
      rem /= static_cast<std::size_t>(N);
      p[a] = coord[k];
      wt *= cw[k];
    }
    rule.nodes[f] = p;
    rule.weights[f] = wt * volume_density(p);
  }
  rule.tolerance = 50.0 / std::pow(static_cast<double>(N), 4.0);
  return rule;
}

QuadratureRule spherical_rule(int n, int N) {
  std::vector<double> x, w;
  gauss_legendre(N, x, w);
  const double quarter = std::numbers::pi / 4;
  std::vector<double> ang(N), aw(N);
  for (int k = 0; k < N; ++k) {
    ang[k] = quarter * (x[k] + 1.0);
    aw[k] = quarter * w[k];
  }
  const double dxi = 2.0 * std::numbers::pi / N;
  QuadratureRule rule;
  const std::size_t total = checked_count(N, 2 * n);
  rule.nodes.resize(total);
  rule.weights.resize(total);
  std::vector<double> rho(static_cast<std::size_t>(n + 1));
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    std::vector<int> ia(static_cast<std::size_t>(n)), ix(static_cast<std::size_t>(n));
    for (int j = n - 1; j >= 0; --j) {
      ix[j] = static_cast<int>(rem % static_cast<std::size_t>(N));
      rem /= static_cast<std::size_t>(N);
    }
    for (int k = n - 1; k >= 0; --k) {
      ia[k] = static_cast<int>(rem % static_cast<std::size_t>(N));
      rem /= static_cast<std::size_t>(N);
    }
    // rho_0 = cos phi_1, rho_j = sin phi_1 .. sin phi_j cos phi_{j+1}, rho_n = prod sin
    double wt = std::pow(2.0, n);
    double sprod = 1.0;
    for (int k = 0; k < n; ++k) {
      double phi = ang[ia[k]];
      rho[k] = sprod * std::cos(phi);
      double s = std::sin(phi);
      wt *= aw[ia[k]] * std::pow(s, n - 1 - k);
      sprod *= s;
    }
    rho[n] = sprod;
    for (int j = 0; j <= n; ++j) wt *= rho[j];
    ChartPoint p = origin(n);
    for (int j = 0; j < n; ++j) {
      double r = rho[j + 1] / rho[0];
      double xi = dxi * ix[j];
      p[j] = r * std::cos(xi);
      p[n + j] = r * std::sin(xi);
      wt *= dxi;
    }
    rule.nodes[f] = p;
    rule.weights[f] = wt;
  }
  rule.tolerance = N >= 4 * n + 2 ? 1e-10 : (N >= 2 * n + 2 ? 1e-4 : 1e-2);
  return rule;
}

QuadratureRule monte_carlo_rule(int n, int N) {
  QuadratureRule rule;
  const std::size_t total = static_cast<std::size_t>(N);
  if (total > kMaxNodes) throw std::invalid_argument("quadrature: resolution too large (node count exceeds limit)");
  rule.nodes.resize(total);
  rule.weights.assign(total, cp_volume(n) / static_cast<double>(N));
  const std::size_t skip = 64;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t idx = i + skip;
    // uniform barycentric point (t_0..t_n) by stick breaking
    std::vector<double> t(static_cast<std::size_t>(n + 1));
    double remaining = 1.0;
    for (int k = 0; k < n; ++k) {
      double u = radical_inverse(idx, kPrimes[k]);
      double frac = 1.0 - std::pow(1.0 - u, 1.0 / (n - k));
      t[k] = remaining * frac;
      remaining -= t[k];
    }
    t[n] = remaining;
    ChartPoint p = origin(n);
    for (int j = 0; j < n; ++j) {
      double xi = 2.0 * std::numbers::pi * radical_inverse(idx, kPrimes[n + j]);
      double r = std::sqrt(t[j + 1] / std::max(t[0], 1e-300));
      p[j] = r * std::cos(xi);
      p[n + j] = r * std::sin(xi);
    }
    rule.nodes[i] = p;
  }
  rule.tolerance = 10.0 * std::pow(std::log(static_cast<double>(N) + 1.0), n) / static_cast<double>(N);
  return rule;
}

}  // namespace

const char* scheme_name(QuadratureScheme s) {
  switch (s) {
    case QuadratureScheme::tensor_gauss: return "tensor_gauss";
    case QuadratureScheme::spherical_gauss: return "spherical_gauss";
    case QuadratureScheme::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

QuadratureScheme parse_scheme(const std::string& name) {
  if (name == "tensor_gauss") return QuadratureScheme::tensor_gauss;
  if (name == "spherical_gauss") return QuadratureScheme::spherical_gauss;
  if (name == "monte_carlo") return QuadratureScheme::monte_carlo;
  throw std::invalid_argument("unknown quadrature scheme '" + name + "'");
}

double cp_volume(int n) {
  double v = 1.0;
  for (int k = 1; k <= n; ++k) v *= 2.0 * std::numbers::pi / k;
  return v;
}

double volume_density(const ChartPoint& p) {
  const int n = p.complex_dim();
  double s = 1.0;
  for (int a = 0; a < p.dim; ++a) s += p[a] * p[a];
  return std::pow(2.0, n) / std::pow(s, n + 1);
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  if (count < 1) throw std::invalid_argument("gauss_legendre: count must be positive");
  nodes.assign(static_cast<std::size_t>(count), 0.0);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  // P_count(x) and its derivative by the three-term recurrence
  auto legendre = [count](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= count; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (count == 1) p0 = 1.0;
    p = p1;
    dp = count * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(count - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(count - 1 - i)] = w;
  }
  if (count % 2 == 1) nodes[static_cast<std::size_t>(count / 2)] = 0.0;
}

int default_resolution(int n, QuadratureScheme scheme) {
  switch (scheme) {
    case QuadratureScheme::spherical_gauss: return n == 1 ? 16 : (n == 2 ? 12 : 8);
    case QuadratureScheme::tensor_gauss: return n == 1 ? 128 : (n == 2 ? 24 : 8);
    case QuadratureScheme::monte_carlo: return 100000;
  }
  return 8;
}

QuadratureRule make_quadrature(int n, int resolution, QuadratureScheme scheme) {
  if (n < 1 || n > kMaxComplexDim) throw std::invalid_argument("quadrature: dimension out of range");
  if (resolution <= 0) throw std::invalid_argument("quadrature: resolution must be positive");
  QuadratureRule rule;
  switch (scheme) {
    case QuadratureScheme::tensor_gauss: rule = tensor_rule(n, resolution); break;
    case QuadratureScheme::spherical_gauss: rule = spherical_rule(n, resolution); break;
    case QuadratureScheme::monte_carlo: rule = monte_carlo_rule(n, resolution); break;
  }
  rule.n = n;
  rule.scheme = scheme;
  rule.resolution = resolution;
  return rule;
}

QuadratureRule box_quadrature(const ChartPoint& center, double half_width, int resolution) {
  if (resolution <= 0) throw std::invalid_argument("quadrature: resolution must be positive");
  if (!(half_width > 0.0)) throw std::invalid_argument("quadrature: box half width must be positive");
  std::vector<double> x, w;
  gauss_legendre(resolution, x, w);
  const int m = center.dim;
  const std::size_t total = checked_count(resolution, m);
  QuadratureRule rule;
  rule.n = center.complex_dim();
  rule.scheme = QuadratureScheme::tensor_gauss;
  rule.resolution = resolution;
  rule.nodes.resize(total);
  rule.weights.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    ChartPoint p = center;
    double wt = 1.0;
    std::size_t rem = f;
    for (int a = m - 1; a >= 0; --a) {
      int k = static_cast<int>(rem % static_cast<std::size_t>(resolution));
      rem /= static_cast<std::size_t>(resolution);
      p[a] = center[a] + half_width * x[k];
      wt *= half_width * w[k];
    }
    rule.nodes[f] = p;
    rule.weights[f] = wt * volume_density(p);
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(const ChartPoint&)>& f) {
  std::vector<double> terms(rule.nodes.size());
  parallel_for(rule.nodes.size(), [&](std::size_t i) { terms[i] = rule.weights[i] * f(rule.nodes[i]); });
  return stable_sum(terms);
}

std::vector<double> integrate_many(const QuadratureRule& rule, std::size_t count,
                                   const std::function<void(const ChartPoint&, double*)>& f) {
  const std::size_t N = rule.nodes.size();
  std::vector<double> vals(N * count);
  parallel_for(N, [&](std::size_t i) {
    f(rule.nodes[i], vals.data() + i * count);
    for (std::size_t c = 0; c < count; ++c) vals[i * count + c] *= rule.weights[i];
  });
  std::vector<double> out(count);
  std::vector<double> col(N);
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t i = 0; i < N; ++i) col[i] = vals[i * count + c];
    out[c] = stable_sum(col);
  }
  return out;
}

}  // namespace cpfym
