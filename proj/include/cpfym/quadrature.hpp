#ifndef CPFYM_QUADRATURE_HPP
#define CPFYM_QUADRATURE_HPP

#include <functional>
#include <string>
#include <vector>

#include "cpfym/geometry.hpp"

namespace cpfym {

enum class QuadratureScheme {
  tensor_gauss,     // x = tan(u) per real coordinate, Gauss-Legendre in u
  spherical_gauss,  // Gauss-Legendre in hyperspherical angles, trapezoid in phases
  monte_carlo,      // Halton points, equal weights
};

const char* scheme_name(QuadratureScheme s);
QuadratureScheme parse_scheme(const std::string& name);

/// Nodes over the chart with weights that already include sqrt(det g).
struct QuadratureRule {
  int n = 0;
  QuadratureScheme scheme = QuadratureScheme::spherical_gauss;
  int resolution = 0;
  std::vector<ChartPoint> nodes;
  std::vector<double> weights;
  double tolerance = 0.0;  // declared accuracy for the integral of 1, relative to the volume
};

/// Vol(CP^n) = (2 pi)^n / n!.
double cp_volume(int n);

/// sqrt(det g) at p: 2^n / (1+|z|^2)^(n+1).
double volume_density(const ChartPoint& p);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

QuadratureRule make_quadrature(int n, int resolution, QuadratureScheme scheme);

/// Tensor Gauss-Legendre rule on the coordinate box |x_a - c_a| <= h, used
/// for integrands supported in that box.
QuadratureRule box_quadrature(const ChartPoint& center, double half_width, int resolution);

/// Default resolution per scheme and dimension.
int default_resolution(int n, QuadratureScheme scheme);

/// sum_i w_i f(x_i), evaluated in parallel, summed in node order.
double integrate(const QuadratureRule& rule, const std::function<double(const ChartPoint&)>& f);

/// Several integrands at once: f writes `count` values per node.
std::vector<double> integrate_many(const QuadratureRule& rule, std::size_t count,
                                   const std::function<void(const ChartPoint&, double*)>& f);

}  // namespace cpfym

#endif  // CPFYM_QUADRATURE_HPP
