#include "cpfym/field.hpp"

#include <algorithm>
#include <cmath>

namespace cpfym {

Field partial(const Field& f, int a) {
  return Field::make(f.depth() - 1, [f, a](const auto& p) { return tangent(f(seed(p, a))); });
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.data.size() != b.data.size()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double max_abs(const Tensor<double>& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace cpfym
