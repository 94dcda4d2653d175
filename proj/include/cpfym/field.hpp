#ifndef CPFYM_FIELD_HPP
#define CPFYM_FIELD_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "cpfym/tensor.hpp"

namespace cpfym {

/// Highest scalar level a Field evaluator is compiled for.
inline constexpr int kMaxFieldLevel = 3;

/// Analytic tensor field on the chart, evaluable at every scalar level up to
/// its depth. Depth d means the field can be differentiated exactly d times.
/// Fields are immutable and cheap to copy.
class Field {
 public:
  template <class T>
  using Fn = std::function<Tensor<T>(const Point<T>&)>;

  Field() = default;

  /// Wraps a generic callable `f(const Point<T>&) -> Tensor<T>` usable for
  /// every scalar level S0..S3.
  template <class F>
  static Field make(int depth, F f) {
    Field out;
    auto impl = std::make_shared<Impl>();
    impl->depth = depth < kMaxFieldLevel ? depth : kMaxFieldLevel;
    std::get<0>(impl->fns) = [f](const Point<S0>& p) { return f(p); };
    std::get<1>(impl->fns) = [f](const Point<S1>& p) { return f(p); };
    std::get<2>(impl->fns) = [f](const Point<S2>& p) { return f(p); };
    std::get<3>(impl->fns) = [f](const Point<S3>& p) { return f(p); };
    out.impl_ = std::move(impl);
    return out;
  }

  bool valid() const { return static_cast<bool>(impl_); }
  int depth() const { return impl_ ? impl_->depth : -1; }

  template <class T>
  Tensor<T> operator()(const Point<T>& p) const {
    constexpr int level = scalar_level_v<T>;
    if (!impl_) throw std::logic_error("field: evaluation of an empty field");
    if constexpr (level > kMaxFieldLevel) {
      throw std::logic_error("field: derivative depth exhausted");
    } else {
      if (level > impl_->depth) throw std::logic_error("field: derivative depth exhausted");
      return std::get<level>(impl_->fns)(p);
    }
  }

 private:
  struct Impl {
    int depth = 0;
    std::tuple<Fn<S0>, Fn<S1>, Fn<S2>, Fn<S3>> fns;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Partial derivative along coordinate a, as a field of one lower depth.
Field partial(const Field& f, int a);

/// All coordinate partials of `f` at p; the new index becomes slot 0.
template <class T>
Tensor<T> gradient_at(const Field& f, const Point<T>& p, Tensor<T>* value = nullptr) {
  Tensor<T> out;
  for (int c = 0; c < p.dim; ++c) {
    Tensor<Dual<T>> t = f(seed(p, c));
    if (c == 0) {
      out = Tensor<T>(t.dim, t.slots + 1, t.block, t.upper << 1);
      if (value) *value = primal(t);
    }
    std::size_t stride = t.data.size();
    for (std::size_t k = 0; k < stride; ++k) out.data[static_cast<std::size_t>(c) * stride + k] = t.data[k].d;
  }
  return out;
}

/// Directional derivative of `f` at p along the coordinate vector `dir`.
template <class T>
Tensor<T> directional_at(const Field& f, const Point<T>& p, const double* dir) {
  return tangent(f(seed_direction(p, dir)));
}

}  // namespace cpfym

#endif  // CPFYM_FIELD_HPP
