#ifndef CPFYM_DUAL_HPP
#define CPFYM_DUAL_HPP

// Forward-mode dual numbers. Nesting Dual<Dual<...>> gives exact mixed
// directional derivatives; the level of a scalar type is its nesting depth.

#include <cmath>
#include <type_traits>

namespace cpfym {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  constexpr Dual() = default;
  template <class U>
    requires std::is_arithmetic_v<U>
  constexpr Dual(U c) : v(T(static_cast<double>(c))), d(T(0.0)) {}
  constexpr Dual(const T& c)
    requires(!std::is_same_v<T, double>)
      : v(c), d(T(0.0)) {}
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
  Dual& operator*=(double c) { v *= c; d *= c; return *this; }
};

using S0 = double;
using S1 = Dual<S0>;
using S2 = Dual<S1>;
using S3 = Dual<S2>;
using S4 = Dual<S3>;

template <class T>
struct ScalarLevel : std::integral_constant<int, 0> {};
template <class T>
struct ScalarLevel<Dual<T>> : std::integral_constant<int, ScalarLevel<T>::value + 1> {};
template <class T>
inline constexpr int scalar_level_v = ScalarLevel<T>::value;

template <class T> constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = T(1.0) / b.v;
  T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}

template <class T> constexpr Dual<T> operator+(const Dual<T>& a, double c) { return {a.v + c, a.d}; }
template <class T> constexpr Dual<T> operator+(double c, const Dual<T>& a) { return {a.v + c, a.d}; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a, double c) { return {a.v - c, a.d}; }
template <class T> constexpr Dual<T> operator-(double c, const Dual<T>& a) { return {c - a.v, -a.d}; }
template <class T> constexpr Dual<T> operator*(const Dual<T>& a, double c) { return {a.v * c, a.d * c}; }
template <class T> constexpr Dual<T> operator*(double c, const Dual<T>& a) { return {a.v * c, a.d * c}; }
template <class T> constexpr Dual<T> operator/(const Dual<T>& a, double c) { return {a.v / c, a.d / c}; }
template <class T> constexpr Dual<T> operator/(double c, const Dual<T>& a) { return Dual<T>(c) / a; }

/// Innermost double value of a (possibly nested) scalar.
inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class T> Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, a.d * e};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
  if (p == 0.0) return Dual<T>(1.0);
  T pm1 = pow(a.v, p - 1.0);
  return {pm1 * a.v, p * pm1 * a.d};
}
template <class T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), cos(a.v) * a.d}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -(sin(a.v) * a.d)}; }

}  // namespace cpfym

#endif  // CPFYM_DUAL_HPP
