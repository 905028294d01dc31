#pragma once

#include <cmath>

namespace weylspec::numerics {

/// Extended-range scalar used wherever warp factors are evaluated. Warps such
/// as e^r are sampled out to r ~ 2000, far beyond the range of double.
using WideReal = long double;

/// Second-order forward-mode jet in the two coordinates (r, s).
///
/// Carries the value together with the full gradient and Hessian, so a single
/// pass through an expression yields f, f_r, f_s, f_rr, f_rs and f_ss exactly
/// (up to rounding).
template <typename T>
struct HyperDual {
  T value{};
  T d_r{};
  T d_s{};
  T d_rr{};
  T d_rs{};
  T d_ss{};

  static constexpr HyperDual constant(T c) { return {c, 0, 0, 0, 0, 0}; }
  static constexpr HyperDual variable_r(T r) { return {r, 1, 0, 0, 0, 0}; }
  static constexpr HyperDual variable_s(T s) { return {s, 0, 1, 0, 0, 0}; }

  constexpr bool operator==(const HyperDual&) const = default;
};

/// Composes a scalar function with known f, f', f'' at x.value.
template <typename T>
constexpr HyperDual<T> chain(const HyperDual<T>& x, T f, T f1, T f2) {
  return {f,
          f1 * x.d_r,
          f1 * x.d_s,
          f2 * x.d_r * x.d_r + f1 * x.d_rr,
          f2 * x.d_r * x.d_s + f1 * x.d_rs,
          f2 * x.d_s * x.d_s + f1 * x.d_ss};
}

template <typename T>
constexpr HyperDual<T> operator+(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.value + y.value, x.d_r + y.d_r,   x.d_s + y.d_s,
          x.d_rr + y.d_rr,   x.d_rs + y.d_rs, x.d_ss + y.d_ss};
}

template <typename T>
constexpr HyperDual<T> operator-(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.value - y.value, x.d_r - y.d_r,   x.d_s - y.d_s,
          x.d_rr - y.d_rr,   x.d_rs - y.d_rs, x.d_ss - y.d_ss};
}

template <typename T>
constexpr HyperDual<T> operator-(const HyperDual<T>& x) {
  return {-x.value, -x.d_r, -x.d_s, -x.d_rr, -x.d_rs, -x.d_ss};
}

template <typename T>
constexpr HyperDual<T> operator*(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.value * y.value,
          x.d_r * y.value + x.value * y.d_r,
          x.d_s * y.value + x.value * y.d_s,
          x.d_rr * y.value + 2 * x.d_r * y.d_r + x.value * y.d_rr,
          x.d_rs * y.value + x.d_r * y.d_s + x.d_s * y.d_r + x.value * y.d_rs,
          x.d_ss * y.value + 2 * x.d_s * y.d_s + x.value * y.d_ss};
}

template <typename T>
constexpr HyperDual<T> reciprocal(const HyperDual<T>& x) {
  const T inv = 1 / x.value;
  return chain(x, inv, -inv * inv, 2 * inv * inv * inv);
}

template <typename T>
constexpr HyperDual<T> operator/(const HyperDual<T>& x, const HyperDual<T>& y) {
  return x * reciprocal(y);
}

template <typename T>
HyperDual<T> sin(const HyperDual<T>& x) {
  const T sv = std::sin(x.value);
  const T cv = std::cos(x.value);
  return chain(x, sv, cv, -sv);
}

template <typename T>
HyperDual<T> cos(const HyperDual<T>& x) {
  const T sv = std::sin(x.value);
  const T cv = std::cos(x.value);
  return chain(x, cv, -sv, -cv);
}

template <typename T>
HyperDual<T> tan(const HyperDual<T>& x) {
  const T tv = std::tan(x.value);
  const T sec2 = 1 + tv * tv;
  return chain(x, tv, sec2, 2 * tv * sec2);
}

template <typename T>
HyperDual<T> sinh(const HyperDual<T>& x) {
  const T sv = std::sinh(x.value);
  return chain(x, sv, std::cosh(x.value), sv);
}

template <typename T>
HyperDual<T> cosh(const HyperDual<T>& x) {
  const T cv = std::cosh(x.value);
  return chain(x, cv, std::sinh(x.value), cv);
}

template <typename T>
HyperDual<T> tanh(const HyperDual<T>& x) {
  const T tv = std::tanh(x.value);
  const T sech2 = 1 - tv * tv;
  return chain(x, tv, sech2, -2 * tv * sech2);
}

template <typename T>
HyperDual<T> exp(const HyperDual<T>& x) {
  const T ev = std::exp(x.value);
  return chain(x, ev, ev, ev);
}

template <typename T>
HyperDual<T> log(const HyperDual<T>& x) {
  const T inv = 1 / x.value;
  return chain(x, std::log(x.value), inv, -inv * inv);
}

template <typename T>
HyperDual<T> sqrt(const HyperDual<T>& x) {
  const T root = std::sqrt(x.value);
  return chain(x, root, 1 / (2 * root), -1 / (4 * root * x.value));
}

/// |x| with the right-derivative convention at 0 (slope +1).
template <typename T>
HyperDual<T> abs(const HyperDual<T>& x) {
  return x.value < 0 ? -x : x;
}

/// x^n for integer n; valid for any sign of x (x != 0 when n < 0).
template <typename T>
HyperDual<T> pow_int(const HyperDual<T>& x, int n) {
  if (n == 0) return HyperDual<T>::constant(1);
  if (n == 1) return x;
  const T base = x.value;
  const T f = std::pow(base, static_cast<T>(n));
  const T f1 = n * std::pow(base, static_cast<T>(n - 1));
  const T f2 = static_cast<T>(n) * (n - 1) * std::pow(base, static_cast<T>(n - 2));
  return chain(x, f, f1, f2);
}

/// x^y = exp(y log x); requires x > 0.
template <typename T>
HyperDual<T> pow(const HyperDual<T>& x, const HyperDual<T>& y) {
  return exp(y * log(x));
}

}  // namespace weylspec::numerics
