#pragma once

#include <cmath>

namespace hoist {

// Forward-mode scalar carrying one directional derivative. Model flux,
// source, and boundary-state routines are templated on the scalar type so
// their pointwise Jacobians come from re-evaluating with seeded duals.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  double inv = 1.0 / b.v;
  return {a.v * inv, (a.d - a.v * b.d * inv) * inv};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }
inline Dual& operator/=(Dual& a, Dual b) { a = a / b; return a; }

inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }

inline Dual sqrt(Dual a) {
  double s = std::sqrt(a.v);
  return {s, 0.5 * a.d / s};
}
inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, a.d * e};
}
inline Dual tanh(Dual a) {
  double t = std::tanh(a.v);
  return {t, a.d * (1.0 - t * t)};
}
inline Dual sin(Dual a) { return {std::sin(a.v), a.d * std::cos(a.v)}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -a.d * std::sin(a.v)}; }

// branch-selecting max/min: derivative follows the larger/smaller branch
inline Dual max(Dual a, Dual b) { return a.v >= b.v ? a : b; }
inline Dual min(Dual a, Dual b) { return a.v <= b.v ? a : b; }

// accessors letting templated code read plain values from either scalar
inline double value(double x) { return x; }
inline double value(Dual x) { return x.v; }

}  // namespace hoist
