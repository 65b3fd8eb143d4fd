#pragma once

#include <cmath>
#include <numbers>

namespace lorenzlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Point or tangent vector in cover coordinates.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
inline Vec2 unit_at(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

// Integer homology class on the torus.
struct Class2 {
  long a = 0;
  long b = 0;
  constexpr bool operator==(const Class2&) const = default;
  constexpr auto operator<=>(const Class2&) const = default;
  constexpr Vec2 vec() const { return {static_cast<double>(a), static_cast<double>(b)}; }
  constexpr Class2 operator-() const { return {-a, -b}; }
  constexpr Class2 operator+(Class2 o) const { return {a + o.a, b + o.b}; }
};

// Wraps an angle into (-pi, pi].
inline double wrap_pi(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

// Wraps an angle difference of line directions into (-pi/2, pi/2].
inline double wrap_half_pi(double a) {
  a = std::remainder(a, kPi);
  return a <= -kPi / 2 ? a + kPi : a;
}

// Reduces a coordinate into [0, 1).
inline double mod1(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

// Shortest signed offset on the unit circle, in [-1/2, 1/2).
inline double circle_offset(double d) { return d - std::floor(d + 0.5); }

inline Vec2 torus_offset(Vec2 d) { return {circle_offset(d.x), circle_offset(d.y)}; }

}  // namespace lorenzlab
