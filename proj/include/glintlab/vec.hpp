// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glintlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3& v) { return v / length(v); }

struct Vec2 {
    double u = 0.0;
    double v = 0.0;

    constexpr Vec2 operator+(const Vec2& o) const { return {u + o.u, v + o.v}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {u - o.u, v - o.v}; }
    constexpr Vec2 operator*(double s) const { return {u * s, v * s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double cross(const Vec2& a, const Vec2& b) { return a.u * b.v - a.v * b.u; }

/// Linear RGB triple. Used for radiance, reflectance and pixel values.
struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    constexpr Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
    constexpr Rgb operator-(const Rgb& o) const { return {r - o.r, g - o.g, b - o.b}; }
    constexpr Rgb operator*(const Rgb& o) const { return {r * o.r, g * o.g, b * o.b}; }
    constexpr Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
    constexpr Rgb operator/(double s) const { return {r / s, g / s, b / s}; }
    constexpr Rgb& operator+=(const Rgb& o) { r += o.r; g += o.g; b += o.b; return *this; }
    constexpr bool operator==(const Rgb&) const = default;

    constexpr double average() const { return (r + g + b) / 3.0; }
    constexpr bool is_black() const { return r == 0.0 && g == 0.0 && b == 0.0; }
};

constexpr Rgb operator*(double s, const Rgb& c) { return c * s; }

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double safe_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

inline double radians(double deg) { return deg * kPi / 180.0; }
inline double degrees(double rad) { return rad * 180.0 / kPi; }

} // namespace glintlab
