// SPDX-License-Identifier: Apache-2.0

#include "glintlab/geom.hpp"

#include <stdexcept>

namespace glintlab {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kPlaneTolerance = 1e-12;

bool is_unit(const Vec3& v) { return std::abs(length(v) - 1.0) <= kUnitTolerance; }

} // namespace

SphericalPolygon::SphericalPolygon(std::vector<Vec3> vertices) : vertices_(std::move(vertices))
{
    const std::size_t n = vertices_.size();
    if (n < 3) {
        throw std::invalid_argument("spherical polygon needs at least 3 vertices");
    }
    for (const Vec3& v : vertices_) {
        if (!is_unit(v)) {
            throw std::invalid_argument("spherical polygon vertex is not unit length");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (dot(vertices_[i], vertices_[(i + 1) % n]) <= -1.0 + 1e-12) {
            throw std::invalid_argument("spherical polygon has antipodal consecutive vertices");
        }
    }

    // Orient so that edge normals point toward the interior.
    const Vec3 mean = mean_direction();
    double orientation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        orientation += dot(cross(vertices_[i], vertices_[(i + 1) % n]), mean);
    }
    if (orientation < 0.0) {
        std::reverse(vertices_.begin(), vertices_.end());
    }

    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 edge_normal = cross(vertices_[i], vertices_[(i + 1) % n]);
        const double len = length(edge_normal);
        if (len == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (dot(edge_normal, vertices_[j]) / len < -1e-9) {
                throw std::invalid_argument("spherical polygon is not convex");
            }
        }
    }
}

SphericalPolygon SphericalPolygon::from_points(std::span<const Vec3> corners, const Vec3& origin)
{
    std::vector<Vec3> dirs;
    dirs.reserve(corners.size());
    for (const Vec3& c : corners) {
        const Vec3 d = c - origin;
        const double len = length(d);
        if (len == 0.0) {
            throw std::invalid_argument("polygon corner coincides with the origin");
        }
        dirs.push_back(d / len);
    }
    return SphericalPolygon(std::move(dirs));
}

Vec3 SphericalPolygon::mean_direction() const
{
    Vec3 sum;
    for (const Vec3& v : vertices_) {
        sum += v;
    }
    const double len = length(sum);
    return len > 0.0 ? sum / len : vertices_.front();
}

SphericalCap::SphericalCap(const Vec3& axis_, double half_angle_) : axis(axis_), half_angle(half_angle_)
{
    if (!is_unit(axis)) {
        throw std::invalid_argument("cap axis is not unit length");
    }
    if (!(half_angle >= 0.0 && half_angle <= kPi / 2.0)) {
        throw std::domain_error("cap half-angle must lie in [0, pi/2]");
    }
}

double cap_solid_angle(double half_angle)
{
    if (!(half_angle >= 0.0 && half_angle <= kPi / 2.0)) {
        throw std::domain_error("cap half-angle must lie in [0, pi/2]");
    }
    // 1 - cos(g) = 2 sin^2(g/2), exact for tiny caps.
    const double s = std::sin(0.5 * half_angle);
    return 4.0 * kPi * s * s;
}

double polygon_solid_angle(const SphericalPolygon& poly)
{
    // Fan triangulation; each triangle via the Van Oosterom-Strackee form
    // of its spherical excess.
    const auto& v = poly.vertices();
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const Vec3& a = v[0];
        const Vec3& b = v[i];
        const Vec3& c = v[i + 1];
        const double numer = dot(a, cross(b, c));
        const double denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
        total += 2.0 * std::atan2(std::abs(numer), denom);
    }
    return total;
}

bool contains(const SphericalPolygon& poly, const Vec3& d)
{
    const auto& v = poly.vertices();
    const std::size_t n = v.size();
    if (dot(d, poly.mean_direction()) <= 0.0) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 edge_normal = cross(v[i], v[(i + 1) % n]);
        if (dot(edge_normal, d) < -kPlaneTolerance) {
            return false;
        }
    }
    return true;
}

bool contains(const SphericalCap& cap, const Vec3& d)
{
    return dot(cap.axis, d) >= std::cos(cap.half_angle) - kPlaneTolerance;
}

Vec3 halfway(const Vec3& wi, const Vec3& wo)
{
    const Vec3 sum = wi + wo;
    const double len = length(sum);
    if (len <= 1e-12) {
        throw std::domain_error("halfway vector undefined for antipodal directions");
    }
    return sum / len;
}

Vec3 any_orthogonal(const Vec3& n)
{
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    return normalize(cross(helper, n));
}

ShadingFrame::ShadingFrame(const Vec3& normal, const Vec3& view) : n_(normal)
{
    const Vec3 tangential = view - n_ * dot(view, n_);
    const double len = length(tangential);
    t_ = len > 1e-12 ? tangential / len : any_orthogonal(n_);
    b_ = cross(n_, t_);
}

} // namespace glintlab
