// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/vec.hpp"

#include <span>
#include <vector>

namespace glintlab {

/// Convex polygon on the unit sphere bounded by great-circle arcs.
///
/// Vertices are stored so that every edge plane normal cross(v[i], v[i+1])
/// points into the polygon. Input with the opposite orientation is reversed
/// at construction. Consecutive identical vertices are tolerated and make
/// the polygon degenerate (zero solid angle); antipodal consecutive vertices
/// and non-convex input are rejected with std::invalid_argument.
class SphericalPolygon {
public:
    explicit SphericalPolygon(std::vector<Vec3> vertices);

    /// Builds the polygon subtended by planar world-space corners seen from
    /// `origin`. Corners must not contain the origin.
    static SphericalPolygon from_points(std::span<const Vec3> corners, const Vec3& origin);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

    /// Normalized mean of the vertices.
    Vec3 mean_direction() const;

private:
    std::vector<Vec3> vertices_;
};

struct SphericalCap {
    SphericalCap(const Vec3& axis, double half_angle);

    Vec3 axis;
    double half_angle;
};

/// Solid angle 2*pi*(1 - cos(gamma)) of a cap with half-angle gamma in [0, pi/2].
double cap_solid_angle(double half_angle);

/// Spherical excess of a convex polygon. Degenerate polygons give 0.
double polygon_solid_angle(const SphericalPolygon& poly);

/// Boundary-inclusive membership test.
bool contains(const SphericalPolygon& poly, const Vec3& d);

bool contains(const SphericalCap& cap, const Vec3& d);

/// normalize(wi + wo); throws std::domain_error for antipodal inputs.
Vec3 halfway(const Vec3& wi, const Vec3& wo);

/// Mirror reflection 2(w.m)m - w.
inline Vec3 reflect(const Vec3& w, const Vec3& m) { return 2.0 * dot(w, m) * m - w; }

/// Orthonormal shading frame with the normal as local z and the view
/// direction inside the local xz-plane (positive x).
class ShadingFrame {
public:
    ShadingFrame(const Vec3& normal, const Vec3& view);

    Vec3 to_local(const Vec3& v) const { return {dot(v, t_), dot(v, b_), dot(v, n_)}; }
    Vec3 to_world(const Vec3& v) const { return t_ * v.x + b_ * v.y + n_ * v.z; }

    const Vec3& normal() const { return n_; }

private:
    Vec3 t_;
    Vec3 b_;
    Vec3 n_;
};

/// Any unit vector orthogonal to n.
Vec3 any_orthogonal(const Vec3& n);

} // namespace glintlab
