// Array geometry, angle conventions and the closed-form TDOA -> direction map.
//
// Conventions used across the whole library (this is the one place they are
// defined):
//   - mic 1 sits at the origin, mic 2 at (b, 0, 0), mic 3 at (c_x, c_y, 0)
//   - azimuth theta in [-pi, pi] is measured from the +x axis toward +y
//   - elevation phi in [0, pi/2] is measured from the array plane toward +z
//   - sources live on the unit hemisphere z >= 0
//   - TDOAs are in meters: r_ij = |s - m_i| - |s - m_j|
#pragma once

#include <cmath>
#include <numbers>

namespace tridoa {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Wraps an angle to [-pi, pi].
double wrap_angle(double a);

/// 2D direction of arrival: azimuth theta in [-pi, pi], elevation phi in [0, pi/2].
struct Direction {
    double theta = 0.0;
    double phi = 0.0;
};

/// Cartesian twin of Direction on the unit hemisphere (z >= 0).
struct HemispherePoint {
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

/// Chord distance between two hemisphere points.
double chord(const HemispherePoint& a, const HemispherePoint& b);

/// Great-circle angle between two hemisphere points, radians.
double angle_between(const HemispherePoint& a, const HemispherePoint& b);

/// Microphone placement parameters (meters). Derived positions:
/// m1 = (0,0,0), m2 = (b,0,0), m3 = (c_x, c_y, 0).
struct ArrayGeometry {
    double b = 0.1;
    double c_x = 0.05;
    double c_y = 0.12;

    Vec3 mic(int i) const;   // i in {1,2,3}
    double d12() const { return b; }
    double d13() const { return std::sqrt(c_x * c_x + c_y * c_y); }
    double d23() const { return std::sqrt((c_x - b) * (c_x - b) + c_y * c_y); }
    /// Pair distance by flat pair index {0,1,2} = {(1,2),(1,3),(2,3)}.
    double pair_distance(int p) const;

    bool is_valid() const { return b > 0.0 && c_y != 0.0; }
};

/// Throws std::invalid_argument if the array is degenerate (linear or zero-spaced).
void validate(const ArrayGeometry& g);

/// TDOA triple in meters, component order [r12, r13, r23].
struct TdoaTriple {
    double r12 = 0.0;
    double r13 = 0.0;
    double r23 = 0.0;

    double operator[](int p) const { return p == 0 ? r12 : (p == 1 ? r13 : r23); }
    double& operator[](int p) { return p == 0 ? r12 : (p == 1 ? r13 : r23); }
};

/// Squared Euclidean distance between triples (m^2).
double squared_distance(const TdoaTriple& a, const TdoaTriple& b);

/// Far-field radius used to place sources when only the direction is known.
/// Must dominate the array aperture; enforced as r >= 100 * d12.
struct FarFieldRadius {
    double r = 100.0;
};

void validate(const FarFieldRadius& r, const ArrayGeometry& g);

HemispherePoint direction_to_point(const Direction& d);

/// Inverse of direction_to_point. At the pole (z = 1) theta is defined as 0.
Direction point_to_direction(const HemispherePoint& p);

/// Geometric TDOA of a point source at `source` (meters): r_ij = |s-m_i| - |s-m_j|.
TdoaTriple tdoa_from_geometry(const ArrayGeometry& g, const Vec3& source);

/// Result of the closed-form map. `clamped` is set when the source fell below
/// the horizon numerically (radicand clamped to zero); `inconsistent` when the
/// in-plane component exceeded the sphere radius by more than 5%.
struct CfMapResult {
    HemispherePoint point;
    bool clamped = false;
    bool inconsistent = false;

    bool ok() const { return !clamped && !inconsistent; }
};

/// Closed-form map from the two linearly independent TDOAs (r12, r13) to a
/// point on the far-field hemisphere of radius `r`, renormalized to unit length.
CfMapResult cf_map(double r12, double r13, const ArrayGeometry& g, FarFieldRadius r);

}  // namespace tridoa
