#include "tridoa/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace tridoa {

double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    // remainder() returns (-pi, pi]; keep -pi representable for grid inputs
    return w;
}

double chord(const HemispherePoint& a, const HemispherePoint& b) {
    return (a.vec() - b.vec()).norm();
}

double angle_between(const HemispherePoint& a, const HemispherePoint& b) {
    double c = std::clamp(a.vec().dot(b.vec()), -1.0, 1.0);
    return std::acos(c);
}

Vec3 ArrayGeometry::mic(int i) const {
    switch (i) {
        case 1: return {0.0, 0.0, 0.0};
        case 2: return {b, 0.0, 0.0};
        case 3: return {c_x, c_y, 0.0};
        default: throw std::invalid_argument("mic index must be 1, 2 or 3");
    }
}

double ArrayGeometry::pair_distance(int p) const {
    switch (p) {
        case 0: return d12();
        case 1: return d13();
        case 2: return d23();
        default: throw std::invalid_argument("pair index must be 0, 1 or 2");
    }
}

void validate(const ArrayGeometry& g) {
    if (!(g.b > 0.0))
        throw std::invalid_argument("array geometry: b must be > 0");
    if (g.c_y == 0.0)
        throw std::invalid_argument("array geometry: c_y must be nonzero (nonlinear array required)");
    if (!(g.d13() > 0.0) || !(g.d23() > 0.0))
        throw std::invalid_argument("array geometry: coincident microphones");
}

double squared_distance(const TdoaTriple& a, const TdoaTriple& b) {
    double dx = a.r12 - b.r12;
    double dy = a.r13 - b.r13;
    double dz = a.r23 - b.r23;
    return dx * dx + dy * dy + dz * dz;
}

void validate(const FarFieldRadius& r, const ArrayGeometry& g) {
    if (!(r.r >= 100.0 * g.d12()))
        throw std::invalid_argument("far-field radius must be >= 100 x mic spacing");
}

HemispherePoint direction_to_point(const Direction& d) {
    double cp = std::cos(d.phi);
    return {cp * std::cos(d.theta), cp * std::sin(d.theta), std::sin(d.phi)};
}

Direction point_to_direction(const HemispherePoint& p) {
    double rxy = std::hypot(p.x, p.y);
    if (rxy < 1e-12)
        return {0.0, kPi / 2.0};  // pole: any azimuth is valid, use 0
    return {std::atan2(p.y, p.x), std::atan2(p.z, rxy)};
}

TdoaTriple tdoa_from_geometry(const ArrayGeometry& g, const Vec3& source) {
    double d1 = (source - g.mic(1)).norm();
    double d2 = (source - g.mic(2)).norm();
    double d3 = (source - g.mic(3)).norm();
    return {d1 - d2, d1 - d3, d2 - d3};
}

CfMapResult cf_map(double r12, double r13, const ArrayGeometry& g, FarFieldRadius ff) {
    validate(g);
    const double r = ff.r;
    if (!(std::abs(r12) < 2.0 * r))
        throw std::invalid_argument("cf_map: |r12| must be < 2r");

    double sx = (g.b * g.b + 2.0 * r12 * r - r12 * r12) / (2.0 * g.b);
    double sy = (g.c_x * g.c_x + g.c_y * g.c_y - r13 * r13 + 2.0 * r13 * r - 2.0 * g.c_x * sx) /
                (2.0 * g.c_y);

    CfMapResult out;
    double planar = std::hypot(sx, sy);
    if (planar > r * 1.05)
        out.inconsistent = true;

    double radicand = r * r - sx * sx - sy * sy;
    if (radicand < 0.0) {
        out.clamped = true;
        // source pushed below the horizon by noise: project onto the rim
        double n = planar > 0.0 ? planar : 1.0;
        out.point = {sx / n, sy / n, 0.0};
        return out;
    }
    double sz = std::sqrt(radicand);
    out.point = {sx / r, sy / r, sz / r};
    return out;
}

}  // namespace tridoa
