#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tridoa/geometry.hpp"

using namespace tridoa;

TEST_CASE("direction/point conversions: axis, pole and a known triple") {
    HemispherePoint p = direction_to_point({0.0, 0.0});
    CHECK(p.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z == doctest::Approx(0.0).epsilon(1e-12));

    p = direction_to_point({kPi / 2.0, kPi / 2.0});
    CHECK(p.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::hypot(p.x, p.y) < 1e-12);

    // direct trigonometric evaluation of (theta=0.6435, phi=0.9273)
    p = direction_to_point({0.6435, 0.9273});
    CHECK(p.x == doctest::Approx(0.48).epsilon(1e-4));
    CHECK(p.y == doctest::Approx(0.36).epsilon(1e-4));
    CHECK(p.z == doctest::Approx(0.80).epsilon(1e-4));
    Direction rt = point_to_direction(p);
    CHECK(std::abs(rt.theta - 0.6435) < 1e-12);
    CHECK(std::abs(rt.phi - 0.9273) < 1e-12);
}

TEST_CASE("pole azimuth is defined as zero") {
    Direction d = point_to_direction({0.0, 0.0, 1.0});
    CHECK(d.theta == 0.0);
    CHECK(d.phi == doctest::Approx(kPi / 2.0));
}

TEST_CASE("conversion round trip over random directions") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0);
    for (int i = 0; i < 1000; ++i) {
        Direction d{ut(rng), up(rng)};
        HemispherePoint p = direction_to_point(d);
        CHECK(std::abs(p.vec().norm() - 1.0) < 1e-12);
        Direction back = point_to_direction(p);
        CHECK(std::abs(back.theta - d.theta) < 1e-12);
        CHECK(std::abs(back.phi - d.phi) < 1e-12);
    }
}

TEST_CASE("tdoa_from_geometry: colinear, far-field and symmetric cases") {
    // colinear source: exact distance difference
    TdoaTriple q = tdoa_from_geometry({0.1, 0.0, 0.1}, {0.6, 0.0, 0.0});
    CHECK(q.r12 == doctest::Approx(0.1).epsilon(1e-12));

    // direct norm evaluation for a source far along +y
    q = tdoa_from_geometry({0.1, 0.05, 0.12}, {0.0, 100.0, 0.0});
    CHECK(q.r13 == doctest::Approx(0.11998748498277223).epsilon(1e-9));

    // c_x = b/2 puts mics 1 and 2 symmetric about the z axis above the midpoint
    q = tdoa_from_geometry({0.1, 0.05, 0.12}, {0.05, 0.0, 2.0});
    CHECK(q.r12 == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("geometric triples satisfy the pairwise identity and bounds") {
    ArrayGeometry g{0.1, 0.05, 0.12};
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0),
        ur(1.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        Vec3 src = direction_to_point({ut(rng), up(rng)}).vec() * ur(rng);
        TdoaTriple q = tdoa_from_geometry(g, src);
        CHECK(std::abs(q.r12 + q.r23 - q.r13) < 1e-12);
        CHECK(std::abs(q.r12) <= g.d12() + 1e-12);
        CHECK(std::abs(q.r13) <= g.d13() + 1e-12);
        CHECK(std::abs(q.r23) <= g.d23() + 1e-12);
    }
}

TEST_CASE("cf_map recovers the on-axis source") {
    ArrayGeometry g{0.1, 0.0, 0.1};
    FarFieldRadius r{100.0};
    TdoaTriple q = tdoa_from_geometry(g, {100.0, 0.0, 0.0});
    CfMapResult res = cf_map(q.r12, q.r13, g, r);
    Direction d = point_to_direction(res.point);
    CHECK(std::abs(d.theta) < 1e-6);
    CHECK(std::abs(d.phi) < 1e-6);
}

TEST_CASE("cf_map inverts the geometric model") {
    ArrayGeometry g{0.1, 0.05, 0.12};
    FarFieldRadius r{100.0};
    Direction d{37.0 * kPi / 180.0, 25.0 * kPi / 180.0};
    HemispherePoint p = direction_to_point(d);
    TdoaTriple q = tdoa_from_geometry(g, p.vec() * r.r);
    CfMapResult res = cf_map(q.r12, q.r13, g, r);
    CHECK(res.ok());
    CHECK(angle_between(res.point, p) < 1e-6);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0);
    for (int i = 0; i < 1000; ++i) {
        Direction dir{ut(rng), up(rng)};
        HemispherePoint pt = direction_to_point(dir);
        TdoaTriple qq = tdoa_from_geometry(g, pt.vec() * r.r);
        CHECK(angle_between(cf_map(qq.r12, qq.r13, g, r).point, pt) < 1e-6);
    }
}

TEST_CASE("cf_map clamps and flags inconsistent TDOAs") {
    ArrayGeometry g{0.1, 0.05, 0.12};
    FarFieldRadius r{100.0};
    TdoaTriple q = tdoa_from_geometry(g, {100.0, 0.0, 0.0});
    CfMapResult res = cf_map(q.r12 * 1.2, q.r13 * 1.2, g, r);
    CHECK(!res.ok());
    CHECK(res.clamped);
    CHECK(std::abs(res.point.vec().norm() - 1.0) < 1e-9);
    CHECK(res.point.z == 0.0);
}

TEST_CASE("degenerate geometries and far-field radii are rejected") {
    CHECK_THROWS_AS(validate(ArrayGeometry{0.0, 0.05, 0.12}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ArrayGeometry{0.1, 0.05, 0.0}), std::invalid_argument);
    ArrayGeometry g{0.1, 0.05, 0.12};
    CHECK_THROWS_AS(validate(FarFieldRadius{5.0}, g), std::invalid_argument);
    CHECK_NOTHROW(validate(FarFieldRadius{100.0}, g));
}
