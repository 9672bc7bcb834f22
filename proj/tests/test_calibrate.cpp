#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tridoa/calibrate.hpp"

using namespace tridoa;

TEST_CASE("linear least squares solves in a few accepted steps") {
    // well-conditioned 3x3 system: r(x) = A x - b, solution A^-1 b
    auto residuals = [](const std::vector<double>& x) {
        return std::vector<double>{
            2.0 * x[0] + 0.3 * x[1] - 0.1 * x[2] - 1.0,
            0.2 * x[0] + 1.5 * x[1] + 0.4 * x[2] - 2.0,
            -0.3 * x[0] + 0.1 * x[1] + 1.8 * x[2] - 0.5,
        };
    };
    LmResult r = lm_minimize(residuals, {0.0, 0.0, 0.0});
    CHECK(r.converged);
    CHECK(r.rms < 1e-10);
    // cost reaches the optimum within the first 3 accepted steps
    REQUIRE(r.accepted_costs.size() >= 2);
    size_t steps_to_zero = 0;
    for (size_t i = 1; i < r.accepted_costs.size(); ++i) {
        if (r.accepted_costs[i] < 1e-16) {
            steps_to_zero = i;
            break;
        }
    }
    CHECK(steps_to_zero >= 1);
    CHECK(steps_to_zero <= 3);
    auto res = residuals(r.x);
    for (double v : res) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("scalar slope fit") {
    auto residuals = [](const std::vector<double>& x) {
        return std::vector<double>{x[0] * 1.0 - 2.0, x[0] * 2.0 - 4.0};
    };
    LmResult r = lm_minimize(residuals, {0.3});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("rosenbrock-style residuals from the classic start point") {
    auto residuals = [](const std::vector<double>& x) {
        return std::vector<double>{10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]};
    };
    LmResult r = lm_minimize(residuals, {-1.2, 1.0});
    CHECK(r.converged);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-8);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-8);
}

TEST_CASE("accepted steps never increase the cost") {
    auto residuals = [](const std::vector<double>& x) {
        return std::vector<double>{10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0],
                                   0.1 * std::sin(3.0 * x[0])};
    };
    LmResult r = lm_minimize(residuals, {-1.2, 1.0});
    for (size_t i = 1; i < r.accepted_costs.size(); ++i)
        CHECK(r.accepted_costs[i] <= r.accepted_costs[i - 1]);
}

TEST_CASE("unsolvable steps abort with converged = false") {
    // residual is finite only at the start point: every probe is NaN, the
    // damped system never yields a finite step and damping runs out
    std::vector<double> x0{1.0};
    auto residuals = [x0](const std::vector<double>& x) {
        if (x[0] == x0[0]) return std::vector<double>{1.0};
        return std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
    };
    LmResult r = lm_minimize(residuals, x0);
    CHECK(!r.converged);
    CHECK(r.x[0] == 1.0);
}

TEST_CASE("central and forward difference jacobians agree") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    FarFieldRadius r{100.0};
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0);

    FieldDataset ds;
    for (int i = 0; i < 40; ++i) {
        Direction d{ut(rng), up(rng)};
        Vec3 src = direction_to_point(d).vec() * r.r;
        ds.records.push_back({d, tdoa_from_geometry(truth, src), r.r});
    }
    ResidualFn fn = [&](const std::vector<double>& x) {
        ArrayGeometry g{x[0], x[1], x[2]};
        std::vector<double> out;
        for (const auto& rec : ds.records) {
            Vec3 src = direction_to_point(rec.direction).vec() * rec.distance.value();
            TdoaTriple q = tdoa_from_geometry(g, src);
            out.push_back(q.r12 - rec.tdoa.r12);
            out.push_back(q.r13 - rec.tdoa.r13);
            out.push_back(q.r23 - rec.tdoa.r23);
        }
        return out;
    };

    std::vector<double> x{0.103, 0.047, 0.125};
    auto jc = numeric_jacobian(fn, x, FdScheme::kCentral);
    auto jf = numeric_jacobian(fn, x, FdScheme::kForward);
    REQUIRE(jc.size() == jf.size());
    // compare J^T J and J^T r assembled from both schemes
    auto r0 = fn(x);
    for (size_t a = 0; a < 3; ++a) {
        double jtr_c = 0.0, jtr_f = 0.0;
        for (size_t i = 0; i < jc.size(); ++i) {
            jtr_c += jc[i][a] * r0[i];
            jtr_f += jf[i][a] * r0[i];
        }
        CHECK(jtr_c == doctest::Approx(jtr_f).epsilon(1e-4));
        for (size_t b = 0; b < 3; ++b) {
            double jtj_c = 0.0, jtj_f = 0.0;
            for (size_t i = 0; i < jc.size(); ++i) {
                jtj_c += jc[i][a] * jc[i][b];
                jtj_f += jf[i][a] * jf[i][b];
            }
            CHECK(jtj_c == doctest::Approx(jtj_f).epsilon(1e-4));
        }
    }
}

namespace {

FieldDataset synth_dataset(const ArrayGeometry& g, double distance, double noise_sigma,
                           unsigned seed) {
    FieldDataset ds;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (const auto& d : latlong_lattice(10)) {
        Vec3 src = direction_to_point(d).vec() * distance;
        TdoaTriple q = tdoa_from_geometry(g, src);
        if (noise_sigma > 0.0) {
            q.r12 += gauss(rng);
            q.r13 += gauss(rng);
            q.r23 += gauss(rng);
        }
        ds.records.push_back({d, q, distance});
    }
    return ds;
}

}  // namespace

TEST_CASE("noiseless calibration recovers a perturbed geometry exactly") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    FieldDataset ds = synth_dataset(truth, 100.0, 0.0, 0);
    ArrayGeometry init{truth.b + 5e-3, truth.c_x + 5e-3, truth.c_y + 5e-3};
    CalibrationResult res = calibrate_geometry(ds, init, {100.0});
    CHECK(res.converged);
    CHECK(std::abs(res.geometry.b - truth.b) < 1e-7);    // 1e-4 mm
    CHECK(std::abs(res.geometry.c_x - truth.c_x) < 1e-7);
    CHECK(std::abs(res.geometry.c_y - truth.c_y) < 1e-7);
    CHECK(res.rms_residual < 1e-9);
}

TEST_CASE("near-field collection distance is honored when recorded") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    FieldDataset ds = synth_dataset(truth, 0.6, 0.0, 0);  // speaker at 0.6 m
    ArrayGeometry init{truth.b - 4e-3, truth.c_x + 3e-3, truth.c_y + 5e-3};
    CalibrationResult res = calibrate_geometry(ds, init, {100.0});
    CHECK(res.converged);
    CHECK(std::abs(res.geometry.b - truth.b) < 1e-7);
    CHECK(std::abs(res.geometry.c_x - truth.c_x) < 1e-7);
    CHECK(std::abs(res.geometry.c_y - truth.c_y) < 1e-7);
}

TEST_CASE("noisy calibration lands within half a millimeter") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    for (unsigned seed = 1; seed <= 20; ++seed) {
        FieldDataset ds = synth_dataset(truth, 100.0, 1e-4, seed);  // 0.1 mm AWGN
        ArrayGeometry init{truth.b + 5e-3, truth.c_x + 5e-3, truth.c_y + 5e-3};
        CalibrationResult res = calibrate_geometry(ds, init, {100.0});
        CHECK(std::abs(res.geometry.b - truth.b) < 5e-4);
        CHECK(std::abs(res.geometry.c_x - truth.c_x) < 5e-4);
        CHECK(std::abs(res.geometry.c_y - truth.c_y) < 5e-4);
        CHECK(res.rms_residual < 5e-4);
    }
}

TEST_CASE("starting at the optimum converges immediately") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    FieldDataset ds = synth_dataset(truth, 100.0, 0.0, 0);
    CalibrationResult res = calibrate_geometry(ds, truth, {100.0});
    CHECK(res.converged);
    CHECK(res.iterations <= 1);
    CHECK(res.rms_residual < 1e-12);
}

TEST_CASE("calibration cost never exceeds the initial cost") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    std::mt19937 rng(73);
    std::normal_distribution<double> mm(0.0, 3e-3);
    for (int trial = 0; trial < 10; ++trial) {
        FieldDataset ds = synth_dataset(truth, 100.0, 5e-4, 100 + static_cast<unsigned>(trial));
        ArrayGeometry init{truth.b + mm(rng), truth.c_x + mm(rng), truth.c_y + mm(rng)};
        auto cost = [&](const ArrayGeometry& g) {
            double acc = 0.0;
            for (const auto& rec : ds.records) {
                Vec3 src = direction_to_point(rec.direction).vec() * rec.distance.value();
                TdoaTriple q = tdoa_from_geometry(g, src);
                acc += (q.r12 - rec.tdoa.r12) * (q.r12 - rec.tdoa.r12) +
                       (q.r13 - rec.tdoa.r13) * (q.r13 - rec.tdoa.r13) +
                       (q.r23 - rec.tdoa.r23) * (q.r23 - rec.tdoa.r23);
            }
            return acc;
        };
        CalibrationResult res = calibrate_geometry(ds, init, {100.0});
        CHECK(cost(res.geometry) <= cost(init));
    }
}

TEST_CASE("dataset preconditions are enforced") {
    ArrayGeometry truth{0.1, 0.05, 0.12};
    FieldDataset tiny;
    for (int i = 0; i < 5; ++i)
        tiny.records.push_back({{0.3 * i, 0.4}, {0.0, 0.0, 0.0}, 100.0});
    CHECK_THROWS_AS(calibrate_geometry(tiny, truth, {100.0}), std::invalid_argument);

    FieldDataset narrow;
    for (int i = 0; i < 15; ++i)
        narrow.records.push_back({{0.05 * i, 0.4}, {0.0, 0.0, 0.0}, 100.0});  // 40 deg span
    CHECK_THROWS_AS(calibrate_geometry(narrow, truth, {100.0}), std::invalid_argument);
}
