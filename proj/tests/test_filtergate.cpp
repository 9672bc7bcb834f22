#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tridoa/filtergate.hpp"
#include "tridoa/pipeline.hpp"
#include "tridoa/simulate.hpp"

using namespace tridoa;

namespace {

CorrelationFunction make_corr(std::vector<double> values, int peak_lag) {
    CorrelationFunction c;
    c.max_lag = static_cast<int>(values.size() / 2);
    c.values = std::move(values);
    c.peak_lag = peak_lag;
    return c;
}

// a measurement whose three pairs all carry the given correlation shape
TdoaMeasurement make_measurement(const TdoaTriple& q, const CorrelationFunction& corr) {
    TdoaMeasurement m;
    m.tdoa = q;
    for (size_t p = 0; p < 3; ++p) {
        m.pairs[p].corr = corr;
        m.pairs[p].peak_value = corr.peak_value();
        m.pairs[p].tdoa = q[static_cast<int>(p)];
    }
    return m;
}

MappingLattice test_lattice() {
    return synthesize_mappings(fibonacci_lattice(10000), ArrayGeometry{0.1, 0.05, 0.12},
                               FarFieldRadius{100.0});
}

}  // namespace

TEST_CASE("beta on hand-evaluated correlation shapes") {
    // all non-peak values clipped at zero
    CHECK(compute_beta(make_corr({-0.2, -0.1, 1.0, -0.5, 0.0}, 0)) == doctest::Approx(1.0));

    // worked example: eta = (0.2 + 0.6 + 0 + 0.1)/4, beta = 1 - 0.225
    CHECK(compute_beta(make_corr({0.2, 1.0, 0.6, -0.3, 0.1}, -1)) == doctest::Approx(0.775));

    // flat correlation has no dominance at all
    CHECK(compute_beta(make_corr({0.5, 0.5, 0.5, 0.5, 0.5}, -2)) == doctest::Approx(0.0));

    // no plausible lags besides the peak
    CHECK(compute_beta(make_corr({1.0}, 0)) == 1.0);

    CHECK_THROWS_AS(compute_beta(make_corr({0.0, -1.0, 0.0}, 0)), std::invalid_argument);
}

TEST_CASE("beta stays in [0, 1] for random correlations") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> vals(21);
        for (auto& v : vals) v = u(rng);
        size_t peak = 0;
        for (size_t i = 1; i < 21; ++i)
            if (vals[i] > vals[peak]) peak = i;
        if (vals[peak] <= 0.0) continue;
        double beta = compute_beta(make_corr(vals, static_cast<int>(peak) - 10));
        CHECK(beta >= 0.0);
        CHECK(beta <= 1.0);
    }
}

TEST_CASE("gate rejects at the first failing stage") {
    MappingLattice lat = test_lattice();
    FilterThresholds th;  // defaults 1e-2, 0.5, 5e-5
    TdoaTriple good = lat.tdoas()[123];

    // one pair's peak below T_R: activity failure
    TdoaMeasurement m = make_measurement(good, make_corr({0.0, 0.0, 0.005, 0.0, 0.0}, 0));
    FilterVerdict v = apply_gate(m, lat, th);
    CHECK(!v.accepted);
    CHECK(v.failed_stage == FilterStage::kActivity);

    // peaks pass, beta = 0.4 < 0.5: dominance failure
    m = make_measurement(good, make_corr({0.6, 0.6, 1.0, 0.6, 0.6}, 0));
    CHECK(compute_beta(m.pairs[0].corr) == doctest::Approx(0.4));
    v = apply_gate(m, lat, th);
    CHECK(!v.accepted);
    CHECK(v.failed_stage == FilterStage::kDominance);
    CHECK(v.betas[0] == doctest::Approx(0.4));

    // peaks and betas pass but the triple is far from the manifold: coherence
    TdoaTriple off = good;
    off.r12 += 0.02;
    m = make_measurement(off, make_corr({-0.1, 0.0, 1.0, 0.0, -0.1}, 0));
    v = apply_gate(m, lat, th);
    CHECK(!v.accepted);
    CHECK(v.failed_stage == FilterStage::kCoherence);
    CHECK(v.nns_error >= th.t_q);

    // exact lattice triple sails through
    m = make_measurement(good, make_corr({-0.1, 0.0, 1.0, 0.0, -0.1}, 0));
    v = apply_gate(m, lat, th);
    CHECK(v.accepted);
    CHECK(v.failed_stage == FilterStage::kNone);
    CHECK(v.nns_error == 0.0);
    CHECK(v.direction.theta == lat.directions()[123].theta);
}

TEST_CASE("gate is monotone in thresholds") {
    MappingLattice lat = test_lattice();
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> uq(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> vals(11);
        for (auto& v : vals) v = u(rng) - 0.2;
        size_t peak = 0;
        for (size_t i = 1; i < 11; ++i)
            if (vals[i] > vals[peak]) peak = i;
        if (vals[peak] <= 0.0) vals[peak] = 0.1;
        TdoaTriple q = lat.tdoas()[static_cast<size_t>(trial) * 7];
        q.r12 += uq(rng) * 0.01;
        TdoaMeasurement m = make_measurement(q, make_corr(vals, static_cast<int>(peak) - 5));

        FilterThresholds lo{0.005, 0.3, 1e-4};
        FilterThresholds hi{0.02, 0.6, 2e-5};
        bool accept_lo = apply_gate(m, lat, lo).accepted;
        bool accept_hi = apply_gate(m, lat, hi).accepted;
        if (accept_hi) CHECK(accept_lo);  // raising thresholds never accepts more
    }
}

TEST_CASE("geometric triples always pass coherence against their own lattice") {
    MappingLattice lat = test_lattice();
    const ArrayGeometry& g = *lat.geometry();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        Vec3 src = direction_to_point({ut(rng), up(rng)}).vec() * 100.0;
        TdoaMeasurement m = make_measurement(tdoa_from_geometry(g, src),
                                             make_corr({0.0, 0.0, 1.0, 0.0, 0.0}, 0));
        CHECK(apply_gate(m, lat, {}).accepted);
    }
}

TEST_CASE("acceptance rates: dominant source vs pure noise") {
    // The pure-noise acceptance rate is set entirely by the coherence stage:
    // the chance that three independent peak lags land within sqrt(T_q) of the
    // mapping manifold. That probability shrinks with aperture (more lag bins
    // per pair); a 16 cm desk array sits at ~4%, comfortably under the 5%
    // bound, where a 10 cm array is right at the edge.
    ArrayGeometry g{0.16, 0.08, 0.2};
    MappingLattice lat = synthesize_mappings(fibonacci_lattice(10000), g, FarFieldRadius{100.0});
    PipelineConfig cfg;
    CorrelatorEngine engine(cfg.frame_len, cfg.weighting, cfg.window);

    size_t src_total = 0, src_accepted = 0;
    size_t noise_total = 0, noise_accepted = 0;
    for (int seed = 0; seed < 100; ++seed) {
        SceneSpec scene;
        scene.geometry = g;
        scene.duration_s = 0.25;
        scene.seed = 5000 + static_cast<uint64_t>(seed);
        scene.snr_db = 20.0;
        std::mt19937 rng(900 + seed);
        std::uniform_real_distribution<double> ut(-kPi, kPi), up(0.0, kPi / 2.0);
        SourceSpec src;
        src.direction = {ut(rng), up(rng)};
        src.distance = 3.0;
        scene.sources.push_back(src);
        RenderedScene rendered = render_scene(scene);

        auto frames = segment_stream(rendered.channels[0], rendered.channels[1],
                                     rendered.channels[2], cfg.frame_len);
        for (const auto& f : frames) {
            auto m = engine.measure_frame(f, g, cfg.sample_rate, cfg.speed_of_sound);
            ++src_total;
            if (apply_gate(m, lat, cfg.thresholds).accepted) ++src_accepted;
        }

        SceneSpec noise_scene;
        noise_scene.geometry = g;
        noise_scene.duration_s = 0.25;
        noise_scene.seed = 7000 + static_cast<uint64_t>(seed);
        noise_scene.snr_db = 20.0;  // no sources: channels are pure noise
        RenderedScene noise = render_scene(noise_scene);
        auto nframes = segment_stream(noise.channels[0], noise.channels[1], noise.channels[2],
                                      cfg.frame_len);
        for (const auto& f : nframes) {
            auto m = engine.measure_frame(f, g, cfg.sample_rate, cfg.speed_of_sound);
            ++noise_total;
            if (apply_gate(m, lat, cfg.thresholds).accepted) ++noise_accepted;
        }
    }
    double src_rate = static_cast<double>(src_accepted) / static_cast<double>(src_total);
    double noise_rate = static_cast<double>(noise_accepted) / static_cast<double>(noise_total);
    MESSAGE("source acceptance ", src_rate, ", noise acceptance ", noise_rate);
    CHECK(src_rate >= 0.80);
    CHECK(noise_rate <= 0.05);
}
