#include "tridoa/pipeline.hpp"

#include <chrono>
#include <stdexcept>

namespace tridoa {

void validate(const PipelineConfig& cfg) {
    if (!(cfg.sample_rate > 0.0)) throw std::invalid_argument("config: sample rate must be positive");
    if (cfg.frame_len < 2 || (cfg.frame_len & (cfg.frame_len - 1)) != 0)
        throw std::invalid_argument("config: frame length must be a power of two");
    if (!(cfg.speed_of_sound > 0.0))
        throw std::invalid_argument("config: speed of sound must be positive");
    if (!(cfg.far_field_r > 0.0)) throw std::invalid_argument("config: far-field radius must be positive");
    if (!(cfg.thresholds.t_r > 0.0) || !(cfg.thresholds.t_beta > 0.0) ||
        !(cfg.thresholds.t_q > 0.0))
        throw std::invalid_argument("config: thresholds must be positive");
    validate(cfg.tracker);
}

std::vector<FrameEvent> process_stream(const std::array<std::vector<float>, 3>& channels,
                                       const PipelineConfig& cfg, const MappingLattice& lattice) {
    validate(cfg);
    if (!lattice.geometry())
        throw std::invalid_argument("process_stream: mapping lattice carries no geometry");
    const ArrayGeometry& g = *lattice.geometry();
    validate(g);
    // sanity: stored TDOAs must be reachable for this geometry
    for (const auto& q : lattice.tdoas()) {
        for (int p = 0; p < 3; ++p) {
            if (std::abs(q[p]) > g.pair_distance(p) * 1.05)
                throw std::invalid_argument(
                    "process_stream: lattice TDOAs exceed the geometry's direct-path bound");
        }
    }

    auto frames = segment_stream(channels[0], channels[1], channels[2], cfg.frame_len);
    CorrelatorEngine engine(cfg.frame_len, cfg.weighting, cfg.window);
    TrackerState state = TrackerState::initial(cfg.tracker);

    std::vector<FrameEvent> events;
    events.reserve(frames.size());
    for (const auto& triple : frames) {
        TdoaMeasurement m = engine.measure_frame(triple, g, cfg.sample_rate, cfg.speed_of_sound);
        FilterVerdict verdict = apply_gate(m, lattice, cfg.thresholds);

        FrameEvent ev;
        ev.frame = triple.index;
        ev.time_s = static_cast<double>(triple.index) * cfg.hop_seconds();
        for (size_t p = 0; p < 3; ++p) {
            ev.pairs[p].lag = m.pairs[p].refined_lag;
            ev.pairs[p].tdoa = m.pairs[p].tdoa;
            ev.pairs[p].peak = m.pairs[p].peak_value;
            ev.pairs[p].beta = verdict.betas[p];
        }
        ev.accepted = verdict.accepted;
        ev.failed_stage = verdict.failed_stage;
        ev.nns_error = verdict.nns_error;

        std::optional<HemispherePoint> measurement;
        if (verdict.accepted) {
            ev.direction = verdict.direction;
            measurement = direction_to_point(verdict.direction);
        }
        auto [next, tracker_events] = rfefc_step(state, measurement, cfg.tracker);
        state = std::move(next);
        ev.tracker_events = std::move(tracker_events);
        for (const auto& c : state.clusters)
            if (c.active())
                ev.clusters.push_back({c.id, point_to_direction(*c.centroid), c.rho, c.detected});
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<TrackingFrame> to_tracking_frames(const std::vector<FrameEvent>& events) {
    std::vector<TrackingFrame> out;
    out.reserve(events.size());
    for (const auto& ev : events) out.push_back({ev.time_s, ev.clusters});
    return out;
}

BenchResult run_pipeline_bench(double audio_seconds, const PipelineConfig& cfg) {
    validate(cfg);
    SceneSpec scene;
    scene.sample_rate = cfg.sample_rate;
    scene.duration_s = audio_seconds;
    scene.snr_db = 20.0;
    scene.seed = 42;
    SourceSpec src;
    src.direction = {0.6, 0.4};
    src.distance = 2.0;
    scene.sources.push_back(src);
    RenderedScene rendered = render_scene(scene);

    MappingLattice lattice =
        synthesize_mappings(fibonacci_lattice(10000), scene.geometry, {cfg.far_field_r});

    auto t0 = std::chrono::steady_clock::now();
    auto events = process_stream(rendered.channels, cfg, lattice);
    auto t1 = std::chrono::steady_clock::now();

    BenchResult r;
    r.audio_seconds = audio_seconds;
    r.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.hops = events.size();
    r.mean_hop_ms = r.hops > 0 ? r.wall_seconds * 1000.0 / static_cast<double>(r.hops) : 0.0;
    r.realtime_factor = r.wall_seconds > 0.0 ? audio_seconds / r.wall_seconds : 0.0;
    return r;
}

}  // namespace tridoa
