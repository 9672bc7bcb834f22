// End-to-end frame pipeline: measure TDOAs, gate, cluster, log.
#pragma once

#include <optional>
#include <vector>

#include "tridoa/correlator.hpp"
#include "tridoa/filtergate.hpp"
#include "tridoa/lattice.hpp"
#include "tridoa/simulate.hpp"
#include "tridoa/tracker.hpp"
#include "tridoa/wav.hpp"

namespace tridoa {

struct PipelineConfig {
    double sample_rate = 48000.0;
    size_t frame_len = 1024;   // must be a power of two; hop is frame_len/2
    double speed_of_sound = 343.0;
    McpspWeighting weighting;
    WindowKind window = WindowKind::kHann;
    FilterThresholds thresholds;
    TrackerParams tracker;     // tracker.dt defaults to frame_len / (2 * sample_rate)
    double far_field_r = 100.0;

    size_t hop() const { return frame_len / 2; }
    double hop_seconds() const { return static_cast<double>(hop()) / sample_rate; }
};

void validate(const PipelineConfig& cfg);

/// Per-hop record of everything the pipeline saw and decided.
struct FrameEvent {
    size_t frame = 0;
    double time_s = 0.0;
    struct PairLog {
        double lag = 0.0;   // refined, fractional samples
        double tdoa = 0.0;  // meters
        double peak = 0.0;
        double beta = 0.0;
    };
    std::array<PairLog, 3> pairs;
    bool accepted = false;
    FilterStage failed_stage = FilterStage::kNone;
    double nns_error = 0.0;                 // meaningful once coherence stage was reached
    std::optional<Direction> direction;     // raw accepted direction
    std::vector<ClusterSnapshot> clusters;  // active clusters after this step
    std::vector<TrackerEvent> tracker_events;
};

/// Runs the full pipeline over three equal-length channels. Deterministic:
/// the same audio, config and lattice always produce the same event list.
std::vector<FrameEvent> process_stream(const std::array<std::vector<float>, 3>& channels,
                                       const PipelineConfig& cfg, const MappingLattice& lattice);

/// Projects the event log onto the cluster snapshots used by evaluate_tracking.
std::vector<TrackingFrame> to_tracking_frames(const std::vector<FrameEvent>& events);

struct BenchResult {
    double audio_seconds = 0.0;
    double wall_seconds = 0.0;
    size_t hops = 0;
    double mean_hop_ms = 0.0;
    double realtime_factor = 0.0;  // audio seconds per wall second
};

/// Renders a one-source scene of the given length and times process_stream on it.
BenchResult run_pipeline_bench(double audio_seconds, const PipelineConfig& cfg);

}  // namespace tridoa
