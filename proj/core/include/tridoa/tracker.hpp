// Recency- and frequency-aware exponential-filter clustering of frame-level
// hemisphere points.
//
// A fixed bank of clusters is maintained. A measurement updates the
// highest-confidence cluster within d_min (exponential filtering, confidence
// +1/N_s) or overwrites the lowest-confidence one. Idle clusters decay by
// dt/T_win per step and are forgotten at zero. A cluster counts as a detected
// source once its confidence reaches 1, and stays detected while the
// confidence remains strictly above T_a.
#pragma once

#include <optional>
#include <vector>

#include "tridoa/geometry.hpp"

namespace tridoa {

struct TrackerParams {
    int n_clusters = 10;          // N_c
    double dt = 1024.0 / 96000.0; // seconds per step (frame hop)
    double d_min = 0.25;          // chord distance gate
    int n_s = 5;                  // consecutive updates to reach full confidence
    double alpha = 0.75;          // exponential filter coefficient
    double t_win = 5.0;           // seconds to forget an idle cluster
    double t_a = 0.5;             // detection keep-alive threshold
};

void validate(const TrackerParams& p);

struct Cluster {
    int id = 0;
    std::optional<HemispherePoint> centroid;
    double rho = 0.0;
    bool detected = false;

    bool active() const { return centroid.has_value(); }
};

struct TrackerState {
    std::vector<Cluster> clusters;
    size_t frame_count = 0;

    static TrackerState initial(const TrackerParams& p);
};

enum class TrackerEventKind { kSourceAppeared, kSourceLost, kClusterForgotten };

const char* to_string(TrackerEventKind k);

struct TrackerEvent {
    TrackerEventKind kind;
    int cluster_id;
    double time_s;
};

/// Advances the cluster bank by one frame hop. `measurement`, when present,
/// must be unit-norm with z >= 0. Returns the new state and any detection
/// transitions. Exactly zero or one cluster gains confidence per step.
std::pair<TrackerState, std::vector<TrackerEvent>> rfefc_step(
    const TrackerState& state, const std::optional<HemispherePoint>& measurement,
    const TrackerParams& p);

struct ActiveSource {
    int cluster_id;
    Direction direction;
    double rho;
};

/// Clusters currently latched as detected sources.
std::vector<ActiveSource> active_sources(const TrackerState& state, const TrackerParams& p);

}  // namespace tridoa
