#include "tridoa/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tridoa {

void validate(const TrackerParams& p) {
    if (p.n_clusters < 1) throw std::invalid_argument("tracker: n_clusters must be >= 1");
    if (!(p.dt > 0.0)) throw std::invalid_argument("tracker: dt must be positive");
    if (!(p.d_min > 0.0)) throw std::invalid_argument("tracker: d_min must be positive");
    if (p.n_s < 1) throw std::invalid_argument("tracker: n_s must be >= 1");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::invalid_argument("tracker: alpha in (0,1)");
    if (!(p.t_win > 0.0)) throw std::invalid_argument("tracker: t_win must be positive");
    if (!(p.t_a > 0.0 && p.t_a < 1.0)) throw std::invalid_argument("tracker: t_a in (0,1)");
    if (!(p.dt < p.t_win)) throw std::invalid_argument("tracker: dt must be < t_win");
}

const char* to_string(TrackerEventKind k) {
    switch (k) {
        case TrackerEventKind::kSourceAppeared: return "source_appeared";
        case TrackerEventKind::kSourceLost: return "source_lost";
        case TrackerEventKind::kClusterForgotten: return "cluster_forgotten";
    }
    return "?";
}

TrackerState TrackerState::initial(const TrackerParams& p) {
    validate(p);
    TrackerState s;
    s.clusters.resize(static_cast<size_t>(p.n_clusters));
    for (size_t i = 0; i < s.clusters.size(); ++i) s.clusters[i].id = static_cast<int>(i);
    return s;
}

namespace {

HemispherePoint normalized_mix(const HemispherePoint& centroid, const HemispherePoint& m,
                               double alpha) {
    Vec3 v = centroid.vec() * alpha + m.vec() * (1.0 - alpha);
    double n = v.norm();
    if (n <= 0.0) return m;  // antipodal degenerate mix; cannot happen on one hemisphere
    return {v.x / n, v.y / n, v.z / n};
}

}  // namespace

std::pair<TrackerState, std::vector<TrackerEvent>> rfefc_step(
    const TrackerState& state, const std::optional<HemispherePoint>& measurement,
    const TrackerParams& p) {
    validate(p);
    if (state.clusters.size() != static_cast<size_t>(p.n_clusters))
        throw std::invalid_argument("rfefc_step: state/params cluster count mismatch");

    TrackerState next = state;
    next.frame_count = state.frame_count + 1;
    double now = static_cast<double>(next.frame_count) * p.dt;
    std::vector<TrackerEvent> events;

    int updated = -1;
    if (measurement) {
        double norm = measurement->vec().norm();
        if (std::abs(norm - 1.0) > 1e-6 || measurement->z < -1e-12)
            throw std::invalid_argument("rfefc_step: measurement must be unit-norm with z >= 0");

        // highest-confidence active cluster within d_min (ties: lowest id)
        int best = -1;
        for (const auto& c : next.clusters) {
            if (!c.active()) continue;
            if (chord(*c.centroid, *measurement) < p.d_min) {
                if (best < 0 || c.rho > next.clusters[static_cast<size_t>(best)].rho) best = c.id;
            }
        }
        if (best >= 0) {
            Cluster& c = next.clusters[static_cast<size_t>(best)];
            c.centroid = normalized_mix(*c.centroid, *measurement, p.alpha);
            c.rho = std::min(1.0, c.rho + 1.0 / static_cast<double>(p.n_s));
        } else {
            // overwrite the lowest-confidence cluster (ties: lowest id)
            best = 0;
            for (const auto& c : next.clusters)
                if (c.rho < next.clusters[static_cast<size_t>(best)].rho) best = c.id;
            Cluster& c = next.clusters[static_cast<size_t>(best)];
            if (c.detected) {
                events.push_back({TrackerEventKind::kSourceLost, c.id, now});
                c.detected = false;
            }
            c.centroid = *measurement;
            c.rho = 1.0 / static_cast<double>(p.n_s);
        }
        updated = best;
    }

    for (auto& c : next.clusters) {
        if (c.id == updated) {
            if (!c.detected && c.rho >= 1.0) {
                c.detected = true;
                events.push_back({TrackerEventKind::kSourceAppeared, c.id, now});
            }
            continue;
        }
        if (c.rho > 0.0) c.rho = std::max(0.0, c.rho - p.dt / p.t_win);
        if (c.detected && c.rho <= p.t_a) {
            c.detected = false;
            events.push_back({TrackerEventKind::kSourceLost, c.id, now});
        }
        if (c.rho == 0.0 && c.active()) {
            c.centroid.reset();
            events.push_back({TrackerEventKind::kClusterForgotten, c.id, now});
        }
    }
    return {std::move(next), std::move(events)};
}

std::vector<ActiveSource> active_sources(const TrackerState& state, const TrackerParams& p) {
    validate(p);
    std::vector<ActiveSource> out;
    for (const auto& c : state.clusters)
        if (c.detected && c.active())
            out.push_back({c.id, point_to_direction(*c.centroid), c.rho});
    return out;
}

}  // namespace tridoa
