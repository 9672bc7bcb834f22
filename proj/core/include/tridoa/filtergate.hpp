// Three-step reliability filter for frame-level TDOA measurements:
//   1. activity   — every pair's correlation peak exceeds T_R
//   2. dominance  — every pair's peak-dominance confidence beta exceeds T_beta
//   3. coherence  — the NNS residual against the mapping table is below T_q
// Rejection is a normal outcome; the first failing stage is recorded.
#pragma once

#include <array>

#include "tridoa/correlator.hpp"
#include "tridoa/geometry.hpp"
#include "tridoa/lattice.hpp"

namespace tridoa {

struct FilterThresholds {
    double t_r = 1e-2;     // peak activity
    double t_beta = 0.5;   // peak dominance
    double t_q = 5e-5;     // NNS coherence, m^2
};

enum class FilterStage { kNone, kActivity, kDominance, kCoherence };

const char* to_string(FilterStage s);

struct FilterVerdict {
    bool accepted = false;
    FilterStage failed_stage = FilterStage::kNone;
    Direction direction;          // meaningful iff accepted
    size_t lattice_index = 0;     // meaningful iff coherence stage was reached
    double nns_error = 0.0;       // m^2, meaningful iff coherence stage was reached
    std::array<double, 3> betas{};  // zero for pairs whose peak never qualified
};

/// Peak-dominance confidence: beta = 1 - eta / R(peak) where eta is the mean
/// positive correlation over all plausible lags except the peak itself.
/// Requires R(peak) > 0; an empty lag set (max_lag = 0) gives beta = 1.
double compute_beta(const CorrelationFunction& corr);

/// Runs the three stages in order against the measurement; short-circuits on
/// the first failure. All three pairs must pass stages 1-2.
FilterVerdict apply_gate(const TdoaMeasurement& m, const MappingLattice& lattice,
                         const FilterThresholds& thresholds);

}  // namespace tridoa
