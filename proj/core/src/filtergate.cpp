#include "tridoa/filtergate.hpp"

#include <algorithm>
#include <stdexcept>

namespace tridoa {

const char* to_string(FilterStage s) {
    switch (s) {
        case FilterStage::kNone: return "none";
        case FilterStage::kActivity: return "activity";
        case FilterStage::kDominance: return "dominance";
        case FilterStage::kCoherence: return "coherence";
    }
    return "?";
}

double compute_beta(const CorrelationFunction& corr) {
    if (corr.max_lag == 0) return 1.0;
    double peak = corr.peak_value();
    if (!(peak > 0.0)) throw std::invalid_argument("compute_beta: peak must be positive");
    double eta = 0.0;
    int count = 0;
    for (int lag = -corr.max_lag; lag <= corr.max_lag; ++lag) {
        if (lag == corr.peak_lag) continue;
        eta += std::max(0.0, corr.at(lag));
        ++count;
    }
    eta /= static_cast<double>(count);
    return 1.0 - eta / peak;
}

FilterVerdict apply_gate(const TdoaMeasurement& m, const MappingLattice& lattice,
                         const FilterThresholds& thresholds) {
    FilterVerdict v;

    for (const auto& pair : m.pairs) {
        if (!(pair.peak_value > thresholds.t_r)) {
            v.failed_stage = FilterStage::kActivity;
            return v;
        }
    }

    for (size_t p = 0; p < 3; ++p) {
        v.betas[p] = compute_beta(m.pairs[p].corr);
        if (!(v.betas[p] > thresholds.t_beta)) {
            v.failed_stage = FilterStage::kDominance;
            return v;
        }
    }

    NnsResult nns = nns_lookup(lattice, m.tdoa);
    v.nns_error = nns.squared_error;
    v.lattice_index = nns.index;
    v.direction = nns.direction;
    if (!(nns.squared_error < thresholds.t_q)) {
        v.failed_stage = FilterStage::kCoherence;
        return v;
    }

    v.accepted = true;
    return v;
}

}  // namespace tridoa
