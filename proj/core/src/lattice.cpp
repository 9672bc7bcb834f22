#include "tridoa/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tridoa {

namespace {

KdPoint to_kd(const TdoaTriple& q) { return {{q.r12, q.r13, q.r23}}; }

}  // namespace

MappingLattice::MappingLattice(std::vector<Direction> directions, std::vector<TdoaTriple> tdoas,
                               std::optional<ArrayGeometry> geometry)
    : directions_(std::move(directions)), tdoas_(std::move(tdoas)), geometry_(geometry) {
    if (directions_.size() != tdoas_.size())
        throw std::invalid_argument("mapping lattice: direction/TDOA lists must have equal length");
    if (directions_.empty())
        throw std::invalid_argument("mapping lattice: empty");
    std::vector<KdPoint> pts(tdoas_.size());
    for (size_t i = 0; i < tdoas_.size(); ++i) pts[i] = to_kd(tdoas_[i]);
    index_ = KdTree3(std::move(pts));
}

NnsResult nns_lookup(const MappingLattice& lattice, const TdoaTriple& measured) {
    KdResult r = lattice.index().nearest(to_kd(measured));
    return {lattice.directions()[r.index], r.index, r.squared_dist};
}

std::vector<Direction> fibonacci_lattice(size_t n_points) {
    if (n_points < 1) throw std::invalid_argument("fibonacci_lattice: N must be >= 1");
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Direction> out;
    out.reserve(n_points);
    for (size_t n = 1; n <= n_points; ++n) {
        double theta = wrap_angle(2.0 * kPi * static_cast<double>(n - 1) / golden);
        double z = 1.0 - (2.0 * static_cast<double>(n) - 1.0) / (2.0 * static_cast<double>(n_points));
        double phi = kPi / 2.0 - std::acos(z);
        out.push_back({theta, phi});
    }
    return out;
}

std::vector<Direction> latlong_lattice(unsigned u) {
    if (u < 2 || u % 2 != 0)
        throw std::invalid_argument("latlong_lattice: u must be even and >= 2");
    const double delta = kPi / static_cast<double>(u);
    std::vector<Direction> out;
    out.reserve(static_cast<size_t>(u) * u + 1);
    // parallels at phi = j*delta, j = 0 .. u/2-1 (horizon ring included),
    // 2u meridians starting at -pi; the pole is appended once at the end
    for (unsigned j = 0; j < u / 2; ++j) {
        double phi = delta * j;
        for (unsigned m = 0; m < 2 * u; ++m) {
            double theta = -kPi + delta * m;
            out.push_back({theta, phi});
        }
    }
    out.push_back({0.0, kPi / 2.0});
    return out;
}

void validate_density(const FieldDataset& ds) {
    // group by elevation ring, then count distinct azimuths per ring
    auto key = [](double v) { return std::llround(v * 1e7); };
    std::map<long long, std::set<long long>> rings;
    for (const auto& rec : ds.records)
        rings[key(rec.direction.phi)].insert(key(rec.direction.theta));
    size_t good_rings = 0;
    for (const auto& [phi, thetas] : rings)
        if (thetas.size() >= 8) ++good_rings;
    if (rings.size() < 3 || good_rings < 3) {
        std::ostringstream msg;
        msg << "field dataset too sparse: " << ds.records.size() << " records, " << rings.size()
            << " elevation rings (" << good_rings
            << " with >= 8 azimuths); need >= 3 rings of >= 8 azimuths";
        throw std::invalid_argument(msg.str());
    }
}

MappingLattice synthesize_mappings(const std::vector<Direction>& directions,
                                   const ArrayGeometry& g, FarFieldRadius r) {
    if (directions.empty()) throw std::invalid_argument("synthesize_mappings: empty direction set");
    validate(g);
    validate(r, g);
    std::vector<TdoaTriple> tdoas;
    tdoas.reserve(directions.size());
    for (const auto& d : directions) {
        Vec3 src = direction_to_point(d).vec() * r.r;
        tdoas.push_back(tdoa_from_geometry(g, src));
    }
    return MappingLattice(directions, std::move(tdoas), g);
}

namespace {

struct Ring {
    double phi = 0.0;
    std::vector<double> thetas;      // sorted ascending in [-pi, pi]
    std::vector<TdoaTriple> values;  // parallel to thetas
};

TdoaTriple mix(const TdoaTriple& a, const TdoaTriple& b, double t) {
    return {a.r12 + t * (b.r12 - a.r12), a.r13 + t * (b.r13 - a.r13),
            a.r23 + t * (b.r23 - a.r23)};
}

// Linear interpolation around the ring with azimuth wraparound. A ring with a
// single sample (the pole) is constant over azimuth.
TdoaTriple ring_value(const Ring& ring, double theta) {
    if (ring.thetas.size() == 1) return ring.values[0];
    auto hi = std::upper_bound(ring.thetas.begin(), ring.thetas.end(), theta);
    size_t i_hi, i_lo;
    double span, offs;
    if (hi == ring.thetas.begin() || hi == ring.thetas.end()) {
        // between the last and first sample, crossing the +-pi seam
        i_lo = ring.thetas.size() - 1;
        i_hi = 0;
        span = ring.thetas[i_hi] + 2.0 * kPi - ring.thetas[i_lo];
        offs = theta - ring.thetas[i_lo];
        if (offs < 0.0) offs += 2.0 * kPi;
    } else {
        i_hi = static_cast<size_t>(hi - ring.thetas.begin());
        i_lo = i_hi - 1;
        span = ring.thetas[i_hi] - ring.thetas[i_lo];
        offs = theta - ring.thetas[i_lo];
    }
    double t = span > 0.0 ? offs / span : 0.0;
    return mix(ring.values[i_lo], ring.values[i_hi], t);
}

}  // namespace

MappingLattice interpolate_field_dataset(const FieldDataset& ds,
                                         const std::vector<Direction>& directions) {
    validate_density(ds);
    if (directions.empty())
        throw std::invalid_argument("interpolate_field_dataset: empty direction set");

    // assemble the latitude-longitude ring structure the dataset was collected on
    auto key = [](double v) { return std::llround(v * 1e7); };
    std::map<long long, std::map<long long, std::pair<Direction, TdoaTriple>>> grouped;
    for (const auto& rec : ds.records) {
        auto [it, fresh] = grouped[key(rec.direction.phi)].emplace(
            key(rec.direction.theta), std::make_pair(rec.direction, rec.tdoa));
        if (!fresh)
            throw std::invalid_argument("interpolate_field_dataset: duplicate sample direction");
        (void)it;
    }
    std::vector<Ring> rings;
    rings.reserve(grouped.size());
    for (const auto& [phi_key, samples] : grouped) {
        Ring ring;
        ring.phi = samples.begin()->second.first.phi;
        for (const auto& [theta_key, sample] : samples) {
            ring.thetas.push_back(sample.first.theta);
            ring.values.push_back(sample.second);
        }
        rings.push_back(std::move(ring));
    }

    std::vector<TdoaTriple> tdoas;
    tdoas.reserve(directions.size());
    for (const auto& target : directions) {
        // bracket the elevation; clamp outside the covered band
        auto hi = std::upper_bound(rings.begin(), rings.end(), target.phi,
                                   [](double v, const Ring& r) { return v < r.phi; });
        if (hi == rings.begin()) {
            tdoas.push_back(ring_value(rings.front(), target.theta));
            continue;
        }
        if (hi == rings.end()) {
            tdoas.push_back(ring_value(rings.back(), target.theta));
            continue;
        }
        const Ring& lo_ring = *(hi - 1);
        const Ring& hi_ring = *hi;
        double t = (target.phi - lo_ring.phi) / (hi_ring.phi - lo_ring.phi);
        tdoas.push_back(
            mix(ring_value(lo_ring, target.theta), ring_value(hi_ring, target.theta), t));
    }
    return MappingLattice(directions, std::move(tdoas));
}

}  // namespace tridoa
