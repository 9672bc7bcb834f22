// Search-space lattices and the TDOA -> direction mapping table.
//
// A MappingLattice pairs N candidate directions with their TDOA triples and
// answers nearest-neighbor queries in TDOA space through a k-d tree. Tables
// are either synthesized from a known geometry or interpolated from a field
// dataset collected on a latitude-longitude grid.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tridoa/geometry.hpp"
#include "tridoa/kdtree.hpp"

namespace tridoa {

class MappingLattice {
public:
    MappingLattice() = default;
    /// Takes ownership of parallel direction/TDOA lists (entry n of each list
    /// corresponds) and builds the search index.
    MappingLattice(std::vector<Direction> directions, std::vector<TdoaTriple> tdoas,
                   std::optional<ArrayGeometry> geometry = std::nullopt);

    size_t size() const { return directions_.size(); }
    const std::vector<Direction>& directions() const { return directions_; }
    const std::vector<TdoaTriple>& tdoas() const { return tdoas_; }
    const std::optional<ArrayGeometry>& geometry() const { return geometry_; }
    const KdTree3& index() const { return index_; }

private:
    std::vector<Direction> directions_;
    std::vector<TdoaTriple> tdoas_;
    std::optional<ArrayGeometry> geometry_;
    KdTree3 index_;
};

struct NnsResult {
    Direction direction;
    size_t index = 0;
    double squared_error = 0.0;  // m^2
};

/// Nearest stored triple to the measurement; identical to a linear scan,
/// equal distances resolve to the lowest entry index.
NnsResult nns_lookup(const MappingLattice& lattice, const TdoaTriple& measured);

/// Spherical Fibonacci point set on the upper hemisphere:
///   theta_n = 2*pi*(n-1)/golden_ratio (wrapped),
///   phi_n   = pi/2 - acos(1 - (2n-1)/(2N)),  n = 1..N.
std::vector<Direction> fibonacci_lattice(size_t n_points);

/// Latitude-longitude lattice: 2u meridians x u/2 parallels plus the pole,
/// N = u^2 + 1, angular spacing 180/u degrees. u must be even and >= 2.
std::vector<Direction> latlong_lattice(unsigned u);

/// One labeled field measurement: known direction, measured TDOA triple and
/// (optionally) the source distance at collection time.
struct FieldRecord {
    Direction direction;
    TdoaTriple tdoa;
    std::optional<double> distance;  // meters
};

struct FieldDataset {
    std::vector<FieldRecord> records;
};

/// Raises std::invalid_argument unless the dataset has at least 3 distinct
/// elevation rings with at least 8 distinct azimuths each.
void validate_density(const FieldDataset& ds);

/// Builds the table from the geometric model: q_n = tdoa(g, point(dir_n) * r).
MappingLattice synthesize_mappings(const std::vector<Direction>& directions,
                                   const ArrayGeometry& g, FarFieldRadius r);

/// Builds the table by bilinear interpolation on the dataset's
/// latitude-longitude ring structure: linear around each ring with azimuth
/// wraparound, then linear across the bracketing rings in elevation
/// (clamped outside the covered band). Exact at the samples themselves.
MappingLattice interpolate_field_dataset(const FieldDataset& ds,
                                         const std::vector<Direction>& directions);

}  // namespace tridoa
