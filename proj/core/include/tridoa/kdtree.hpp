// Exact nearest-neighbor search over 3D points.
//
// The tree is built by median split on the widest-spread axis and queried with
// hypersphere/hyperplane pruning. Results are guaranteed identical to an
// exhaustive linear scan, including the tie rule (equal distances resolve to
// the lowest point index), so the index can be golden-tested against a scan.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace tridoa {

struct KdPoint {
    std::array<double, 3> v{};
    double operator[](int axis) const { return v[static_cast<size_t>(axis)]; }
};

struct KdResult {
    size_t index = 0;         // index into the original point list
    double squared_dist = 0;  // squared Euclidean distance
};

class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<KdPoint> points);

    size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    /// Exact nearest neighbor; ties broken toward the lowest original index.
    KdResult nearest(const KdPoint& query) const;

    /// Reference result computed by exhaustive scan (same tie rule).
    KdResult nearest_linear(const KdPoint& query) const;

private:
    struct Node {
        // leaf: [begin, end) into order_; internal: split axis/value + children
        int axis = -1;
        double split = 0.0;
        size_t begin = 0, end = 0;
        int left = -1, right = -1;
        bool leaf() const { return axis < 0; }
    };

    static constexpr size_t kLeafSize = 8;

    int build(size_t begin, size_t end);
    void search(int node, const KdPoint& query, KdResult& best) const;
    void consider(size_t order_pos, const KdPoint& query, KdResult& best) const;

    std::vector<KdPoint> points_;
    std::vector<size_t> order_;  // permutation of point indices, partitioned by nodes
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace tridoa
