#include "tridoa/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tridoa {

namespace {

double sqdist(const KdPoint& a, const KdPoint& b) {
    double dx = a.v[0] - b.v[0];
    double dy = a.v[1] - b.v[1];
    double dz = a.v[2] - b.v[2];
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree3::KdTree3(std::vector<KdPoint> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!points_.empty()) root_ = build(0, points_.size());
}

int KdTree3::build(size_t begin, size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    // widest-spread axis over this node's points
    std::array<double, 3> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (size_t i = begin; i < end; ++i) {
        const KdPoint& p = points_[order_[i]];
        for (int a = 0; a < 3; ++a) {
            lo[static_cast<size_t>(a)] = std::min(lo[static_cast<size_t>(a)], p[a]);
            hi[static_cast<size_t>(a)] = std::max(hi[static_cast<size_t>(a)], p[a]);
        }
    }
    int axis = 0;
    double spread = hi[0] - lo[0];
    for (int a = 1; a < 3; ++a) {
        double s = hi[static_cast<size_t>(a)] - lo[static_cast<size_t>(a)];
        if (s > spread) {
            spread = s;
            axis = a;
        }
    }
    if (spread == 0.0) {  // all points identical: keep as leaf
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<ptrdiff_t>(begin),
                     order_.begin() + static_cast<ptrdiff_t>(mid),
                     order_.begin() + static_cast<ptrdiff_t>(end),
                     [&](size_t a, size_t b) { return points_[a][axis] < points_[b][axis]; });

    node.axis = axis;
    node.split = points_[order_[mid]][axis];
    size_t self = nodes_.size();
    nodes_.push_back(node);
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return static_cast<int>(self);
}

void KdTree3::consider(size_t order_pos, const KdPoint& query, KdResult& best) const {
    size_t idx = order_[order_pos];
    double d = sqdist(points_[idx], query);
    if (d < best.squared_dist || (d == best.squared_dist && idx < best.index)) {
        best.squared_dist = d;
        best.index = idx;
    }
}

void KdTree3::search(int node_id, const KdPoint& query, KdResult& best) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.leaf()) {
        for (size_t i = node.begin; i < node.end; ++i) consider(i, query, best);
        return;
    }
    double diff = query[node.axis] - node.split;
    int near = diff < 0.0 ? node.left : node.right;
    int far = diff < 0.0 ? node.right : node.left;
    search(near, query, best);
    // <= keeps equal-distance candidates reachable so the lowest-index tie wins
    if (diff * diff <= best.squared_dist) search(far, query, best);
}

KdResult KdTree3::nearest(const KdPoint& query) const {
    if (points_.empty()) throw std::logic_error("KdTree3::nearest on empty tree");
    KdResult best{0, std::numeric_limits<double>::infinity()};
    search(root_, query, best);
    return best;
}

KdResult KdTree3::nearest_linear(const KdPoint& query) const {
    if (points_.empty()) throw std::logic_error("KdTree3::nearest_linear on empty tree");
    KdResult best{0, std::numeric_limits<double>::infinity()};
    for (size_t i = 0; i < points_.size(); ++i) {
        double d = sqdist(points_[i], query);
        if (d < best.squared_dist || (d == best.squared_dist && i < best.index)) {
            best.squared_dist = d;
            best.index = i;
        }
    }
    return best;
}

}  // namespace tridoa
