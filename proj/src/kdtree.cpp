#include "meshres/kdtree.hpp"

#include <algorithm>

#include "meshres/error.hpp"
#include "meshres/mesh.hpp"

namespace meshres {

namespace {
constexpr int kLeafSize = 16;

inline double dist2(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}
} // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    for (size_t i = 0; i < points_.size(); ++i)
        order_[i] = static_cast<int>(i);
    if (!points_.empty())
        root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    Aabb box{points_[order_[begin]], points_[order_[begin]]};
    for (int i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        box.lo.x = std::min(box.lo.x, p.x); box.hi.x = std::max(box.hi.x, p.x);
        box.lo.y = std::min(box.lo.y, p.y); box.hi.y = std::max(box.hi.y, p.y);
        box.lo.z = std::min(box.lo.z, p.z); box.hi.z = std::max(box.hi.z, p.z);
    }
    Vec3 ext = box.extent();
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;

    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         double pa = points_[a][axis], pb = points_[b][axis];
                         return pa != pb ? pa < pb : a < b;
                     });
    double split = points_[order_[mid]][axis];

    nodes_[id].axis = axis;
    nodes_[id].split = split;
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int node_id, const Vec3& q, int k, std::vector<Hit>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            int idx = order_[i];
            Hit h{dist2(q, points_[idx]), idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(h);
                std::push_heap(heap.begin(), heap.end());
            } else if (h < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = h;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    double diff = q[node.axis] - node.split;
    int near = diff < 0.0 ? node.left : node.right;
    int far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // The far side can still hold an equal-distance point with a smaller
    // index, so prune only on strict excess.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().d2)
        search(far, q, k, heap);
}

std::vector<int> KdTree::query(const Vec3& q, int k) const {
    if (k < 1 || k > size())
        throw RangeError("kd-tree query k out of range");
    std::vector<Hit> heap;
    heap.reserve(k);
    search(root_, q, k, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<int> out(heap.size());
    for (size_t i = 0; i < heap.size(); ++i)
        out[i] = heap[i].idx;
    return out;
}

std::vector<int> knn_bruteforce(const std::vector<Vec3>& points, const Vec3& q, int k) {
    if (k < 1 || k > static_cast<int>(points.size()))
        throw RangeError("knn k out of range");
    std::vector<std::pair<double, int>> hits(points.size());
    for (size_t i = 0; i < points.size(); ++i)
        hits[i] = {dist2(q, points[i]), static_cast<int>(i)};
    std::partial_sort(hits.begin(), hits.begin() + k, hits.end());
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i)
        out[i] = hits[i].second;
    return out;
}

} // namespace meshres
