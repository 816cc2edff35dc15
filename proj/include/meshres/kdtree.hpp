// Exact 3D k-nearest-neighbor search. Results are ordered by ascending
// distance with ties broken on the smaller point index, bit-identical to an
// exhaustive scan computing dx*dx + dy*dy + dz*dz.
#pragma once

#include <vector>

#include "meshres/vec3.hpp"

namespace meshres {

class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);

    int size() const { return static_cast<int>(points_.size()); }

    // Indices of the k nearest stored points to q.
    std::vector<int> query(const Vec3& q, int k) const;

    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;       // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0; // leaf range into order_
    };

    struct Hit {
        double d2;
        int idx;
        bool operator<(const Hit& o) const {
            return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
        }
    };

    int build(int begin, int end);
    void search(int node, const Vec3& q, int k, std::vector<Hit>& heap) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Exhaustive-scan k-NN over a flat point set; the oracle-equivalent path for
// small inputs and tests.
std::vector<int> knn_bruteforce(const std::vector<Vec3>& points, const Vec3& q, int k);

} // namespace meshres
