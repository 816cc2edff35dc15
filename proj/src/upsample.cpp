#include "meshres/upsample.hpp"

#include <array>
#include <string>

#include "meshres/geometry.hpp"
#include "meshres/kdtree.hpp"

namespace meshres {

std::vector<ClassId> knn_transfer(const std::vector<Vec3>& src_barycenters,
                                  const std::vector<ClassId>& src_labels,
                                  const std::vector<Vec3>& dst_barycenters,
                                  const TransferConfig& config) {
    if (config.k < 1)
        throw ConfigError("transfer k must be >= 1");
    if (static_cast<int>(src_barycenters.size()) < config.k)
        throw InsufficientSourceError("source has " + std::to_string(src_barycenters.size()) +
                                      " cells, need at least k = " + std::to_string(config.k));
    if (src_labels.size() != src_barycenters.size())
        throw LengthMismatchError("source labels != source barycenters");
    for (ClassId c : src_labels)
        if (!class_id_valid(c))
            throw RangeError("source label out of class range");

    KdTree tree(src_barycenters);
    std::vector<ClassId> out(dst_barycenters.size());
    for (size_t i = 0; i < dst_barycenters.size(); ++i) {
        std::vector<int> nn = tree.query(dst_barycenters[i], config.k);
        std::array<int, kNumClasses> votes{};
        for (int idx : nn)
            ++votes[src_labels[idx]];
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (votes[c] > votes[best])
                best = c;
        // Resolve ties among max-vote classes.
        bool tied = false;
        for (int c = 0; c < kNumClasses; ++c)
            if (c != best && votes[c] == votes[best])
                tied = true;
        if (tied && config.tie_break == TransferConfig::TieBreak::Nearest) {
            for (int idx : nn) { // nn is distance-ordered
                if (votes[src_labels[idx]] == votes[best]) {
                    best = src_labels[idx];
                    break;
                }
            }
        }
        // SmallestClass keeps the scan order above: smallest tied id wins.
        out[i] = static_cast<ClassId>(best);
    }
    return out;
}

LabeledMesh upsample_prediction(const LabeledMesh& low, const TriangleMesh& high_mesh,
                                const TransferConfig& config) {
    low.validate();
    high_mesh.validate();
    LabeledMesh out;
    out.mesh = high_mesh;
    out.labels = knn_transfer(barycenters(low.mesh), low.labels, barycenters(high_mesh), config);
    return out;
}

} // namespace meshres
