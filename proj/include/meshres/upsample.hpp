// KNN label transfer: each high-resolution cell takes the majority label of
// its k nearest low-resolution cell barycenters.
#pragma once

#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

struct TransferConfig {
    int k = 3;
    enum class TieBreak { Nearest, SmallestClass };
    TieBreak tie_break = TieBreak::Nearest;
};

// Majority vote over the k nearest source barycenters per destination cell.
// A tied vote resolves to the nearest neighbor carrying a tied label
// (Nearest) or the smallest tied class id (SmallestClass).
// Throws InsufficientSourceError when fewer than k source cells exist.
std::vector<ClassId> knn_transfer(const std::vector<Vec3>& src_barycenters,
                                  const std::vector<ClassId>& src_labels,
                                  const std::vector<Vec3>& dst_barycenters,
                                  const TransferConfig& config);

// Pairs `high_mesh` with labels transferred from the low-resolution
// prediction; geometry passes through untouched.
LabeledMesh upsample_prediction(const LabeledMesh& low, const TriangleMesh& high_mesh,
                                const TransferConfig& config);

} // namespace meshres
