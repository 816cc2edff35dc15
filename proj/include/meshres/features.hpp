// Per-cell featurization: each triangle becomes a 24-d row of four point
// coordinates (three vertices + barycenter) followed by the four matching
// unit normals (three vertex normals + the face normal).
#pragma once

#include <filesystem>
#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

inline constexpr int kFeatureDims = 24;

// Column blocks within a row.
inline constexpr int kColV1 = 0, kColV2 = 3, kColV3 = 6, kColBary = 9;
inline constexpr int kColNV1 = 12, kColNV2 = 15, kColNV3 = 18, kColNFace = 21;

struct FeatureMatrix {
    std::vector<double> data; // rows * 24, row-major
    size_t rows = 0;

    // Pose normalization applied to the coordinate columns (normals are
    // untouched): translate by -center, then divide by scale_factor.
    bool centered = false;
    Vec3 center;
    double scale_factor = 1.0;

    double* row(size_t i) { return data.data() + i * kFeatureDims; }
    const double* row(size_t i) const { return data.data() + i * kFeatureDims; }
    Vec3 point(size_t i, int col) const {
        const double* r = row(i);
        return {r[col], r[col + 1], r[col + 2]};
    }
};

struct LabeledFeatures {
    FeatureMatrix features;
    std::vector<ClassId> labels;
};

// Builds the N x 24 matrix. With `normalize` on, all coordinate entries are
// shifted by -(barycenter centroid) and divided by the max barycenter
// distance from that centroid; the transform is recorded on the matrix.
LabeledFeatures featurize(const LabeledMesh& labeled, bool normalize);

// Undoes the recorded pose normalization in place (no-op when !centered).
void denormalize(FeatureMatrix& features);

// MRFT container: {"MRFT", version u32, N u64, dims u32 = 24} header, then
// N*24 little-endian f32 values, then N label bytes.
void save_features(const std::filesystem::path& path, const LabeledFeatures& lf);
LabeledFeatures load_features(const std::filesystem::path& path);

} // namespace meshres
