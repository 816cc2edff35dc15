// Triangle-only mesh container plus the labeled variant used everywhere in
// the pipeline. Indices are 0-based in memory (OBJ's 1-based indices are
// converted at the I/O layer).
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshres/error.hpp"
#include "meshres/vec3.hpp"

namespace meshres {

// Segmentation class: 0 = background/gingiva, 1..7 = tooth classes T1..T7
// (2nd molar at the back through central incisor at the midline).
using ClassId = std::uint8_t;
inline constexpr int kNumClasses = 8;

inline bool class_id_valid(int c) { return c >= 0 && c < kNumClasses; }

using Face = std::array<int, 3>;

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    // Throws ValidationError unless: face count >= 1, all indices in range,
    // no face repeats a vertex index, all coordinates finite.
    void validate() const;
};

struct LabeledMesh {
    TriangleMesh mesh;
    std::vector<ClassId> labels; // one per face

    void validate() const;
};

struct Aabb {
    Vec3 lo, hi;
    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return norm(hi - lo); }
};

Aabb bounding_box(const std::vector<Vec3>& points);

} // namespace meshres
