#include "meshres/mesh.hpp"

#include <limits>
#include <string>

namespace meshres {

void TriangleMesh::validate() const {
    if (faces.empty())
        throw ValidationError("mesh has no faces");
    const int nv = vertex_count();
    for (size_t i = 0; i < vertices.size(); ++i) {
        if (!is_finite(vertices[i]))
            throw ValidationError("vertex " + std::to_string(i) + " has non-finite coordinates");
    }
    for (size_t f = 0; f < faces.size(); ++f) {
        const Face& face = faces[f];
        for (int k = 0; k < 3; ++k) {
            if (face[k] < 0 || face[k] >= nv)
                throw ValidationError("face " + std::to_string(f) + " index " +
                                      std::to_string(face[k]) + " out of range (vertex count " +
                                      std::to_string(nv) + ")");
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw ValidationError("face " + std::to_string(f) + " repeats a vertex index");
    }
}

void LabeledMesh::validate() const {
    mesh.validate();
    if (labels.size() != mesh.faces.size())
        throw ValidationError("label count " + std::to_string(labels.size()) +
                              " != face count " + std::to_string(mesh.faces.size()));
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!class_id_valid(labels[i]))
            throw ValidationError("label " + std::to_string(int(labels[i])) +
                                  " at face " + std::to_string(i) + " out of class range");
    }
}

Aabb bounding_box(const std::vector<Vec3>& points) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
    for (const Vec3& p : points) {
        box.lo.x = std::min(box.lo.x, p.x);
        box.lo.y = std::min(box.lo.y, p.y);
        box.lo.z = std::min(box.lo.z, p.z);
        box.hi.x = std::max(box.hi.x, p.x);
        box.hi.y = std::max(box.hi.y, p.y);
        box.hi.z = std::max(box.hi.z, p.z);
    }
    return box;
}

} // namespace meshres
