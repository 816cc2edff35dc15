#include "meshres/geometry.hpp"

#include <algorithm>
#include <string>

namespace meshres {

Vec3 face_normal(const TriangleMesh& mesh, int face_index) {
    const Face& f = mesh.faces[face_index];
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    Vec3 n = cross(b - a, c - a);
    double len = norm(n);
    if (len <= kDegenerateFaceEps)
        throw DegenerateFaceError("face " + std::to_string(face_index) +
                                  " is degenerate (cross norm " + std::to_string(len) + ")");
    return n / len;
}

std::vector<Vec3> face_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> out(mesh.faces.size());
    for (int i = 0; i < mesh.face_count(); ++i)
        out[i] = face_normal(mesh, i);
    return out;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
    // The raw cross product has magnitude 2*area, so summing unnormalized
    // face contributions is exactly the area weighting.
    std::vector<Vec3> acc(mesh.vertices.size(), Vec3{});
    std::vector<char> touched(mesh.vertices.size(), 0);
    for (const Face& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        Vec3 n = cross(b - a, c - a);
        for (int k = 0; k < 3; ++k) {
            acc[f[k]] += n;
            touched[f[k]] = 1;
        }
    }
    std::vector<Vec3> out(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (!touched[v])
            throw IsolatedVertexError("vertex " + std::to_string(v) + " has no incident face");
        double len = norm(acc[v]);
        if (len <= kDegenerateFaceEps)
            throw DegenerateFaceError("vertex " + std::to_string(v) +
                                      " normal accumulation is degenerate");
        out[v] = acc[v] / len;
    }
    return out;
}

std::vector<Vec3> barycenters(const TriangleMesh& mesh) {
    std::vector<Vec3> out(mesh.faces.size());
    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        out[i] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
    }
    return out;
}

LabeledMesh crop_base(const LabeledMesh& labeled, double keep_fraction) {
    labeled.validate();
    const TriangleMesh& mesh = labeled.mesh;
    std::vector<Vec3> bary = barycenters(mesh);
    Aabb box = bounding_box(bary);
    Vec3 ext = box.extent();

    int axis = 0;
    if (ext.y < ext[axis]) axis = 1;
    if (ext.z < ext[axis]) axis = 2;

    const double lo = box.lo[axis], hi = box.hi[axis];
    const double threshold = hi - keep_fraction * (hi - lo);

    LabeledMesh out;
    std::vector<int> vertex_map(mesh.vertices.size(), -1);
    for (size_t i = 0; i < bary.size(); ++i) {
        if (bary[i][axis] < threshold)
            continue;
        Face nf;
        for (int k = 0; k < 3; ++k) {
            int v = mesh.faces[i][k];
            if (vertex_map[v] < 0) {
                vertex_map[v] = static_cast<int>(out.mesh.vertices.size());
                out.mesh.vertices.push_back(mesh.vertices[v]);
            }
            nf[k] = vertex_map[v];
        }
        out.mesh.faces.push_back(nf);
        out.labels.push_back(labeled.labels[i]);
    }
    if (out.mesh.faces.empty())
        throw EmptyResultError("crop_base retained no faces (keep_fraction " +
                               std::to_string(keep_fraction) + ")");
    return out;
}

ClassId fdi_to_class(int fdi) {
    if (fdi == 0)
        return 0;
    if (fdi == 38 || fdi == 48)
        throw ThirdMolarError("FDI code " + std::to_string(fdi) +
                              " (third molar) present; scan exceeds the 14-teeth cap");
    int quadrant = fdi / 10;
    int position = fdi % 10; // 1 = central incisor .. 7 = 2nd molar
    if ((quadrant == 3 || quadrant == 4) && position >= 1 && position <= 7)
        return static_cast<ClassId>(8 - position); // 1 -> T7 ... 7 -> T1
    throw UnknownLabelError("unknown FDI code " + std::to_string(fdi));
}

LabeledMesh map_fdi_labels(const std::vector<int>& per_vertex_fdi, const TriangleMesh& mesh) {
    mesh.validate();
    if (per_vertex_fdi.size() != mesh.vertices.size())
        throw LengthMismatchError("per-vertex FDI count " + std::to_string(per_vertex_fdi.size()) +
                                  " != vertex count " + std::to_string(mesh.vertices.size()));

    std::vector<ClassId> vertex_class(per_vertex_fdi.size());
    for (size_t i = 0; i < per_vertex_fdi.size(); ++i)
        vertex_class[i] = fdi_to_class(per_vertex_fdi[i]);

    LabeledMesh out;
    out.mesh = mesh;
    out.labels.resize(mesh.faces.size());
    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        ClassId a = vertex_class[f[0]], b = vertex_class[f[1]], c = vertex_class[f[2]];
        // With three votes there is either a pair or a three-way tie; the
        // tie falls back to the first vertex's class.
        ClassId label = a;
        if (b == c) label = b;
        out.labels[i] = label;
    }
    return out;
}

} // namespace meshres
