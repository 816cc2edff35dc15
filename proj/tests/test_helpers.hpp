// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately brute-force: these implementations double-check the
// library rather than reuse it.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "meshres/mesh.hpp"
#include "meshres/rng.hpp"

namespace meshres::testing {

// Icosphere with 20 * 4^subdivisions faces, radius `r`, centered at origin.
inline TriangleMesh make_icosphere(int subdivisions, double r = 1.0) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (Vec3& v : verts)
        v = normalized(v);
    std::vector<Face> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end())
                return it->second;
            Vec3 m = normalized((verts[a] + verts[b]) * 0.5);
            int idx = static_cast<int>(verts.size());
            verts.push_back(m);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const Face& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    TriangleMesh mesh;
    mesh.vertices = std::move(verts);
    for (Vec3& v : mesh.vertices)
        v = v * r;
    mesh.faces = std::move(faces);
    return mesh;
}

// Axis-aligned rectangular grid sheet in the z = `z` plane.
inline TriangleMesh make_sheet(int nx, int ny, double size = 1.0, double z = 0.0) {
    TriangleMesh mesh;
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix)
            mesh.vertices.push_back({size * ix / nx, size * iy / ny, z});
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            int a = iy * (nx + 1) + ix;
            int b = a + 1;
            int c = a + nx + 1;
            int d = c + 1;
            mesh.faces.push_back({a, b, c});
            mesh.faces.push_back({b, d, c});
        }
    return mesh;
}

// Closest distance from p to triangle (a, b, c); Ericson's method.
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return distance(p, a);
    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3)
        return distance(p, b);
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return distance(p, a + ab * v);
    }
    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6)
        return distance(p, c);
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return distance(p, a + ac * w);
    }
    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return distance(p, b + (c - b) * w);
    }
    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return distance(p, a + ab * v + ac * w);
}

// Exhaustive nearest-triangle distance to the whole mesh.
inline double distance_to_mesh(const Vec3& p, const TriangleMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const Face& f : mesh.faces)
        best = std::min(best, point_triangle_distance(p, mesh.vertices[f[0]],
                                                      mesh.vertices[f[1]], mesh.vertices[f[2]]));
    return best;
}

// Uniform-by-area surface samples.
inline std::vector<Vec3> sample_surface(const TriangleMesh& mesh, int count, Rng& rng) {
    std::vector<double> cum(mesh.faces.size());
    double total = 0.0;
    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        total += 0.5 * norm(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                                  mesh.vertices[f[2]] - mesh.vertices[f[0]]));
        cum[i] = total;
    }
    std::vector<Vec3> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        double pick = rng.next_double() * total;
        size_t idx = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
        if (idx >= mesh.faces.size())
            idx = mesh.faces.size() - 1;
        const Face& f = mesh.faces[idx];
        double u = rng.next_double(), v = rng.next_double();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        out.push_back(mesh.vertices[f[0]] +
                      (mesh.vertices[f[1]] - mesh.vertices[f[0]]) * u +
                      (mesh.vertices[f[2]] - mesh.vertices[f[0]]) * v);
    }
    return out;
}

// Median edge length over unique edges.
inline double median_edge_length(const TriangleMesh& mesh) {
    std::vector<double> lens;
    lens.reserve(mesh.faces.size() * 3);
    for (const Face& f : mesh.faces)
        for (int k = 0; k < 3; ++k)
            lens.push_back(distance(mesh.vertices[f[k]], mesh.vertices[f[(k + 1) % 3]]));
    std::sort(lens.begin(), lens.end());
    return lens[lens.size() / 2];
}

// Rigid rotation about an arbitrary axis (Rodrigues).
inline Vec3 rotate_about(const Vec3& p, const Vec3& axis_unit, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return p * c + cross(axis_unit, p) * s + axis_unit * (dot(axis_unit, p) * (1.0 - c));
}

inline TriangleMesh rotated(const TriangleMesh& mesh, const Vec3& axis_unit, double angle) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices)
        v = rotate_about(v, axis_unit, angle);
    return out;
}

} // namespace meshres::testing
