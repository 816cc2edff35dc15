// Quadric-error-metric edge-collapse decimation of a labeled mesh down to a
// target face count. Faces persist through collapses, so per-face labels
// ride along untouched.
#pragma once

#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

// Symmetric 4x4 quadric, upper triangle stored row-major:
// [0 1 2 3; . 4 5 6; . . 7 8; . . . 9].
struct Quadric {
    double m[10] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};

    // Accumulates p p^T for plane ax+by+cz+d=0 with (a,b,c) unit.
    void add_plane(const Vec3& n, double d);
    // (v,1)^T Q (v,1)
    double evaluate(const Vec3& v) const;

    Quadric& operator+=(const Quadric& o);
    Quadric operator+(const Quadric& o) const;
};

struct CollapseCandidate {
    int v1 = -1, v2 = -1;
    double cost = 0.0;
    Vec3 target;
};

struct DecimationConfig {
    int target_faces = 4;
    bool preserve_boundary = true;
};

// One quadric per vertex: sum of incident-face plane quadrics.
std::vector<Quadric> compute_quadrics(const TriangleMesh& mesh);

// Optimal collapse target for the summed quadric. Solves the 3x3 system;
// when |det| < 1e-10 * scale^3 falls back to the cheapest of v1, v2 and the
// midpoint (ties keep that order). `scale` is the input's bbox diagonal.
CollapseCandidate collapse_cost(const Quadric& q_sum, const Vec3& v1, const Vec3& v2,
                                double scale);

// Greedy cheapest-edge-first collapse until face count <= target_faces.
// Collapses that would flip a surviving face's normal or create a
// non-manifold edge are rejected; they re-enter the queue when their
// neighborhood changes. Deterministic: priority ties break on the smallest
// vertex-index pair. Throws TargetUnreachableError when no legal collapse
// remains above the target.
LabeledMesh decimate(const LabeledMesh& labeled, const DecimationConfig& config);

} // namespace meshres
