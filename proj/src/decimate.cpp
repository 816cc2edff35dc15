#include "meshres/decimate.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>

#include "meshres/geometry.hpp"

namespace meshres {

void Quadric::add_plane(const Vec3& n, double d) {
    m[0] += n.x * n.x;
    m[1] += n.x * n.y;
    m[2] += n.x * n.z;
    m[3] += n.x * d;
    m[4] += n.y * n.y;
    m[5] += n.y * n.z;
    m[6] += n.y * d;
    m[7] += n.z * n.z;
    m[8] += n.z * d;
    m[9] += d * d;
}

double Quadric::evaluate(const Vec3& v) const {
    return m[0] * v.x * v.x + m[4] * v.y * v.y + m[7] * v.z * v.z +
           2.0 * (m[1] * v.x * v.y + m[2] * v.x * v.z + m[5] * v.y * v.z) +
           2.0 * (m[3] * v.x + m[6] * v.y + m[8] * v.z) + m[9];
}

Quadric& Quadric::operator+=(const Quadric& o) {
    for (int i = 0; i < 10; ++i)
        m[i] += o.m[i];
    return *this;
}

Quadric Quadric::operator+(const Quadric& o) const {
    Quadric q = *this;
    q += o;
    return q;
}

std::vector<Quadric> compute_quadrics(const TriangleMesh& mesh) {
    std::vector<Quadric> out(mesh.vertices.size());
    for (int i = 0; i < mesh.face_count(); ++i) {
        Vec3 n = face_normal(mesh, i); // throws on degenerate faces
        double d = -dot(n, mesh.vertices[mesh.faces[i][0]]);
        for (int k = 0; k < 3; ++k)
            out[mesh.faces[i][k]].add_plane(n, d);
    }
    return out;
}

CollapseCandidate collapse_cost(const Quadric& q_sum, const Vec3& v1, const Vec3& v2,
                                double scale) {
    const double* q = q_sum.m;
    // A = symmetric 3x3 block, rhs = -b.
    double a00 = q[0], a01 = q[1], a02 = q[2];
    double a11 = q[4], a12 = q[5], a22 = q[7];
    double b0 = -q[3], b1 = -q[6], b2 = -q[8];

    double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                 a02 * (a01 * a12 - a11 * a02);

    CollapseCandidate cand;
    if (std::abs(det) >= 1e-10 * scale * scale * scale) {
        double inv = 1.0 / det;
        Vec3 target;
        target.x = inv * (b0 * (a11 * a22 - a12 * a12) + b1 * (a02 * a12 - a01 * a22) +
                          b2 * (a01 * a12 - a02 * a11));
        target.y = inv * (b0 * (a12 * a02 - a01 * a22) + b1 * (a00 * a22 - a02 * a02) +
                          b2 * (a01 * a02 - a00 * a12));
        target.z = inv * (b0 * (a01 * a12 - a11 * a02) + b1 * (a01 * a02 - a00 * a12) +
                          b2 * (a00 * a11 - a01 * a01));
        cand.target = target;
        cand.cost = q_sum.evaluate(target);
        return cand;
    }
    Vec3 candidates[3] = {v1, v2, (v1 + v2) * 0.5};
    cand.target = candidates[0];
    cand.cost = q_sum.evaluate(candidates[0]);
    for (int i = 1; i < 3; ++i) {
        double c = q_sum.evaluate(candidates[i]);
        if (c < cand.cost) {
            cand.cost = c;
            cand.target = candidates[i];
        }
    }
    return cand;
}

namespace {

struct HeapEntry {
    double cost;
    int v1, v2; // v1 < v2
    std::uint32_t ver1, ver2;
    Vec3 target;
};

struct HeapLater {
    // std::priority_queue is a max-heap; "later" = higher cost, then the
    // larger vertex-index pair.
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.cost != b.cost)
            return a.cost > b.cost;
        if (a.v1 != b.v1)
            return a.v1 > b.v1;
        return a.v2 > b.v2;
    }
};

class Decimator {
public:
    Decimator(const LabeledMesh& labeled, const DecimationConfig& config)
        : config_(config), positions_(labeled.mesh.vertices), labels_(labeled.labels) {
        faces_ = labeled.mesh.faces;
        face_alive_.assign(faces_.size(), 1);
        alive_faces_ = static_cast<int>(faces_.size());
        vert_alive_.assign(positions_.size(), 1);
        version_.assign(positions_.size(), 0);
        scale_ = bounding_box(positions_).diagonal();
        quadrics_ = compute_quadrics(labeled.mesh);

        incident_.resize(positions_.size());
        for (int f = 0; f < static_cast<int>(faces_.size()); ++f)
            for (int k = 0; k < 3; ++k)
                incident_[faces_[f][k]].push_back(f);
    }

    LabeledMesh run() {
        seed_queue();
        while (alive_faces_ > config_.target_faces) {
            HeapEntry e;
            if (!pop_valid(e))
                throw TargetUnreachableError(
                    "no legal collapse remains at " + std::to_string(alive_faces_) +
                    " faces (target " + std::to_string(config_.target_faces) + ")");
            try_collapse(e);
        }
        return compact();
    }

private:
    void seed_queue() {
        std::vector<std::pair<int, int>> edges;
        edges.reserve(faces_.size() * 3);
        for (const Face& f : faces_) {
            for (int k = 0; k < 3; ++k) {
                int a = f[k], b = f[(k + 1) % 3];
                edges.emplace_back(std::min(a, b), std::max(a, b));
            }
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (auto [a, b] : edges)
            push_candidate(a, b);
    }

    void push_candidate(int a, int b) {
        if (!vert_alive_[a] || !vert_alive_[b])
            return;
        if (a > b)
            std::swap(a, b);
        Vec3 target;
        double cost;
        if (!candidate_position(a, b, target, cost))
            return;
        heap_.push(HeapEntry{cost, a, b, version_[a], version_[b], target});
    }

    // Boundary-aware target selection. Returns false when the edge is not
    // collapsible under the boundary policy.
    bool candidate_position(int a, int b, Vec3& target, double& cost) {
        Quadric q = quadrics_[a] + quadrics_[b];
        if (config_.preserve_boundary) {
            bool ba = is_boundary_vertex(a), bb = is_boundary_vertex(b);
            if (ba && bb) {
                if (edge_face_count(a, b) != 1)
                    return false; // interior edge joining two boundary verts: pinch
                double ca = q.evaluate(positions_[a]);
                double cb = q.evaluate(positions_[b]);
                target = cb < ca ? positions_[b] : positions_[a];
                cost = std::min(ca, cb);
                return true;
            }
            if (ba || bb) {
                target = ba ? positions_[a] : positions_[b];
                cost = q.evaluate(target);
                return true;
            }
        }
        CollapseCandidate c = collapse_cost(q, positions_[a], positions_[b], scale_);
        target = c.target;
        cost = c.cost;
        return true;
    }

    int edge_face_count(int a, int b) const {
        int n = 0;
        for (int f : incident_[a])
            if (face_alive_[f] && face_has(f, b))
                ++n;
        return n;
    }

    bool face_has(int f, int v) const {
        return faces_[f][0] == v || faces_[f][1] == v || faces_[f][2] == v;
    }

    bool is_boundary_vertex(int v) const {
        for (int f : incident_[v]) {
            if (!face_alive_[f])
                continue;
            for (int k = 0; k < 3; ++k) {
                int a = faces_[f][k], b = faces_[f][(k + 1) % 3];
                if (a != v && b != v)
                    continue;
                if (edge_face_count(a, b) == 1)
                    return true;
            }
        }
        return false;
    }

    bool pop_valid(HeapEntry& out) {
        while (!heap_.empty()) {
            HeapEntry e = heap_.top();
            heap_.pop();
            if (!vert_alive_[e.v1] || !vert_alive_[e.v2])
                continue;
            if (version_[e.v1] != e.ver1 || version_[e.v2] != e.ver2)
                continue;
            out = e;
            return true;
        }
        return false;
    }

    std::vector<int> neighbors(int v) const {
        std::vector<int> nb;
        for (int f : incident_[v]) {
            if (!face_alive_[f])
                continue;
            for (int k = 0; k < 3; ++k)
                if (faces_[f][k] != v)
                    nb.push_back(faces_[f][k]);
        }
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        return nb;
    }

    bool try_collapse(const HeapEntry& e) {
        const int v1 = e.v1, v2 = e.v2;

        std::vector<int> edge_faces;
        for (int f : incident_[v1])
            if (face_alive_[f] && face_has(f, v2))
                edge_faces.push_back(f);
        if (edge_faces.empty() || edge_faces.size() > 2)
            return false;

        // Link condition: shared neighbors must be exactly the vertices
        // opposite the edge faces, else the collapse pinches the surface.
        std::vector<int> nb1 = neighbors(v1), nb2 = neighbors(v2);
        std::vector<int> common;
        std::set_intersection(nb1.begin(), nb1.end(), nb2.begin(), nb2.end(),
                              std::back_inserter(common));
        std::vector<int> opposite;
        for (int f : edge_faces)
            for (int k = 0; k < 3; ++k)
                if (faces_[f][k] != v1 && faces_[f][k] != v2)
                    opposite.push_back(faces_[f][k]);
        std::sort(opposite.begin(), opposite.end());
        if (common != opposite)
            return false;

        // Flip / degeneracy check over every surviving face of both stars.
        for (int v : {v1, v2}) {
            for (int f : incident_[v]) {
                if (!face_alive_[f] || face_has(f, v == v1 ? v2 : v1))
                    continue;
                Vec3 p[3], pnew[3];
                for (int k = 0; k < 3; ++k) {
                    p[k] = positions_[faces_[f][k]];
                    pnew[k] = (faces_[f][k] == v) ? e.target : p[k];
                }
                Vec3 n_old = cross(p[1] - p[0], p[2] - p[0]);
                Vec3 n_new = cross(pnew[1] - pnew[0], pnew[2] - pnew[0]);
                if (norm(n_new) <= kDegenerateFaceEps || dot(n_old, n_new) <= 0.0)
                    return false;
            }
        }

        // Commit: v2 merges into v1 at the target position.
        positions_[v1] = e.target;
        quadrics_[v1] += quadrics_[v2];
        for (int f : edge_faces) {
            face_alive_[f] = 0;
            --alive_faces_;
        }
        for (int f : incident_[v2]) {
            if (!face_alive_[f])
                continue;
            for (int k = 0; k < 3; ++k)
                if (faces_[f][k] == v2)
                    faces_[f][k] = v1;
            incident_[v1].push_back(f);
        }
        incident_[v2].clear();
        vert_alive_[v2] = 0;

        std::sort(incident_[v1].begin(), incident_[v1].end());
        incident_[v1].erase(std::unique(incident_[v1].begin(), incident_[v1].end()),
                            incident_[v1].end());

        // Invalidate and re-seed the 2-ring: candidates whose cost or
        // legality may have changed.
        std::vector<int> ring = neighbors(v1);
        ++version_[v1];
        for (int u : ring)
            ++version_[u];
        for (int u : ring)
            push_candidate(v1, u);
        for (int u : ring)
            for (int w : neighbors(u))
                if (w != v1)
                    push_candidate(u, w);
        return true;
    }

    LabeledMesh compact() const {
        LabeledMesh out;
        std::vector<int> vmap(positions_.size(), -1);
        for (size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f])
                continue;
            Face nf;
            for (int k = 0; k < 3; ++k) {
                int v = faces_[f][k];
                if (vmap[v] < 0) {
                    vmap[v] = static_cast<int>(out.mesh.vertices.size());
                    out.mesh.vertices.push_back(positions_[v]);
                }
                nf[k] = vmap[v];
            }
            out.mesh.faces.push_back(nf);
            out.labels.push_back(labels_[f]);
        }
        return out;
    }

    DecimationConfig config_;
    std::vector<Vec3> positions_;
    std::vector<ClassId> labels_;
    std::vector<Face> faces_;
    std::vector<char> face_alive_, vert_alive_;
    std::vector<std::uint32_t> version_;
    std::vector<Quadric> quadrics_;
    std::vector<std::vector<int>> incident_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLater> heap_;
    double scale_ = 1.0;
    int alive_faces_ = 0;
};

} // namespace

LabeledMesh decimate(const LabeledMesh& labeled, const DecimationConfig& config) {
    labeled.validate();
    if (config.target_faces < 4)
        throw ConfigError("target_faces must be >= 4");
    if (config.target_faces > labeled.mesh.face_count())
        throw ConfigError("target_faces " + std::to_string(config.target_faces) +
                          " exceeds face count " + std::to_string(labeled.mesh.face_count()));
    if (config.target_faces == labeled.mesh.face_count())
        return labeled;
    Decimator dec(labeled, config);
    LabeledMesh out = dec.run();
    out.validate();
    return out;
}

} // namespace meshres
