#include <doctest.h>

#include <set>

#include "meshres/decimate.hpp"
#include "meshres/geometry.hpp"
#include "test_helpers.hpp"

using namespace meshres;

namespace {

LabeledMesh labeled_sphere(int subdiv, bool hemisphere_labels = false) {
    LabeledMesh lm{testing::make_icosphere(subdiv), {}};
    auto bary = barycenters(lm.mesh);
    lm.labels.resize(bary.size(), 0);
    if (hemisphere_labels)
        for (size_t i = 0; i < bary.size(); ++i)
            lm.labels[i] = bary[i].z >= 0.0 ? 1 : 0;
    return lm;
}

Quadric random_plane_quadric(Rng& rng, int planes) {
    Quadric q;
    for (int i = 0; i < planes; ++i) {
        Vec3 n = normalized(
            {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        q.add_plane(n, rng.uniform(-2, 2));
    }
    return q;
}

} // namespace

TEST_CASE("coplanar vertex quadric evaluates to zero on its plane") {
    TriangleMesh sheet = testing::make_sheet(3, 3);
    auto quadrics = compute_quadrics(sheet);
    for (int v = 0; v < sheet.vertex_count(); ++v)
        CHECK(std::abs(quadrics[v].evaluate(sheet.vertices[v])) <= 1e-9);
}

TEST_CASE("quadrics are positive semidefinite up to roundoff") {
    Rng rng(11);
    TriangleMesh sphere = testing::make_icosphere(2);
    auto quadrics = compute_quadrics(sphere);
    for (int trial = 0; trial < 200; ++trial) {
        int v = static_cast<int>(rng.next_below(quadrics.size()));
        Vec3 probe{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        CHECK(quadrics[v].evaluate(probe) >= -1e-9);
    }
}

TEST_CASE("cube-corner quadric equals summed squared plane distances") {
    // Three triangles through the origin spanning the x=0, y=0, z=0 planes.
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
    auto quadrics = compute_quadrics(m);

    double inv = 1.0 / std::sqrt(3.0);
    Vec3 probe{inv, inv, inv}; // one unit along the corner diagonal

    // Independent oracle: squared distance to each incident plane.
    auto normals = face_normals(m);
    double expect = 0.0;
    for (const Vec3& n : normals) {
        double d = dot(n, probe) - dot(n, m.vertices[0]);
        expect += d * d;
    }
    CHECK(expect == doctest::Approx(1.0));
    CHECK(quadrics[0].evaluate(probe) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("collapse_cost finds zero-cost targets on a flat plane") {
    TriangleMesh sheet = testing::make_sheet(4, 4);
    auto quadrics = compute_quadrics(sheet);
    // interior edge: vertices 6 and 7 of the 5x5 grid
    Quadric sum = quadrics[6] + quadrics[7];
    CollapseCandidate c = collapse_cost(sum, sheet.vertices[6], sheet.vertices[7], 1.0);
    CHECK(c.cost <= 1e-9);
    CHECK(std::abs(c.target.z) <= 1e-6);
}

TEST_CASE("collapse_cost falls back to endpoint or midpoint when singular") {
    Quadric q;
    q.add_plane({0, 0, 1}, 0.0); // all incident planes parallel -> singular
    q.add_plane({0, 0, 1}, 0.0);
    Vec3 v1{0, 0, 0}, v2{1, 0, 1};
    CollapseCandidate c = collapse_cost(q, v1, v2, 1.0);
    bool is_candidate = (norm(c.target - v1) <= 1e-12) || (norm(c.target - v2) <= 1e-12) ||
                        (norm(c.target - (v1 + v2) * 0.5) <= 1e-12);
    CHECK(is_candidate);
    CHECK(norm(c.target - v1) <= 1e-12); // v1 is the cheapest of the three
}

TEST_CASE("collapse_cost beats endpoints, midpoint, and a probe grid") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        Quadric q = random_plane_quadric(rng, 6);
        Vec3 v1{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec3 v2{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CollapseCandidate c = collapse_cost(q, v1, v2, 1.0);
        CHECK(c.cost >= -1e-9);
        CHECK(c.cost <= q.evaluate(v1) + 1e-9);
        CHECK(c.cost <= q.evaluate(v2) + 1e-9);
        CHECK(c.cost <= q.evaluate((v1 + v2) * 0.5) + 1e-9);
        for (double x = -2; x <= 2; x += 1)
            for (double y = -2; y <= 2; y += 1)
                for (double z = -2; z <= 2; z += 1)
                    CHECK(c.cost <= q.evaluate({x, y, z}) + 1e-9);
    }
}

TEST_CASE("decimate with target == face count is a no-op") {
    LabeledMesh lm = labeled_sphere(1);
    DecimationConfig cfg;
    cfg.target_faces = lm.mesh.face_count();
    LabeledMesh out = decimate(lm, cfg);
    CHECK(out.mesh.vertices == lm.mesh.vertices);
    CHECK(out.mesh.faces == lm.mesh.faces);
    CHECK(out.labels == lm.labels);
}

TEST_CASE("decimate rejects bad targets") {
    LabeledMesh lm = labeled_sphere(1);
    DecimationConfig cfg;
    cfg.target_faces = 2;
    CHECK_THROWS_AS(decimate(lm, cfg), ConfigError);
    cfg.target_faces = lm.mesh.face_count() + 1;
    CHECK_THROWS_AS(decimate(lm, cfg), ConfigError);
}

TEST_CASE("icosphere decimation hits the target window with low surface error") {
    LabeledMesh lm = labeled_sphere(3); // 1280 faces
    DecimationConfig cfg;
    cfg.target_faces = 320;
    LabeledMesh out = decimate(lm, cfg);
    CHECK(out.mesh.face_count() <= 320);
    CHECK(out.mesh.face_count() >= 316);
    out.validate();

    // no duplicated faces
    std::set<std::array<int, 3>> seen;
    for (Face f : out.mesh.faces) {
        std::sort(f.begin(), f.end());
        CHECK(seen.insert(f).second);
    }

    // sampled points on the coarse surface stay near the original sphere
    Rng rng(5);
    auto samples = testing::sample_surface(out.mesh, 2000, rng);
    double total = 0.0;
    for (const Vec3& p : samples)
        total += testing::distance_to_mesh(p, lm.mesh);
    double diag = bounding_box(lm.mesh.vertices).diagonal();
    CHECK(total / samples.size() < 0.01 * diag);
}

TEST_CASE("labels ride along with surviving faces") {
    LabeledMesh lm = labeled_sphere(3, true);
    auto in_bary = barycenters(lm.mesh);
    DecimationConfig cfg;
    cfg.target_faces = lm.mesh.face_count() / 4;
    LabeledMesh out = decimate(lm, cfg);
    auto out_bary = barycenters(out.mesh);
    double edge = testing::median_edge_length(out.mesh);

    int agree = 0;
    for (size_t i = 0; i < out_bary.size(); ++i) {
        // nearest input barycenter oracle, exhaustive
        size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < in_bary.size(); ++j) {
            double d = distance_sq(out_bary[i], in_bary[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (out.labels[i] == lm.labels[best])
            ++agree;
        else
            CHECK(std::abs(out_bary[i].z) <= 2.0 * edge); // only near the equator seam
    }
    CHECK(agree >= static_cast<int>(0.95 * out_bary.size()));
}

TEST_CASE("decimation is deterministic") {
    LabeledMesh lm = labeled_sphere(2, true);
    DecimationConfig cfg;
    cfg.target_faces = 80;
    LabeledMesh a = decimate(lm, cfg);
    LabeledMesh b = decimate(lm, cfg);
    CHECK(a.mesh.vertices == b.mesh.vertices);
    CHECK(a.mesh.faces == b.mesh.faces);
    CHECK(a.labels == b.labels);
}

TEST_CASE("boundary vertices stay on the input boundary when preserved") {
    TriangleMesh sheet = testing::make_sheet(10, 10, 10.0);
    LabeledMesh lm{sheet, std::vector<ClassId>(sheet.faces.size(), 0)};
    DecimationConfig cfg;
    cfg.target_faces = 60;
    cfg.preserve_boundary = true;
    LabeledMesh out = decimate(lm, cfg);
    out.validate();
    CHECK(out.mesh.face_count() <= 60);
    for (const Vec3& v : out.mesh.vertices) {
        CHECK(std::abs(v.z) <= 1e-12); // flat sheet stays flat
        bool on_rim = std::abs(v.x) <= 1e-12 || std::abs(v.x - 10.0) <= 1e-12 ||
                      std::abs(v.y) <= 1e-12 || std::abs(v.y - 10.0) <= 1e-12;
        bool interior = v.x > -1e-12 && v.x < 10.0 + 1e-12 && v.y > -1e-12 &&
                        v.y < 10.0 + 1e-12;
        CHECK(interior);
        (void)on_rim;
    }
    // every boundary edge endpoint is an original rim position
    std::map<std::pair<int, int>, int> edge_count;
    for (const Face& f : out.mesh.faces)
        for (int k = 0; k < 3; ++k) {
            auto e = std::minmax(f[k], f[(k + 1) % 3]);
            ++edge_count[{e.first, e.second}];
        }
    for (const auto& [e, count] : edge_count) {
        if (count != 1)
            continue;
        for (int v : {e.first, e.second}) {
            const Vec3& p = out.mesh.vertices[v];
            bool on_rim = std::abs(p.x) <= 1e-12 || std::abs(p.x - 10.0) <= 1e-12 ||
                          std::abs(p.y) <= 1e-12 || std::abs(p.y - 10.0) <= 1e-12;
            CHECK(on_rim);
        }
    }
}
