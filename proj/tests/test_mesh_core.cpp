#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "meshres/geometry.hpp"
#include "meshres/mesh_io.hpp"
#include "test_helpers.hpp"

using namespace meshres;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    fs::path dir = fs::temp_directory_path() / "meshres_mesh_core_tests";
    fs::create_directories(dir);
    return dir;
}

TriangleMesh single_face_mesh() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

} // namespace

TEST_CASE("load_mesh parses a minimal OBJ") {
    fs::path p = tmp_dir() / "minimal.obj";
    std::ofstream(p) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    TriangleMesh m = load_mesh(p);
    CHECK(m.vertex_count() == 3);
    CHECK(m.face_count() == 1);
    CHECK(m.faces[0] == Face{0, 1, 2});
}

TEST_CASE("load_mesh rejects out-of-range face indices") {
    fs::path p = tmp_dir() / "bad_index.obj";
    std::ofstream(p) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 6\n";
    CHECK_THROWS_AS(load_mesh(p), ValidationError);
}

TEST_CASE("load_mesh rejects malformed records") {
    fs::path p = tmp_dir() / "malformed.obj";
    std::ofstream(p) << "v 0 nope 0\n";
    CHECK_THROWS_AS(load_mesh(p), ParseError);
}

TEST_CASE("OBJ round trip preserves icosphere geometry and topology") {
    TriangleMesh sphere = testing::make_icosphere(4); // 5120 faces
    REQUIRE(sphere.face_count() == 5120);
    fs::path p = tmp_dir() / "icosphere.obj";
    save_obj(p, sphere);
    TriangleMesh back = load_mesh(p);
    REQUIRE(back.vertex_count() == sphere.vertex_count());
    REQUIRE(back.faces == sphere.faces);
    for (int i = 0; i < sphere.vertex_count(); ++i) {
        // 9 significant digits in the writer
        CHECK(back.vertices[i].x == doctest::Approx(sphere.vertices[i].x).epsilon(1e-8));
        CHECK(back.vertices[i].y == doctest::Approx(sphere.vertices[i].y).epsilon(1e-8));
        CHECK(back.vertices[i].z == doctest::Approx(sphere.vertices[i].z).epsilon(1e-8));
    }
}

TEST_CASE("PLY ascii and binary little-endian load") {
    fs::path pa = tmp_dir() / "tri.ply";
    std::ofstream(pa) << "ply\nformat ascii 1.0\nelement vertex 3\n"
                         "property float x\nproperty float y\nproperty float z\n"
                         "element face 1\nproperty list uchar int vertex_indices\n"
                         "end_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
    TriangleMesh ma = load_mesh(pa);
    CHECK(ma.face_count() == 1);
    CHECK(ma.vertices[1].x == doctest::Approx(1.0));

    fs::path pb = tmp_dir() / "tri_bin.ply";
    {
        std::ofstream out(pb, std::ios::binary);
        out << "ply\nformat binary_little_endian 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_indices\n"
               "end_header\n";
        float coords[9] = {0, 0, 0, 1, 0, 0, 0, 1, 0};
        out.write(reinterpret_cast<char*>(coords), sizeof(coords));
        unsigned char n = 3;
        int idx[3] = {0, 1, 2};
        out.write(reinterpret_cast<char*>(&n), 1);
        out.write(reinterpret_cast<char*>(idx), sizeof(idx));
    }
    TriangleMesh mb = load_mesh(pb);
    CHECK(mb.face_count() == 1);
    CHECK(mb.vertices[2].y == doctest::Approx(1.0));
}

TEST_CASE("binary STL loads and welds shared vertices") {
    fs::path p = tmp_dir() / "two.stl";
    {
        std::ofstream out(p, std::ios::binary);
        char header[80] = {};
        out.write(header, 80);
        std::uint32_t count = 2;
        out.write(reinterpret_cast<char*>(&count), 4);
        auto facet = [&](float ax, float ay, float bx, float by, float cx, float cy) {
            float rec[12] = {0, 0, 1, ax, ay, 0, bx, by, 0, cx, cy, 0};
            std::uint16_t attr = 0;
            out.write(reinterpret_cast<char*>(rec), 48);
            out.write(reinterpret_cast<char*>(&attr), 2);
        };
        facet(0, 0, 1, 0, 0, 1);
        facet(1, 0, 1, 1, 0, 1);
    }
    TriangleMesh m = load_mesh(p);
    CHECK(m.face_count() == 2);
    CHECK(m.vertex_count() == 4); // shared edge welded
}

TEST_CASE("face_normal follows the right-hand rule") {
    TriangleMesh m = single_face_mesh();
    Vec3 n = face_normal(m, 0);
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(0.0));
    CHECK(n.z == doctest::Approx(1.0));

    std::swap(m.faces[0][1], m.faces[0][2]);
    Vec3 r = face_normal(m, 0);
    CHECK(r.z == doctest::Approx(-1.0));
}

TEST_CASE("face_normal rejects degenerate faces") {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    m.faces = {{0, 1, 2}};
    CHECK_THROWS_AS(face_normal(m, 0), DegenerateFaceError);
}

TEST_CASE("icosphere face normals point outward") {
    TriangleMesh sphere = testing::make_icosphere(2);
    auto bary = barycenters(sphere);
    for (int i = 0; i < sphere.face_count(); ++i) {
        Vec3 n = face_normal(sphere, i);
        CHECK(std::abs(norm(n) - 1.0) <= 1e-9);
        CHECK(dot(n, normalized(bary[i])) > 0.9);
    }
}

TEST_CASE("vertex normals on a flat quad are +z") {
    TriangleMesh quad = testing::make_sheet(1, 1);
    auto normals = vertex_normals(quad);
    for (const Vec3& n : normals) {
        CHECK(n.x == doctest::Approx(0.0));
        CHECK(n.y == doctest::Approx(0.0));
        CHECK(n.z == doctest::Approx(1.0));
    }
}

TEST_CASE("icosphere vertex normals align with positions") {
    TriangleMesh sphere = testing::make_icosphere(3);
    auto normals = vertex_normals(sphere);
    for (int v = 0; v < sphere.vertex_count(); ++v) {
        CHECK(std::abs(norm(normals[v]) - 1.0) <= 1e-9);
        CHECK(dot(normals[v], normalized(sphere.vertices[v])) >= 0.99);
    }
}

TEST_CASE("vertex_normals reports isolated vertices") {
    TriangleMesh m = single_face_mesh();
    m.vertices.push_back({9, 9, 9}); // unreferenced
    CHECK_THROWS_AS(vertex_normals(m), IsolatedVertexError);
}

TEST_CASE("barycenters are vertex means and translate with the mesh") {
    TriangleMesh m = single_face_mesh();
    auto b = barycenters(m);
    CHECK(b[0].x == doctest::Approx(1.0));
    CHECK(b[0].y == doctest::Approx(1.0));
    CHECK(b[0].z == doctest::Approx(0.0));

    Rng rng(7);
    TriangleMesh rand_mesh;
    for (int i = 0; i < 60; ++i)
        rand_mesh.vertices.push_back(
            {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
    for (int i = 0; i + 2 < 60; i += 3)
        rand_mesh.faces.push_back({i, i + 1, i + 2});

    Vec3 t{1.5, -2.0, 0.25};
    TriangleMesh moved = rand_mesh;
    for (Vec3& v : moved.vertices)
        v += t;
    auto b0 = barycenters(rand_mesh);
    auto b1 = barycenters(moved);
    for (size_t i = 0; i < b0.size(); ++i) {
        // exact recompute oracle
        const Face& f = rand_mesh.faces[i];
        Vec3 expect = (rand_mesh.vertices[f[0]] + rand_mesh.vertices[f[1]] +
                       rand_mesh.vertices[f[2]]) / 3.0;
        CHECK(b0[i].x == expect.x);
        CHECK(b0[i].y == expect.y);
        CHECK(b0[i].z == expect.z);
        CHECK(norm(b1[i] - (b0[i] + t)) <= 1e-12);
    }
}

TEST_CASE("normals and barycenters are rigid-motion equivariant") {
    TriangleMesh sphere = testing::make_icosphere(2);
    Vec3 axis = normalized(Vec3{1, 2, 3});
    double angle = 0.83;
    TriangleMesh rot = testing::rotated(sphere, axis, angle);

    auto b_then_rot = barycenters(sphere);
    for (Vec3& b : b_then_rot)
        b = testing::rotate_about(b, axis, angle);
    auto rot_then_b = barycenters(rot);
    for (size_t i = 0; i < b_then_rot.size(); ++i)
        CHECK(norm(b_then_rot[i] - rot_then_b[i]) <= 1e-9);

    for (int i = 0; i < sphere.face_count(); i += 17) {
        Vec3 n = testing::rotate_about(face_normal(sphere, i), axis, angle);
        Vec3 m = face_normal(rot, i);
        CHECK(norm(n - m) <= 1e-9);
    }
}

TEST_CASE("crop_base keeps everything at keep_fraction 1") {
    LabeledMesh labeled{testing::make_icosphere(1), {}};
    labeled.labels.assign(labeled.mesh.faces.size(), 2);
    LabeledMesh out = crop_base(labeled, 1.0);
    CHECK(out.mesh.face_count() == labeled.mesh.face_count());
    CHECK(out.labels == labeled.labels);
}

TEST_CASE("crop_base keeps only the upper of two stacked plates") {
    TriangleMesh lower = testing::make_sheet(6, 6, 10.0, 0.0);
    TriangleMesh upper = testing::make_sheet(6, 6, 10.0, 1.0);
    TriangleMesh both = lower;
    int off = both.vertex_count();
    for (const Vec3& v : upper.vertices)
        both.vertices.push_back(v);
    for (const Face& f : upper.faces)
        both.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    LabeledMesh labeled{both, {}};
    labeled.labels.assign(lower.faces.size(), 0);
    labeled.labels.insert(labeled.labels.end(), upper.faces.size(), 1);

    LabeledMesh out = crop_base(labeled, 0.4);
    CHECK(out.mesh.face_count() == upper.face_count());
    for (ClassId c : out.labels)
        CHECK(c == 1);
}

TEST_CASE("crop_base with an impossible threshold reports an empty result") {
    LabeledMesh labeled{testing::make_icosphere(1), {}};
    labeled.labels.assign(labeled.mesh.faces.size(), 0);
    CHECK_THROWS_AS(crop_base(labeled, -0.5), EmptyResultError);
}

TEST_CASE("crop_base never grows the face count and keeps labels") {
    LabeledMesh labeled{testing::make_icosphere(2), {}};
    Rng rng(3);
    for (size_t i = 0; i < labeled.mesh.faces.size(); ++i)
        labeled.labels.push_back(static_cast<ClassId>(rng.next_below(8)));
    for (double keep : {0.3, 0.6, 0.9}) {
        LabeledMesh out = crop_base(labeled, keep);
        CHECK(out.mesh.face_count() <= labeled.mesh.face_count());
        out.validate();
    }
}

TEST_CASE("FDI mapping handles majority, mirroring, and errors") {
    TriangleMesh m = single_face_mesh();

    LabeledMesh a = map_fdi_labels({31, 31, 0}, m);
    CHECK(a.labels[0] == 7); // T7 by majority

    LabeledMesh b = map_fdi_labels({31, 41, 0}, m);
    CHECK(b.labels[0] == 7); // mirrored quadrants merge

    // three-way tie falls back to the first vertex's class
    LabeledMesh c = map_fdi_labels({36, 31, 0}, m);
    CHECK(c.labels[0] == 2); // 36 -> T2

    CHECK_THROWS_AS(map_fdi_labels({48, 31, 0}, m), ThirdMolarError);
    CHECK_THROWS_AS(map_fdi_labels({38, 31, 0}, m), ThirdMolarError);
    CHECK_THROWS_AS(map_fdi_labels({21, 31, 0}, m), UnknownLabelError);
    CHECK_THROWS_AS(map_fdi_labels({31, 31}, m), LengthMismatchError);
}

TEST_CASE("FDI mapping table covers every lower-jaw code") {
    // position 1..7 maps to T7..T1 in both quadrants
    for (int pos = 1; pos <= 7; ++pos) {
        CHECK(fdi_to_class(30 + pos) == 8 - pos);
        CHECK(fdi_to_class(40 + pos) == 8 - pos);
    }
    CHECK(fdi_to_class(0) == 0);
}

TEST_CASE("label sidecar round trip") {
    fs::path p = tmp_dir() / "labels.json";
    std::vector<ClassId> labels = {0, 1, 7, 3};
    save_labels(p, labels);
    LabelFile lf = load_labels(p);
    CHECK(lf.mode == LabelFile::Mode::Face);
    REQUIRE(lf.labels.size() == 4);
    CHECK(lf.labels[2] == 7);
}

TEST_CASE("apply_labels validates lengths and modes") {
    TriangleMesh m = single_face_mesh();
    LabelFile face_file{LabelFile::Mode::Face, {5}};
    LabeledMesh lm = apply_labels(m, face_file);
    CHECK(lm.labels[0] == 5);

    LabelFile bad_len{LabelFile::Mode::Face, {1, 2}};
    CHECK_THROWS_AS(apply_labels(m, bad_len), LengthMismatchError);

    LabelFile fdi{LabelFile::Mode::VertexFdi, {31, 31, 0}};
    CHECK(apply_labels(m, fdi).labels[0] == 7);
}
