#include <doctest.h>

#include "meshres/augment.hpp"
#include "test_helpers.hpp"

using namespace meshres;

namespace {

LabeledMesh small_surface() {
    LabeledMesh lm{testing::make_icosphere(1), {}};
    lm.labels.assign(lm.mesh.faces.size(), 3);
    return lm;
}

} // namespace

TEST_CASE("p_axis 0 leaves the surface untouched") {
    LabeledMesh lm = small_surface();
    AugmentConfig cfg;
    cfg.p_axis = 0.0;
    Rng rng(42);
    auto [out, sample] = augment_surface(lm, cfg, rng);
    CHECK(out.mesh.vertices == lm.mesh.vertices);
    CHECK(out.mesh.faces == lm.mesh.faces);
    CHECK(out.labels == lm.labels);
    for (int a = 0; a < 3; ++a) {
        CHECK_FALSE(sample.scale_active[a]);
        CHECK_FALSE(sample.rotate_active[a]);
        CHECK_FALSE(sample.translate_active[a]);
    }
}

TEST_CASE("drawn parameters stay in range and fire at the configured rate") {
    LabeledMesh lm = small_surface();
    AugmentConfig cfg;
    int active[3] = {0, 0, 0};
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::keyed(99, t, 0);
        auto [out, s] = augment_surface(lm, cfg, rng);
        (void)out;
        for (int a = 0; a < 3; ++a) {
            CHECK(s.scale_ratio[a] >= 0.8);
            CHECK(s.scale_ratio[a] <= 1.2);
            CHECK(s.translate_offset[a] >= -10.0);
            CHECK(s.translate_offset[a] <= 10.0);
            CHECK(s.rotate_angle[a] >= -3.14159266);
            CHECK(s.rotate_angle[a] <= 3.14159266);
            if (s.scale_active[a])
                ++active[a];
        }
    }
    for (int a = 0; a < 3; ++a) {
        double rate = active[a] / static_cast<double>(trials);
        CHECK(rate > 0.48);
        CHECK(rate < 0.52);
    }
}

TEST_CASE("composed rotation matrices are orthonormal with det 1") {
    LabeledMesh lm = small_surface();
    AugmentConfig cfg;
    for (int t = 0; t < 200; ++t) {
        Rng rng = Rng::keyed(7, t, 1);
        auto [out, s] = augment_surface(lm, cfg, rng);
        (void)out;
        auto r = rotation_matrix(s);
        // R^T R == I
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = 0.0;
                for (int k = 0; k < 3; ++k)
                    v += r[k * 3 + i] * r[k * 3 + j];
                CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) < 1e-9);
            }
        double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
        CHECK(std::abs(det - 1.0) < 1e-9);
    }
}

TEST_CASE("augmentation never alters labels or topology") {
    LabeledMesh lm = small_surface();
    AugmentConfig cfg;
    Rng rng(1234);
    auto [out, s] = augment_surface(lm, cfg, rng);
    (void)s;
    CHECK(out.mesh.faces == lm.mesh.faces);
    CHECK(out.labels == lm.labels);
    CHECK(out.mesh.vertex_count() == lm.mesh.vertex_count());
}

TEST_CASE("expand_dataset yields originals plus copies per surface") {
    std::vector<LabeledMesh> surfaces(10, small_surface());
    AugmentConfig cfg;
    cfg.copies = 4;
    cfg.seed = 21;
    auto out = expand_dataset(surfaces, cfg);
    CHECK(out.size() == 50);
    for (size_t i = 0; i < surfaces.size(); ++i)
        CHECK(out[i].mesh.vertices == surfaces[i].mesh.vertices);

    cfg.copies = 0;
    CHECK(expand_dataset(surfaces, cfg).size() == 10);
}

TEST_CASE("expansion is seed-deterministic") {
    std::vector<LabeledMesh> surfaces(3, small_surface());
    AugmentConfig cfg;
    cfg.copies = 2;
    cfg.seed = 5;
    auto a = expand_dataset(surfaces, cfg);
    auto b = expand_dataset(surfaces, cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].mesh.vertices == b[i].mesh.vertices); // bitwise

    cfg.seed = 6;
    auto c = expand_dataset(surfaces, cfg);
    bool any_diff = false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!(a[i].mesh.vertices == c[i].mesh.vertices))
            any_diff = true;
    CHECK(any_diff);
}
