#include "meshres/augment.hpp"

#include <cmath>

namespace meshres {

namespace {

Vec3 rotate_axis(const Vec3& p, int axis, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    switch (axis) {
    case 0: return {p.x, c * p.y - s * p.z, s * p.y + c * p.z};
    case 1: return {c * p.x + s * p.z, p.y, -s * p.x + c * p.z};
    default: return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
    }
}

} // namespace

std::pair<LabeledMesh, AugmentSample> augment_surface(const LabeledMesh& labeled,
                                                      const AugmentConfig& config, Rng& rng) {
    AugmentSample s;
    for (int a = 0; a < 3; ++a) {
        s.scale_active[a] = rng.bernoulli(config.p_axis);
        s.scale_ratio[a] = rng.uniform(config.scale_min, config.scale_max);
    }
    for (int a = 0; a < 3; ++a) {
        s.rotate_active[a] = rng.bernoulli(config.p_axis);
        s.rotate_angle[a] = rng.uniform(config.angle_min, config.angle_max);
    }
    for (int a = 0; a < 3; ++a) {
        s.translate_active[a] = rng.bernoulli(config.p_axis);
        s.translate_offset[a] = rng.uniform(config.translate_min, config.translate_max);
    }

    LabeledMesh out = labeled;
    Vec3 scale{s.scale_active[0] ? s.scale_ratio[0] : 1.0,
               s.scale_active[1] ? s.scale_ratio[1] : 1.0,
               s.scale_active[2] ? s.scale_ratio[2] : 1.0};
    Vec3 offset{s.translate_active[0] ? s.translate_offset[0] : 0.0,
                s.translate_active[1] ? s.translate_offset[1] : 0.0,
                s.translate_active[2] ? s.translate_offset[2] : 0.0};
    for (Vec3& p : out.mesh.vertices) {
        p = {p.x * scale.x, p.y * scale.y, p.z * scale.z};
        for (int a = 0; a < 3; ++a)
            if (s.rotate_active[a])
                p = rotate_axis(p, a, s.rotate_angle[a]);
        p += offset;
    }
    return {std::move(out), s};
}

std::vector<LabeledMesh> expand_dataset(const std::vector<LabeledMesh>& surfaces,
                                        const AugmentConfig& config) {
    std::vector<LabeledMesh> out;
    out.reserve(surfaces.size() * (1 + std::max(config.copies, 0)));
    for (const LabeledMesh& m : surfaces)
        out.push_back(m);
    for (size_t i = 0; i < surfaces.size(); ++i) {
        for (int c = 0; c < config.copies; ++c) {
            Rng rng = Rng::keyed(config.seed, i, static_cast<std::uint64_t>(c));
            out.push_back(augment_surface(surfaces[i], config, rng).first);
        }
    }
    return out;
}

std::array<double, 9> rotation_matrix(const AugmentSample& sample) {
    std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (int a = 0; a < 3; ++a) {
        if (!sample.rotate_active[a])
            continue;
        double cs = std::cos(sample.rotate_angle[a]);
        double sn = std::sin(sample.rotate_angle[a]);
        std::array<double, 9> m{};
        switch (a) {
        case 0: m = {1, 0, 0, 0, cs, -sn, 0, sn, cs}; break;
        case 1: m = {cs, 0, sn, 0, 1, 0, -sn, 0, cs}; break;
        default: m = {cs, -sn, 0, sn, cs, 0, 0, 0, 1}; break;
        }
        std::array<double, 9> next{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    next[i * 3 + j] += m[i * 3 + k] * r[k * 3 + j];
        r = next;
    }
    return r;
}

} // namespace meshres
