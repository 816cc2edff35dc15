// Stochastic surface augmentation: per-axis scaling, rotation about x/y/z,
// and per-axis translation, each active with a coin flip. Topology and
// labels are never touched.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshres/mesh.hpp"
#include "meshres/rng.hpp"

namespace meshres {

struct AugmentConfig {
    double p_axis = 0.5;
    double translate_min = -10.0, translate_max = 10.0; // mm
    double scale_min = 0.8, scale_max = 1.2;
    double angle_min = -3.14159265358979323846, angle_max = 3.14159265358979323846;
    int copies = 4;
    std::uint64_t seed = 0;
};

// Drawn parameters for one augmentation, flags recording which were applied.
struct AugmentSample {
    std::array<bool, 3> scale_active{}, rotate_active{}, translate_active{};
    std::array<double, 3> scale_ratio{1.0, 1.0, 1.0};
    std::array<double, 3> rotate_angle{};
    std::array<double, 3> translate_offset{};
};

// Applies scale -> rotate(x) -> rotate(y) -> rotate(z) -> translate. All six
// values per stage are drawn from `rng` whether or not the stage fires, so a
// stream position depends only on how many samples were drawn before it.
std::pair<LabeledMesh, AugmentSample> augment_surface(const LabeledMesh& labeled,
                                                      const AugmentConfig& config, Rng& rng);

// Originals first, then `copies` augmented variants per surface in surface-
// major order. Stream (seed, surface index, copy index) per variant.
std::vector<LabeledMesh> expand_dataset(const std::vector<LabeledMesh>& surfaces,
                                        const AugmentConfig& config);

// 3x3 rotation matrix (row-major) composed the same way augment_surface
// applies it: Rz * Ry * Rx.
std::array<double, 9> rotation_matrix(const AugmentSample& sample);

} // namespace meshres
