// Procedural desk-scale stand-in for real intraoral scans: a U-shaped gum
// sheet with smooth tooth bumps, labeled BG on the sheet and by tooth
// position on the bumps (T7 nearest the midline out to T1 at the back,
// mirrored across the midline).
#pragma once

#include <cstdint>
#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

struct SynthJawSpec {
    int tooth_count = 14;        // <= 14
    double arch_radius = 30.0;   // mm, centerline of the U
    double arch_width = 14.0;    // mm, gum sheet across the arch
    double bump_height = 7.0;    // mm
    double tooth_sigma = 2.2;    // mm, bump spread
    int cells_target = 24000;    // minimum face count of the generated grid
    double noise_amplitude = 0.05; // mm, vertex jitter
    std::uint64_t seed = 0;

    void validate() const;
};

// One jaw from the spec's seed.
LabeledMesh synth_jaw(const SynthJawSpec& spec);

// `count` jaws with per-mesh perturbations derived from (spec.seed, index).
std::vector<LabeledMesh> synth_generate(const SynthJawSpec& spec, int count);

} // namespace meshres
