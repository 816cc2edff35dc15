#include "meshres/synth.hpp"

#include <cmath>
#include <limits>

#include "meshres/geometry.hpp"
#include "meshres/rng.hpp"

namespace meshres {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct Tooth {
    Vec3 center; // on the arch centerline, z = 0
    double height;
    double sigma;
    ClassId label;
};
} // namespace

void SynthJawSpec::validate() const {
    if (tooth_count < 0 || tooth_count > 14)
        throw ConfigError("tooth_count must be in [0, 14]");
    if (arch_radius <= 0 || arch_width <= 0 || bump_height <= 0 || tooth_sigma <= 0 ||
        cells_target < 4)
        throw ConfigError("synth jaw dimensions must be positive");
    if (noise_amplitude < 0)
        throw ConfigError("noise_amplitude must be >= 0");
}

LabeledMesh synth_jaw(const SynthJawSpec& spec) {
    spec.validate();
    Rng rng(spec.seed ^ 0x7a3bULL);

    const double radius = spec.arch_radius * rng.uniform(0.95, 1.05);
    const double margin = 0.10; // rad, keeps the back teeth off the sheet edge

    // 14 slots: 7 per side mirrored about the midline theta = pi/2; slot j
    // (1-based from the midline) carries class 8 - j, so T7 sits nearest the
    // midline and T1 at the back. Slots fill midline-outward, alternating
    // sides, so partial jaws stay mirrored-ish.
    std::vector<Tooth> teeth;
    const double half_span = kPi / 2.0 - margin;
    for (int slot = 0; slot < spec.tooth_count; ++slot) {
        int j = slot / 2 + 1;       // distance rank from the midline
        int side = slot % 2 ? -1 : 1;
        double delta = (j - 0.5) * (half_span / 7.0);
        double theta = kPi / 2.0 + side * delta + rng.uniform(-0.012, 0.012);
        Tooth t;
        t.center = {radius * std::cos(theta), radius * std::sin(theta), 0.0};
        t.height = spec.bump_height * rng.uniform(0.85, 1.15);
        t.sigma = spec.tooth_sigma * rng.uniform(0.9, 1.1);
        t.label = static_cast<ClassId>(8 - j);
        teeth.push_back(t);
    }

    // Grid sized so 2*(ntheta-1)*(nr-1) >= cells_target, proportioned to the
    // sheet's arc-length : width ratio.
    const double arc_len = kPi * radius;
    const double aspect = arc_len / spec.arch_width;
    int ntheta = static_cast<int>(std::ceil(std::sqrt(spec.cells_target / 2.0 * aspect))) + 2;
    int nr = static_cast<int>(std::ceil(spec.cells_target / 2.0 / (ntheta - 1))) + 2;

    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<size_t>(ntheta) * nr);
    for (int it = 0; it < ntheta; ++it) {
        double theta = kPi * it / (ntheta - 1);
        for (int ir = 0; ir < nr; ++ir) {
            double u = spec.arch_width * (ir / static_cast<double>(nr - 1) - 0.5);
            double r = radius + u;
            Vec3 p{r * std::cos(theta), r * std::sin(theta), 0.0};
            for (const Tooth& t : teeth) {
                double dx = p.x - t.center.x, dy = p.y - t.center.y;
                double d2 = dx * dx + dy * dy;
                p.z += t.height * std::exp(-d2 / (2.0 * t.sigma * t.sigma));
            }
            p.z += rng.uniform(-spec.noise_amplitude, spec.noise_amplitude);
            mesh.vertices.push_back(p);
        }
    }
    for (int it = 0; it + 1 < ntheta; ++it) {
        for (int ir = 0; ir + 1 < nr; ++ir) {
            int a = it * nr + ir;
            int b = a + 1;
            int c = a + nr;
            int d = c + 1;
            mesh.faces.push_back({a, c, b});
            mesh.faces.push_back({b, c, d});
        }
    }

    LabeledMesh out;
    out.mesh = std::move(mesh);
    std::vector<Vec3> bary = barycenters(out.mesh);
    out.labels.resize(bary.size(), 0);
    for (size_t i = 0; i < bary.size(); ++i) {
        double best_d2 = std::numeric_limits<double>::infinity();
        const Tooth* best = nullptr;
        for (const Tooth& t : teeth) {
            double dx = bary[i].x - t.center.x, dy = bary[i].y - t.center.y;
            double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = &t;
            }
        }
        if (best && best_d2 < (2.2 * best->sigma) * (2.2 * best->sigma))
            out.labels[i] = best->label;
    }
    out.validate();
    return out;
}

std::vector<LabeledMesh> synth_generate(const SynthJawSpec& spec, int count) {
    spec.validate();
    if (count < 0)
        throw ConfigError("count must be >= 0");
    std::vector<LabeledMesh> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        SynthJawSpec s = spec;
        s.seed = splitmix64(spec.seed ^ (0x1000UL + static_cast<std::uint64_t>(i)));
        out.push_back(synth_jaw(s));
    }
    return out;
}

} // namespace meshres
