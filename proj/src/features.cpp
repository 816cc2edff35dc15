#include "meshres/features.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "meshres/geometry.hpp"

namespace meshres {

namespace {

void write_point(double* row, int col, const Vec3& p) {
    row[col] = p.x;
    row[col + 1] = p.y;
    row[col + 2] = p.z;
}

} // namespace

LabeledFeatures featurize(const LabeledMesh& labeled, bool normalize) {
    labeled.validate();
    const TriangleMesh& mesh = labeled.mesh;
    std::vector<Vec3> vnormals = vertex_normals(mesh);
    std::vector<Vec3> bary = barycenters(mesh);

    LabeledFeatures out;
    out.labels = labeled.labels;
    out.features.rows = mesh.faces.size();
    out.features.data.resize(out.features.rows * kFeatureDims);

    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        double* r = out.features.row(i);
        write_point(r, kColV1, mesh.vertices[f[0]]);
        write_point(r, kColV2, mesh.vertices[f[1]]);
        write_point(r, kColV3, mesh.vertices[f[2]]);
        write_point(r, kColBary, bary[i]);
        write_point(r, kColNV1, vnormals[f[0]]);
        write_point(r, kColNV2, vnormals[f[1]]);
        write_point(r, kColNV3, vnormals[f[2]]);
        write_point(r, kColNFace, face_normal(mesh, static_cast<int>(i)));
    }

    if (normalize) {
        Vec3 centroid{};
        for (const Vec3& b : bary)
            centroid += b;
        centroid = centroid / static_cast<double>(bary.size());
        double max_r = 0.0;
        for (const Vec3& b : bary)
            max_r = std::max(max_r, norm(b - centroid));
        if (max_r <= 0.0)
            max_r = 1.0;
        for (size_t i = 0; i < out.features.rows; ++i) {
            double* r = out.features.row(i);
            for (int col = 0; col < 12; col += 3) {
                r[col] = (r[col] - centroid.x) / max_r;
                r[col + 1] = (r[col + 1] - centroid.y) / max_r;
                r[col + 2] = (r[col + 2] - centroid.z) / max_r;
            }
        }
        out.features.centered = true;
        out.features.center = centroid;
        out.features.scale_factor = max_r;
    }
    return out;
}

void denormalize(FeatureMatrix& features) {
    if (!features.centered)
        return;
    for (size_t i = 0; i < features.rows; ++i) {
        double* r = features.row(i);
        for (int col = 0; col < 12; col += 3) {
            r[col] = r[col] * features.scale_factor + features.center.x;
            r[col + 1] = r[col + 1] * features.scale_factor + features.center.y;
            r[col + 2] = r[col + 2] * features.scale_factor + features.center.z;
        }
    }
    features.centered = false;
    features.center = Vec3{};
    features.scale_factor = 1.0;
}

void save_features(const std::filesystem::path& path, const LabeledFeatures& lf) {
    if (lf.labels.size() != lf.features.rows)
        throw LengthMismatchError("feature rows != label count");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    const char magic[4] = {'M', 'R', 'F', 'T'};
    out.write(magic, 4);
    std::uint32_t version = 1;
    std::uint64_t n = lf.features.rows;
    std::uint32_t dims = kFeatureDims;
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&dims), 4);
    std::vector<float> buf(lf.features.data.size());
    for (size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<float>(lf.features.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(lf.labels.data()),
              static_cast<std::streamsize>(lf.labels.size()));
    if (!out)
        throw IoError("write failed for " + path.string());
}

LabeledFeatures load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MRFT", 4) != 0)
        throw ParseError(path.string() + ": bad MRFT magic");
    std::uint32_t version = 0, dims = 0;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&dims), 4);
    if (!in || version != 1)
        throw ParseError(path.string() + ": unsupported MRFT version");
    if (dims != kFeatureDims)
        throw ParseError(path.string() + ": expected 24 dims, got " + std::to_string(dims));

    LabeledFeatures lf;
    lf.features.rows = n;
    std::vector<float> buf(n * kFeatureDims);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    lf.features.data.assign(buf.begin(), buf.end());
    lf.labels.resize(n);
    in.read(reinterpret_cast<char*>(lf.labels.data()), static_cast<std::streamsize>(n));
    if (!in)
        throw ParseError(path.string() + ": truncated MRFT payload");
    for (ClassId c : lf.labels)
        if (!class_id_valid(c))
            throw RangeError(path.string() + ": label out of class range");
    return lf;
}

} // namespace meshres
