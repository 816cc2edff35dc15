// Mesh file I/O: OBJ / PLY (ascii + binary little-endian) / binary STL
// readers, an OBJ writer, and the JSON label sidecar.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

enum class MeshFormat { Obj, Ply, Stl };

// Picks the format from the file extension; throws ParseError for others.
MeshFormat format_from_path(const std::filesystem::path& path);

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

// v/f records, 1-based indices, coordinates at 9 significant digits.
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Label sidecar: {"mode": "face" | "vertex_fdi", "labels": [...]} where
// "face" holds ClassIds (length == face count) and "vertex_fdi" holds raw
// FDI codes (length == vertex count).
struct LabelFile {
    enum class Mode { Face, VertexFdi };
    Mode mode = Mode::Face;
    std::vector<int> labels;
};

LabelFile load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const std::vector<ClassId>& face_labels);

// Resolves a sidecar against its mesh: "face" mode values become the mesh's
// labels directly, "vertex_fdi" goes through the FDI mapping.
LabeledMesh apply_labels(const TriangleMesh& mesh, const LabelFile& labels);

} // namespace meshres
