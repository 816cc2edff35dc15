// Derived mesh geometry (normals, barycenters), base cropping, and the
// FDI-to-class label mapping used at dataset ingestion.
#pragma once

#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

// Cross-product norm below this (mm^2) marks a face as degenerate.
inline constexpr double kDegenerateFaceEps = 1e-12;

// Unit normal of face `face_index`, right-hand rule on the winding order.
// Throws DegenerateFaceError when the face has ~zero area.
Vec3 face_normal(const TriangleMesh& mesh, int face_index);

// One unit normal per face; same degeneracy rule as face_normal.
std::vector<Vec3> face_normals(const TriangleMesh& mesh);

// Area-weighted average of incident face normals, renormalized.
// Throws IsolatedVertexError if some vertex has no incident face.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

// Arithmetic mean of each face's three vertices.
std::vector<Vec3> barycenters(const TriangleMesh& mesh);

// Retains faces whose barycenter lies in the top `keep_fraction` of the
// height range. Height axis = axis of smallest bounding-box extent of the
// barycenters (the base sits below the crowns along that axis). Result is
// re-indexed; labels ride along with retained faces.
// Throws EmptyResultError when nothing survives.
LabeledMesh crop_base(const LabeledMesh& labeled, double keep_fraction);

// Maps raw per-vertex FDI codes (lower jaw: 31-37 / 41-47, 0 = gingiva) to
// per-face classes by majority vote over the face's vertices; a three-way
// tie takes the first vertex's class. Throws ThirdMolarError if 38/48
// appears anywhere, UnknownLabelError for any other unmapped code.
LabeledMesh map_fdi_labels(const std::vector<int>& per_vertex_fdi, const TriangleMesh& mesh);

// Single FDI code -> ClassId (throws as above). Exposed for ingestion tests.
ClassId fdi_to_class(int fdi);

} // namespace meshres
