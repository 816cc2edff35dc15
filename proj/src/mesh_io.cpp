#include "meshres/mesh_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "meshres/geometry.hpp"

namespace meshres {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag))
            continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z))
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": malformed vertex record");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // "i", "i/t", "i/t/n", "i//n" forms: the leading integer is
                // the vertex index.
                size_t slash = tok.find('/');
                std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                try {
                    idx.push_back(std::stoi(head));
                } catch (const std::exception&) {
                    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed face index '" + tok + "'");
                }
            }
            if (idx.size() != 3)
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": only triangle faces are supported (got " +
                                 std::to_string(idx.size()) + " indices)");
            Face f;
            for (int k = 0; k < 3; ++k)
                f[k] = idx[k] - 1; // OBJ is 1-based
            mesh.faces.push_back(f);
        }
        // comments, normals, texcoords, groups: ignored
    }
    mesh.validate();
    return mesh;
}

struct PlyProperty {
    std::string type;      // scalar type, or element type for lists
    std::string count_type; // set for lists
    std::string name;
    bool is_list = false;
};

size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw ParseError("unknown PLY property type '" + t + "'");
}

double read_binary_scalar(std::istream& in, const std::string& type) {
    unsigned char buf[8];
    size_t n = ply_type_size(type);
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (!in)
        throw ParseError("unexpected end of PLY binary data");
    // File is little-endian; so is every platform this builds on.
    if (type == "float" || type == "float32") {
        float f;
        std::memcpy(&f, buf, 4);
        return f;
    }
    if (type == "double" || type == "float64") {
        double d;
        std::memcpy(&d, buf, 8);
        return d;
    }
    std::int64_t v = 0;
    bool sign = (type[0] != 'u');
    for (size_t i = 0; i < n; ++i)
        v |= static_cast<std::int64_t>(buf[i]) << (8 * i);
    if (sign) {
        // sign-extend
        std::int64_t mask = std::int64_t(1) << (8 * n - 1);
        if (n < 8 && (v & mask))
            v -= std::int64_t(1) << (8 * n);
    }
    return static_cast<double>(v);
}

TriangleMesh load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw ParseError(path.string() + ": missing 'ply' magic");

    bool binary = false;
    struct Element {
        std::string name;
        size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "comment" || tag == "obj_info")
            continue;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                throw ParseError(path.string() + ": unsupported PLY format '" + fmt + "'");
        } else if (tag == "element") {
            Element e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty())
                throw ParseError(path.string() + ": property before element");
            PlyProperty p;
            std::string t;
            ss >> t;
            if (t == "list") {
                p.is_list = true;
                ss >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ss >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        } else if (!tag.empty()) {
            throw ParseError(path.string() + ": unexpected header line '" + line + "'");
        }
    }

    TriangleMesh mesh;
    for (const Element& e : elements) {
        if (e.name == "vertex") {
            mesh.vertices.reserve(e.count);
            for (size_t i = 0; i < e.count; ++i) {
                Vec3 v;
                if (binary) {
                    for (const PlyProperty& p : e.props) {
                        double val = read_binary_scalar(in, p.type);
                        if (p.name == "x") v.x = val;
                        else if (p.name == "y") v.y = val;
                        else if (p.name == "z") v.z = val;
                    }
                } else {
                    std::string data_line;
                    do {
                        if (!std::getline(in, data_line))
                            throw ParseError(path.string() + ": truncated vertex data");
                    } while (data_line.empty());
                    std::istringstream ds(data_line);
                    for (const PlyProperty& p : e.props) {
                        double val;
                        if (!(ds >> val))
                            throw ParseError(path.string() + ": malformed vertex line");
                        if (p.name == "x") v.x = val;
                        else if (p.name == "y") v.y = val;
                        else if (p.name == "z") v.z = val;
                    }
                }
                mesh.vertices.push_back(v);
            }
        } else if (e.name == "face") {
            mesh.faces.reserve(e.count);
            for (size_t i = 0; i < e.count; ++i) {
                std::vector<long> idx;
                if (binary) {
                    for (const PlyProperty& p : e.props) {
                        if (p.is_list) {
                            long n = static_cast<long>(read_binary_scalar(in, p.count_type));
                            for (long k = 0; k < n; ++k) {
                                double val = read_binary_scalar(in, p.type);
                                if (p.name == "vertex_indices" || p.name == "vertex_index")
                                    idx.push_back(static_cast<long>(val));
                            }
                        } else {
                            read_binary_scalar(in, p.type);
                        }
                    }
                } else {
                    std::string data_line;
                    do {
                        if (!std::getline(in, data_line))
                            throw ParseError(path.string() + ": truncated face data");
                    } while (data_line.empty());
                    std::istringstream ds(data_line);
                    for (const PlyProperty& p : e.props) {
                        if (p.is_list) {
                            long n;
                            if (!(ds >> n))
                                throw ParseError(path.string() + ": malformed face line");
                            for (long k = 0; k < n; ++k) {
                                long v;
                                if (!(ds >> v))
                                    throw ParseError(path.string() + ": malformed face line");
                                if (p.name == "vertex_indices" || p.name == "vertex_index")
                                    idx.push_back(v);
                            }
                        } else {
                            double skip;
                            ds >> skip;
                        }
                    }
                }
                if (idx.size() != 3)
                    throw ParseError(path.string() + ": only triangle faces are supported (got " +
                                     std::to_string(idx.size()) + " indices)");
                mesh.faces.push_back({static_cast<int>(idx[0]), static_cast<int>(idx[1]),
                                      static_cast<int>(idx[2])});
            }
        } else {
            // Skip unknown elements.
            for (size_t i = 0; i < e.count; ++i) {
                if (binary) {
                    for (const PlyProperty& p : e.props) {
                        if (p.is_list) {
                            long n = static_cast<long>(read_binary_scalar(in, p.count_type));
                            for (long k = 0; k < n; ++k)
                                read_binary_scalar(in, p.type);
                        } else {
                            read_binary_scalar(in, p.type);
                        }
                    }
                } else {
                    std::string skip_line;
                    std::getline(in, skip_line);
                }
            }
        }
    }
    mesh.validate();
    return mesh;
}

TriangleMesh load_stl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    char header[80];
    in.read(header, 80);
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in)
        throw ParseError(path.string() + ": truncated STL header");

    TriangleMesh mesh;
    // STL repeats vertices per facet; weld exact duplicates to rebuild
    // connectivity.
    std::map<std::array<float, 3>, int> weld;
    for (std::uint32_t t = 0; t < count; ++t) {
        float rec[12];
        in.read(reinterpret_cast<char*>(rec), 48);
        std::uint16_t attr;
        in.read(reinterpret_cast<char*>(&attr), 2);
        if (!in)
            throw ParseError(path.string() + ": truncated STL facet " + std::to_string(t));
        Face f;
        for (int k = 0; k < 3; ++k) {
            std::array<float, 3> key{rec[3 + 3 * k], rec[4 + 3 * k], rec[5 + 3 * k]};
            auto it = weld.find(key);
            if (it == weld.end()) {
                it = weld.emplace(key, static_cast<int>(mesh.vertices.size())).first;
                mesh.vertices.push_back({key[0], key[1], key[2]});
            }
            f[k] = it->second;
        }
        mesh.faces.push_back(f);
    }
    mesh.validate();
    return mesh;
}

} // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = lower_ext(path);
    if (ext == ".obj") return MeshFormat::Obj;
    if (ext == ".ply") return MeshFormat::Ply;
    if (ext == ".stl") return MeshFormat::Stl;
    throw ParseError("unrecognized mesh extension '" + ext + "' for " + path.string());
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    switch (format) {
    case MeshFormat::Obj: return load_obj(path);
    case MeshFormat::Ply: return load_ply(path);
    case MeshFormat::Stl: return load_stl(path);
    }
    throw ParseError("unknown mesh format");
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
    return load_mesh(path, format_from_path(path));
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const Face& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out)
        throw IoError("write failed for " + path.string());
}

LabelFile load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    LabelFile out;
    std::string mode = j.value("mode", "face");
    if (mode == "face")
        out.mode = LabelFile::Mode::Face;
    else if (mode == "vertex_fdi")
        out.mode = LabelFile::Mode::VertexFdi;
    else
        throw ParseError(path.string() + ": unknown label mode '" + mode + "'");
    if (!j.contains("labels") || !j["labels"].is_array())
        throw ParseError(path.string() + ": missing 'labels' array");
    out.labels.reserve(j["labels"].size());
    for (const auto& v : j["labels"]) {
        if (!v.is_number_integer())
            throw ParseError(path.string() + ": non-integer label");
        out.labels.push_back(v.get<int>());
    }
    return out;
}

void save_labels(const std::filesystem::path& path, const std::vector<ClassId>& face_labels) {
    nlohmann::json j;
    j["mode"] = "face";
    j["labels"] = nlohmann::json::array();
    for (ClassId c : face_labels)
        j["labels"].push_back(static_cast<int>(c));
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << j.dump() << '\n';
}

LabeledMesh apply_labels(const TriangleMesh& mesh, const LabelFile& labels) {
    if (labels.mode == LabelFile::Mode::VertexFdi)
        return map_fdi_labels(labels.labels, mesh);
    if (labels.labels.size() != mesh.faces.size())
        throw LengthMismatchError("face label count " + std::to_string(labels.labels.size()) +
                                  " != face count " + std::to_string(mesh.faces.size()));
    LabeledMesh out;
    out.mesh = mesh;
    out.labels.reserve(labels.labels.size());
    for (int v : labels.labels) {
        if (!class_id_valid(v))
            throw RangeError("face label " + std::to_string(v) + " out of class range");
        out.labels.push_back(static_cast<ClassId>(v));
    }
    return out;
}

} // namespace meshres
