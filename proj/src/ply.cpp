#include "pcqd/ply.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "pcqd/common.hpp"

namespace pcqd {

namespace {

enum class ScalarType { F32, F64, U8, I8, U16, I16, U32, I32 };

size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::U8:
        case ScalarType::I8: return 1;
        case ScalarType::U16:
        case ScalarType::I16: return 2;
        case ScalarType::F32:
        case ScalarType::U32:
        case ScalarType::I32: return 4;
        case ScalarType::F64: return 8;
    }
    return 0;
}

std::optional<ScalarType> scalar_from_name(const std::string& s) {
    if (s == "float" || s == "float32") return ScalarType::F32;
    if (s == "double" || s == "float64") return ScalarType::F64;
    if (s == "uchar" || s == "uint8") return ScalarType::U8;
    if (s == "char" || s == "int8") return ScalarType::I8;
    if (s == "ushort" || s == "uint16") return ScalarType::U16;
    if (s == "short" || s == "int16") return ScalarType::I16;
    if (s == "uint" || s == "uint32") return ScalarType::U32;
    if (s == "int" || s == "int32") return ScalarType::I32;
    return std::nullopt;
}

struct Property {
    ScalarType type;
    std::string name;
};

struct Element {
    std::string name;
    uint64_t count = 0;
    std::vector<Property> props;
};

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

// Reads one header line ending in '\n' (optional '\r' stripped).
bool next_line(const std::vector<uint8_t>& bytes, size_t& pos, std::string& line) {
    if (pos >= bytes.size()) return false;
    size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) return false;  // header lines must be terminated
    line.assign(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    ++pos;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

double parse_double_token(const std::string& tok) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw PlyError("ply: bad numeric token '" + tok + "'");
    return v;
}

uint64_t parse_count_token(const std::string& tok) {
    if (tok.empty() || tok[0] == '-') throw PlyError("ply: bad element count '" + tok + "'");
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw PlyError("ply: bad element count '" + tok + "'");
    return v;
}

double read_scalar_le(const uint8_t* p, ScalarType t) {
    switch (t) {
        case ScalarType::U8: return *p;
        case ScalarType::I8: return static_cast<int8_t>(*p);
        case ScalarType::U16: {
            uint16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case ScalarType::I16: {
            int16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case ScalarType::U32: {
            uint32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case ScalarType::I32: {
            int32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case ScalarType::F32: {
            float v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case ScalarType::F64: {
            double v;
            std::memcpy(&v, p, 8);
            return v;
        }
    }
    return 0.0;
}

struct VertexLayout {
    int ix = -1, iy = -1, iz = -1;
    int ir = -1, ig = -1, ib = -1;
    bool has_colors() const { return ir >= 0; }
};

VertexLayout analyze_vertex(const Element& vertex) {
    VertexLayout lay;
    auto coord_index = [&](const char* name) {
        for (size_t i = 0; i < vertex.props.size(); ++i)
            if (vertex.props[i].name == name) return static_cast<int>(i);
        return -1;
    };
    lay.ix = coord_index("x");
    lay.iy = coord_index("y");
    lay.iz = coord_index("z");
    if (lay.ix < 0 || lay.iy < 0 || lay.iz < 0)
        throw PlyError("ply: vertex element lacks x/y/z properties");
    for (int idx : {lay.ix, lay.iy, lay.iz})
        if (vertex.props[static_cast<size_t>(idx)].type != ScalarType::F32)
            throw PlyError("ply: x/y/z must be float properties");
    lay.ir = coord_index("red");
    lay.ig = coord_index("green");
    lay.ib = coord_index("blue");
    int have = (lay.ir >= 0) + (lay.ig >= 0) + (lay.ib >= 0);
    if (have != 0 && have != 3) throw PlyError("ply: incomplete red/green/blue triple");
    if (have == 3)
        for (int idx : {lay.ir, lay.ig, lay.ib})
            if (vertex.props[static_cast<size_t>(idx)].type != ScalarType::U8)
                throw PlyError("ply: red/green/blue must be uchar properties");
    return lay;
}

uint8_t to_color_byte(double v) {
    if (!(v >= 0.0) || v > 255.0 || v != std::floor(v))
        throw PlyError("ply: color value out of byte range");
    return static_cast<uint8_t>(v);
}

}  // namespace

PointCloud parse_ply(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    std::string line;
    if (!next_line(bytes, pos, line) || line != "ply") throw PlyError("ply: missing magic line");
    bool binary = false, have_format = false, header_done = false;
    std::vector<Element> elements;
    while (next_line(bytes, pos, line)) {
        std::vector<std::string> tok = split_ws(line);
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (have_format) throw PlyError("ply: duplicate format line");
            if (tok.size() != 3 || tok[2] != "1.0")
                throw PlyError("ply: unsupported format line '" + line + "'");
            if (tok[1] == "ascii") binary = false;
            else if (tok[1] == "binary_little_endian") binary = true;
            else throw PlyError("ply: unsupported format '" + tok[1] + "'");
            have_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw PlyError("ply: malformed element line");
            elements.push_back({tok[1], parse_count_token(tok[2]), {}});
        } else if (tok[0] == "property") {
            if (elements.empty()) throw PlyError("ply: property before any element");
            if (tok.size() == 3) {
                auto st = scalar_from_name(tok[1]);
                if (!st) throw PlyError("ply: unknown property type '" + tok[1] + "'");
                for (const Property& p : elements.back().props)
                    if (p.name == tok[2])
                        throw PlyError("ply: duplicate property '" + tok[2] + "'");
                elements.back().props.push_back({*st, tok[2]});
            } else if (tok.size() == 5 && tok[1] == "list") {
                if (elements.back().name == "vertex")
                    throw PlyError("ply: list property unsupported in vertex element");
                elements.back().props.push_back({ScalarType::U8, tok[4]});  // placeholder
            } else {
                throw PlyError("ply: malformed property line");
            }
        } else if (tok[0] == "end_header") {
            header_done = true;
            break;
        } else {
            throw PlyError("ply: unknown header keyword '" + tok[0] + "'");
        }
    }
    if (!header_done) throw PlyError("ply: header not terminated");
    if (!have_format) throw PlyError("ply: missing format line");

    size_t vertex_at = elements.size();
    for (size_t i = 0; i < elements.size(); ++i) {
        if (elements[i].name == "vertex") {
            if (vertex_at != elements.size()) throw PlyError("ply: duplicate vertex element");
            vertex_at = i;
        }
    }
    if (vertex_at == elements.size()) throw PlyError("ply: no vertex element");
    if (vertex_at != 0)
        throw PlyError("ply: elements before vertex are unsupported");
    const Element& vertex = elements[0];
    if (vertex.count == 0) throw PlyError("ply: zero vertices");
    if (vertex.props.empty()) throw PlyError("ply: vertex element has no properties");
    VertexLayout lay = analyze_vertex(vertex);

    PointCloud pc;
    if (binary) {
        size_t stride = 0;
        std::vector<size_t> offsets(vertex.props.size());
        for (size_t i = 0; i < vertex.props.size(); ++i) {
            offsets[i] = stride;
            stride += scalar_size(vertex.props[i].type);
        }
        size_t avail = bytes.size() - pos;
        if (stride == 0 || vertex.count > avail / stride)
            throw PlyError("ply: truncated binary payload");
        pc.positions.resize(vertex.count);
        if (lay.has_colors()) pc.colors.resize(vertex.count);
        const uint8_t* base = bytes.data() + pos;
        for (uint64_t i = 0; i < vertex.count; ++i) {
            const uint8_t* row = base + i * stride;
            auto get = [&](int idx) {
                return read_scalar_le(row + offsets[static_cast<size_t>(idx)],
                                      vertex.props[static_cast<size_t>(idx)].type);
            };
            pc.positions[i] = {get(lay.ix), get(lay.iy), get(lay.iz)};
            if (lay.has_colors())
                pc.colors[i] = {static_cast<uint8_t>(get(lay.ir)),
                                static_cast<uint8_t>(get(lay.ig)),
                                static_cast<uint8_t>(get(lay.ib))};
        }
    } else {
        pc.positions.reserve(static_cast<size_t>(std::min<uint64_t>(vertex.count, 1u << 20)));
        if (lay.has_colors())
            pc.colors.reserve(static_cast<size_t>(std::min<uint64_t>(vertex.count, 1u << 20)));
        for (uint64_t i = 0; i < vertex.count; ++i) {
            if (!next_line(bytes, pos, line)) throw PlyError("ply: truncated ascii payload");
            std::vector<std::string> tok = split_ws(line);
            if (tok.size() < vertex.props.size()) throw PlyError("ply: short vertex row");
            auto get = [&](int idx) { return parse_double_token(tok[static_cast<size_t>(idx)]); };
            // Coordinates are declared float; snap through float32 so ascii
            // and binary payloads parse to identical values.
            std::array<double, 3> p = {static_cast<float>(get(lay.ix)),
                                       static_cast<float>(get(lay.iy)),
                                       static_cast<float>(get(lay.iz))};
            pc.positions.push_back(p);
            if (lay.has_colors())
                pc.colors.push_back({to_color_byte(get(lay.ir)), to_color_byte(get(lay.ig)),
                                     to_color_byte(get(lay.ib))});
        }
    }
    for (const auto& p : pc.positions)
        for (double v : p)
            if (!std::isfinite(v)) throw PlyError("ply: non-finite vertex position");
    return pc;
}

PointCloud parse_ply_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open ply file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
    return parse_ply(bytes);
}

std::vector<uint8_t> write_ply(const PointCloud& pc, bool binary) {
    pc.validate();
    std::ostringstream header;
    header << "ply\nformat " << (binary ? "binary_little_endian" : "ascii")
           << " 1.0\nelement vertex " << pc.size()
           << "\nproperty float x\nproperty float y\nproperty float z\n";
    if (pc.has_colors())
        header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    header << "end_header\n";
    std::string h = header.str();
    std::vector<uint8_t> out(h.begin(), h.end());
    if (binary) {
        for (size_t i = 0; i < pc.size(); ++i) {
            for (int k = 0; k < 3; ++k) {
                float f = static_cast<float>(pc.positions[i][k]);
                uint8_t buf[4];
                std::memcpy(buf, &f, 4);
                out.insert(out.end(), buf, buf + 4);
            }
            if (pc.has_colors())
                out.insert(out.end(), pc.colors[i].begin(), pc.colors[i].end());
        }
    } else {
        std::ostringstream body;
        body.precision(9);
        for (size_t i = 0; i < pc.size(); ++i) {
            body << static_cast<float>(pc.positions[i][0]) << ' '
                 << static_cast<float>(pc.positions[i][1]) << ' '
                 << static_cast<float>(pc.positions[i][2]);
            if (pc.has_colors())
                body << ' ' << static_cast<int>(pc.colors[i][0]) << ' '
                     << static_cast<int>(pc.colors[i][1]) << ' '
                     << static_cast<int>(pc.colors[i][2]);
            body << '\n';
        }
        std::string b = body.str();
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

void write_ply_file(const std::string& path, const PointCloud& pc, bool binary) {
    std::vector<uint8_t> bytes = write_ply(pc, binary);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open ply file for writing: " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("ply write failed: " + path);
}

}  // namespace pcqd
