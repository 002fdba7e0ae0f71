#ifndef UMC_SERIALIZE_HPP
#define UMC_SERIALIZE_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "umc/common.hpp"
#include "umc/grid.hpp"
#include "umc/mesh.hpp"

namespace umc {

enum class MeshFormat { umc_bin, csv_ascii };

namespace detail {

inline constexpr char kMeshMagic[4] = {'U', 'M', 'C', 'M'};
inline constexpr char kGridMagic[4] = {'U', 'M', 'C', 'G'};
inline constexpr char kMapMagic[4] = {'U', 'M', 'C', 'P'};
inline constexpr char kFieldMagic[4] = {'U', 'M', 'C', 'F'};

inline void write_magic(ByteWriter& w, const char (&magic)[4]) { w.bytes(magic, 4); }

inline void expect_magic(ByteReader& r, const char (&magic)[4], const char* what) {
    char got[4];
    try {
        r.bytes(got, 4);
    } catch (const corrupt_payload&) {
        throw malformed_file(std::string("file too short for ") + what + " header");
    }
    if (std::memcmp(got, magic, 4) != 0)
        throw malformed_file(std::string("bad magic for ") + what);
}

inline void expect_version(std::uint16_t v, const char* what) {
    if (v != kFormatVersion)
        throw malformed_file(std::string("unsupported ") + what + " format version " +
                             std::to_string(v));
}

// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw internal_inconsistency("double formatting failed");
    return std::string(buf, end);
}

inline double parse_double(const std::string& tok, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw malformed_file(std::string("bad numeric token in ") + what + ": '" + tok + "'");
    return v;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_failure("cannot open " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw io_failure("read error on " + path);
    return data;
}

inline void write_file(const std::string& path, const void* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_failure("cannot create " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    out.flush();
    if (!out) throw io_failure("write error on " + path);
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& data) {
    write_file(path, data.data(), data.size());
}

}  // namespace detail

// --- mesh ------------------------------------------------------------------

inline std::vector<std::uint8_t> serialize_mesh(const Mesh& mesh) {
    validate_mesh(mesh);
    ByteWriter w;
    detail::write_magic(w, detail::kMeshMagic);
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(mesh.dim));
    w.u8(static_cast<std::uint8_t>(mesh.cell_arity));
    w.u64(mesh.vertex_count());
    w.u64(mesh.cell_count());
    for (double c : mesh.vertices) w.f64(c);
    for (std::uint64_t i : mesh.cells) w.u64(i);
    return w.take();
}

inline Mesh deserialize_mesh(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::expect_magic(r, detail::kMeshMagic, "mesh");
    Mesh mesh;
    try {
        detail::expect_version(r.u16(), "mesh");
        mesh.dim = r.u8();
        mesh.cell_arity = r.u8();
        const std::uint64_t n_v = r.u64();
        const std::uint64_t n_c = r.u64();
        if (mesh.dim < 1 || mesh.dim > 3 || mesh.cell_arity < 1)
            throw malformed_file("implausible mesh header");
        if (r.remaining() != n_v * static_cast<std::uint64_t>(mesh.dim) * 8 +
                                 n_c * static_cast<std::uint64_t>(mesh.cell_arity) * 8)
            throw malformed_file("mesh payload size mismatch");
        mesh.vertices.resize(n_v * static_cast<std::size_t>(mesh.dim));
        for (double& c : mesh.vertices) c = r.f64();
        mesh.cells.resize(n_c * static_cast<std::size_t>(mesh.cell_arity));
        for (std::uint64_t& i : mesh.cells) i = r.u64();
    } catch (const corrupt_payload& e) {
        throw malformed_file(std::string("truncated mesh file: ") + e.what());
    }
    validate_mesh(mesh);
    return mesh;
}

inline std::string mesh_to_csv(const Mesh& mesh) {
    validate_mesh(mesh);
    std::string out = "# umc-mesh dim=" + std::to_string(mesh.dim) +
                      " arity=" + std::to_string(mesh.cell_arity) + "\n";
    const std::size_t n_v = mesh.vertex_count();
    for (std::size_t i = 0; i < n_v; ++i) {
        for (int d = 0; d < mesh.dim; ++d) {
            if (d) out += ',';
            out += detail::format_double(mesh.coord(i, d));
        }
        out += '\n';
    }
    out += "cells:\n";
    const std::size_t n_c = mesh.cell_count();
    for (std::size_t j = 0; j < n_c; ++j) {
        for (int a = 0; a < mesh.cell_arity; ++a) {
            if (a) out += ',';
            out += std::to_string(mesh.cells[j * static_cast<std::size_t>(mesh.cell_arity) +
                                             static_cast<std::size_t>(a)]);
        }
        out += '\n';
    }
    return out;
}

inline Mesh mesh_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw malformed_file("empty csv mesh");
    Mesh mesh;
    if (std::sscanf(line.c_str(), "# umc-mesh dim=%d arity=%d", &mesh.dim, &mesh.cell_arity) != 2)
        throw malformed_file("bad csv mesh header: '" + line + "'");
    bool in_cells = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "cells:") {
            in_cells = true;
            continue;
        }
        std::istringstream row(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(row, tok, ',')) toks.push_back(tok);
        if (!in_cells) {
            if (toks.size() != static_cast<std::size_t>(mesh.dim))
                throw malformed_file("csv vertex row has " + std::to_string(toks.size()) +
                                     " columns, expected " + std::to_string(mesh.dim));
            for (const auto& t : toks) mesh.vertices.push_back(detail::parse_double(t, "csv vertex"));
        } else {
            if (toks.size() != static_cast<std::size_t>(mesh.cell_arity))
                throw malformed_file("csv cell row has " + std::to_string(toks.size()) +
                                     " columns, expected " + std::to_string(mesh.cell_arity));
            for (const auto& t : toks) {
                std::uint64_t v = 0;
                auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
                if (ec != std::errc() || ptr != t.data() + t.size())
                    throw malformed_file("bad cell index '" + t + "'");
                mesh.cells.push_back(v);
            }
        }
    }
    validate_mesh(mesh);
    return mesh;
}

inline void save_mesh(const Mesh& mesh, const std::string& path,
                      MeshFormat format = MeshFormat::umc_bin) {
    if (format == MeshFormat::umc_bin) {
        detail::write_file(path, serialize_mesh(mesh));
    } else {
        const std::string csv = mesh_to_csv(mesh);
        detail::write_file(path, csv.data(), csv.size());
    }
}

inline Mesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::umc_bin) {
    const auto bytes = detail::read_file(path);
    if (format == MeshFormat::umc_bin) return deserialize_mesh(bytes);
    return mesh_from_csv(std::string(bytes.begin(), bytes.end()));
}

// --- grid ------------------------------------------------------------------

inline std::vector<std::uint8_t> serialize_grid(const RectGrid& grid) {
    validate_grid(grid);
    ByteWriter w;
    detail::write_magic(w, detail::kGridMagic);
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(grid.dim));
    for (const auto& axis : grid.axes) {
        w.u64(axis.size());
        for (double c : axis) w.f64(c);
    }
    return w.take();
}

inline RectGrid deserialize_grid(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::expect_magic(r, detail::kGridMagic, "grid");
    RectGrid grid;
    try {
        detail::expect_version(r.u16(), "grid");
        grid.dim = r.u8();
        if (grid.dim < 1 || grid.dim > 3) throw malformed_file("implausible grid dim");
        grid.axes.resize(static_cast<std::size_t>(grid.dim));
        for (auto& axis : grid.axes) {
            axis.resize(r.u64());
            for (double& c : axis) c = r.f64();
        }
        if (!r.done()) throw malformed_file("trailing bytes in grid file");
    } catch (const corrupt_payload& e) {
        throw malformed_file(std::string("truncated grid file: ") + e.what());
    }
    validate_grid(grid);
    return grid;
}

inline void save_grid(const RectGrid& grid, const std::string& path) {
    detail::write_file(path, serialize_grid(grid));
}

inline RectGrid load_grid(const std::string& path) {
    return deserialize_grid(detail::read_file(path));
}

// --- mapping ---------------------------------------------------------------

inline std::vector<std::uint8_t> serialize_mapping(const MappingTable& map) {
    ByteWriter w;
    detail::write_magic(w, detail::kMapMagic);
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(map.mode));
    w.u64(map.assignments.size());
    for (std::uint64_t a : map.assignments) w.u64(a);
    if (map.mode == MappingMode::seed) {
        w.u64(map.visited_nodes.size());
        for (std::uint64_t v : map.visited_nodes) w.u64(v);
    }
    return w.take();
}

inline MappingTable deserialize_mapping(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::expect_magic(r, detail::kMapMagic, "mapping");
    MappingTable map;
    try {
        detail::expect_version(r.u16(), "mapping");
        const std::uint8_t mode = r.u8();
        if (mode > 1) throw malformed_file("bad mapping mode byte");
        map.mode = static_cast<MappingMode>(mode);
        map.assignments.resize(r.u64());
        for (std::uint64_t& a : map.assignments) a = r.u64();
        if (map.mode == MappingMode::seed) {
            map.visited_nodes.resize(r.u64());
            for (std::uint64_t& v : map.visited_nodes) v = r.u64();
        }
        if (!r.done()) throw malformed_file("trailing bytes in mapping file");
    } catch (const corrupt_payload& e) {
        throw malformed_file(std::string("truncated mapping file: ") + e.what());
    }
    return map;
}

inline void save_mapping(const MappingTable& map, const std::string& path) {
    detail::write_file(path, serialize_mapping(map));
}

inline MappingTable load_mapping(const std::string& path) {
    return deserialize_mapping(detail::read_file(path));
}

/// Integrity digest binding an archive to the mapping used at compress time.
inline std::uint64_t mapping_digest(const MappingTable& map) {
    const auto bytes = serialize_mapping(map);
    return fnv1a64(bytes.data(), bytes.size());
}

// --- field -----------------------------------------------------------------

inline std::vector<std::uint8_t> serialize_field(const Field& field) {
    ByteWriter w;
    detail::write_magic(w, detail::kFieldMagic);
    w.u16(kFormatVersion);
    if (field.name.size() > 0xffff) throw malformed_file("field name too long");
    w.u16(static_cast<std::uint16_t>(field.name.size()));
    w.bytes(field.name.data(), field.name.size());
    w.u64(field.values.size());
    for (double v : field.values) w.f64(v);
    return w.take();
}

inline Field deserialize_field(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::expect_magic(r, detail::kFieldMagic, "field");
    Field field;
    try {
        detail::expect_version(r.u16(), "field");
        field.name.resize(r.u16());
        r.bytes(field.name.data(), field.name.size());
        field.values.resize(r.u64());
        for (double& v : field.values) v = r.f64();
        if (!r.done()) throw malformed_file("trailing bytes in field file");
    } catch (const corrupt_payload& e) {
        throw malformed_file(std::string("truncated field file: ") + e.what());
    }
    return field;
}

inline void save_field(const Field& field, const std::string& path) {
    detail::write_file(path, serialize_field(field));
}

inline Field load_field(const std::string& path) {
    return deserialize_field(detail::read_file(path));
}

}  // namespace umc

#endif  // UMC_SERIALIZE_HPP
