#ifndef UMC_MESH_HPP
#define UMC_MESH_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "umc/common.hpp"

namespace umc {

/// Unstructured mesh: explicit vertex coordinates plus cell connectivity.
/// Coordinates are flat, vertex-major: vertex i occupies
/// [i*dim, (i+1)*dim). Connectivity is flat, cell-major with a uniform
/// number of vertices per cell (3 = triangle, 4 = quad/tet, 8 = hex).
struct Mesh {
    int dim = 2;
    int cell_arity = 3;
    std::vector<double> vertices;
    std::vector<std::uint64_t> cells;

    std::size_t vertex_count() const { return vertices.size() / static_cast<std::size_t>(dim); }
    std::size_t cell_count() const {
        return cell_arity == 0 ? 0 : cells.size() / static_cast<std::size_t>(cell_arity);
    }
    double coord(std::size_t vertex, int axis) const {
        return vertices[vertex * static_cast<std::size_t>(dim) + static_cast<std::size_t>(axis)];
    }
};

/// Per-vertex scalar field over a mesh, in vertex (file) order.
struct Field {
    std::string name;
    std::vector<double> values;
};

inline void validate_mesh(const Mesh& mesh) {
    if (mesh.dim != 2 && mesh.dim != 3)
        throw malformed_file("mesh dimension must be 2 or 3, got " + std::to_string(mesh.dim));
    if (mesh.cell_arity != 3 && mesh.cell_arity != 4 && mesh.cell_arity != 8)
        throw malformed_file("cell arity must be 3, 4 or 8, got " + std::to_string(mesh.cell_arity));
    if (mesh.vertices.empty())
        throw malformed_file("mesh has no vertices");
    if (mesh.vertices.size() % static_cast<std::size_t>(mesh.dim) != 0)
        throw malformed_file("vertex coordinate array length not divisible by dim");
    if (mesh.cells.size() % static_cast<std::size_t>(mesh.cell_arity) != 0)
        throw malformed_file("connectivity length not divisible by cell arity");
    for (double c : mesh.vertices)
        if (!std::isfinite(c)) throw non_finite_value("non-finite vertex coordinate");
    const std::uint64_t n_v = mesh.vertex_count();
    for (std::uint64_t idx : mesh.cells)
        if (idx >= n_v)
            throw index_out_of_range("cell references vertex " + std::to_string(idx) +
                                     " but mesh has " + std::to_string(n_v) + " vertices");
}

inline void validate_field(const Field& field, const Mesh& mesh) {
    if (field.values.size() != mesh.vertex_count())
        throw malformed_file("field length " + std::to_string(field.values.size()) +
                             " does not match vertex count " + std::to_string(mesh.vertex_count()));
    for (double v : field.values)
        if (!std::isfinite(v)) throw non_finite_value("non-finite field value");
}

}  // namespace umc

#endif  // UMC_MESH_HPP
