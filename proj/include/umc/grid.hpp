#ifndef UMC_GRID_HPP
#define UMC_GRID_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umc/common.hpp"

namespace umc {

/// Rectilinear grid: node positions are the Cartesian product of per-axis
/// coordinate arrays. Axes are strictly increasing; spacing may be
/// non-uniform (coarsening removes whole planes).
struct RectGrid {
    int dim = 2;
    std::vector<std::vector<double>> axes;

    std::size_t axis_size(int d) const { return axes[static_cast<std::size_t>(d)].size(); }
    std::size_t node_count() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.size();
        return n;
    }
    std::vector<std::uint64_t> shape() const {
        std::vector<std::uint64_t> s;
        s.reserve(axes.size());
        for (const auto& a : axes) s.push_back(a.size());
        return s;
    }
};

inline void validate_grid(const RectGrid& grid) {
    if (grid.dim != 2 && grid.dim != 3)
        throw malformed_file("grid dimension must be 2 or 3");
    if (grid.axes.size() != static_cast<std::size_t>(grid.dim))
        throw malformed_file("grid axis count does not match dim");
    for (const auto& axis : grid.axes) {
        if (axis.empty()) throw malformed_file("empty grid axis");
        for (std::size_t i = 0; i < axis.size(); ++i) {
            if (!std::isfinite(axis[i])) throw non_finite_value("non-finite axis coordinate");
            if (i > 0 && !(axis[i] > axis[i - 1]))
                throw malformed_file("grid axis not strictly increasing");
        }
    }
}

/// Row-major linearization, last axis fastest-varying.
inline std::uint64_t linear_index(const RectGrid& grid, const std::vector<std::uint64_t>& idx) {
    std::uint64_t lin = 0;
    for (int d = 0; d < grid.dim; ++d) {
        const std::size_t n = grid.axis_size(d);
        if (idx[static_cast<std::size_t>(d)] >= n)
            throw index_out_of_range("axis " + std::to_string(d) + " index out of range");
        lin = lin * n + idx[static_cast<std::size_t>(d)];
    }
    return lin;
}

inline std::vector<std::uint64_t> multi_index(const RectGrid& grid, std::uint64_t lin) {
    if (lin >= grid.node_count()) throw index_out_of_range("linear node index out of range");
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(grid.dim));
    for (int d = grid.dim - 1; d >= 0; --d) {
        const std::uint64_t n = grid.axis_size(d);
        idx[static_cast<std::size_t>(d)] = lin % n;
        lin /= n;
    }
    return idx;
}

enum class MappingMode : std::uint8_t { dense = 0, seed = 1 };

/// Vertex-to-node assignment produced by grid coarsening. In dense mode
/// assignments hold linear node indices into the coarsened grid. In seed
/// mode the grid component stores visited nodes only, so assignments hold
/// positions in `visited_nodes` (which itself holds sorted linear node
/// indices). Depends on geometry only; reusable across fields/timesteps.
struct MappingTable {
    MappingMode mode = MappingMode::dense;
    std::vector<std::uint64_t> assignments;
    std::vector<std::uint64_t> visited_nodes;           // seed mode only
    std::optional<double> visited_fraction;             // build-time diagnostic, not serialized

    std::size_t vertex_count() const { return assignments.size(); }

    /// Linear node index in the (coarsened) grid backing vertex i.
    std::uint64_t node_of(std::size_t vertex) const {
        const std::uint64_t a = assignments[vertex];
        return mode == MappingMode::dense ? a : visited_nodes[a];
    }
};

inline void validate_mapping(const MappingTable& map, const RectGrid& grid) {
    const std::uint64_t n_nodes = grid.node_count();
    if (map.mode == MappingMode::dense) {
        for (std::uint64_t a : map.assignments)
            if (a >= n_nodes) throw index_out_of_range("dense assignment out of grid range");
    } else {
        for (std::size_t i = 0; i < map.visited_nodes.size(); ++i) {
            if (map.visited_nodes[i] >= n_nodes)
                throw index_out_of_range("visited node out of grid range");
            if (i > 0 && !(map.visited_nodes[i] > map.visited_nodes[i - 1]))
                throw malformed_file("visited node list not strictly increasing");
        }
        for (std::uint64_t a : map.assignments)
            if (a >= map.visited_nodes.size())
                throw index_out_of_range("seed assignment out of visited list range");
    }
}

}  // namespace umc

#endif  // UMC_GRID_HPP
