#ifndef UMC_INTERP_HPP
#define UMC_INTERP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "umc/common.hpp"
#include "umc/grid.hpp"
#include "umc/grid_builder.hpp"
#include "umc/mesh.hpp"

namespace umc {

enum class FillPolicy : std::uint8_t {
    zero = 0,                 // unvisited nodes hold 0
    nearest_visited = 1,      // copy from the nearest visited node along the fastest axis
};

/// Grid-side component: one value per grid node (dense) or per visited node
/// (seed mode, in visited_nodes order).
struct GridField {
    std::vector<double> values;
    FillPolicy fill = FillPolicy::zero;
    bool seed_mode = false;
};

enum class BackInterpKind : std::uint8_t { nearest = 0, multilinear = 1 };

/// Back-interpolation operator description. Both built-in kinds have
/// nonnegative coefficients summing to 1, which is what makes the
/// tau1 + tau2 <= tau budget split admissible.
struct BackInterpSpec {
    BackInterpKind kind = BackInterpKind::nearest;
    double coeff_abs_sum = 1.0;
};

/// Residuals on mesh vertices, in vertex (file) order.
struct ResidualField {
    std::vector<double> values;
};

/// Cluster-mean forward interpolation: each node takes the mean of the
/// vertex values mapped to it (single pass of running sums and counts).
inline GridField interpolate_to_grid(const Field& field, const MappingTable& map,
                                     const RectGrid& grid, FillPolicy fill = FillPolicy::zero) {
    const std::size_t n_v = field.values.size();
    if (n_v != map.assignments.size())
        throw index_out_of_range("field length does not match mapping");
    GridField out;
    out.fill = fill;
    out.seed_mode = map.mode == MappingMode::seed;
    const std::size_t n_slots =
        out.seed_mode ? map.visited_nodes.size() : grid.node_count();
    out.values.assign(n_slots, 0.0);
    std::vector<std::uint64_t> count(n_slots, 0);
    for (std::size_t i = 0; i < n_v; ++i) {
        const std::uint64_t slot = map.assignments[i];
        out.values[slot] += field.values[i];
        count[slot] += 1;
    }
    for (std::size_t j = 0; j < n_slots; ++j)
        if (count[j]) out.values[j] /= static_cast<double>(count[j]);

    if (!out.seed_mode && fill == FillPolicy::nearest_visited) {
        // Along each row of the fastest-varying axis, fill unvisited nodes
        // from the nearest visited node (ties toward the lower index).
        const std::size_t row = grid.axis_size(grid.dim - 1);
        const std::size_t n_rows = n_slots / row;
        std::vector<std::int64_t> vis;
        for (std::size_t r = 0; r < n_rows; ++r) {
            double* v = out.values.data() + r * row;
            const std::uint64_t* c = count.data() + r * row;
            vis.clear();
            for (std::size_t t = 0; t < row; ++t)
                if (c[t]) vis.push_back(static_cast<std::int64_t>(t));
            if (vis.empty()) continue;  // whole row unvisited, keep zeros
            for (std::size_t t = 0; t < row; ++t) {
                if (c[t]) continue;
                const auto it = std::lower_bound(vis.begin(), vis.end(),
                                                 static_cast<std::int64_t>(t));
                std::int64_t src;
                if (it == vis.begin()) src = *it;
                else if (it == vis.end()) src = *(it - 1);
                else src = (static_cast<std::int64_t>(t) - *(it - 1) <= *it - static_cast<std::int64_t>(t))
                               ? *(it - 1) : *it;
                v[t] = v[static_cast<std::size_t>(src)];
            }
        }
    }
    return out;
}

namespace detail {

inline double multilinear_at(const RectGrid& grid, const std::vector<double>& node_values,
                             const double* p) {
    const int D = grid.dim;
    std::size_t lo_idx[3] = {0, 0, 0};
    double t[3] = {0, 0, 0};
    for (int d = 0; d < D; ++d) {
        const auto& axis = grid.axes[static_cast<std::size_t>(d)];
        if (axis.size() == 1) {
            lo_idx[d] = 0;
            t[d] = 0.0;
            continue;
        }
        auto it = std::upper_bound(axis.begin(), axis.end(), p[d]);
        std::size_t hi = static_cast<std::size_t>(it - axis.begin());
        hi = std::clamp<std::size_t>(hi, 1, axis.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = (p[d] - axis[lo]) / (axis[hi] - axis[lo]);
        lo_idx[d] = lo;
        t[d] = std::clamp(w, 0.0, 1.0);
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << D); ++corner) {
        double w = 1.0;
        std::uint64_t lin = 0;
        for (int d = 0; d < D; ++d) {
            const bool high = (corner >> d) & 1u;
            w *= high ? t[d] : 1.0 - t[d];
            const std::size_t n = grid.axis_size(d);
            std::size_t idx = lo_idx[d] + (high ? 1 : 0);
            if (idx >= n) idx = n - 1;  // single-node axis collapses
            lin = lin * n + idx;
        }
        if (w != 0.0) acc += w * node_values[lin];
    }
    return acc;
}

}  // namespace detail

/// g(.): evaluate the grid component at every mesh vertex. Nearest is a
/// pure table lookup through the mapping; multilinear blends the 2^D
/// enclosing-cell corners on the (possibly non-uniform) axes and needs the
/// dense grid.
inline std::vector<double> back_interpolate(const GridField& gridfield, const MappingTable& map,
                                            const RectGrid& grid, const Mesh& mesh,
                                            const BackInterpSpec& spec) {
    const std::size_t n_v = map.assignments.size();
    std::vector<double> out(n_v);
    if (spec.kind == BackInterpKind::nearest) {
        for (std::size_t i = 0; i < n_v; ++i) out[i] = gridfield.values[map.assignments[i]];
        return out;
    }
    if (gridfield.seed_mode)
        throw seed_mode_unsupported("multilinear back-interpolation needs a dense grid component");
    if (gridfield.values.size() != grid.node_count())
        throw index_out_of_range("grid component length does not match grid");
    for (std::size_t i = 0; i < n_v; ++i)
        out[i] = detail::multilinear_at(
            grid, gridfield.values,
            mesh.vertices.data() + i * static_cast<std::size_t>(mesh.dim));
    return out;
}

/// x2 = x - g(x1), elementwise, exact float64.
inline ResidualField compute_residuals(const Field& field, const GridField& gridfield,
                                       const MappingTable& map, const RectGrid& grid,
                                       const Mesh& mesh, const BackInterpSpec& spec) {
    const auto approx = back_interpolate(gridfield, map, grid, mesh, spec);
    ResidualField res;
    res.values.resize(field.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i)
        res.values[i] = field.values[i] - approx[i];
    return res;
}

}  // namespace umc

#endif  // UMC_INTERP_HPP
