#ifndef UMC_GRID_BUILDER_HPP
#define UMC_GRID_BUILDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <utility>
#include <vector>

#include "umc/common.hpp"
#include "umc/grid.hpp"
#include "umc/mesh.hpp"

namespace umc {

struct GridBuildConfig {
    double percentile_k = 50.0;        // k%ile of vertex distance, in (0, 100]
    std::uint64_t g_max = 4096;        // cap on nodes along each axis
    double delta = 5.0;                // percentile increment while over g_max
    double seed_mode_threshold = 0.35; // visited fraction below which seed mode kicks in
};

inline void validate_config(const GridBuildConfig& cfg) {
    if (!(cfg.percentile_k > 0.0) || cfg.percentile_k > 100.0)
        throw error("percentile must be in (0, 100]");
    if (cfg.g_max < 2) throw error("g_max must be >= 2");
    if (!(cfg.delta > 0.0)) throw error("delta must be positive");
    if (!(cfg.seed_mode_threshold > 0.0) || cfg.seed_mode_threshold > 1.0)
        throw error("seed mode threshold must be in (0, 1]");
}

/// Per-dimension absolute coordinate deltas of all cell edges (multiset:
/// shared edges count once per incident cell) plus coordinate extrema.
struct EdgeLengthStats {
    std::vector<std::vector<double>> deltas;  // [axis][edge]
    std::vector<double> min_p;
    std::vector<double> max_p;
};

namespace detail {

// Undirected edges per cell: consecutive pairs plus the closing edge for
// simplices/quads, the 12 edges of a hex.
inline const std::vector<std::pair<int, int>>& cell_edges(int arity) {
    static const std::vector<std::pair<int, int>> tri = {{0, 1}, {1, 2}, {2, 0}};
    static const std::vector<std::pair<int, int>> quad = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    static const std::vector<std::pair<int, int>> hex = {
        {0, 1}, {1, 2}, {2, 3}, {3, 0},  // bottom face
        {4, 5}, {5, 6}, {6, 7}, {7, 4},  // top face
        {0, 4}, {1, 5}, {2, 6}, {3, 7}}; // verticals
    switch (arity) {
        case 3: return tri;
        case 4: return quad;
        case 8: return hex;
        default: throw malformed_file("unsupported cell arity " + std::to_string(arity));
    }
}

inline void collect_extrema(const Mesh& mesh, EdgeLengthStats& stats) {
    const std::size_t n_v = mesh.vertex_count();
    stats.min_p.assign(static_cast<std::size_t>(mesh.dim), 0.0);
    stats.max_p.assign(static_cast<std::size_t>(mesh.dim), 0.0);
    for (int d = 0; d < mesh.dim; ++d) {
        double lo = mesh.coord(0, d), hi = lo;
        for (std::size_t i = 1; i < n_v; ++i) {
            const double c = mesh.coord(i, d);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        stats.min_p[static_cast<std::size_t>(d)] = lo;
        stats.max_p[static_cast<std::size_t>(d)] = hi;
    }
}

}  // namespace detail

inline EdgeLengthStats traverse_mesh(const Mesh& mesh) {
    if (mesh.cell_count() == 0) throw degenerate_mesh("mesh has no cells");
    EdgeLengthStats stats;
    stats.deltas.resize(static_cast<std::size_t>(mesh.dim));
    detail::collect_extrema(mesh, stats);
    const auto& edges = detail::cell_edges(mesh.cell_arity);
    const std::size_t n_c = mesh.cell_count();
    const std::size_t arity = static_cast<std::size_t>(mesh.cell_arity);
    for (std::size_t j = 0; j < n_c; ++j) {
        const std::uint64_t* cell = mesh.cells.data() + j * arity;
        for (const auto& [a, b] : edges) {
            const std::uint64_t u = cell[a], v = cell[b];
            for (int d = 0; d < mesh.dim; ++d)
                stats.deltas[static_cast<std::size_t>(d)].push_back(
                    std::fabs(mesh.coord(u, d) - mesh.coord(v, d)));
        }
    }
    return stats;
}

/// Point-cloud fallback: per-dimension deltas of each vertex's exact
/// 1-nearest-neighbor (ties broken toward the lower vertex index).
inline EdgeLengthStats knn_edge_stats(const Mesh& mesh) {
    EdgeLengthStats stats;
    stats.deltas.resize(static_cast<std::size_t>(mesh.dim));
    detail::collect_extrema(mesh, stats);
    const std::size_t n_v = mesh.vertex_count();
    if (n_v < 2) return stats;

    // Uniform buckets, ring search outward until the ring cannot beat the
    // current best distance.
    const int D = mesh.dim;
    const std::size_t per_axis = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n_v), 1.0 / D))));
    std::vector<double> lo = stats.min_p, span(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        double s = stats.max_p[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)];
        span[static_cast<std::size_t>(d)] = s > 0 ? s : 1.0;
    }
    auto bucket_of = [&](std::size_t v, int d) {
        double t = (mesh.coord(v, d) - lo[static_cast<std::size_t>(d)]) /
                   span[static_cast<std::size_t>(d)];
        auto b = static_cast<std::int64_t>(t * static_cast<double>(per_axis));
        return std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(per_axis) - 1);
    };
    std::size_t n_buckets = 1;
    for (int d = 0; d < D; ++d) n_buckets *= per_axis;
    std::vector<std::vector<std::uint32_t>> buckets(n_buckets);
    auto bucket_linear = [&](const std::int64_t* b) {
        std::size_t lin = 0;
        for (int d = 0; d < D; ++d) lin = lin * per_axis + static_cast<std::size_t>(b[d]);
        return lin;
    };
    for (std::size_t v = 0; v < n_v; ++v) {
        std::int64_t b[3] = {0, 0, 0};
        for (int d = 0; d < D; ++d) b[d] = bucket_of(v, d);
        buckets[bucket_linear(b)].push_back(static_cast<std::uint32_t>(v));
    }
    const double cell_w = 1.0 / static_cast<double>(per_axis);  // in normalized units

    for (std::size_t v = 0; v < n_v; ++v) {
        std::int64_t home[3] = {0, 0, 0};
        for (int d = 0; d < D; ++d) home[d] = bucket_of(v, d);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = n_v;
        for (std::int64_t ring = 0; ring < static_cast<std::int64_t>(per_axis); ++ring) {
            // Any point in a farther ring is at least (ring-1) cell widths away
            // along some axis (in normalized coordinates scaled back per axis).
            if (best_idx != n_v && ring > 1) {
                double min_sep = std::numeric_limits<double>::infinity();
                for (int d = 0; d < D; ++d)
                    min_sep = std::min(min_sep, span[static_cast<std::size_t>(d)] * cell_w);
                const double reach = static_cast<double>(ring - 1) * min_sep;
                if (reach * reach > best) break;
            }
            std::int64_t b[3] = {0, 0, 0};
            bool any = false;
            auto visit = [&](const std::int64_t* bb) {
                for (int d = 0; d < D; ++d)
                    if (bb[d] < 0 || bb[d] >= static_cast<std::int64_t>(per_axis)) return;
                any = true;
                for (std::uint32_t u : buckets[bucket_linear(bb)]) {
                    if (u == v) continue;
                    double dist2 = 0;
                    for (int d = 0; d < D; ++d) {
                        const double dd = mesh.coord(u, d) - mesh.coord(v, d);
                        dist2 += dd * dd;
                    }
                    if (dist2 < best || (dist2 == best && u < best_idx)) {
                        best = dist2;
                        best_idx = u;
                    }
                }
            };
            // All buckets whose Chebyshev distance from home equals ring.
            const std::int64_t r = ring;
            if (D == 2) {
                for (b[0] = home[0] - r; b[0] <= home[0] + r; ++b[0])
                    for (b[1] = home[1] - r; b[1] <= home[1] + r; ++b[1])
                        if (std::max(std::llabs(b[0] - home[0]), std::llabs(b[1] - home[1])) == r)
                            visit(b);
            } else {
                for (b[0] = home[0] - r; b[0] <= home[0] + r; ++b[0])
                    for (b[1] = home[1] - r; b[1] <= home[1] + r; ++b[1])
                        for (b[2] = home[2] - r; b[2] <= home[2] + r; ++b[2])
                            if (std::max({std::llabs(b[0] - home[0]), std::llabs(b[1] - home[1]),
                                          std::llabs(b[2] - home[2])}) == r)
                                visit(b);
            }
            (void)any;
        }
        if (best_idx < n_v)
            for (int d = 0; d < D; ++d)
                stats.deltas[static_cast<std::size_t>(d)].push_back(
                    std::fabs(mesh.coord(best_idx, d) - mesh.coord(v, d)));
    }
    return stats;
}

/// Nearest-rank percentile of the nonzero samples: sort ascending, take the
/// element at 1-based index ceil(k/100 * N). Zero deltas are excluded first
/// (axis-aligned edges contribute zeros along orthogonal axes).
inline double percentile(double k, const std::vector<double>& samples) {
    std::vector<double> kept;
    kept.reserve(samples.size());
    for (double s : samples)
        if (s != 0.0) kept.push_back(s);
    if (kept.empty()) throw empty_after_filtering("no nonzero samples to rank");
    std::sort(kept.begin(), kept.end());
    const auto n = static_cast<double>(kept.size());
    auto rank = static_cast<std::size_t>(std::ceil(k / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, kept.size());
    return kept[rank - 1];
}

struct GridBuildDiag {
    struct Axis {
        double spacing = 0.0;
        double chosen_k = 0.0;
        bool gmax_fallback = false;  // percentile at k=100 still too fine
        bool degenerate = false;     // single-node axis
    };
    std::vector<Axis> axes;
};

inline RectGrid grid_init(const Mesh& mesh, const GridBuildConfig& cfg,
                          GridBuildDiag* diag = nullptr) {
    validate_config(cfg);
    EdgeLengthStats stats;
    try {
        stats = traverse_mesh(mesh);
    } catch (const degenerate_mesh&) {
        stats = knn_edge_stats(mesh);
    }
    RectGrid grid;
    grid.dim = mesh.dim;
    grid.axes.resize(static_cast<std::size_t>(mesh.dim));
    if (diag) diag->axes.assign(static_cast<std::size_t>(mesh.dim), {});
    for (int d = 0; d < mesh.dim; ++d) {
        const auto di = static_cast<std::size_t>(d);
        auto& axis = grid.axes[di];
        const double lo = stats.min_p[di], hi = stats.max_p[di];
        GridBuildDiag::Axis ad;
        double gs = 0.0;
        bool degenerate = hi <= lo;
        if (!degenerate) {
            try {
                double k = cfg.percentile_k;
                gs = percentile(k, stats.deltas[di]);
                double gn = (hi - lo) / gs;
                while (gn >= static_cast<double>(cfg.g_max)) {
                    if (k >= 100.0) {
                        // Even the coarsest edge-derived spacing over-discretizes;
                        // fall back to uniform spacing hitting exactly g_max nodes.
                        gs = (hi - lo) / static_cast<double>(cfg.g_max - 1);
                        ad.gmax_fallback = true;
                        break;
                    }
                    k = std::min(100.0, k + cfg.delta);
                    gs = percentile(k, stats.deltas[di]);
                    gn = (hi - lo) / gs;
                }
                ad.chosen_k = k;
            } catch (const empty_after_filtering&) {
                degenerate = true;  // all edge deltas zero along this axis
            }
        }
        if (degenerate) {
            axis = {lo};
            ad.degenerate = true;
        } else {
            const double gn = (hi - lo) / gs;
            const auto steps = static_cast<std::uint64_t>(std::floor(gn));
            axis.reserve(steps + 2);
            for (std::uint64_t t = 0; t <= steps; ++t)
                axis.push_back(lo + static_cast<double>(t) * gs);
            if (hi - axis.back() > gs / 2.0) axis.push_back(hi);
            ad.spacing = gs;
        }
        if (diag) diag->axes[di] = ad;
    }
    validate_grid(grid);
    return grid;
}

/// Nearest grid node to p, ties resolved toward the lower axis index.
/// Axes may be non-uniform. Points outside the box clamp to the end nodes.
inline std::uint64_t map_vertex(const RectGrid& grid, const double* p) {
    std::uint64_t lin = 0;
    for (int d = 0; d < grid.dim; ++d) {
        const auto& axis = grid.axes[static_cast<std::size_t>(d)];
        const double x = p[d];
        const auto it = std::lower_bound(axis.begin(), axis.end(), x);
        std::size_t idx;
        if (it == axis.begin()) {
            idx = 0;
        } else if (it == axis.end()) {
            idx = axis.size() - 1;
        } else {
            const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
            const std::size_t lo = hi - 1;
            idx = (x - axis[lo] <= axis[hi] - x) ? lo : hi;
        }
        lin = lin * axis.size() + idx;
    }
    return lin;
}

inline std::uint64_t map_vertex(const RectGrid& grid, const Mesh& mesh, std::size_t vertex) {
    return map_vertex(grid, mesh.vertices.data() + vertex * static_cast<std::size_t>(mesh.dim));
}

/// Reindex assignments after plane deletion. The geometric node referenced
/// by each assignment is unchanged; only its linear index moves.
inline std::vector<std::uint64_t> remap_after_coarsen(
    const RectGrid& old_grid, const std::vector<std::vector<std::uint64_t>>& deleted_planes,
    const std::vector<std::uint64_t>& assignments) {
    const int D = old_grid.dim;
    std::vector<std::vector<std::int64_t>> old_to_new(static_cast<std::size_t>(D));
    std::vector<std::uint64_t> new_size(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        const auto di = static_cast<std::size_t>(d);
        const std::size_t n = old_grid.axis_size(d);
        old_to_new[di].assign(n, 0);
        for (std::uint64_t k : deleted_planes[di]) {
            if (k >= n) throw internal_inconsistency("deleted plane index out of range");
            old_to_new[di][k] = -1;
        }
        std::int64_t next = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (old_to_new[di][k] == 0)
                old_to_new[di][k] = next++;
        new_size[di] = static_cast<std::uint64_t>(next);
    }
    std::vector<std::uint64_t> out(assignments.size());
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        std::uint64_t lin = assignments[i];
        std::uint64_t old_idx[3] = {0, 0, 0};
        for (int d = D - 1; d >= 0; --d) {
            const std::uint64_t n = old_grid.axis_size(d);
            old_idx[d] = lin % n;
            lin /= n;
        }
        std::uint64_t out_lin = 0;
        for (int d = 0; d < D; ++d) {
            const std::int64_t ni = old_to_new[static_cast<std::size_t>(d)]
                                              [static_cast<std::size_t>(old_idx[d])];
            if (ni < 0)
                throw internal_inconsistency("assignment references a deleted plane");
            out_lin = out_lin * new_size[static_cast<std::size_t>(d)] +
                      static_cast<std::uint64_t>(ni);
        }
        out[i] = out_lin;
    }
    return out;
}

struct CoarsenResult {
    MappingTable mapping;
    RectGrid grid;
};

/// Assign every vertex to its nearest node, then delete every hyperplane
/// containing no visited node (one scan per axis, in dimension order).
/// Switches to seed mode when the visited fraction of the surviving grid
/// falls below the configured threshold.
inline CoarsenResult grid_coarsen(const Mesh& mesh, const RectGrid& grid,
                                  const GridBuildConfig& cfg) {
    validate_config(cfg);
    const std::size_t n_v = mesh.vertex_count();
    const int D = grid.dim;

    std::vector<std::uint64_t> assignments(n_v);
    for (std::size_t i = 0; i < n_v; ++i) assignments[i] = map_vertex(grid, mesh, i);

    // Visited flags per plane, derived from assignments (deleting an
    // unvisited plane never changes another plane's visited status).
    std::vector<std::vector<char>> plane_visited(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d)
        plane_visited[static_cast<std::size_t>(d)].assign(grid.axis_size(d), 0);
    for (std::uint64_t a : assignments) {
        std::uint64_t lin = a;
        for (int d = D - 1; d >= 0; --d) {
            const std::uint64_t n = grid.axis_size(d);
            plane_visited[static_cast<std::size_t>(d)][static_cast<std::size_t>(lin % n)] = 1;
            lin /= n;
        }
    }

    std::vector<std::vector<std::uint64_t>> deleted(static_cast<std::size_t>(D));
    RectGrid coarse;
    coarse.dim = D;
    coarse.axes.resize(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        const auto di = static_cast<std::size_t>(d);
        for (std::size_t k = 0; k < grid.axis_size(d); ++k) {
            if (plane_visited[di][k])
                coarse.axes[di].push_back(grid.axes[di][k]);
            else
                deleted[di].push_back(k);
        }
    }

    MappingTable map;
    map.assignments = remap_after_coarsen(grid, deleted, assignments);

    std::vector<std::uint64_t> visited = map.assignments;
    std::sort(visited.begin(), visited.end());
    visited.erase(std::unique(visited.begin(), visited.end()), visited.end());

    const auto survivors = static_cast<double>(coarse.node_count());
    map.visited_fraction = static_cast<double>(visited.size()) / survivors;

    if (*map.visited_fraction < cfg.seed_mode_threshold) {
        map.mode = MappingMode::seed;
        for (auto& a : map.assignments) {
            const auto it = std::lower_bound(visited.begin(), visited.end(), a);
            a = static_cast<std::uint64_t>(it - visited.begin());
        }
        map.visited_nodes = std::move(visited);
    }
    return {std::move(map), std::move(coarse)};
}

}  // namespace umc

#endif  // UMC_GRID_BUILDER_HPP
