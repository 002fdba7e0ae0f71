#ifndef UMC_DATAGEN_HPP
#define UMC_DATAGEN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "umc/common.hpp"
#include "umc/mesh.hpp"

namespace umc {

enum class MeshStyle : std::uint8_t {
    jittered = 0,  // jittered structured triangulation/tetrahedralization
    graded = 1,    // boundary-refined: cells near the boundary ~4x smaller
    holed = 2,     // elliptical void removed from the interior
};

enum class FieldKind : std::uint8_t {
    gaussian_mixture = 0,  // smooth
    multi_sine = 1,        // oscillatory
    white_noise = 2,       // incompressible control
};

struct SynthSpec {
    int dim = 2;
    std::uint64_t n_target = 1000;
    MeshStyle mesh_style = MeshStyle::jittered;
    FieldKind field_kind = FieldKind::gaussian_mixture;
    std::uint64_t rng_seed = 0;
};

namespace detail {

// Boundary-refined axis grading: derivative 1/3 at the ends, 4/3 in the
// middle, so boundary cells come out ~4x smaller. Polynomial only, which
// keeps mesh bytes identical across libm implementations.
inline double grade(double u) {
    constexpr double alpha = 2.0 / 3.0;
    return (1.0 - alpha) * u + alpha * u * u * (3.0 - 2.0 * u);
}

inline bool inside_void(const double* p, int dim) {
    // Axis-aligned elliptical void, loosely airfoil-sized.
    constexpr double cx = 0.5, cy = 0.5, cz = 0.5;
    constexpr double ax = 0.27, ay = 0.13, az = 0.13;
    const double dx = (p[0] - cx) / ax;
    const double dy = (p[1] - cy) / ay;
    double q = dx * dx + dy * dy;
    if (dim == 3) {
        const double dz = (p[2] - cz) / az;
        q += dz * dz;
    }
    return q < 1.0;
}

inline void shuffle_vertices(Mesh& mesh, SplitMix64& rng) {
    const std::size_t n_v = mesh.vertex_count();
    std::vector<std::uint64_t> perm(n_v);
    for (std::size_t i = 0; i < n_v; ++i) perm[i] = i;
    for (std::size_t i = n_v; i-- > 1;) {
        const std::uint64_t j = rng.next_below(i + 1);
        std::swap(perm[i], perm[j]);
    }
    // perm[i] = old index placed at new position i
    std::vector<double> coords(mesh.vertices.size());
    std::vector<std::uint64_t> inverse(n_v);
    const auto D = static_cast<std::size_t>(mesh.dim);
    for (std::size_t i = 0; i < n_v; ++i) {
        inverse[perm[i]] = i;
        for (std::size_t d = 0; d < D; ++d) coords[i * D + d] = mesh.vertices[perm[i] * D + d];
    }
    mesh.vertices = std::move(coords);
    for (auto& c : mesh.cells) c = inverse[c];
}

inline void drop_void_vertices(Mesh& mesh) {
    const std::size_t n_v = mesh.vertex_count();
    const auto D = static_cast<std::size_t>(mesh.dim);
    std::vector<std::uint64_t> new_index(n_v);
    std::vector<double> kept;
    std::uint64_t next = 0;
    constexpr auto kGone = static_cast<std::uint64_t>(-1);
    for (std::size_t i = 0; i < n_v; ++i) {
        if (inside_void(mesh.vertices.data() + i * D, mesh.dim)) {
            new_index[i] = kGone;
        } else {
            new_index[i] = next++;
            for (std::size_t d = 0; d < D; ++d) kept.push_back(mesh.vertices[i * D + d]);
        }
    }
    std::vector<std::uint64_t> cells;
    const auto arity = static_cast<std::size_t>(mesh.cell_arity);
    for (std::size_t j = 0; j < mesh.cell_count(); ++j) {
        bool keep = true;
        for (std::size_t a = 0; a < arity; ++a)
            if (new_index[mesh.cells[j * arity + a]] == kGone) {
                keep = false;
                break;
            }
        if (keep)
            for (std::size_t a = 0; a < arity; ++a)
                cells.push_back(new_index[mesh.cells[j * arity + a]]);
    }
    mesh.vertices = std::move(kept);
    mesh.cells = std::move(cells);
}

}  // namespace detail

/// Deterministic synthetic mesh on the unit square/cube: structured points
/// with bounded jitter (boundary points stay on their boundary planes),
/// split into 2 triangles per quad or 5 tets per cube, vertex order
/// randomly permuted so file order carries no spatial coherence.
inline Mesh gen_mesh(const SynthSpec& spec) {
    if (spec.dim != 2 && spec.dim != 3) throw error("synthetic meshes are 2D or 3D");
    if (spec.n_target < 4) throw error("need at least 4 vertices");
    SplitMix64 rng(spec.rng_seed);
    Mesh mesh;
    mesh.dim = spec.dim;
    const bool graded = spec.mesh_style == MeshStyle::graded;

    if (spec.dim == 2) {
        const auto m = std::max<std::uint64_t>(
            2, static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(spec.n_target)))));
        mesh.cell_arity = 3;
        const double step = 1.0 / static_cast<double>(m - 1);
        for (std::uint64_t i = 0; i < m; ++i) {
            for (std::uint64_t j = 0; j < m; ++j) {
                const double ju = (rng.next_double() - 0.5) * 0.6 * step;
                const double jv = (rng.next_double() - 0.5) * 0.6 * step;
                double u = static_cast<double>(i) * step + (i > 0 && i < m - 1 ? ju : 0.0);
                double v = static_cast<double>(j) * step + (j > 0 && j < m - 1 ? jv : 0.0);
                if (graded) {
                    u = detail::grade(u);
                    v = detail::grade(v);
                }
                mesh.vertices.push_back(u);
                mesh.vertices.push_back(v);
            }
        }
        for (std::uint64_t i = 0; i + 1 < m; ++i) {
            for (std::uint64_t j = 0; j + 1 < m; ++j) {
                const std::uint64_t a = i * m + j, b = i * m + j + 1;
                const std::uint64_t c = (i + 1) * m + j, d = (i + 1) * m + j + 1;
                mesh.cells.insert(mesh.cells.end(), {a, b, c});
                mesh.cells.insert(mesh.cells.end(), {b, d, c});
            }
        }
    } else {
        const auto m = std::max<std::uint64_t>(
            2, static_cast<std::uint64_t>(
                   std::llround(std::cbrt(static_cast<double>(spec.n_target)))));
        mesh.cell_arity = 4;
        const double step = 1.0 / static_cast<double>(m - 1);
        for (std::uint64_t i = 0; i < m; ++i)
            for (std::uint64_t j = 0; j < m; ++j)
                for (std::uint64_t k = 0; k < m; ++k) {
                    const std::uint64_t ijk[3] = {i, j, k};
                    for (int d = 0; d < 3; ++d) {
                        const double jit = (rng.next_double() - 0.5) * 0.6 * step;
                        double u = static_cast<double>(ijk[d]) * step +
                                   (ijk[d] > 0 && ijk[d] < m - 1 ? jit : 0.0);
                        if (graded) u = detail::grade(u);
                        mesh.vertices.push_back(u);
                    }
                }
        auto vid = [m](std::uint64_t i, std::uint64_t j, std::uint64_t k) {
            return (i * m + j) * m + k;
        };
        for (std::uint64_t i = 0; i + 1 < m; ++i)
            for (std::uint64_t j = 0; j + 1 < m; ++j)
                for (std::uint64_t k = 0; k + 1 < m; ++k) {
                    const std::uint64_t c000 = vid(i, j, k), c001 = vid(i, j, k + 1);
                    const std::uint64_t c010 = vid(i, j + 1, k), c011 = vid(i, j + 1, k + 1);
                    const std::uint64_t c100 = vid(i + 1, j, k), c101 = vid(i + 1, j, k + 1);
                    const std::uint64_t c110 = vid(i + 1, j + 1, k), c111 = vid(i + 1, j + 1, k + 1);
                    // 5-tet split; parity flip keeps shared faces conforming.
                    if ((i + j + k) % 2 == 0) {
                        const std::uint64_t tets[5][4] = {{c000, c011, c101, c110},
                                                          {c001, c000, c011, c101},
                                                          {c010, c000, c011, c110},
                                                          {c100, c000, c101, c110},
                                                          {c111, c011, c101, c110}};
                        for (const auto& t : tets) mesh.cells.insert(mesh.cells.end(), t, t + 4);
                    } else {
                        const std::uint64_t tets[5][4] = {{c001, c010, c100, c111},
                                                          {c000, c001, c010, c100},
                                                          {c011, c001, c010, c111},
                                                          {c101, c001, c100, c111},
                                                          {c110, c010, c100, c111}};
                        for (const auto& t : tets) mesh.cells.insert(mesh.cells.end(), t, t + 4);
                    }
                }
    }

    if (spec.mesh_style == MeshStyle::holed) detail::drop_void_vertices(mesh);
    detail::shuffle_vertices(mesh, rng);
    validate_mesh(mesh);
    return mesh;
}

namespace detail {

struct GaussianMixture {
    double amp[5], sigma2[5], mu[5][3];

    GaussianMixture(std::uint64_t seed, int dim) {
        SplitMix64 rng(seed ^ 0x8f5c2d1aa5e39b47ull);
        for (int k = 0; k < 5; ++k) {
            amp[k] = rng.uniform(0.4, 1.2);
            const double s = rng.uniform(0.3, 0.5);
            sigma2[k] = s * s;
            for (int d = 0; d < dim; ++d) mu[k][d] = rng.uniform(0.15, 0.85);
        }
    }

    double operator()(const double* p, int dim) const {
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) {
            double d2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double dd = p[d] - mu[k][d];
                d2 += dd * dd;
            }
            acc += amp[k] * std::exp(-d2 / sigma2[k]);
        }
        return acc;
    }
};

struct MultiSine {
    double amp[20], omega[20][3], phase[20];

    MultiSine(std::uint64_t seed, int dim) {
        SplitMix64 rng(seed ^ 0xd2b74407b1ce6e93ull);
        constexpr double kMaxOmega = 40.0 * 3.14159265358979323846;
        for (int k = 0; k < 20; ++k) {
            amp[k] = rng.uniform(0.05, 0.4);
            for (int d = 0; d < dim; ++d) omega[k][d] = rng.uniform(-kMaxOmega, kMaxOmega);
            phase[k] = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        }
    }

    double operator()(const double* p, int dim) const {
        double acc = 0.0;
        for (int k = 0; k < 20; ++k) {
            double arg = phase[k];
            for (int d = 0; d < dim; ++d) arg += omega[k][d] * p[d];
            acc += amp[k] * std::sin(arg);
        }
        return acc;
    }
};

}  // namespace detail

/// Analytic field evaluation at every vertex; white noise draws one value
/// per vertex from a seed-derived stream in vertex order.
inline Field gen_field(const Mesh& mesh, const SynthSpec& spec) {
    Field field;
    const std::size_t n_v = mesh.vertex_count();
    field.values.reserve(n_v);
    const auto D = static_cast<std::size_t>(mesh.dim);
    switch (spec.field_kind) {
        case FieldKind::gaussian_mixture: {
            field.name = "gaussian-mixture";
            const detail::GaussianMixture f(spec.rng_seed, mesh.dim);
            for (std::size_t i = 0; i < n_v; ++i)
                field.values.push_back(f(mesh.vertices.data() + i * D, mesh.dim));
            break;
        }
        case FieldKind::multi_sine: {
            field.name = "multi-sine";
            const detail::MultiSine f(spec.rng_seed, mesh.dim);
            for (std::size_t i = 0; i < n_v; ++i)
                field.values.push_back(f(mesh.vertices.data() + i * D, mesh.dim));
            break;
        }
        case FieldKind::white_noise: {
            field.name = "white-noise";
            SplitMix64 rng(spec.rng_seed ^ 0x4c1f3a98e60b72d5ull);
            for (std::size_t i = 0; i < n_v; ++i)
                field.values.push_back(rng.uniform(-1.0, 1.0));
            break;
        }
    }
    return field;
}

inline const char* to_string(MeshStyle s) {
    switch (s) {
        case MeshStyle::jittered: return "jittered";
        case MeshStyle::graded: return "graded";
        case MeshStyle::holed: return "holed";
    }
    return "?";
}

inline const char* to_string(FieldKind k) {
    switch (k) {
        case FieldKind::gaussian_mixture: return "gaussian-mixture";
        case FieldKind::multi_sine: return "multi-sine";
        case FieldKind::white_noise: return "white-noise";
    }
    return "?";
}

}  // namespace umc

#endif  // UMC_DATAGEN_HPP
