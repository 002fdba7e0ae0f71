#ifndef UMC_PIPELINE_HPP
#define UMC_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "umc/codec.hpp"
#include "umc/common.hpp"
#include "umc/grid.hpp"
#include "umc/interp.hpp"
#include "umc/mesh.hpp"
#include "umc/serialize.hpp"

namespace umc {

enum class BoundKind : std::uint8_t { absolute = 0, relative_to_range = 1 };

/// Requested error budget on the mesh data. The absolute budget splits as
/// tau1 = rho*tau/coeff_abs_sum for the grid component and tau2 = (1-rho)*tau
/// for the residuals, which keeps coeff_abs_sum*tau1 + tau2 <= tau.
struct ErrorBudget {
    double tau = 1e-3;
    double split_rho = 0.5;
    BoundKind bound_kind = BoundKind::relative_to_range;
};

inline double value_range(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

inline double resolve_tau_abs(const ErrorBudget& budget, const std::vector<double>& values) {
    if (!(budget.tau >= 0.0)) throw budget_inadmissible("tau must be >= 0");
    if (budget.bound_kind == BoundKind::absolute) return budget.tau;
    return budget.tau * value_range(values);
}

inline std::pair<double, double> split_budget(double tau_abs, double rho,
                                              const BackInterpSpec& spec) {
    if (!(rho > 0.0) || !(rho < 1.0))
        throw budget_inadmissible("rho must lie strictly inside (0, 1)");
    if (!(tau_abs >= 0.0)) throw budget_inadmissible("tau must be >= 0");
    if (!(spec.coeff_abs_sum > 0.0))
        throw budget_inadmissible("coefficient sum must be positive");
    double tau1 = rho * tau_abs / spec.coeff_abs_sum;
    const double tau2 = (1.0 - rho) * tau_abs;
    // The split rule satisfies the admissibility condition in exact
    // arithmetic; nudge tau1 down if rounding pushed the sum over.
    while (spec.coeff_abs_sum * tau1 + tau2 > tau_abs)
        tau1 = std::nextafter(tau1, 0.0);
    return {tau1, tau2};
}

/// Container for one compressed field: two independently decodable
/// components plus the metadata needed to recombine them.
struct Archive {
    BackInterpKind g_kind = BackInterpKind::nearest;
    BoundKind bound_kind = BoundKind::relative_to_range;
    bool seed_mode = false;
    bool baseline = false;
    std::string field_name;
    std::uint64_t map_digest = 0;
    double tau = 0.0;  // requested bound, in bound_kind units
    double rho = 0.5;
    EncodedComponent component1;  // grid side (the only component for baseline)
    EncodedComponent component2;  // residual side

    std::uint64_t compressed_bytes() const {
        return component1.payload.size() + component2.payload.size();
    }
    std::uint64_t original_bytes() const {
        return baseline ? component1.original_bytes : component2.original_bytes;
    }
};

struct CompressOptions {
    BackInterpSpec g;
    FillPolicy fill = FillPolicy::zero;
    std::uint8_t codec_id = kCodecBuiltinPQ;
    std::uint8_t backend_id = 0;
};

namespace detail {

inline constexpr char kArchiveMagic[4] = {'U', 'M', 'C', 'Z'};

// Headroom against float rounding in back-interpolation and recomposition.
// The guarantee delivered to callers stays the full tau.
inline double shave(double tau) { return tau * (1.0 - 1e-9); }

inline CodecSpec grid_codec_spec(const CompressOptions& opt, const MappingTable& map,
                                 const RectGrid& grid, double tau1) {
    CodecSpec spec;
    spec.codec_id = opt.codec_id;
    spec.backend_id = opt.backend_id;
    spec.tau_abs = tau1;
    if (map.mode == MappingMode::seed) {
        spec.predictor = Predictor::lorenzo_1d;
        spec.dims = {map.visited_nodes.size()};
    } else {
        spec.predictor = Predictor::lorenzo_nd;
        spec.dims = grid.shape();
    }
    return spec;
}

}  // namespace detail

/// Multi-component compression: interpolate to the grid, compute residuals
/// against the lossless grid component, then encode both sides under the
/// split budget.
inline Archive compress(const Field& field, const MappingTable& map, const RectGrid& grid,
                        const Mesh& mesh, const ErrorBudget& budget,
                        const CompressOptions& opt = {}) {
    validate_field(field, mesh);
    if (field.values.size() != map.assignments.size())
        throw mapping_mismatch("mapping was built for a different vertex count");

    const double tau_abs = resolve_tau_abs(budget, field.values);
    const auto [tau1, tau2] = split_budget(tau_abs, budget.split_rho, opt.g);

    const GridField x1 = interpolate_to_grid(field, map, grid, opt.fill);
    const ResidualField x2 = compute_residuals(field, x1, map, grid, mesh, opt.g);

    Archive ar;
    ar.g_kind = opt.g.kind;
    ar.bound_kind = budget.bound_kind;
    ar.seed_mode = map.mode == MappingMode::seed;
    ar.field_name = field.name;
    ar.map_digest = mapping_digest(map);
    ar.tau = budget.tau;
    ar.rho = budget.split_rho;
    ar.component1 = encode(x1.values, detail::grid_codec_spec(opt, map, grid,
                                                              detail::shave(tau1)));
    CodecSpec spec2;
    spec2.codec_id = opt.codec_id;
    spec2.backend_id = opt.backend_id;
    spec2.predictor = Predictor::lorenzo_1d;
    spec2.dims = {field.values.size()};
    spec2.tau_abs = detail::shave(tau2);
    ar.component2 = encode(x2.values, spec2);
    return ar;
}

/// Single-component serialization baseline: the field in file order, 1-D,
/// at the full budget.
inline EncodedComponent compress_baseline(const Field& field, double tau_abs,
                                          std::uint8_t codec_id = kCodecBuiltinPQ,
                                          std::uint8_t backend_id = 0) {
    CodecSpec spec;
    spec.codec_id = codec_id;
    spec.backend_id = backend_id;
    spec.predictor = Predictor::lorenzo_1d;
    spec.dims = {field.values.size()};
    spec.tau_abs = tau_abs;
    return encode(field.values, spec);
}

inline Archive baseline_archive(const Field& field, const ErrorBudget& budget,
                                std::uint8_t codec_id = kCodecBuiltinPQ,
                                std::uint8_t backend_id = 0) {
    Archive ar;
    ar.baseline = true;
    ar.bound_kind = budget.bound_kind;
    ar.field_name = field.name;
    ar.tau = budget.tau;
    ar.rho = budget.split_rho;
    ar.component1 =
        compress_baseline(field, resolve_tau_abs(budget, field.values), codec_id, backend_id);
    return ar;
}

/// Reconstruction: decode both components independently and recompose
/// x' = g(x1') + x2' at every vertex.
inline Field decompress(const Archive& archive, const MappingTable& map, const RectGrid& grid,
                        const Mesh& mesh) {
    Field out;
    out.name = archive.field_name;
    if (archive.baseline) {
        out.values = decode(archive.component1);
        return out;
    }
    if (archive.map_digest != mapping_digest(map))
        throw mapping_mismatch("archive was compressed with a different mapping");
    const bool seed = map.mode == MappingMode::seed;
    if (seed != archive.seed_mode)
        throw mapping_mismatch("mapping mode does not match archive");
    const std::uint64_t expect_nodes = seed ? map.visited_nodes.size() : grid.node_count();
    if (archive.component1.n_elements != expect_nodes)
        throw mapping_mismatch("grid size does not match archive component");
    if (archive.component2.n_elements != map.assignments.size())
        throw mapping_mismatch("vertex count does not match archive component");

    GridField x1;
    x1.values = decode(archive.component1);
    x1.seed_mode = seed;
    const std::vector<double> x2 = decode(archive.component2);

    BackInterpSpec g;
    g.kind = archive.g_kind;
    const auto approx = back_interpolate(x1, map, grid, mesh, g);
    out.values.resize(x2.size());
    for (std::size_t i = 0; i < x2.size(); ++i) out.values[i] = approx[i] + x2[i];
    return out;
}

// --- archive serialization ---------------------------------------------------

inline std::vector<std::uint8_t> serialize_archive(const Archive& ar) {
    ByteWriter w;
    detail::write_magic(w, detail::kArchiveMagic);
    w.u16(kFormatVersion);
    std::uint16_t flags = 0;
    if (ar.seed_mode) flags |= 1u;
    if (ar.g_kind == BackInterpKind::multilinear) flags |= 2u;
    if (ar.bound_kind == BoundKind::relative_to_range) flags |= 4u;
    if (ar.baseline) flags |= 8u;
    w.u16(flags);
    if (ar.field_name.size() > 0xffff) throw malformed_file("field name too long");
    w.u16(static_cast<std::uint16_t>(ar.field_name.size()));
    w.bytes(ar.field_name.data(), ar.field_name.size());
    w.u64(ar.map_digest);
    w.f64(ar.tau);
    w.f64(ar.rho);
    w.u64(ar.component1.payload.size());
    w.bytes(ar.component1.payload.data(), ar.component1.payload.size());
    w.u64(ar.component2.payload.size());
    w.bytes(ar.component2.payload.data(), ar.component2.payload.size());
    return w.take();
}

inline Archive deserialize_archive(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::expect_magic(r, detail::kArchiveMagic, "archive");
    Archive ar;
    try {
        detail::expect_version(r.u16(), "archive");
        const std::uint16_t flags = r.u16();
        ar.seed_mode = flags & 1u;
        ar.g_kind = (flags & 2u) ? BackInterpKind::multilinear : BackInterpKind::nearest;
        ar.bound_kind = (flags & 4u) ? BoundKind::relative_to_range : BoundKind::absolute;
        ar.baseline = flags & 8u;
        ar.field_name.resize(r.u16());
        r.bytes(ar.field_name.data(), ar.field_name.size());
        ar.map_digest = r.u64();
        ar.tau = r.f64();
        ar.rho = r.f64();
        std::vector<std::uint8_t> p1(r.u64());
        r.bytes(p1.data(), p1.size());
        ar.component1 = parse_component(std::move(p1));
        std::vector<std::uint8_t> p2(r.u64());
        r.bytes(p2.data(), p2.size());
        if (!p2.empty())
            ar.component2 = parse_component(std::move(p2));
        else if (!ar.baseline)
            throw malformed_file("missing residual component");
        if (!r.done()) throw malformed_file("trailing bytes in archive");
    } catch (const corrupt_payload& e) {
        throw malformed_file(std::string("truncated archive: ") + e.what());
    }
    return ar;
}

inline void save_archive(const Archive& ar, const std::string& path) {
    detail::write_file(path, serialize_archive(ar));
}

inline Archive load_archive(const std::string& path) {
    return deserialize_archive(detail::read_file(path));
}

}  // namespace umc

#endif  // UMC_PIPELINE_HPP
