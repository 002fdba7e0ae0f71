#ifndef UMC_TESTS_GOLDEN_RECIPE_HPP
#define UMC_TESTS_GOLDEN_RECIPE_HPP

// The fixed construction behind the golden byte images. Everything on this
// path is libm-free (white-noise field, polynomial mesh grading), so the
// bytes are reproducible across platforms given IEEE doubles.

#include "umc/datagen.hpp"
#include "umc/grid_builder.hpp"
#include "umc/pipeline.hpp"

namespace umc_test {

struct GoldenArtifacts {
    umc::Mesh mesh;
    umc::Field field;
    umc::RectGrid grid;
    umc::MappingTable mapping;
    umc::Archive archive;
};

inline GoldenArtifacts make_golden(std::uint64_t seed = 7) {
    GoldenArtifacts out;
    umc::SynthSpec spec;
    spec.dim = 2;
    spec.n_target = 3000;
    spec.mesh_style = umc::MeshStyle::holed;
    spec.field_kind = umc::FieldKind::white_noise;
    spec.rng_seed = seed;
    out.mesh = umc::gen_mesh(spec);
    out.field = umc::gen_field(out.mesh, spec);

    umc::GridBuildConfig cfg;  // defaults: k=50, gmax=4096, delta=5, seed threshold 0.35
    const umc::RectGrid init = umc::grid_init(out.mesh, cfg);
    auto res = umc::grid_coarsen(out.mesh, init, cfg);
    out.grid = std::move(res.grid);
    out.mapping = std::move(res.mapping);

    umc::ErrorBudget budget;
    budget.tau = 1e-3;
    budget.split_rho = 0.5;
    budget.bound_kind = umc::BoundKind::relative_to_range;
    out.archive = umc::compress(out.field, out.mapping, out.grid, out.mesh, budget);
    return out;
}

}  // namespace umc_test

#endif  // UMC_TESTS_GOLDEN_RECIPE_HPP
