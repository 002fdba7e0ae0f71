#include <catch2/catch_amalgamated.hpp>

#include "support/helpers.hpp"
#include "umc/grid_builder.hpp"
#include "umc/interp.hpp"

using namespace umc;

namespace {

struct Setup {
    Mesh mesh;
    RectGrid grid;
    MappingTable map;
};

// n_v vertices all mapping to distinct or shared nodes of a small 1-D-ish grid.
Setup cluster_setup(const std::vector<double>& xs, const std::vector<double>& axis) {
    Setup s;
    s.mesh.dim = 2;
    s.mesh.cell_arity = 3;
    for (double x : xs) {
        s.mesh.vertices.push_back(x);
        s.mesh.vertices.push_back(0.0);
    }
    s.grid.dim = 2;
    s.grid.axes = {axis, {0.0}};
    for (std::size_t i = 0; i < xs.size(); ++i)
        s.map.assignments.push_back(map_vertex(s.grid, s.mesh, i));
    return s;
}

Field make_field(std::vector<double> values) {
    Field f;
    f.name = "t";
    f.values = std::move(values);
    return f;
}

}  // namespace

TEST_CASE("cluster mean: basic arithmetic") {
    // three vertices nearest to the single node at 0
    const Setup s = cluster_setup({-0.1, 0.0, 0.1}, {0.0, 10.0});
    const auto gf = interpolate_to_grid(make_field({1.0, 2.0, 3.0}), s.map, s.grid);
    CHECK(gf.values[0] == 2.0);
    CHECK(gf.values[1] == 0.0);  // unvisited: zero fill
}

TEST_CASE("singleton cluster keeps the exact value") {
    const Setup s = cluster_setup({0.0, 1.0}, {0.0, 1.0});
    const auto gf = interpolate_to_grid(make_field({0.1234567890123, 7.5}), s.map, s.grid);
    CHECK(gf.values[0] == 0.1234567890123);
    CHECK(gf.values[1] == 7.5);
}

TEST_CASE("cluster mean minimizes the squared residual sum") {
    auto rng = umc_test::rng_for(15);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.next_below(10);
        const auto xs = umc_test::random_values(rng, n, -5, 5);
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(n);
        auto sq = [&](double v) {
            double acc = 0;
            for (double x : xs) acc += (x - v) * (x - v);
            return acc;
        };
        CHECK(sq(mean) < sq(mean + 0.1));
        CHECK(sq(mean) < sq(mean - 0.1));
    }
}

TEST_CASE("nearest back-interpolation is a table lookup") {
    MappingTable map;
    map.assignments = {5};
    GridField gf;
    gf.values.assign(8, 0.0);
    gf.values[5] = 7.25;
    RectGrid grid;
    grid.dim = 2;
    grid.axes = {{0, 1, 2, 3}, {0, 1}};
    Mesh mesh;
    mesh.dim = 2;
    mesh.cell_arity = 3;
    mesh.vertices = {0, 0};
    const auto out = back_interpolate(gf, map, grid, mesh, {});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 7.25);
}

TEST_CASE("multilinear blend on one axis") {
    Mesh mesh;
    mesh.dim = 2;
    mesh.cell_arity = 3;
    mesh.vertices = {0.3, 0.0};
    RectGrid grid;
    grid.dim = 2;
    grid.axes = {{0.0, 1.0}, {0.0}};
    GridField gf;
    gf.values = {0.0, 10.0};
    MappingTable map;
    map.assignments = {0};
    BackInterpSpec spec;
    spec.kind = BackInterpKind::multilinear;
    const auto out = back_interpolate(gf, map, grid, mesh, spec);
    CHECK(out[0] == Catch::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("multilinear weights are a partition of unity") {
    auto rng = umc_test::rng_for(8);
    RectGrid grid;
    grid.dim = 3;
    grid.axes.resize(3);
    for (auto& axis : grid.axes) {
        double x = rng.uniform(-1, 0);
        const std::size_t n = 2 + rng.next_below(5);
        for (std::size_t i = 0; i < n; ++i) {
            axis.push_back(x);
            x += rng.uniform(0.1, 1.3);  // non-uniform spacing
        }
    }
    const std::uint64_t n_nodes = grid.node_count();
    Mesh mesh;
    mesh.dim = 3;
    mesh.cell_arity = 4;
    for (int q = 0; q < 1000; ++q)
        for (int d = 0; d < 3; ++d)
            mesh.vertices.push_back(rng.uniform(grid.axes[d].front(), grid.axes[d].back()));
    MappingTable map;
    map.assignments.assign(1000, 0);
    BackInterpSpec spec;
    spec.kind = BackInterpKind::multilinear;

    // Weight per node = response to a one-hot grid field.
    std::vector<std::vector<double>> weights(1000, std::vector<double>(n_nodes, 0.0));
    GridField gf;
    for (std::uint64_t j = 0; j < n_nodes; ++j) {
        gf.values.assign(n_nodes, 0.0);
        gf.values[j] = 1.0;
        const auto resp = back_interpolate(gf, map, grid, mesh, spec);
        for (int q = 0; q < 1000; ++q) weights[q][j] = resp[q];
    }
    for (int q = 0; q < 1000; ++q) {
        double sum = 0.0;
        int nonzero = 0;
        for (double w : weights[q]) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
            sum += w;
            if (w != 0.0) ++nonzero;
        }
        CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(nonzero <= 8);
    }
}

TEST_CASE("residual identity holds bitwise before any lossy step") {
    auto rng = umc_test::rng_for(40);
    for (int trial = 0; trial < 20; ++trial) {
        Mesh mesh;
        mesh.dim = 2;
        mesh.cell_arity = 3;
        const std::size_t n = 10 + rng.next_below(60);
        for (std::size_t i = 0; i < 2 * n; ++i) mesh.vertices.push_back(rng.uniform(0, 3));
        for (std::size_t c = 0; c < n; ++c)
            for (int a = 0; a < 3; ++a) mesh.cells.push_back(rng.next_below(n));
        GridBuildConfig cfg;
        const RectGrid init = grid_init(mesh, cfg);
        const auto built = grid_coarsen(mesh, init, cfg);
        // magnitudes within one binade keep the add/subtract pair exact
        const Field field = make_field(umc_test::random_values(rng, n, 1.0, 2.0));

        for (const auto kind : {BackInterpKind::nearest, BackInterpKind::multilinear}) {
            if (kind == BackInterpKind::multilinear && built.mapping.mode == MappingMode::seed)
                continue;
            BackInterpSpec spec;
            spec.kind = kind;
            const auto gf = interpolate_to_grid(field, built.mapping, built.grid, FillPolicy::zero);
            const auto res = compute_residuals(field, gf, built.mapping, built.grid, mesh, spec);
            const auto approx = back_interpolate(gf, built.mapping, built.grid, mesh, spec);
            for (std::size_t i = 0; i < n; ++i)
                REQUIRE(approx[i] + res.values[i] == field.values[i]);
        }
    }
}

TEST_CASE("constant fields give exactly zero residuals") {
    const Setup s = cluster_setup({-0.1, 0.0, 0.1, 0.9, 1.1}, {0.0, 1.0});
    const Field field = make_field({3.5, 3.5, 3.5, 3.5, 3.5});
    const auto gf = interpolate_to_grid(field, s.map, s.grid);
    const auto res = compute_residuals(field, gf, s.map, s.grid, s.mesh, {});
    for (double r : res.values) CHECK(r == 0.0);
}

TEST_CASE("dense and seed representations produce identical residuals") {
    const Setup s = cluster_setup({0.0, 0.0, 1.0}, {0.0, 1.0});
    const Field field = make_field({1.0, 2.0, 9.0});

    MappingTable seed_map;
    seed_map.mode = MappingMode::seed;
    seed_map.visited_nodes = {0, 1};
    seed_map.assignments = {0, 0, 1};

    const auto dense_gf = interpolate_to_grid(field, s.map, s.grid);
    const auto seed_gf = interpolate_to_grid(field, seed_map, s.grid);
    REQUIRE(seed_gf.values.size() == 2);
    CHECK(seed_gf.seed_mode);

    const auto dense_res = compute_residuals(field, dense_gf, s.map, s.grid, s.mesh, {});
    const auto seed_res = compute_residuals(field, seed_gf, seed_map, s.grid, s.mesh, {});
    CHECK(dense_res.values == seed_res.values);
}

TEST_CASE("multilinear is unsupported in seed mode") {
    MappingTable map;
    map.mode = MappingMode::seed;
    map.visited_nodes = {0};
    map.assignments = {0};
    GridField gf;
    gf.values = {1.0};
    gf.seed_mode = true;
    RectGrid grid;
    grid.dim = 2;
    grid.axes = {{0.0}, {0.0}};
    Mesh mesh;
    mesh.dim = 2;
    mesh.cell_arity = 3;
    mesh.vertices = {0, 0};
    BackInterpSpec spec;
    spec.kind = BackInterpKind::multilinear;
    CHECK_THROWS_AS(back_interpolate(gf, map, grid, mesh, spec), seed_mode_unsupported);
}

TEST_CASE("nearest-visited fill copies along the fastest axis") {
    // 1x4 grid (fastest axis has 4 nodes); only node 1 visited.
    RectGrid grid;
    grid.dim = 2;
    grid.axes = {{0.0}, {0, 1, 2, 3}};
    Mesh mesh;
    mesh.dim = 2;
    mesh.cell_arity = 3;
    mesh.vertices = {0.0, 1.0};
    MappingTable map;
    map.assignments = {1};
    const Field field = make_field({4.25});
    const auto gf = interpolate_to_grid(field, map, grid, FillPolicy::nearest_visited);
    CHECK(gf.values == std::vector<double>{4.25, 4.25, 4.25, 4.25});
    const auto zero_gf = interpolate_to_grid(field, map, grid, FillPolicy::zero);
    CHECK(zero_gf.values == std::vector<double>{0.0, 4.25, 0.0, 0.0});
}
