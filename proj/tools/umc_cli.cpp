// umc: error-controlled compression for fields on unstructured meshes.
//
// Subcommands wire the library into the usual workflow: synthesize a
// mesh/field, build the grid and vertex-node mapping once, compress or
// decompress fields against it, verify bounds, and sweep hyperparameters
// into a CSV report.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "umc/umc.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

umc::Mesh load_mesh_auto(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw umc::io_failure("cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    const bool binary = std::memcmp(magic, "UMCM", 4) == 0;
    return umc::load_mesh(path, binary ? umc::MeshFormat::umc_bin : umc::MeshFormat::csv_ascii);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::uint8_t parse_codec(const std::string& name, const std::string& codec_cmd) {
    std::uint8_t id;
    if (name == "pq") {
        id = umc::kCodecBuiltinPQ;
    } else if (name == "verbatim") {
        id = umc::kCodecVerbatim;
    } else {
        const int v = std::stoi(name);
        if (v < 128 || v > 255) throw CLI::ValidationError("--codec", "external codec ids are 128..255");
        id = static_cast<std::uint8_t>(v);
    }
    if (!codec_cmd.empty()) {
        if (id < umc::kCodecExternalBase)
            throw CLI::ValidationError("--codec-cmd", "built-in codecs take no command");
        umc::register_external_codec(id, umc::SubprocessCodec{split_ws(codec_cmd)});
    }
    return id;
}

umc::BoundKind parse_tau_kind(const std::string& kind) {
    return kind == "abs" ? umc::BoundKind::absolute : umc::BoundKind::relative_to_range;
}

struct SweepArgs {
    std::string mesh_path, field_path, out_csv, out_json;
    std::vector<double> percentiles{50.0};
    std::vector<double> rhos{0.5};
    std::vector<double> taus{1e-3};
    std::string tau_kind = "rel";
    std::string g_kind = "nearest";
    std::uint64_t gmax = 4096;
    double delta = 5.0;
    double seed_threshold = 0.35;
    unsigned jobs = 0;
    bool reuse_map = false;
    bool include_map_time = false;
};

int run_sweep(const SweepArgs& args) {
    const umc::Mesh mesh = load_mesh_auto(args.mesh_path);
    const umc::Field field = umc::load_field(args.field_path);
    umc::validate_field(field, mesh);

    std::string dataset = args.mesh_path;
    if (const auto slash = dataset.find_last_of('/'); slash != std::string::npos)
        dataset = dataset.substr(slash + 1);
    if (const auto dot = dataset.find_last_of('.'); dot != std::string::npos)
        dataset = dataset.substr(0, dot);

    struct Cell {
        double k, rho, tau;
        bool baseline;
    };
    std::vector<Cell> cells;
    for (double tau : args.taus) cells.push_back({0.0, 0.0, tau, true});
    for (double k : args.percentiles)
        for (double rho : args.rhos)
            for (double tau : args.taus) cells.push_back({k, rho, tau, false});

    // Reused mappings are built up front, once per percentile.
    struct Built {
        umc::RectGrid grid;
        umc::MappingTable map;
        double build_seconds = 0.0;
    };
    std::map<double, Built> prebuilt;
    auto build_for = [&](double k) {
        umc::GridBuildConfig cfg;
        cfg.percentile_k = k;
        cfg.g_max = args.gmax;
        cfg.delta = args.delta;
        cfg.seed_mode_threshold = args.seed_threshold;
        const auto t0 = Clock::now();
        Built b;
        b.grid = umc::grid_init(mesh, cfg);
        auto res = umc::grid_coarsen(mesh, b.grid, cfg);
        b.grid = std::move(res.grid);
        b.map = std::move(res.mapping);
        b.build_seconds = seconds_since(t0);
        return b;
    };
    if (args.reuse_map)
        for (double k : args.percentiles)
            if (!prebuilt.count(k)) prebuilt.emplace(k, build_for(k));

    const umc::BoundKind bound_kind = parse_tau_kind(args.tau_kind);
    umc::BackInterpSpec g;
    g.kind = args.g_kind == "multilinear" ? umc::BackInterpKind::multilinear
                                          : umc::BackInterpKind::nearest;

    std::vector<umc::RunRecord> records(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            const Cell& cell = cells[i];
            try {
                umc::RunRecord rec;
                rec.dataset = dataset;
                rec.field = field.name;
                rec.percentile_k = cell.k;
                rec.rho = cell.rho;
                umc::ErrorBudget budget;
                budget.tau = cell.tau;
                budget.bound_kind = bound_kind;
                rec.tau_abs = umc::resolve_tau_abs(budget, field.values);
                rec.tau_rel = bound_kind == umc::BoundKind::relative_to_range ? cell.tau : 0.0;

                umc::Archive ar;
                umc::Field recon;
                if (cell.baseline) {
                    rec.method = "default";
                    const auto t0 = Clock::now();
                    ar = umc::baseline_archive(field, budget);
                    rec.t_encode = seconds_since(t0);
                    const auto t1 = Clock::now();
                    recon = umc::decompress(ar, {}, {}, mesh);
                    rec.t_decode = seconds_since(t1);
                } else {
                    rec.method = "mc";
                    budget.split_rho = cell.rho;
                    const Built* built = nullptr;
                    Built local;
                    if (args.reuse_map) {
                        built = &prebuilt.at(cell.k);
                    } else {
                        local = build_for(cell.k);
                        built = &local;
                    }
                    umc::CompressOptions opt;
                    opt.g = g;
                    const auto t0 = Clock::now();
                    ar = umc::compress(field, built->map, built->grid, mesh, budget, opt);
                    rec.t_encode = seconds_since(t0);
                    if (args.include_map_time) rec.t_encode += built->build_seconds;
                    const auto t1 = Clock::now();
                    recon = umc::decompress(ar, built->map, built->grid, mesh);
                    rec.t_decode = seconds_since(t1);
                }
                rec.codec_id = umc::kCodecBuiltinPQ;
                rec.cr = umc::compression_ratio(ar.original_bytes(), ar.compressed_bytes());
                rec.eps_rel_l2 = umc::rel_l2_error(field.values, recon.values);
                rec.max_abs_err = umc::max_abs_error(field.values, recon.values);
                records[i] = std::move(rec);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };

    unsigned jobs = args.jobs;
    if (jobs == 0) {
        if (const char* env = std::getenv("UMC_JOBS")) jobs = static_cast<unsigned>(std::atoi(env));
        if (jobs == 0) jobs = 1;
    }
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size() ? cells.size() : 1));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw umc::error("sweep cell failed: " + first_error);

    const std::string csv = umc::emit_report(records);
    if (args.out_csv.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        umc::detail::write_file(args.out_csv, csv.data(), csv.size());
        std::printf("wrote %zu records to %s\n", records.size(), args.out_csv.c_str());
    }
    if (!args.out_json.empty()) {
        const std::string json = umc::emit_report_json(records);
        umc::detail::write_file(args.out_json, json.data(), json.size());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"error-controlled compression for fields on unstructured meshes"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags take precedence");
    app.failure_message(CLI::FailureMessage::help);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate a synthetic mesh and field");
    int synth_dim = 2;
    std::uint64_t synth_n = 1000, synth_seed = 0;
    std::string synth_style = "jittered", synth_field = "gaussian-mixture";
    std::string synth_out_mesh, synth_out_field, synth_mesh_format = "bin";
    synth->add_option("--dim", synth_dim)->check(CLI::IsMember({2, 3}));
    synth->add_option("--n", synth_n, "target vertex count")->check(CLI::Range(std::uint64_t(4), std::uint64_t(100000000)));
    synth->add_option("--style", synth_style)->check(CLI::IsMember({"jittered", "graded", "holed"}));
    synth->add_option("--field", synth_field)
        ->check(CLI::IsMember({"gaussian-mixture", "multi-sine", "white-noise"}));
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out-mesh", synth_out_mesh)->required();
    synth->add_option("--out-field", synth_out_field)->required();
    synth->add_option("--mesh-format", synth_mesh_format)->check(CLI::IsMember({"bin", "csv"}));

    // --- build-grid ---
    auto* build = app.add_subcommand("build-grid", "build the rectilinear grid and vertex mapping");
    std::string bg_mesh, bg_out_grid, bg_out_map;
    umc::GridBuildConfig bg_cfg;
    build->add_option("--mesh", bg_mesh)->required();
    build->add_option("--percentile", bg_cfg.percentile_k, "vertex-distance percentile for grid spacing")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 100.0));
    build->add_option("--gmax", bg_cfg.g_max)->check(CLI::Range(std::uint64_t(2), std::uint64_t(1) << 32));
    build->add_option("--delta", bg_cfg.delta)->check(CLI::PositiveNumber);
    build->add_option("--seed-threshold", bg_cfg.seed_mode_threshold)
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    build->add_option("--out-grid", bg_out_grid)->required();
    build->add_option("--out-map", bg_out_map)->required();

    // --- compress ---
    auto* comp = app.add_subcommand("compress", "compress a field against a prebuilt grid/mapping");
    std::string c_field, c_grid, c_map, c_mesh, c_out;
    std::string c_tau_kind = "rel", c_g = "nearest", c_fill = "zero";
    std::string c_codec = "pq", c_codec_cmd;
    double c_tau = 1e-3, c_rho = 0.5;
    bool c_baseline = false;
    comp->add_option("--field", c_field)->required();
    comp->add_option("--mesh", c_mesh)->required();
    comp->add_option("--grid", c_grid);
    comp->add_option("--map", c_map);
    comp->add_option("--tau", c_tau)->check(CLI::NonNegativeNumber);
    comp->add_option("--tau-kind", c_tau_kind)->check(CLI::IsMember({"rel", "abs"}));
    comp->add_option("--rho", c_rho, "fraction of the budget for the grid component");
    comp->add_option("--g", c_g)->check(CLI::IsMember({"nearest", "multilinear"}));
    comp->add_option("--fill", c_fill)->check(CLI::IsMember({"zero", "nearest"}));
    comp->add_option("--codec", c_codec, "pq, verbatim, or an external id (128..255)");
    comp->add_option("--codec-cmd", c_codec_cmd, "command line for the external codec");
    comp->add_flag("--baseline", c_baseline, "1-D serialization baseline instead of multi-component");
    comp->add_option("--out", c_out)->required();

    // --- decompress ---
    auto* dec = app.add_subcommand("decompress", "reconstruct a field from an archive");
    std::string d_archive, d_grid, d_map, d_mesh, d_out, d_codec_cmd;
    int d_codec_id = -1;
    dec->add_option("--archive", d_archive)->required();
    dec->add_option("--mesh", d_mesh)->required();
    dec->add_option("--grid", d_grid);
    dec->add_option("--map", d_map);
    dec->add_option("--codec", d_codec_id, "external codec id to register (with --codec-cmd)");
    dec->add_option("--codec-cmd", d_codec_cmd);
    dec->add_option("--out", d_out)->required();

    // --- verify ---
    auto* ver = app.add_subcommand("verify", "check a reconstruction against the original");
    std::string v_mesh, v_field, v_recon, v_tau_kind = "rel";
    double v_tau = 1e-3;
    ver->add_option("--mesh", v_mesh);
    ver->add_option("--field", v_field)->required();
    ver->add_option("--recon", v_recon)->required();
    ver->add_option("--tau", v_tau)->required()->check(CLI::NonNegativeNumber);
    ver->add_option("--tau-kind", v_tau_kind)->check(CLI::IsMember({"rel", "abs"}));

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "grid of (percentile, rho, tau) cells -> CSV report");
    SweepArgs sw;
    sweep->add_option("--mesh", sw.mesh_path)->required();
    sweep->add_option("--field", sw.field_path)->required();
    sweep->add_option("--percentiles", sw.percentiles)->delimiter(',');
    sweep->add_option("--rhos", sw.rhos)->delimiter(',');
    sweep->add_option("--taus", sw.taus)->delimiter(',');
    sweep->add_option("--tau-kind", sw.tau_kind)->check(CLI::IsMember({"rel", "abs"}));
    sweep->add_option("--g", sw.g_kind)->check(CLI::IsMember({"nearest", "multilinear"}));
    sweep->add_option("--gmax", sw.gmax);
    sweep->add_option("--delta", sw.delta);
    sweep->add_option("--seed-threshold", sw.seed_threshold);
    sweep->add_option("--out", sw.out_csv, "CSV path (stdout when omitted)");
    sweep->add_option("--json", sw.out_json, "also write a JSON report");
    sweep->add_option("--jobs", sw.jobs, "parallel cells (default: UMC_JOBS or 1)");
    sweep->add_flag("--reuse-map", sw.reuse_map, "build each percentile's mapping once");
    sweep->add_flag("--include-map-time", sw.include_map_time,
                    "count mapping construction in encode time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            umc::SynthSpec spec;
            spec.dim = synth_dim;
            spec.n_target = synth_n;
            spec.rng_seed = synth_seed;
            spec.mesh_style = synth_style == "graded"  ? umc::MeshStyle::graded
                              : synth_style == "holed" ? umc::MeshStyle::holed
                                                       : umc::MeshStyle::jittered;
            spec.field_kind = synth_field == "multi-sine"    ? umc::FieldKind::multi_sine
                              : synth_field == "white-noise" ? umc::FieldKind::white_noise
                                                             : umc::FieldKind::gaussian_mixture;
            const umc::Mesh mesh = umc::gen_mesh(spec);
            const umc::Field field = umc::gen_field(mesh, spec);
            umc::save_mesh(mesh, synth_out_mesh,
                           synth_mesh_format == "csv" ? umc::MeshFormat::csv_ascii
                                                      : umc::MeshFormat::umc_bin);
            umc::save_field(field, synth_out_field);
            std::printf("mesh: %zu vertices, %zu cells (dim %d)\nfield: %s\n",
                        mesh.vertex_count(), mesh.cell_count(), mesh.dim, field.name.c_str());
            return 0;
        }

        if (*build) {
            const umc::Mesh mesh = load_mesh_auto(bg_mesh);
            umc::GridBuildDiag diag;
            const umc::RectGrid init = umc::grid_init(mesh, bg_cfg, &diag);
            auto res = umc::grid_coarsen(mesh, init, bg_cfg);
            umc::save_grid(res.grid, bg_out_grid);
            umc::save_mapping(res.mapping, bg_out_map);
            for (int d = 0; d < res.grid.dim; ++d) {
                const auto& ax = diag.axes[static_cast<std::size_t>(d)];
                std::printf("axis %d: spacing %.17g (k=%.4g%s), %zu -> %zu nodes\n", d, ax.spacing,
                            ax.chosen_k, ax.gmax_fallback ? ", gmax fallback" : "",
                            init.axis_size(d), res.grid.axis_size(d));
            }
            std::printf("visited fraction: %.6f, mode: %s\n",
                        res.mapping.visited_fraction.value_or(0.0),
                        res.mapping.mode == umc::MappingMode::seed ? "seed" : "dense");
            return 0;
        }

        if (*comp) {
            const umc::Mesh mesh = load_mesh_auto(c_mesh);
            const umc::Field field = umc::load_field(c_field);
            umc::ErrorBudget budget;
            budget.tau = c_tau;
            budget.split_rho = c_rho;
            budget.bound_kind = parse_tau_kind(c_tau_kind);
            const std::uint8_t codec_id = parse_codec(c_codec, c_codec_cmd);
            umc::Archive ar;
            if (c_baseline) {
                ar = umc::baseline_archive(field, budget, codec_id);
            } else {
                if (c_grid.empty() || c_map.empty())
                    throw CLI::ValidationError("compress", "--grid and --map are required "
                                                           "unless --baseline is given");
                const umc::RectGrid grid = umc::load_grid(c_grid);
                const umc::MappingTable map = umc::load_mapping(c_map);
                umc::CompressOptions opt;
                opt.g.kind = c_g == "multilinear" ? umc::BackInterpKind::multilinear
                                                  : umc::BackInterpKind::nearest;
                opt.fill = c_fill == "nearest" ? umc::FillPolicy::nearest_visited
                                               : umc::FillPolicy::zero;
                opt.codec_id = codec_id;
                ar = umc::compress(field, map, grid, mesh, budget, opt);
            }
            umc::save_archive(ar, c_out);
            std::printf("%s: %llu -> %llu bytes (CR %.3f)\n", c_baseline ? "baseline" : "mc",
                        static_cast<unsigned long long>(ar.original_bytes()),
                        static_cast<unsigned long long>(ar.compressed_bytes()),
                        umc::compression_ratio(ar.original_bytes(), ar.compressed_bytes()));
            return 0;
        }

        if (*dec) {
            if (d_codec_id >= 0 && !d_codec_cmd.empty())
                umc::register_external_codec(static_cast<std::uint8_t>(d_codec_id),
                                             umc::SubprocessCodec{split_ws(d_codec_cmd)});
            const umc::Mesh mesh = load_mesh_auto(d_mesh);
            const umc::Archive ar = umc::load_archive(d_archive);
            umc::Field recon;
            if (ar.baseline) {
                recon = umc::decompress(ar, {}, {}, mesh);
            } else {
                if (d_grid.empty() || d_map.empty())
                    throw CLI::ValidationError("decompress", "--grid and --map are required "
                                                             "for multi-component archives");
                const umc::RectGrid grid = umc::load_grid(d_grid);
                const umc::MappingTable map = umc::load_mapping(d_map);
                recon = umc::decompress(ar, map, grid, mesh);
            }
            umc::save_field(recon, d_out);
            std::printf("reconstructed %zu values -> %s\n", recon.values.size(), d_out.c_str());
            return 0;
        }

        if (*ver) {
            const umc::Field field = umc::load_field(v_field);
            const umc::Field recon = umc::load_field(v_recon);
            if (!v_mesh.empty()) {
                const umc::Mesh mesh = load_mesh_auto(v_mesh);
                umc::validate_field(field, mesh);
            }
            if (field.values.size() != recon.values.size())
                throw umc::error("field and reconstruction lengths differ");
            umc::ErrorBudget budget;
            budget.tau = v_tau;
            budget.bound_kind = parse_tau_kind(v_tau_kind);
            const double tau_abs = umc::resolve_tau_abs(budget, field.values);
            std::size_t worst = 0;
            const double max_err = umc::max_abs_error(field.values, recon.values, &worst);
            const double eps = umc::rel_l2_error(field.values, recon.values);
            std::printf("max_abs_err %.17g\nrel_l2 %.17g\ntau_abs %.17g\n", max_err, eps, tau_abs);
            if (max_err > tau_abs) {
                std::printf("FAIL: vertex %zu exceeds the bound\n", worst);
                return 1;
            }
            std::printf("OK\n");
            return 0;
        }

        if (*sweep) return run_sweep(sw);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
