#include "msfwi/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "msfwi/config.hpp"
#include "msfwi/data_io.hpp"
#include "msfwi/errors.hpp"
#include "msfwi/grid_io.hpp"
#include "msfwi/inversion.hpp"
#include "msfwi/ricker.hpp"
#include "msfwi/synthesis.hpp"

namespace msfwi {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNotConverged = 4;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Collects written files and flushes the completeness listing, also on
/// partially failed runs.
class Manifest {
public:
    explicit Manifest(fs::path dir) : dir_(std::move(dir)) {}
    void add(const std::string& name) { entries_.emplace_back(name, "complete"); }
    void flush(const std::string& status) {
        std::ofstream out(dir_ / "MANIFEST.txt", std::ios::trunc);
        out << "run_status " << status << "\n";
        for (const auto& [name, state] : entries_) out << name << " " << state << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct CommonArgs {
    std::string config_path;
    std::string output_override;
    std::optional<std::uint64_t> seed_override;
    bool snapshots = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_snapshots = false) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--output", args.output_override, "output directory (overrides [paths])");
    cmd->add_option("--seed", args.seed_override, "rng seed (overrides [synthesis])");
    cmd->add_option("--threads", args.threads, "worker threads for per-frequency solves");
    if (with_snapshots)
        cmd->add_flag("--snapshots", args.snapshots, "write per-iteration mean-source grids");
}

Model load_or_build_true_model(const RunConfig& cfg, Manifest* manifest) {
    const Grid grid = cfg.make_grid();
    if (cfg.model.present) {
        Model truth = build_gradient_model(grid, cfg.model.build, cfg.inversion.v_min_mps,
                                           cfg.inversion.v_max_mps);
        if (!cfg.paths.model_true.empty()) {
            write_model(truth, cfg.paths.model_true);
            if (manifest) manifest->add(cfg.paths.model_true);
        }
        if (!cfg.paths.model0.empty()) {
            Model initial = cfg.model.smooth_sigma_cells > 0.0
                                ? gaussian_smooth_model(truth, cfg.model.smooth_sigma_cells)
                                : truth;
            write_model(initial, cfg.paths.model0);
            if (manifest) manifest->add(cfg.paths.model0);
        }
        return truth;
    }
    if (cfg.paths.model_true.empty())
        throw ConfigError("forward needs either a [model] section or paths.model_true");
    return read_model(cfg.paths.model_true, cfg.grid.pml_width, cfg.inversion.v_min_mps,
                      cfg.inversion.v_max_mps);
}

int run_forward(const CommonArgs& args) {
    RunConfig cfg = parse_run_config(args.config_path);
    if (cfg.paths.data.empty()) throw ConfigError("forward needs paths.data");
    const fs::path out_dir = fs::path(cfg.paths.data).parent_path();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    Manifest manifest(out_dir.empty() ? fs::path(".") : out_dir);

    Model truth = load_or_build_true_model(cfg, &manifest);
    Acquisition acq = cfg.make_acquisition(truth.grid);
    const std::uint64_t seed = args.seed_override.value_or(cfg.synthesis.seed);

    const double ppw = points_per_wavelength(truth, acq.omegas.back());
    if (ppw < 10.0)
        std::fprintf(stderr, "warning: %.1f grid points per minimum wavelength (>= 10 wanted)\n",
                     ppw);

    SpectraData data = synthesize_data(truth, cfg.synthesis.events, acq, seed,
                                       cfg.synthesis.snr_db, args.threads);
    write_spectra(data, cfg.paths.data);
    manifest.add(cfg.paths.data);
    manifest.flush("complete");
    std::printf("forward: wrote %d frequencies x %d receivers to %s\n", data.n_frequencies(),
                data.n_receivers(), cfg.paths.data.c_str());
    return kExitOk;
}

void write_events_csv(const fs::path& path, const EventSet& events, const Grid& grid) {
    std::ofstream out(path, std::ios::trunc);
    out << "event_id,depth_m,x_m,confidence_amplitude\n";
    for (int e = 0; e < events.count(); ++e) {
        const auto [iz, ix] = grid.interior_unflat(events.locations[e]);
        out << e << "," << fmt(iz * grid.h) << "," << fmt(ix * grid.h) << ","
            << fmt(events.confidence[e]) << "\n";
    }
}

void write_signatures_csv(const fs::path& path, const EventSet& events,
                          const std::vector<double>& omegas) {
    std::ofstream out(path, std::ios::trunc);
    out << "frequency_hz";
    for (int e = 0; e < events.count(); ++e)
        out << ",event" << e << "_re,event" << e << "_im";
    out << "\n";
    for (size_t k = 0; k < omegas.size(); ++k) {
        out << fmt(omegas[k] / (2.0 * M_PI));
        for (int e = 0; e < events.count(); ++e)
            out << "," << fmt(events.signatures(k, e).real()) << ","
                << fmt(events.signatures(k, e).imag());
        out << "\n";
    }
}

void write_history_csv(const fs::path& path, const std::vector<IterationRecord>& history,
                       const Grid& grid) {
    std::ofstream out(path, std::ios::trunc);
    out << "outer_iteration,data_residual_rel,waveeq_residual_rel,source_change_rel,"
           "n_picks,picks_iz:ix\n";
    for (const auto& rec : history) {
        out << rec.outer << "," << fmt(rec.data_residual_rel) << ","
            << fmt(rec.waveeq_residual_rel) << "," << fmt(rec.source_change_rel) << ","
            << rec.n_picks << ",";
        for (size_t e = 0; e < rec.picks.size(); ++e) {
            const auto [iz, ix] = grid.interior_unflat(rec.picks[e]);
            out << (e ? ";" : "") << iz << ":" << ix;
        }
        out << "\n";
    }
}

Eigen::VectorXcd interior_window(const Eigen::VectorXcd& padded, const Grid& grid) {
    Eigen::VectorXcd out(grid.n_interior());
    for (int iz = 0; iz < grid.nz; ++iz)
        for (int ix = 0; ix < grid.nx; ++ix)
            out[grid.interior_flat(iz, ix)] = padded[grid.interior_to_padded(iz, ix)];
    return out;
}

int run_invert(const CommonArgs& args, bool force_locate) {
    RunConfig cfg = parse_run_config(args.config_path);
    if (cfg.paths.model0.empty() || cfg.paths.data.empty())
        throw ConfigError("invert needs paths.model0 and paths.data");

    // Load all inputs before creating any output.
    Model model0 = read_model(cfg.paths.model0, cfg.grid.pml_width, cfg.inversion.v_min_mps,
                              cfg.inversion.v_max_mps);
    if (model0.grid.nz != cfg.grid.nz || model0.grid.nx != cfg.grid.nx ||
        model0.grid.h != cfg.grid.h_m)
        throw ConfigError("model0 grid does not match the [grid] section");
    SpectraData data = read_spectra(cfg.paths.data);
    Acquisition acq = cfg.make_acquisition(model0.grid);
    if (data.omegas != acq.omegas)
        throw ConfigError("data frequencies do not match the configured band");
    if (data.receivers != acq.receivers)
        throw ConfigError("data receivers do not match the configured acquisition");

    InversionConfig inv;
    inv.lambda = cfg.inversion.lambda;
    inv.gamma_over_lambda = cfg.inversion.gamma_over_lambda;
    inv.n_inner = cfg.inversion.n_inner;
    inv.n_outer = cfg.inversion.n_outer;
    inv.update_model = force_locate ? false : cfg.inversion.update_model;
    inv.peak_threshold = cfg.inversion.peak_threshold;
    inv.peak_min_distance = cfg.inversion.peak_min_distance_m;
    inv.tv_weight = cfg.inversion.tv_weight;
    inv.tol_source_change = cfg.inversion.tol_source_change;
    inv.tol_data_residual = cfg.inversion.tol_data_residual;
    inv.threads = args.threads;

    const fs::path out_dir = args.output_override.empty() ? fs::path(cfg.paths.output)
                                                          : fs::path(args.output_override);
    fs::create_directories(out_dir);
    Manifest manifest(out_dir);
    const Grid& grid = model0.grid;

    InversionWorkspace::SnapshotHook hook;
    if (args.snapshots) {
        hook = [&](int outer, const Eigen::VectorXcd& mean_source, const Model&) {
            char name[64];
            std::snprintf(name, sizeof(name), "mean_source_k%03d.grd", outer);
            write_grid_file((out_dir / name).string(), grid.nz, grid.nx, grid.h,
                            Eigen::VectorXcd(interior_window(mean_source, grid)));
            manifest.add(name);
        };
    }

    InversionResult result;
    try {
        result = run_inversion(model0, acq, data.records, inv, hook);
    } catch (...) {
        manifest.flush("failed");
        throw;
    }

    write_events_csv(out_dir / "events.csv", result.events, grid);
    manifest.add("events.csv");
    write_signatures_csv(out_dir / "signatures.csv", result.events, acq.omegas);
    manifest.add("signatures.csv");
    write_model(result.model, (out_dir / "model_final.grd").string());
    manifest.add("model_final.grd");
    write_history_csv(out_dir / "history.csv", result.history, grid);
    manifest.add("history.csv");
    write_grid_file((out_dir / "mean_source_final.grd").string(), grid.nz, grid.nx, grid.h,
                    Eigen::VectorXcd(interior_window(result.mean_source, grid)));
    manifest.add("mean_source_final.grd");
    manifest.flush(result.converged ? "complete" : "complete-not-converged");

    std::printf("%s: %d event(s), %s after %zu outer iteration(s); results in %s\n",
                force_locate ? "locate" : "invert", result.events.count(),
                result.converged ? "converged" : "not converged", result.history.size(),
                out_dir.string().c_str());
    return result.converged ? kExitOk : kExitNotConverged;
}

struct ParsedEventRow {
    double z_m, x_m, confidence;
};

std::vector<ParsedEventRow> read_events_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<ParsedEventRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ParsedEventRow row{};
        int id = 0;
        if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg", &id, &row.z_m, &row.x_m,
                        &row.confidence) == 4)
            rows.push_back(row);
    }
    return rows;
}

int run_report(const CommonArgs& args) {
    RunConfig cfg = parse_run_config(args.config_path);
    const fs::path out_dir = args.output_override.empty() ? fs::path(cfg.paths.output)
                                                          : fs::path(args.output_override);
    const auto picked = read_events_csv(out_dir / "events.csv");

    // Ground truth, when available: prefer the data sidecar, fall back to
    // the [synthesis] section.
    std::vector<TrueEvent> truth;
    if (!cfg.paths.data.empty() && fs::exists(cfg.paths.data)) {
        truth = read_spectra(cfg.paths.data).true_events;
    }
    if (truth.empty())
        for (const auto& ev : cfg.synthesis.events)
            truth.push_back({ev.z_m, ev.x_m, ev.f_central_hz, ev.t_central_s});

    std::printf("picked events: %zu\n", picked.size());
    std::printf("%-8s %-10s %-10s %-14s", "event", "depth_m", "x_m", "confidence");
    if (!truth.empty()) std::printf(" %-18s %-12s", "nearest_truth", "error_m");
    std::printf("\n");
    for (size_t e = 0; e < picked.size(); ++e) {
        std::printf("%-8zu %-10.1f %-10.1f %-14.4g", e, picked[e].z_m, picked[e].x_m,
                    picked[e].confidence);
        if (!truth.empty()) {
            double best = std::numeric_limits<double>::infinity();
            size_t best_t = 0;
            for (size_t t = 0; t < truth.size(); ++t) {
                const double d = std::hypot(picked[e].z_m - truth[t].z_m,
                                            picked[e].x_m - truth[t].x_m);
                if (d < best) {
                    best = d;
                    best_t = t;
                }
            }
            std::printf(" (%.1f, %.1f)      %-12.2f", truth[best_t].z_m, truth[best_t].x_m, best);
        }
        std::printf("\n");
    }
    for (size_t t = 0; t < truth.size(); ++t) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : picked)
            best = std::min(best, std::hypot(p.z_m - truth[t].z_m, p.x_m - truth[t].x_m));
        std::printf("truth %zu at (%.1f, %.1f) m: nearest pick %.2f m away\n", t, truth[t].z_m,
                    truth[t].x_m, best);
    }

    // Residual curves, re-emitted as a standalone CSV for plotting.
    std::ifstream hist(out_dir / "history.csv");
    if (hist) {
        std::ofstream res(out_dir / "residuals.csv", std::ios::trunc);
        std::string line;
        std::getline(hist, line);
        res << "outer_iteration,data_residual_rel,waveeq_residual_rel,source_change_rel\n";
        std::printf("\n%-6s %-18s %-18s %-18s\n", "iter", "data_residual", "waveeq_residual",
                    "source_change");
        while (std::getline(hist, line)) {
            int outer = 0, npicks = 0;
            double dres = 0, wres = 0, sres = 0;
            if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%d", &outer, &dres, &wres, &sres,
                            &npicks) >= 4) {
                res << outer << "," << fmt(dres) << "," << fmt(wres) << "," << fmt(sres) << "\n";
                std::printf("%-6d %-18.6g %-18.6g %-18.6g\n", outer, dres, wres, sres);
            }
        }
        std::printf("residual curves written to %s\n", (out_dir / "residuals.csv").c_str());
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"msfwi: frequency-domain microseismic event location and FWI"};
    app.require_subcommand(1);

    CommonArgs fwd_args, inv_args, loc_args, rep_args;
    CLI::App* fwd = app.add_subcommand("forward", "synthesize data from a true model + events");
    add_common(fwd, fwd_args);
    CLI::App* inv = app.add_subcommand("invert", "locate events (and optionally update the model)");
    add_common(inv, inv_args, true);
    CLI::App* loc = app.add_subcommand("locate", "invert with the model update forced off");
    add_common(loc, loc_args, true);
    CLI::App* rep = app.add_subcommand("report", "summarize results against ground truth");
    add_common(rep, rep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (fwd->parsed()) return run_forward(fwd_args);
        if (inv->parsed()) return run_invert(inv_args, false);
        if (loc->parsed()) return run_invert(loc_args, true);
        if (rep->parsed()) return run_report(rep_args);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitConfig;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    }
}

}  // namespace msfwi
