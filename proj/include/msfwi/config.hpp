#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msfwi/model.hpp"
#include "msfwi/synthesis.hpp"

namespace msfwi {

/// Full run configuration, parsed from the flat `key = value` sections
/// documented in the README.  Unknown sections or keys are rejected.
struct RunConfig {
    struct Paths {
        std::string model_true;  // written by `forward` when [model] is present
        std::string model0;
        std::string data;
        std::string output = "out";
    } paths;

    struct GridSection {
        int nz = 0, nx = 0;
        double h_m = 0.0;
        int pml_width = 20;
    } grid;

    struct ModelSection {
        bool present = false;
        ModelBuildSpec build;
        double smooth_sigma_cells = 0.0;  // model0 = blur of the true model
    } model;

    struct AcquisitionSection {
        double receiver_depth_m = 0.0;
        double receiver_x_start_m = 0.0;
        double receiver_x_end_m = -1.0;
        double receiver_x_step_m = 0.0;
        std::vector<std::pair<double, double>> explicit_receivers;  // (z, x) meters
        double freq_min_hz = 0.0;
        double freq_max_hz = 0.0;
        double freq_step_hz = 0.0;
        double record_duration_s = 1.0;
        double dt_s = 0.004;
    } acquisition;

    struct SynthesisSection {
        std::vector<EventSpec> events;
        std::optional<double> snr_db;
        std::uint64_t seed = 1;
    } synthesis;

    struct InversionSection {
        double lambda = 0.0;  // <= 0 selects the 1/mean(omega^4) default
        double gamma_over_lambda = 1e4;
        int n_inner = 10;
        int n_outer = 1;
        bool update_model = false;
        double peak_threshold = 0.3;
        double peak_min_distance_m = -1.0;  // < 0 selects 3 h
        double tv_weight = 1.0;
        double tol_source_change = 1e-3;
        double tol_data_residual = 1e-2;
        double v_min_mps = 1000.0;
        double v_max_mps = 6000.0;
    } inversion;

    /// Angular frequencies of the configured band.
    std::vector<double> band_omegas() const;

    /// Receivers resolved to interior cells of the configured grid.
    std::vector<std::pair<int, int>> resolve_receivers(const Grid& g) const;

    Grid make_grid() const;
    Acquisition make_acquisition(const Grid& g) const;
};

/// Parses and validates a config file.  Relative paths are resolved against
/// the directory containing the file.
RunConfig parse_run_config(const std::string& path);

}  // namespace msfwi
