#pragma once

#include <optional>
#include <vector>

#include "msfwi/data_io.hpp"
#include "msfwi/model.hpp"

namespace msfwi {

/// Event specification in physical coordinates.
struct EventSpec {
    double z_m = 0.0;
    double x_m = 0.0;
    double f_central_hz = 25.0;
    double t_central_s = 0.0;
};

/// Nearest interior cell of a physical (z, x) position; rejects positions
/// outside the interior (sources in the absorbing layers are nonphysical).
std::pair<int, int> locate_cell(const Grid& grid, double z_m, double x_m);

/// d(omega) = P A(m_true, omega)^-1 Phi s(omega) with Ricker signatures,
/// plus optional complex circular Gaussian noise scaled so the dataset-wide
/// power ratio matches snr_db exactly.  Deterministic for a fixed seed and
/// independent of the thread count.
SpectraData synthesize_data(const Model& true_model, const std::vector<EventSpec>& events,
                            const Acquisition& acq, std::uint64_t seed,
                            std::optional<double> snr_db, int threads = 1);

/// Gaussian blur of the velocity field (sigma in cells, truncated at 3
/// sigma, replicate edges); the result is clamped back into the bounds.
Model gaussian_smooth_model(const Model& model, double sigma_cells);

/// Depth-linear velocity gradient with optional constant-velocity layers
/// (applied over depth ranges, overriding the gradient) and circular
/// anomalies (added last).
struct ModelBuildSpec {
    double v_top_mps = 2250.0;
    double v_bottom_mps = 3000.0;
    struct Layer {
        double z_top_m, z_bottom_m, v_mps;
    };
    struct Lens {
        double z_m, x_m, radius_m, dv_mps;
    };
    std::vector<Layer> layers;
    std::vector<Lens> lenses;
};

Model build_gradient_model(const Grid& grid, const ModelBuildSpec& spec,
                           double v_min_mps, double v_max_mps);

}  // namespace msfwi
