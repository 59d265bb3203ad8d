#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "msfwi/grid.hpp"

namespace msfwi {

/// Subsurface model: squared slowness on the interior grid plus box bounds.
///
/// The absorbing layers never carry unknowns; extend_to_padded() replicates
/// the interior edges into them before operator assembly.
struct Model {
    Grid grid;
    Eigen::VectorXd m;      // squared slowness [s^2/m^2], length nz*nx
    Eigen::VectorXd m_min;  // lower bounds, same length
    Eigen::VectorXd m_max;  // upper bounds, same length

    Model() = default;
    Model(Grid g, Eigen::VectorXd values, Eigen::VectorXd lo, Eigen::VectorXd hi);

    /// Constant-bounds convenience: v in [v_min_mps, v_max_mps].
    static Model with_velocity_bounds(Grid g, Eigen::VectorXd values,
                                      double v_min_mps, double v_max_mps);

    /// Clamps m into [m_min, m_max] elementwise.
    void project_to_bounds();

    /// Interior model replicated into the absorbing layers (length n_pad).
    Eigen::VectorXd extend_to_padded() const;

    double min_velocity() const;
    double max_velocity() const;

    void validate() const;
};

/// Receiver layout and the inverted frequency band.
struct Acquisition {
    std::vector<std::pair<int, int>> receivers;  // interior (iz, ix)
    std::vector<double> omegas;                  // angular frequencies [rad/s], increasing
    double record_duration = 0.0;                // [s], time-domain synthesis only

    Acquisition() = default;
    Acquisition(std::vector<std::pair<int, int>> recv, std::vector<double> freqs_rad,
                const Grid& grid, double record_duration_s = 0.0);

    int n_receivers() const { return static_cast<int>(receivers.size()); }
    int n_frequencies() const { return static_cast<int>(omegas.size()); }

    /// Receiver flat indices on the padded grid.
    std::vector<int> receiver_padded_indices(const Grid& grid) const;
};

/// Grid points per minimum wavelength; the dispersion rule asks for >= 10.
double points_per_wavelength(const Model& model, double omega_max);

}  // namespace msfwi
