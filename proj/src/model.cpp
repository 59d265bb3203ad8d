#include "msfwi/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace msfwi {

Model::Model(Grid g, Eigen::VectorXd values, Eigen::VectorXd lo, Eigen::VectorXd hi)
    : grid(g), m(std::move(values)), m_min(std::move(lo)), m_max(std::move(hi)) {
    validate();
}

Model Model::with_velocity_bounds(Grid g, Eigen::VectorXd values,
                                  double v_min_mps, double v_max_mps) {
    if (!(0.0 < v_min_mps && v_min_mps < v_max_mps))
        throw std::invalid_argument("Model: need 0 < v_min < v_max");
    const int n = g.n_interior();
    // m = 1/v^2 flips the ordering of the bounds.
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, velocity_to_slowness_squared(v_max_mps));
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, velocity_to_slowness_squared(v_min_mps));
    return Model(g, std::move(values), std::move(lo), std::move(hi));
}

void Model::validate() const {
    const int n = grid.n_interior();
    if (m.size() != n || m_min.size() != n || m_max.size() != n)
        throw std::invalid_argument("Model: array lengths must equal nz*nx");
    for (int k = 0; k < n; ++k) {
        if (!std::isfinite(m[k]) || !std::isfinite(m_min[k]) || !std::isfinite(m_max[k]))
            throw std::invalid_argument("Model: non-finite entry");
        if (!(m[k] > 0.0) || !(m_min[k] > 0.0))
            throw std::invalid_argument("Model: squared slowness must be strictly positive");
        if (m_min[k] > m_max[k])
            throw std::invalid_argument("Model: m_min > m_max");
    }
}

void Model::project_to_bounds() {
    m = m.cwiseMax(m_min).cwiseMin(m_max);
}

Eigen::VectorXd Model::extend_to_padded() const {
    const int nzp = grid.nz_pad(), nxp = grid.nx_pad(), w = grid.pml_width;
    Eigen::VectorXd out(grid.n_pad());
    for (int i = 0; i < nzp; ++i) {
        const int iz = std::min(i, grid.nz - 1);  // replicate bottom edge
        for (int j = 0; j < nxp; ++j) {
            const int ix = std::clamp(j - w, 0, grid.nx - 1);  // replicate sides
            out[i * nxp + j] = m[iz * grid.nx + ix];
        }
    }
    return out;
}

double Model::min_velocity() const { return slowness_squared_to_velocity(m.maxCoeff()); }
double Model::max_velocity() const { return slowness_squared_to_velocity(m.minCoeff()); }

Acquisition::Acquisition(std::vector<std::pair<int, int>> recv, std::vector<double> freqs_rad,
                         const Grid& grid, double record_duration_s)
    : receivers(std::move(recv)), omegas(std::move(freqs_rad)),
      record_duration(record_duration_s) {
    if (receivers.empty())
        throw std::invalid_argument("Acquisition: at least one receiver required");
    if (omegas.empty())
        throw std::invalid_argument("Acquisition: at least one frequency required");
    std::set<std::pair<int, int>> seen;
    for (const auto& [iz, ix] : receivers) {
        if (!grid.is_interior(iz, ix))
            throw std::invalid_argument("Acquisition: receiver outside interior grid");
        if (!seen.insert({iz, ix}).second)
            throw std::invalid_argument("Acquisition: duplicate receiver");
    }
    double prev = 0.0;
    for (double w : omegas) {
        if (!(w > 0.0))
            throw std::invalid_argument("Acquisition: frequencies must be positive");
        if (!(w > prev))
            throw std::invalid_argument("Acquisition: frequencies must be strictly increasing");
        prev = w;
    }
}

std::vector<int> Acquisition::receiver_padded_indices(const Grid& grid) const {
    std::vector<int> out;
    out.reserve(receivers.size());
    for (const auto& [iz, ix] : receivers) out.push_back(grid.interior_to_padded(iz, ix));
    return out;
}

double points_per_wavelength(const Model& model, double omega_max) {
    const double f_max = omega_max / (2.0 * M_PI);
    const double lambda_min = model.min_velocity() / f_max;
    return lambda_min / model.grid.h;
}

}  // namespace msfwi
