#include "msfwi/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "msfwi/errors.hpp"
#include "msfwi/helmholtz.hpp"
#include "msfwi/parallel.hpp"
#include "msfwi/ricker.hpp"
#include "msfwi/rng.hpp"

namespace msfwi {

std::pair<int, int> locate_cell(const Grid& grid, double z_m, double x_m) {
    const int iz = static_cast<int>(std::lround(z_m / grid.h));
    const int ix = static_cast<int>(std::lround(x_m / grid.h));
    if (!grid.is_interior(iz, ix))
        throw ConfigError("event/receiver position (" + std::to_string(z_m) + " m, " +
                          std::to_string(x_m) + " m) falls outside the interior grid");
    return {iz, ix};
}

SpectraData synthesize_data(const Model& true_model, const std::vector<EventSpec>& events,
                            const Acquisition& acq, std::uint64_t seed,
                            std::optional<double> snr_db, int threads) {
    const Grid& grid = true_model.grid;
    const int q = acq.n_frequencies();
    const int nr = acq.n_receivers();
    SamplingOperator sampling(grid, acq);

    std::vector<int> cells;
    std::set<int> distinct;
    for (const auto& ev : events) {
        const auto [iz, ix] = locate_cell(grid, ev.z_m, ev.x_m);
        const int cell = grid.interior_to_padded(iz, ix);
        if (!distinct.insert(cell).second)
            throw ConfigError("two events map to the same grid cell");
        cells.push_back(cell);
    }

    SpectraData data;
    data.omegas = acq.omegas;
    data.receivers = acq.receivers;
    data.records.resize(q);
    data.seed = seed;
    data.snr_db = snr_db;
    for (const auto& ev : events)
        data.true_events.push_back({ev.z_m, ev.x_m, ev.f_central_hz, ev.t_central_s});

    parallel_for(q, threads, [&](int iw) {
        const double omega = acq.omegas[iw];
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(grid.n_pad());
        for (size_t e = 0; e < events.size(); ++e)
            rhs[cells[e]] +=
                ricker_spectrum(events[e].f_central_hz, events[e].t_central_s, omega);
        if (rhs.norm() == 0.0) {
            data.records[iw] = Eigen::VectorXcd::Zero(nr);
            return;
        }
        HelmholtzOperator op(true_model, omega);
        data.records[iw] = sampling.apply(solve_helmholtz_direct(op, rhs));
    });

    if (snr_db) {
        // Single seeded stream, consumed in frequency order after the solves
        // so the noise is independent of the thread count.  The realized
        // noise is rescaled to hit the requested power ratio exactly.
        Rng rng(seed);
        double signal_power = 0.0;
        for (const auto& rec : data.records) signal_power += rec.squaredNorm();
        std::vector<Eigen::VectorXcd> noise(q);
        double noise_power = 0.0;
        for (int iw = 0; iw < q; ++iw) {
            noise[iw].resize(nr);
            for (int r = 0; r < nr; ++r) noise[iw][r] = rng.complex_normal();
            noise_power += noise[iw].squaredNorm();
        }
        if (signal_power > 0.0 && noise_power > 0.0) {
            const double target = signal_power * std::pow(10.0, -*snr_db / 10.0);
            const double scale = std::sqrt(target / noise_power);
            for (int iw = 0; iw < q; ++iw) data.records[iw] += scale * noise[iw];
        }
    }
    return data;
}

Model gaussian_smooth_model(const Model& model, double sigma_cells) {
    if (!(sigma_cells >= 0.0))
        throw std::invalid_argument("gaussian_smooth_model: sigma must be nonnegative");
    Model out = model;
    if (sigma_cells == 0.0) return out;

    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
    Eigen::VectorXd kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k)
        kernel[k + radius] = std::exp(-0.5 * (k / sigma_cells) * (k / sigma_cells));
    kernel /= kernel.sum();

    const int nz = model.grid.nz, nx = model.grid.nx;
    // Smooth in velocity, separably, with replicate edges.
    Eigen::MatrixXd v(nz, nx);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j)
            v(i, j) = slowness_squared_to_velocity(model.m[i * nx + j]);

    Eigen::MatrixXd tmp(nz, nx);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * v(i, std::clamp(j + k, 0, nx - 1));
            tmp(i, j) = acc;
        }
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp(std::clamp(i + k, 0, nz - 1), j);
            out.m[i * nx + j] = velocity_to_slowness_squared(acc);
        }
    out.project_to_bounds();
    return out;
}

Model build_gradient_model(const Grid& grid, const ModelBuildSpec& spec,
                           double v_min_mps, double v_max_mps) {
    Eigen::VectorXd m(grid.n_interior());
    for (int i = 0; i < grid.nz; ++i) {
        const double frac = grid.nz > 1 ? static_cast<double>(i) / (grid.nz - 1) : 0.0;
        double v_row = spec.v_top_mps + frac * (spec.v_bottom_mps - spec.v_top_mps);
        for (const auto& layer : spec.layers)
            if (i * grid.h >= layer.z_top_m && i * grid.h < layer.z_bottom_m) v_row = layer.v_mps;
        for (int j = 0; j < grid.nx; ++j) {
            double v = v_row;
            for (const auto& lens : spec.lenses) {
                const double dz = i * grid.h - lens.z_m;
                const double dx = j * grid.h - lens.x_m;
                if (dz * dz + dx * dx <= lens.radius_m * lens.radius_m) v += lens.dv_mps;
            }
            m[i * grid.nx + j] = velocity_to_slowness_squared(v);
        }
    }
    Model model = Model::with_velocity_bounds(grid, m, v_min_mps, v_max_mps);
    model.project_to_bounds();
    return model;
}

}  // namespace msfwi
