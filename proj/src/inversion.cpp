#include "msfwi/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "msfwi/berhu.hpp"
#include "msfwi/errors.hpp"
#include "msfwi/helmholtz.hpp"
#include "msfwi/parallel.hpp"

namespace msfwi {

void InversionConfig::validate() const {
    if (!(gamma_over_lambda > 0.0))
        throw std::invalid_argument("InversionConfig: gamma_over_lambda must be positive");
    if (n_inner < 1 || n_outer < 1)
        throw std::invalid_argument("InversionConfig: n_inner and n_outer must be >= 1");
    if (!(peak_threshold > 0.0 && peak_threshold < 1.0))
        throw std::invalid_argument("InversionConfig: peak_threshold must lie in (0, 1)");
    if (!(berhu_eps_scale > 0.0) || !(tol_source_change > 0.0) || !(tol_data_residual > 0.0))
        throw std::invalid_argument("InversionConfig: scales and tolerances must be positive");
    if (tv_weight < 0.0)
        throw std::invalid_argument("InversionConfig: tv_weight must be nonnegative");
    if (threads < 1) throw std::invalid_argument("InversionConfig: threads must be >= 1");
}

double InversionConfig::resolve_lambda(const std::vector<double>& omegas) const {
    if (lambda > 0.0) return lambda;
    double mean_w4 = 0.0;
    for (double w : omegas) mean_w4 += w * w * w * w;
    mean_w4 /= static_cast<double>(omegas.size());
    return 1.0 / mean_w4;
}

double InversionConfig::resolve_min_distance(double h) const {
    return peak_min_distance >= 0.0 ? peak_min_distance : 3.0 * h;
}

EventSet pick_events(const Eigen::VectorXcd& mean_source_padded, const Grid& grid,
                     double threshold_frac, double min_distance_m) {
    if (mean_source_padded.size() != grid.n_pad())
        throw std::invalid_argument("pick_events: dimension mismatch");
    if (!mean_source_padded.allFinite())
        throw std::invalid_argument("pick_events: non-finite mean source");

    Eigen::VectorXd amp(grid.n_interior());
    double max_amp = 0.0;
    for (int iz = 0; iz < grid.nz; ++iz)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double a = std::abs(mean_source_padded[grid.interior_to_padded(iz, ix)]);
            amp[grid.interior_flat(iz, ix)] = a;
            max_amp = std::max(max_amp, a);
        }

    EventSet out;
    out.signatures.resize(0, 0);
    if (max_amp <= 0.0) {
        out.confidence.resize(0);
        return out;
    }

    // Local maxima over 8-neighborhoods, at or above the amplitude floor.
    std::vector<int> candidates;
    const double floor = threshold_frac * max_amp;
    for (int i = 0; i < grid.nz; ++i)
        for (int j = 0; j < grid.nx; ++j) {
            const double v = amp[i * grid.nx + j];
            if (v < floor || v <= 0.0) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1 && is_max; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || ii >= grid.nz || jj < 0 || jj >= grid.nx) continue;
                    if (amp[ii * grid.nx + jj] > v) is_max = false;
                }
            if (is_max) candidates.push_back(i * grid.nx + j);
        }

    // Greedy by descending amplitude; scan order breaks ties.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return amp[a] > amp[b]; });
    std::vector<int> kept;
    for (int cand : candidates) {
        const auto [iz, ix] = grid.interior_unflat(cand);
        bool ok = true;
        for (int prev : kept) {
            const auto [pz, px] = grid.interior_unflat(prev);
            const double dist = grid.h * std::hypot(double(iz - pz), double(ix - px));
            if (dist < min_distance_m) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(cand);
    }
    out.locations = std::move(kept);
    out.confidence.resize(out.count());
    for (int e = 0; e < out.count(); ++e) out.confidence[e] = amp[out.locations[e]];
    return out;
}

InversionWorkspace::InversionWorkspace(Model model0, Acquisition acquisition,
                                       std::vector<Eigen::VectorXcd> data,
                                       InversionConfig config)
    : model_(std::move(model0)), acq_(std::move(acquisition)), data_(std::move(data)),
      cfg_(config),
      sampling_(model_.grid, acq_),
      cache_(cfg_.resolve_lambda(acq_.omegas),
             cfg_.gamma_over_lambda * cfg_.resolve_lambda(acq_.omegas),
             SolveOptions{cfg_.solve_method, 1e-8, 10}) {
    cfg_.validate();
    model_.validate();
    const int q = acq_.n_frequencies();
    if (static_cast<int>(data_.size()) != q)
        throw std::invalid_argument("InversionWorkspace: one data record per frequency required");
    double power = 0.0;
    long count = 0;
    for (const auto& rec : data_) {
        if (rec.size() != acq_.n_receivers())
            throw std::invalid_argument("InversionWorkspace: record length != receiver count");
        if (!rec.allFinite())
            throw std::invalid_argument("InversionWorkspace: non-finite data sample");
        power += rec.squaredNorm();
        count += rec.size();
    }
    scale_ = power > 0.0 ? std::sqrt(power / static_cast<double>(count)) : 1.0;
    for (auto& rec : data_) rec /= scale_;

    lambda_ = cfg_.resolve_lambda(acq_.omegas);
    gamma_ = cfg_.gamma_over_lambda * lambda_;
    cache_.update_model(model_, acq_.omegas, sampling_, cfg_.threads);

    wavefields_.assign(q, Eigen::VectorXcd::Zero(model_.grid.n_pad()));
    dual_b_.assign(q, Eigen::VectorXcd::Zero(model_.grid.n_pad()));
    dual_d_.assign(q, Eigen::VectorXcd::Zero(acq_.n_receivers()));
    mean_source_ = Eigen::VectorXcd::Zero(model_.grid.n_pad());
}

void InversionWorkspace::reconstruct_initial_wavefield() {
    const int q = acq_.n_frequencies();
    const Eigen::VectorXcd zero_top = Eigen::VectorXcd::Zero(model_.grid.n_pad());
    const double sg = std::sqrt(gamma_);
    parallel_for(q, cfg_.threads, [&](int iw) {
        wavefields_[iw] = cache_.solver(iw).solve(zero_top, sg * data_[iw]);
    });
    ++wavefield_sweeps_;
}

const Eigen::VectorXcd& InversionWorkspace::estimate_mean_source() {
    const int q = acq_.n_frequencies();
    const Grid& g = model_.grid;
    std::vector<Eigen::VectorXcd> images(q);
    parallel_for(q, cfg_.threads, [&](int iw) {
        images[iw] = cache_.op(iw).apply(wavefields_[iw]) + dual_b_[iw] / lambda_;
    });
    Eigen::VectorXcd arg = Eigen::VectorXcd::Zero(g.n_pad());
    for (int iw = 0; iw < q; ++iw) arg += images[iw];  // fixed order
    arg /= static_cast<double>(q);

    // The mean source lives on interior cells only.
    std::vector<double> magnitudes;
    magnitudes.reserve(g.n_interior());
    double max_abs = 0.0, sum_abs = 0.0;
    for (int k = 0; k < g.n_pad(); ++k) {
        const auto [i, j] = g.unflat(k);
        if (!g.padded_is_interior(i, j)) {
            arg[k] = 0.0;
            continue;
        }
        const double a = std::abs(arg[k]);
        magnitudes.push_back(a);
        max_abs = std::max(max_abs, a);
        sum_abs += a;
    }
    ++estimate_calls_;
    if (max_abs == 0.0) {
        mean_source_ = Eigen::VectorXcd::Zero(g.n_pad());
        return mean_source_;
    }

    std::nth_element(magnitudes.begin(), magnitudes.begin() + magnitudes.size() / 2,
                     magnitudes.end());
    double eps = cfg_.berhu_eps_scale * magnitudes[magnitudes.size() / 2];
    if (!(eps > 0.0)) eps = cfg_.berhu_eps_scale * sum_abs / magnitudes.size();
    const BerhuParams prox_params(eps, 1.0 / (lambda_ * q));
    berhu_prox_in_place(arg, prox_params);
    mean_source_ = std::move(arg);
    return mean_source_;
}

void InversionWorkspace::inner_location_loop() {
    const int q = acq_.n_frequencies();
    const double sl = std::sqrt(lambda_), sg = std::sqrt(gamma_);
    for (int l = 0; l < cfg_.n_inner; ++l) {
        estimate_mean_source();
        parallel_for(q, cfg_.threads, [&](int iw) {
            wavefields_[iw] = cache_.solver(iw).solve(sl * mean_source_, sg * data_[iw]);
        });
        ++wavefield_sweeps_;
    }
}

const EventSet& InversionWorkspace::pick() {
    events_ = pick_events(mean_source_, model_.grid, cfg_.peak_threshold,
                          cfg_.resolve_min_distance(model_.grid.h));
    events_.signatures = Eigen::MatrixXcd::Zero(acq_.n_frequencies(), events_.count());
    return events_;
}

std::vector<int> InversionWorkspace::event_padded_cells() const {
    std::vector<int> cells;
    cells.reserve(events_.count());
    for (int loc : events_.locations) {
        const auto [iz, ix] = model_.grid.interior_unflat(loc);
        cells.push_back(model_.grid.interior_to_padded(iz, ix));
    }
    return cells;
}

Eigen::VectorXcd InversionWorkspace::scatter_event_sources(int iw) const {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(model_.grid.n_pad());
    const auto cells = event_padded_cells();
    for (int e = 0; e < events_.count(); ++e) b[cells[e]] += events_.signatures(iw, e);
    return b;
}

void InversionWorkspace::joint_update_wavefields_signatures() {
    if (events_.count() == 0)
        throw std::invalid_argument("joint update requires a nonempty event set");
    const int q = acq_.n_frequencies();
    const auto cells = event_padded_cells();
    const double sl = std::sqrt(lambda_), sg = std::sqrt(gamma_);
    const SolveOptions opts{cfg_.solve_method, 1e-8, 10};
    parallel_for(q, cfg_.threads, [&](int iw) {
        AugmentedSystem sys;
        sys.base.lambda = lambda_;
        sys.base.gamma = gamma_;
        sys.base.A = &cache_.op(iw);
        sys.base.P = &sampling_;
        sys.base.rhs_top = dual_b_[iw] / sl;
        sys.base.rhs_bottom = sg * data_[iw] + dual_d_[iw] / sg;
        sys.source_cells = cells;
        AugmentedSolution sol = solve_augmented(sys, opts);
        wavefields_[iw] = std::move(sol.wavefield);
        events_.signatures.row(iw) = sol.signatures.transpose();
    });
    ++wavefield_sweeps_;
}

TVSubproblem InversionWorkspace::build_model_subproblem() const {
    const Grid& g = model_.grid;
    const int q = acq_.n_frequencies();
    const int n = g.n_interior();

    std::vector<Eigen::VectorXd> h_parts(q), g_parts(q);
    parallel_for(q, cfg_.threads, [&](int iw) {
        const Eigen::VectorXcd jac = jacobian_diagonal(model_, acq_.omegas[iw], wavefields_[iw]);
        // r = Phi s - mu_b / lambda - Lap u, on interior cells.
        Eigen::VectorXcd r = -cache_.op(iw).laplacian_interior(wavefields_[iw]);
        const Eigen::VectorXcd phis = scatter_event_sources(iw);
        for (int iz = 0; iz < g.nz; ++iz)
            for (int ix = 0; ix < g.nx; ++ix) {
                const int ki = g.interior_flat(iz, ix);
                const int kp = g.interior_to_padded(iz, ix);
                r[ki] += phis[kp] - dual_b_[iw][kp] / lambda_;
            }
        h_parts[iw] = jac.cwiseAbs2();
        g_parts[iw] = (jac.conjugate().cwiseProduct(r)).real();
    });

    TVSubproblem sub;
    sub.nz = g.nz;
    sub.nx = g.nx;
    sub.H = Eigen::VectorXd::Zero(n);
    sub.g = Eigen::VectorXd::Zero(n);
    for (int iw = 0; iw < q; ++iw) {  // fixed order
        sub.H += h_parts[iw];
        sub.g += g_parts[iw];
    }
    sub.lambda = lambda_;
    sub.tv_weight = cfg_.tv_weight;
    sub.lower = model_.m_min;
    sub.upper = model_.m_max;
    sub.max_iters = cfg_.tv_max_iters;
    sub.tol = cfg_.tv_tol;
    return sub;
}

bool InversionWorkspace::update_model() {
    TVSubproblem sub = build_model_subproblem();
    if (sub.H.maxCoeff() == 0.0) return true;  // no illumination, nothing to invert
    // Cells the wavefields never touch (H = 0, e.g. the free-surface row)
    // carry no update information; they stay at the current model.
    for (long k = 0; k < sub.H.size(); ++k)
        if (sub.H[k] == 0.0) sub.lower[k] = sub.upper[k] = model_.m[k];
    TVResult res = solve_tv_quadratic(sub);
    model_.m = res.m;
    model_.project_to_bounds();
    cache_.update_model(model_, acq_.omegas, sampling_, cfg_.threads);
    return res.converged;
}

void InversionWorkspace::update_duals() {
    const int q = acq_.n_frequencies();
    std::vector<double> res_b(q), res_d(q);
    parallel_for(q, cfg_.threads, [&](int iw) {
        const Eigen::VectorXcd rb = cache_.op(iw).apply(wavefields_[iw]) - scatter_event_sources(iw);
        const Eigen::VectorXcd rd = sampling_.apply(wavefields_[iw]) - data_[iw];
        dual_b_[iw] += lambda_ * rb;
        dual_d_[iw] += gamma_ * rd;
        res_b[iw] = rb.squaredNorm();
        res_d[iw] = rd.squaredNorm();
    });
    double data_norm = 0.0, sum_b = 0.0, sum_d = 0.0;
    for (int iw = 0; iw < q; ++iw) {
        data_norm += data_[iw].squaredNorm();
        sum_b += res_b[iw];
        sum_d += res_d[iw];
    }
    const double denom = std::sqrt(data_norm);
    last_data_residual_ = denom > 0.0 ? std::sqrt(sum_d) / denom : 0.0;
    last_waveeq_residual_ = denom > 0.0 ? std::sqrt(sum_b) / denom : 0.0;
}

InversionResult InversionWorkspace::run(const SnapshotHook& hook) {
    const double ppw = points_per_wavelength(model_, acq_.omegas.back());
    if (ppw < 10.0)
        std::fprintf(stderr,
                     "warning: %.1f grid points per minimum wavelength (>= 10 recommended); "
                     "expect dispersion error\n",
                     ppw);

    InversionResult out;
    reconstruct_initial_wavefield();
    Eigen::VectorXcd prev_mean = mean_source_;

    for (int k = 0; k < cfg_.n_outer; ++k) {
        inner_location_loop();
        pick();
        if (events_.count() > 0) joint_update_wavefields_signatures();
        if (cfg_.update_model) update_model();
        update_duals();

        IterationRecord rec;
        rec.outer = k;
        rec.data_residual_rel = last_data_residual_;
        rec.waveeq_residual_rel = last_waveeq_residual_;
        const double prev_norm = prev_mean.norm();
        const double change = (mean_source_ - prev_mean).norm();
        rec.source_change_rel = prev_norm > 0.0
                                    ? change / prev_norm
                                    : (change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rec.n_picks = events_.count();
        rec.picks = events_.locations;
        out.history.push_back(rec);
        if (hook) hook(k, Eigen::VectorXcd(scale_ * mean_source_), model_);
        prev_mean = mean_source_;

        if (rec.source_change_rel < cfg_.tol_source_change &&
            rec.data_residual_rel < cfg_.tol_data_residual) {
            out.converged = true;
            break;
        }
    }

    out.events = events_;
    out.events.signatures *= scale_;
    out.model = model_;
    out.mean_source = scale_ * mean_source_;
    return out;
}

void InversionWorkspace::set_wavefield(int iw, Eigen::VectorXcd u) {
    if (u.size() != model_.grid.n_pad())
        throw std::invalid_argument("set_wavefield: dimension mismatch");
    wavefields_.at(iw) = std::move(u);
}

void InversionWorkspace::set_dual_b(int iw, Eigen::VectorXcd mu) {
    if (mu.size() != model_.grid.n_pad())
        throw std::invalid_argument("set_dual_b: dimension mismatch");
    dual_b_.at(iw) = std::move(mu);
}

void InversionWorkspace::set_dual_d(int iw, Eigen::VectorXcd mu) {
    if (mu.size() != acq_.n_receivers())
        throw std::invalid_argument("set_dual_d: dimension mismatch");
    dual_d_.at(iw) = std::move(mu);
}

void InversionWorkspace::set_events(EventSet events) {
    const int q = acq_.n_frequencies();
    if (events.signatures.rows() != q)
        events.signatures = Eigen::MatrixXcd::Zero(q, events.count());
    events_ = std::move(events);
}

InversionResult run_inversion(const Model& model0, const Acquisition& acquisition,
                              const std::vector<Eigen::VectorXcd>& data,
                              const InversionConfig& config,
                              const InversionWorkspace::SnapshotHook& hook) {
    InversionWorkspace workspace(model0, acquisition, data, config);
    return workspace.run(hook);
}

}  // namespace msfwi
