#pragma once

#include <functional>
#include <vector>

#include "msfwi/model.hpp"
#include "msfwi/solvers.hpp"
#include "msfwi/tv.hpp"

namespace msfwi {

struct InversionConfig {
    double lambda = 0.0;  // <= 0 selects the 1/mean(omega^4) default
    double gamma_over_lambda = 1e4;
    int n_inner = 10;
    int n_outer = 1;
    bool update_model = false;
    double peak_threshold = 0.3;
    double peak_min_distance = -1.0;  // meters; < 0 selects 3 h
    double tv_weight = 1.0;
    double tol_source_change = 1e-3;
    double tol_data_residual = 1e-2;
    double berhu_eps_scale = 3.0;  // epsilon = scale * median |prox argument|
    int tv_max_iters = 200;
    double tv_tol = 1e-6;
    int threads = 1;
    SolveMethod solve_method = SolveMethod::Direct;

    void validate() const;
    double resolve_lambda(const std::vector<double>& omegas) const;
    double resolve_min_distance(double h) const;
};

/// Picked events: locations (columns of Phi) with per-frequency signatures.
struct EventSet {
    std::vector<int> locations;   // interior flat indices, distinct
    Eigen::MatrixXcd signatures;  // n_frequencies x p
    Eigen::VectorXd confidence;   // peak amplitude of |mean source| at pick time

    int count() const { return static_cast<int>(locations.size()); }
};

struct IterationRecord {
    int outer = 0;
    double data_residual_rel = 0.0;     // sum_w ||Pu - d|| / sum_w ||d||
    double waveeq_residual_rel = 0.0;   // sum_w ||Au - Phi s|| / sum_w ||d||
    double source_change_rel = 0.0;     // ||b_k - b_{k-1}|| / ||b_{k-1}||
    int n_picks = 0;
    std::vector<int> picks;             // interior flat indices
};

struct InversionResult {
    EventSet events;
    Model model;
    Eigen::VectorXcd mean_source;  // padded grid, zero outside the interior
    std::vector<IterationRecord> history;
    bool converged = false;
};

/// Local maxima of |mean source| over 8-neighborhoods, at least
/// threshold_frac of the global maximum, thinned greedily by descending
/// amplitude (ties broken by scan order) to the minimum separation.
EventSet pick_events(const Eigen::VectorXcd& mean_source_padded, const Grid& grid,
                     double threshold_frac, double min_distance_m);

/// One inversion run: owns the model state, per-frequency wavefields and
/// duals, and the factorization cache.  The recorded data is normalized by
/// its rms once at construction (outputs are scaled back), which makes
/// locations and signatures equivariant under global complex scaling.
class InversionWorkspace {
public:
    InversionWorkspace(Model model0, Acquisition acquisition,
                       std::vector<Eigen::VectorXcd> data, InversionConfig config);

    // -- Algorithm phases ---------------------------------------------------
    /// Data-only wavefield reconstruction (zero source term).
    void reconstruct_initial_wavefield();
    /// Berhu-prox of the frequency-averaged source image; also returns it.
    const Eigen::VectorXcd& estimate_mean_source();
    /// Alternates mean-source estimation and wavefield re-solves n_inner times.
    void inner_location_loop();
    /// Runs the peak finder on the current mean source and stores the picks.
    const EventSet& pick();
    /// Joint least-squares update of all wavefields and event signatures.
    void joint_update_wavefields_signatures();
    /// Quadratic model subproblem (diagonal H, real g) on interior cells.
    TVSubproblem build_model_subproblem() const;
    /// TV-regularized bound-constrained model step; returns the TV solver's
    /// convergence flag (true when skipped as degenerate).
    bool update_model();
    /// Gradient-ascent update of both multiplier families.
    void update_duals();

    using SnapshotHook = std::function<void(int outer, const Eigen::VectorXcd& mean_source,
                                            const Model& model)>;
    /// Full outer loop; the optional hook observes each outer iteration.
    InversionResult run(const SnapshotHook& hook = nullptr);

    // -- State access (also used by tests) ----------------------------------
    const Model& model() const { return model_; }
    const Grid& grid() const { return model_.grid; }
    double lambda() const { return lambda_; }
    double gamma() const { return gamma_; }
    double data_scale() const { return scale_; }
    const Eigen::VectorXcd& wavefield(int iw) const { return wavefields_.at(iw); }
    const Eigen::VectorXcd& dual_b(int iw) const { return dual_b_.at(iw); }
    const Eigen::VectorXcd& dual_d(int iw) const { return dual_d_.at(iw); }
    const Eigen::VectorXcd& mean_source() const { return mean_source_; }
    const EventSet& events() const { return events_; }
    const StackedSolverCache& cache() const { return cache_; }
    int estimate_calls() const { return estimate_calls_; }
    int wavefield_sweeps() const { return wavefield_sweeps_; }

    void set_wavefield(int iw, Eigen::VectorXcd u);
    void set_dual_b(int iw, Eigen::VectorXcd mu);
    void set_dual_d(int iw, Eigen::VectorXcd mu);
    void set_events(EventSet events);

private:
    Eigen::VectorXcd normalized_data(int iw) const { return data_[iw]; }
    std::vector<int> event_padded_cells() const;
    Eigen::VectorXcd scatter_event_sources(int iw) const;  // Phi s(omega_iw), padded

    Model model_;
    Acquisition acq_;
    std::vector<Eigen::VectorXcd> data_;  // normalized records
    InversionConfig cfg_;
    double scale_ = 1.0;
    double lambda_ = 0.0, gamma_ = 0.0;
    SamplingOperator sampling_;
    StackedSolverCache cache_;

    std::vector<Eigen::VectorXcd> wavefields_;
    std::vector<Eigen::VectorXcd> dual_b_;
    std::vector<Eigen::VectorXcd> dual_d_;
    Eigen::VectorXcd mean_source_;
    EventSet events_;
    double last_data_residual_ = 0.0;
    double last_waveeq_residual_ = 0.0;
    int estimate_calls_ = 0;
    int wavefield_sweeps_ = 0;
};

/// Algorithm entry point: lines 1-14 of the outer ADMM loop.
InversionResult run_inversion(const Model& model0, const Acquisition& acquisition,
                              const std::vector<Eigen::VectorXcd>& data,
                              const InversionConfig& config,
                              const InversionWorkspace::SnapshotHook& hook = nullptr);

}  // namespace msfwi
