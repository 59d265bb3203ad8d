#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "msfwi/helmholtz.hpp"

namespace msfwi {

/// How least-squares systems are solved.  Direct factors the normal
/// equations once and falls back to CG automatically if the residual check
/// fails; ConjugateGradient skips the factorization entirely.
enum class SolveMethod { Direct, ConjugateGradient };

struct SolveOptions {
    SolveMethod method = SolveMethod::Direct;
    double tolerance = 1e-8;  // relative normal-equation residual
    int cg_max_iter_per_unknown = 10;
};

/// Sparse LDL^H factorization of a Hermitian positive definite matrix,
/// reusable across many right-hand sides.
class NormalFactorization {
public:
    explicit NormalFactorization(const SpMatC& hpd);
    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    long rows() const { return ldlt_.rows(); }

private:
    Eigen::SimplicialLDLT<SpMatC> ldlt_;
};

struct CgResult {
    Eigen::VectorXcd x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for Hermitian positive definite
/// systems.  Deterministic.
CgResult pcg_hermitian(const SpMatC& mat, const Eigen::VectorXcd& rhs,
                       const Eigen::VectorXcd& x0, double tol, int max_iters);

/// Overdetermined data-assimilation system
///     [ sqrt(lambda) A ] u = [ rhs_top    ]
///     [ sqrt(gamma)  P ]     [ rhs_bottom ]
/// solved in the least-squares sense through the normal equations
/// lambda A^H A + gamma P^T P.
struct StackedSystem {
    double lambda = 0.0;
    double gamma = 0.0;
    const HelmholtzOperator* A = nullptr;
    const SamplingOperator* P = nullptr;
    Eigen::VectorXcd rhs_top;     // length n_pad, already scaled by sqrt(lambda)
    Eigen::VectorXcd rhs_bottom;  // length n_receivers, already scaled by sqrt(gamma)
};

/// Same stacked structure augmented with signature unknowns: the top block
/// gains the coupling -sqrt(lambda) Phi, where the columns of Phi are
/// canonical basis vectors at the picked source cells.
struct AugmentedSystem {
    StackedSystem base;
    std::vector<int> source_cells;  // padded flat indices, must be distinct
};

SpMatC build_stacked_normal_matrix(double lambda, const HelmholtzOperator& A,
                                   double gamma, const SamplingOperator& P);

/// Reusable solver for a fixed (lambda, A, gamma, P); the factorization is
/// computed once and shared by every right-hand side.
class StackedSolver {
public:
    StackedSolver(double lambda, const HelmholtzOperator& A, double gamma,
                  const SamplingOperator& P, SolveOptions opts = {});

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs_top,
                           const Eigen::VectorXcd& rhs_bottom) const;

    const SpMatC& normal_matrix() const { return normal_; }

private:
    double lambda_, gamma_;
    const HelmholtzOperator* A_;
    const SamplingOperator* P_;
    SolveOptions opts_;
    SpMatC normal_;
    std::unique_ptr<NormalFactorization> fact_;
};

Eigen::VectorXcd solve_stacked(const StackedSystem& sys, SolveOptions opts = {});

struct AugmentedSolution {
    Eigen::VectorXcd wavefield;   // length n_pad
    Eigen::VectorXcd signatures;  // length p
};

/// Joint wavefield + signature least squares, solved by factoring the
/// bordered normal equations in the concatenated unknown (u, s).
AugmentedSolution solve_augmented(const AugmentedSystem& sys, SolveOptions opts = {});

/// Per-frequency Helmholtz operators and stacked factorizations for one
/// model state.  Rebuilt (and the factorizations invalidated) whenever the
/// model changes; the version counter tracks updates.
class StackedSolverCache {
public:
    StackedSolverCache(double lambda, double gamma, SolveOptions opts = {});

    void update_model(const Model& model, const std::vector<double>& omegas,
                      const SamplingOperator& sampling, int threads = 1);

    const HelmholtzOperator& op(int freq_index) const { return *ops_.at(freq_index); }
    const StackedSolver& solver(int freq_index) const { return *solvers_.at(freq_index); }
    const SamplingOperator& sampling() const { return *sampling_; }
    double lambda() const { return lambda_; }
    double gamma() const { return gamma_; }
    int n_frequencies() const { return static_cast<int>(ops_.size()); }
    int model_version() const { return version_; }

private:
    double lambda_, gamma_;
    SolveOptions opts_;
    const SamplingOperator* sampling_ = nullptr;
    std::vector<std::unique_ptr<HelmholtzOperator>> ops_;
    std::vector<std::unique_ptr<StackedSolver>> solvers_;
    int version_ = 0;
};

}  // namespace msfwi
