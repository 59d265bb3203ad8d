#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace msfwi {

/// Isotropic total variation of an nz x nx field: sum over cells of
/// sqrt((forward-diff x)^2 + (forward-diff z)^2), plain differences with
/// replicate-edge (Neumann) boundaries.
double tv_value(const Eigen::VectorXd& m, int nz, int nx);

/// Bound-constrained TV-regularized quadratic
///
///   minimize  tv_weight * TV(m) + lambda * (0.5 m^T Diag(H) m - g^T m)
///   subject to lower <= m <= upper
///
/// The quadratic uses the 0.5 m^T H m convention, so the unconstrained
/// tv_weight = 0 minimizer is g / H elementwise.
struct TVSubproblem {
    Eigen::VectorXd H;  // diagonal of the Hessian surrogate, entries >= 0
    Eigen::VectorXd g;
    double lambda = 1.0;
    double tv_weight = 1.0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int nz = 0;
    int nx = 0;
    int max_iters = 200;
    double tol = 1e-6;
};

struct TVResult {
    Eigen::VectorXd m;
    bool converged = false;
    int iterations = 0;
    double kkt_residual = 0.0;  // max of scaled primal/dual ADMM residuals
};

/// Inner ADMM with gradient-splitting and box-projection variables.
/// Never throws on slow convergence; the flag reports it instead.  The
/// output always satisfies the box bounds exactly.
TVResult solve_tv_quadratic(const TVSubproblem& sub);

/// Forward-difference gradient operator (2N x N) used by the splitting;
/// exposed for tests.
Eigen::SparseMatrix<double> tv_gradient_operator(int nz, int nx);

}  // namespace msfwi
