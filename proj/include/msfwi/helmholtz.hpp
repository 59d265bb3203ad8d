#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "msfwi/model.hpp"

namespace msfwi {

using cdouble = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<cdouble>;

/// Discrete Helmholtz operator A(m, omega) = Lap + omega^2 Diag(m) on the
/// padded grid.
///
/// Second-order 5-point Laplacian; the absorbing side/bottom layers use
/// complex coordinate stretching (PML) with a quadratic damping profile,
/// and the top row is a homogeneous-Dirichlet free surface.  Assembly is
/// deterministic: identical (m, omega) give a bit-identical matrix.
class HelmholtzOperator {
public:
    HelmholtzOperator(const Model& model, double omega);

    Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
    Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const;

    /// Lap u = A u - omega^2 m .* u, gathered on interior cells.
    Eigen::VectorXcd laplacian_interior(const Eigen::VectorXcd& u) const;

    const SpMatC& matrix() const { return matrix_; }
    const Grid& grid() const { return grid_; }
    double omega() const { return omega_; }
    const Eigen::VectorXd& m_snapshot() const { return m_padded_; }

private:
    Grid grid_;
    double omega_;
    Eigen::VectorXd m_padded_;
    SpMatC matrix_;
};

/// Sparse-LU solve of A u = rhs (forward modeling).
Eigen::VectorXcd solve_helmholtz_direct(const HelmholtzOperator& op,
                                        const Eigen::VectorXcd& rhs);

/// Action of dA/dm on a fixed wavefield.  Since dA/dm_j = omega^2 e_j e_j^T,
/// the map dm -> (dA/dm u) dm is diagonal; this returns its diagonal
/// omega^2 u restricted to interior cells.
Eigen::VectorXcd jacobian_diagonal(const Model& model, double omega,
                                   const Eigen::VectorXcd& u_padded);

/// Receiver sampling operator P: picks wavefield values at receiver cells.
struct SamplingOperator {
    int n_pad = 0;
    std::vector<int> receiver_flat;  // padded flat indices, one per receiver

    SamplingOperator() = default;
    SamplingOperator(const Grid& grid, const Acquisition& acq);

    int n_receivers() const { return static_cast<int>(receiver_flat.size()); }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
    Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const;
};

}  // namespace msfwi
