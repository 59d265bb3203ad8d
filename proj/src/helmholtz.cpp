#include "msfwi/helmholtz.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "msfwi/errors.hpp"

namespace msfwi {

namespace {

// Quadratic PML damping tuned for a 1e-4 reflection target:
// sigma_max = 3 c ln(1e4) / (2 L).
constexpr double kSigmaFactor = 13.815510557964274;

// Distance into the side PML, in cells, at (possibly half-integer)
// horizontal position jpos.  Zero across the interior span.
double pml_depth_x(double jpos, int w, int nx) {
    const double left = w - jpos;
    const double right = jpos - (w + nx - 1);
    return std::max({0.0, left, right});
}

// Distance into the bottom PML.  The top row is a free surface: no layer.
double pml_depth_z(double ipos, int nz) {
    return std::max(0.0, ipos - (nz - 1));
}

}  // namespace

HelmholtzOperator::HelmholtzOperator(const Model& model, double omega)
    : grid_(model.grid), omega_(omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("HelmholtzOperator: omega must be positive");
    model.validate();
    m_padded_ = model.extend_to_padded();

    const int nzp = grid_.nz_pad(), nxp = grid_.nx_pad(), w = grid_.pml_width;
    const int nz = grid_.nz, nx = grid_.nx;
    const double h = grid_.h, inv_h2 = 1.0 / (h * h);
    const double pml_length = std::max(1, w) * h;

    // Damping speeds come from the box bounds (geometric mean of the bound
    // velocities), not from m itself: the bounds stay fixed across the
    // inversion, which keeps A affine in m so that dA/dm = omega^2 Diag
    // holds exactly even on rows whose fluxes reach into the layers.
    Model ref = model;
    ref.m = model.m_min.cwiseProduct(model.m_max).cwiseSqrt();
    const Eigen::VectorXd m_ref_padded = ref.extend_to_padded();
    Eigen::VectorXd c(m_ref_padded.size());
    for (long k = 0; k < m_ref_padded.size(); ++k)
        c[k] = slowness_squared_to_velocity(m_ref_padded[k]);

    // 1 + i sigma/omega coordinate stretch; depth is the PML penetration in
    // cells at a (half-)integer position, vel the local wave speed.
    auto stretch = [&](double depth_cells, double vel) -> cdouble {
        if (depth_cells <= 0.0 || w == 0) return {1.0, 0.0};
        const double frac = depth_cells / w;
        const double sigma = kSigmaFactor * vel / pml_length * frac * frac;
        return {1.0, sigma / omega};
    };

    std::vector<Eigen::Triplet<cdouble>> trip;
    trip.reserve(static_cast<size_t>(grid_.n_pad()) * 5);

    for (int i = 0; i < nzp; ++i) {
        for (int j = 0; j < nxp; ++j) {
            const int k = i * nxp + j;
            if (i == 0) {
                // Free surface: u = 0 enforced exactly.
                trip.emplace_back(k, k, cdouble(1.0, 0.0));
                continue;
            }
            const double ck = c[k];
            auto vel_at = [&](int ii, int jj) { return c[ii * nxp + jj]; };

            const cdouble sx_c = stretch(pml_depth_x(j, w, nx), ck);
            const cdouble sz_c = stretch(pml_depth_z(i, nz), ck);

            cdouble diag = cdouble(omega * omega * m_padded_[k], 0.0);

            // East/west fluxes (x direction).
            {
                const double ve = (j + 1 < nxp) ? 0.5 * (ck + vel_at(i, j + 1)) : ck;
                const cdouble ae = inv_h2 / (sx_c * stretch(pml_depth_x(j + 0.5, w, nx), ve));
                diag -= ae;
                if (j + 1 < nxp) trip.emplace_back(k, k + 1, ae);

                const double vw = (j - 1 >= 0) ? 0.5 * (ck + vel_at(i, j - 1)) : ck;
                const cdouble aw = inv_h2 / (sx_c * stretch(pml_depth_x(j - 0.5, w, nx), vw));
                diag -= aw;
                if (j - 1 >= 0) trip.emplace_back(k, k - 1, aw);
            }
            // South/north fluxes (z direction; north neighbor always exists).
            {
                const double vs = (i + 1 < nzp) ? 0.5 * (ck + vel_at(i + 1, j)) : ck;
                const cdouble as = inv_h2 / (sz_c * stretch(pml_depth_z(i + 0.5, nz), vs));
                diag -= as;
                if (i + 1 < nzp) trip.emplace_back(k, k + nxp, as);

                const double vn = 0.5 * (ck + vel_at(i - 1, j));
                const cdouble an = inv_h2 / (sz_c * stretch(pml_depth_z(i - 0.5, nz), vn));
                diag -= an;
                trip.emplace_back(k, k - nxp, an);
            }
            trip.emplace_back(k, k, diag);
        }
    }

    matrix_.resize(grid_.n_pad(), grid_.n_pad());
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();
}

Eigen::VectorXcd HelmholtzOperator::apply(const Eigen::VectorXcd& u) const {
    if (u.size() != matrix_.cols())
        throw std::invalid_argument("HelmholtzOperator::apply: dimension mismatch");
    return matrix_ * u;
}

Eigen::VectorXcd HelmholtzOperator::apply_adjoint(const Eigen::VectorXcd& v) const {
    if (v.size() != matrix_.rows())
        throw std::invalid_argument("HelmholtzOperator::apply_adjoint: dimension mismatch");
    return matrix_.adjoint() * v;
}

Eigen::VectorXcd HelmholtzOperator::laplacian_interior(const Eigen::VectorXcd& u) const {
    Eigen::VectorXcd au = apply(u);
    Eigen::VectorXcd out(grid_.n_interior());
    const double w2 = omega_ * omega_;
    for (int iz = 0; iz < grid_.nz; ++iz)
        for (int ix = 0; ix < grid_.nx; ++ix) {
            const int kp = grid_.interior_to_padded(iz, ix);
            out[grid_.interior_flat(iz, ix)] = au[kp] - w2 * m_padded_[kp] * u[kp];
        }
    return out;
}

Eigen::VectorXcd solve_helmholtz_direct(const HelmholtzOperator& op,
                                        const Eigen::VectorXcd& rhs) {
    if (rhs.size() != op.matrix().rows())
        throw std::invalid_argument("solve_helmholtz_direct: dimension mismatch");
    Eigen::SparseLU<SpMatC> lu;
    lu.compute(op.matrix());
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_helmholtz_direct: LU factorization failed");
    Eigen::VectorXcd u = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_helmholtz_direct: backsolve failed");
    return u;
}

Eigen::VectorXcd jacobian_diagonal(const Model& model, double omega,
                                   const Eigen::VectorXcd& u_padded) {
    const Grid& g = model.grid;
    if (u_padded.size() != g.n_pad())
        throw std::invalid_argument("jacobian_diagonal: dimension mismatch");
    Eigen::VectorXcd diag(g.n_interior());
    const double w2 = omega * omega;
    for (int iz = 0; iz < g.nz; ++iz)
        for (int ix = 0; ix < g.nx; ++ix) {
            // The free-surface Dirichlet row carries no mass term.
            const cdouble v = iz == 0 ? cdouble(0.0, 0.0)
                                      : w2 * u_padded[g.interior_to_padded(iz, ix)];
            diag[g.interior_flat(iz, ix)] = v;
        }
    return diag;
}

SamplingOperator::SamplingOperator(const Grid& grid, const Acquisition& acq)
    : n_pad(grid.n_pad()), receiver_flat(acq.receiver_padded_indices(grid)) {}

Eigen::VectorXcd SamplingOperator::apply(const Eigen::VectorXcd& u) const {
    if (u.size() != n_pad)
        throw std::invalid_argument("SamplingOperator::apply: dimension mismatch");
    Eigen::VectorXcd out(n_receivers());
    for (int r = 0; r < n_receivers(); ++r) out[r] = u[receiver_flat[r]];
    return out;
}

Eigen::VectorXcd SamplingOperator::apply_adjoint(const Eigen::VectorXcd& v) const {
    if (v.size() != n_receivers())
        throw std::invalid_argument("SamplingOperator::apply_adjoint: dimension mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_pad);
    for (int r = 0; r < n_receivers(); ++r) out[receiver_flat[r]] += v[r];
    return out;
}

}  // namespace msfwi
