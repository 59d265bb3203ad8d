#include "msfwi/tv.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace msfwi {

double tv_value(const Eigen::VectorXd& m, int nz, int nx) {
    if (m.size() != static_cast<long>(nz) * nx)
        throw std::invalid_argument("tv_value: dimension mismatch");
    double total = 0.0;
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j) {
            const double v = m[i * nx + j];
            const double dx = (j + 1 < nx) ? m[i * nx + j + 1] - v : 0.0;
            const double dz = (i + 1 < nz) ? m[(i + 1) * nx + j] - v : 0.0;
            total += std::sqrt(dx * dx + dz * dz);
        }
    return total;
}

Eigen::SparseMatrix<double> tv_gradient_operator(int nz, int nx) {
    const int n = nz * nx;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * n);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j) {
            const int k = i * nx + j;
            if (j + 1 < nx) {
                trip.emplace_back(k, k + 1, 1.0);
                trip.emplace_back(k, k, -1.0);
            }
            if (i + 1 < nz) {
                trip.emplace_back(n + k, k + nx, 1.0);
                trip.emplace_back(n + k, k, -1.0);
            }
        }
    Eigen::SparseMatrix<double> d(2 * n, n);
    d.setFromTriplets(trip.begin(), trip.end());
    d.makeCompressed();
    return d;
}

namespace {

void validate(const TVSubproblem& sub) {
    const long n = static_cast<long>(sub.nz) * sub.nx;
    if (sub.nz < 1 || sub.nx < 1)
        throw std::invalid_argument("solve_tv_quadratic: empty grid");
    if (sub.H.size() != n || sub.g.size() != n || sub.lower.size() != n || sub.upper.size() != n)
        throw std::invalid_argument("solve_tv_quadratic: dimension mismatch");
    if (!(sub.lambda > 0.0) || sub.tv_weight < 0.0)
        throw std::invalid_argument("solve_tv_quadratic: need lambda > 0 and tv_weight >= 0");
    if (!sub.H.allFinite() || !sub.g.allFinite())
        throw std::invalid_argument("solve_tv_quadratic: non-finite inputs");
    for (long k = 0; k < n; ++k) {
        if (sub.H[k] < 0.0)
            throw std::invalid_argument("solve_tv_quadratic: H must be nonnegative");
        if (sub.lower[k] > sub.upper[k])
            throw std::invalid_argument("solve_tv_quadratic: empty box");
    }
}

Eigen::VectorXd clamp(const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
    return v.cwiseMax(lo).cwiseMin(hi);
}

// Separable exact solution for tv_weight = 0: clamp(g / H).
Eigen::VectorXd separable_solution(const TVSubproblem& sub) {
    Eigen::VectorXd m(sub.g.size());
    for (long k = 0; k < sub.g.size(); ++k)
        m[k] = sub.H[k] > 0.0 ? sub.g[k] / sub.H[k] : 0.0;
    return clamp(m, sub.lower, sub.upper);
}

// Isotropic shrink of stacked gradients: the (vx, vz) pair at each cell is
// scaled by max(0, 1 - tau/|(vx,vz)|).
void group_shrink(Eigen::VectorXd& v, int n, double tau) {
    for (int k = 0; k < n; ++k) {
        const double norm = std::hypot(v[k], v[n + k]);
        const double scale = norm > tau ? 1.0 - tau / norm : 0.0;
        v[k] *= scale;
        v[n + k] *= scale;
    }
}

}  // namespace

TVResult solve_tv_quadratic(const TVSubproblem& sub) {
    validate(sub);
    const int n = sub.nz * sub.nx;
    TVResult res;

    if (sub.tv_weight == 0.0) {
        res.m = separable_solution(sub);
        res.converged = true;
        return res;
    }

    const Eigen::SparseMatrix<double> D = tv_gradient_operator(sub.nz, sub.nx);
    const Eigen::SparseMatrix<double> DtD = Eigen::SparseMatrix<double>(D.transpose()) * D;

    const double h_mean = sub.H.mean();
    double rho = std::max(sub.lambda * h_mean, 1e-12 * std::max(1.0, sub.tv_weight));

    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    auto build_system = [&](double r) {
        Eigen::SparseMatrix<double> sys = r * (DtD + identity);
        Eigen::VectorXd diag = sub.lambda * sub.H;
        for (int k = 0; k < n; ++k) sys.coeffRef(k, k) += diag[k];
        sys.makeCompressed();
        return sys;
    };
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol;
    chol.compute(build_system(rho));

    Eigen::VectorXd m = separable_solution(sub);
    Eigen::VectorXd z = D * m;
    Eigen::VectorXd w = m;
    Eigen::VectorXd uz = Eigen::VectorXd::Zero(2 * n);
    Eigen::VectorXd uw = Eigen::VectorXd::Zero(n);
    const double tau = sub.tv_weight / rho;
    const double relax = 1.8;

    const double g_scale = std::max(sub.lambda * sub.g.norm(), 1e-300);
    double tau_cur = tau;
    double primal = 0.0, dual = 0.0;

    for (int it = 0; it < sub.max_iters; ++it) {
        const Eigen::VectorXd rhs =
            sub.lambda * sub.g + rho * (D.transpose() * (z - uz)) + rho * (w - uw);
        m = chol.solve(rhs);

        const Eigen::VectorXd dm = D * m;
        const Eigen::VectorXd dm_rel = relax * dm + (1.0 - relax) * z;
        const Eigen::VectorXd m_rel = relax * m + (1.0 - relax) * w;

        const Eigen::VectorXd z_prev = z;
        const Eigen::VectorXd w_prev = w;
        z = dm_rel + uz;
        group_shrink(z, n, tau_cur);
        w = clamp(m_rel + uw, sub.lower, sub.upper);
        uz += dm_rel - z;
        uw += m_rel - w;

        const double r_norm = std::sqrt((dm - z).squaredNorm() + (m - w).squaredNorm());
        const double x_scale = std::max({std::sqrt(dm.squaredNorm() + m.squaredNorm()),
                                         std::sqrt(z.squaredNorm() + w.squaredNorm()), 1e-300});
        const double s_norm =
            rho * (D.transpose() * (z - z_prev) + (w - w_prev)).norm();
        primal = r_norm / x_scale;
        dual = s_norm / g_scale;
        res.iterations = it + 1;
        if (primal < sub.tol && dual < sub.tol) {
            res.converged = true;
            break;
        }

        // Residual balancing; the factorization follows rho.
        if ((it + 1) % 5 == 0) {
            double factor = 1.0;
            if (primal > 10.0 * dual)
                factor = 2.0;
            else if (dual > 10.0 * primal)
                factor = 0.5;
            if (factor != 1.0) {
                rho *= factor;
                uz /= factor;
                uw /= factor;
                tau_cur = sub.tv_weight / rho;
                chol.compute(build_system(rho));
            }
        }
    }

    res.m = clamp(m, sub.lower, sub.upper);
    res.kkt_residual = std::max(primal, dual);
    return res;
}

}  // namespace msfwi
