#include "msfwi/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "msfwi/errors.hpp"
#include "msfwi/parallel.hpp"

namespace msfwi {

namespace {

// LDLT of a Hermitian matrix must produce a real positive diagonal; a bad
// pivot is the non-HPD signal we report.
void check_positive_pivots(const Eigen::SimplicialLDLT<SpMatC>& ldlt) {
    const auto& d = ldlt.vectorD();
    double dmax = 0.0;
    for (long i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d[i]));
    for (long i = 0; i < d.size(); ++i) {
        const cdouble v = d[i];
        if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-10 * dmax) {
            std::ostringstream msg;
            msg << "factorization failure: non-HPD pivot D[" << i << "] = ("
                << v.real() << ", " << v.imag() << "), max pivot " << dmax;
            throw SolverError(msg.str());
        }
    }
}

double relative_residual(const SpMatC& mat, const Eigen::VectorXcd& x,
                         const Eigen::VectorXcd& rhs) {
    return (mat * x - rhs).norm() / rhs.norm();
}

}  // namespace

NormalFactorization::NormalFactorization(const SpMatC& hpd) {
    ldlt_.compute(hpd);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("factorization failure: symbolic/numeric decomposition failed");
    check_positive_pivots(ldlt_);
}

Eigen::VectorXcd NormalFactorization::solve(const Eigen::VectorXcd& rhs) const {
    if (rhs.size() != ldlt_.rows())
        throw std::invalid_argument("NormalFactorization::solve: dimension mismatch");
    return ldlt_.solve(rhs);
}

CgResult pcg_hermitian(const SpMatC& mat, const Eigen::VectorXcd& rhs,
                       const Eigen::VectorXcd& x0, double tol, int max_iters) {
    CgResult res;
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        res.x = Eigen::VectorXcd::Zero(mat.rows());
        res.converged = true;
        return res;
    }
    Eigen::VectorXd inv_diag(mat.rows());
    for (long k = 0; k < mat.rows(); ++k) {
        const double d = mat.coeff(k, k).real();
        inv_diag[k] = d > 0.0 ? 1.0 / d : 1.0;
    }

    Eigen::VectorXcd x = x0.size() == mat.rows() ? x0 : Eigen::VectorXcd::Zero(mat.rows());
    Eigen::VectorXcd r = rhs - mat * x;
    Eigen::VectorXcd z = inv_diag.asDiagonal() * r;
    Eigen::VectorXcd p = z;
    double rz = r.dot(z).real();

    for (int it = 0; it < max_iters; ++it) {
        res.relative_residual = r.norm() / rhs_norm;
        if (res.relative_residual < tol) {
            res.converged = true;
            break;
        }
        const Eigen::VectorXcd ap = mat * p;
        const double pap = p.dot(ap).real();
        if (!(pap > 0.0))
            throw SolverError("conjugate gradient breakdown: matrix not positive definite");
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        z = inv_diag.asDiagonal() * r;
        const double rz_next = r.dot(z).real();
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        res.iterations = it + 1;
    }
    res.relative_residual = (rhs - mat * x).norm() / rhs_norm;
    res.converged = res.relative_residual < tol;
    res.x = std::move(x);
    return res;
}

SpMatC build_stacked_normal_matrix(double lambda, const HelmholtzOperator& A,
                                   double gamma, const SamplingOperator& P) {
    const SpMatC& a = A.matrix();
    SpMatC normal = (a.adjoint() * a) * cdouble(lambda, 0.0);
    SpMatC pp(a.rows(), a.cols());
    std::vector<Eigen::Triplet<cdouble>> trip;
    trip.reserve(P.receiver_flat.size());
    for (int k : P.receiver_flat) trip.emplace_back(k, k, cdouble(gamma, 0.0));
    pp.setFromTriplets(trip.begin(), trip.end());
    normal += pp;
    normal.makeCompressed();
    return normal;
}

StackedSolver::StackedSolver(double lambda, const HelmholtzOperator& A, double gamma,
                             const SamplingOperator& P, SolveOptions opts)
    : lambda_(lambda), gamma_(gamma), A_(&A), P_(&P), opts_(opts) {
    if (!(lambda > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("StackedSolver: lambda and gamma must be positive");
    normal_ = build_stacked_normal_matrix(lambda, A, gamma, P);
    if (opts_.method == SolveMethod::Direct)
        fact_ = std::make_unique<NormalFactorization>(normal_);
}

Eigen::VectorXcd StackedSolver::solve(const Eigen::VectorXcd& rhs_top,
                                      const Eigen::VectorXcd& rhs_bottom) const {
    if (rhs_top.size() != normal_.rows() || rhs_bottom.size() != P_->n_receivers())
        throw std::invalid_argument("StackedSolver::solve: rhs dimension mismatch");
    const Eigen::VectorXcd rhs = std::sqrt(lambda_) * A_->apply_adjoint(rhs_top) +
                                 std::sqrt(gamma_) * P_->apply_adjoint(rhs_bottom);
    if (rhs.norm() == 0.0) return Eigen::VectorXcd::Zero(normal_.rows());

    const int cg_max = opts_.cg_max_iter_per_unknown * static_cast<int>(normal_.rows());
    if (fact_) {
        Eigen::VectorXcd u = fact_->solve(rhs);
        if (relative_residual(normal_, u, rhs) < opts_.tolerance) return u;
        // Direct solve degraded by conditioning: polish iteratively.
        CgResult cg = pcg_hermitian(normal_, rhs, u, opts_.tolerance, cg_max);
        if (cg.converged) return cg.x;
        throw SolverError("stacked solve: residual " + std::to_string(cg.relative_residual) +
                          " above tolerance after CG polish");
    }
    CgResult cg = pcg_hermitian(normal_, rhs, Eigen::VectorXcd(), opts_.tolerance, cg_max);
    if (!cg.converged)
        throw SolverError("stacked solve: CG stalled at relative residual " +
                          std::to_string(cg.relative_residual) + " after " +
                          std::to_string(cg.iterations) + " iterations");
    return cg.x;
}

Eigen::VectorXcd solve_stacked(const StackedSystem& sys, SolveOptions opts) {
    StackedSolver solver(sys.lambda, *sys.A, sys.gamma, *sys.P, opts);
    return solver.solve(sys.rhs_top, sys.rhs_bottom);
}

AugmentedSolution solve_augmented(const AugmentedSystem& sys, SolveOptions opts) {
    const StackedSystem& base = sys.base;
    const int n = static_cast<int>(base.A->matrix().rows());
    const int p = static_cast<int>(sys.source_cells.size());
    if (p < 1)
        throw std::invalid_argument("solve_augmented: at least one source cell required");
    if (std::set<int>(sys.source_cells.begin(), sys.source_cells.end()).size() !=
        sys.source_cells.size())
        throw SolverError("singular signature block: duplicate event cells share one grid node");

    const double lambda = base.lambda, gamma = base.gamma;
    const SpMatC normal = build_stacked_normal_matrix(lambda, *base.A, gamma, *base.P);
    const SpMatC ah = base.A->matrix().adjoint();

    // Bordered normal equations in (u, s):
    //   [ lambda A^H A + gamma P^T P   -lambda A^H Phi ]
    //   [ -lambda Phi^T A               lambda I_p     ]
    std::vector<Eigen::Triplet<cdouble>> trip;
    trip.reserve(normal.nonZeros() + 2 * 5 * p + p);
    for (int col = 0; col < normal.outerSize(); ++col)
        for (SpMatC::InnerIterator it(normal, col); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), col, it.value());
    for (int e = 0; e < p; ++e) {
        const int cell = sys.source_cells[e];
        if (cell < 0 || cell >= n)
            throw std::invalid_argument("solve_augmented: source cell out of range");
        for (SpMatC::InnerIterator it(ah, cell); it; ++it) {
            const cdouble v = -lambda * it.value();
            trip.emplace_back(static_cast<int>(it.row()), n + e, v);
            trip.emplace_back(n + e, static_cast<int>(it.row()), std::conj(v));
        }
        trip.emplace_back(n + e, n + e, cdouble(lambda, 0.0));
    }
    SpMatC bordered(n + p, n + p);
    bordered.setFromTriplets(trip.begin(), trip.end());
    bordered.makeCompressed();

    Eigen::VectorXcd rhs(n + p);
    rhs.head(n) = std::sqrt(lambda) * base.A->apply_adjoint(base.rhs_top) +
                  std::sqrt(gamma) * base.P->apply_adjoint(base.rhs_bottom);
    for (int e = 0; e < p; ++e)
        rhs[n + e] = -std::sqrt(lambda) * base.rhs_top[sys.source_cells[e]];

    AugmentedSolution out;
    if (rhs.norm() == 0.0) {
        out.wavefield = Eigen::VectorXcd::Zero(n);
        out.signatures = Eigen::VectorXcd::Zero(p);
        return out;
    }

    const int cg_max = opts.cg_max_iter_per_unknown * (n + p);
    Eigen::VectorXcd x;
    if (opts.method == SolveMethod::Direct) {
        NormalFactorization fact(bordered);
        x = fact.solve(rhs);
        if (relative_residual(bordered, x, rhs) >= opts.tolerance) {
            CgResult cg = pcg_hermitian(bordered, rhs, x, opts.tolerance, cg_max);
            if (!cg.converged)
                throw SolverError("augmented solve: residual above tolerance after CG polish");
            x = std::move(cg.x);
        }
    } else {
        CgResult cg = pcg_hermitian(bordered, rhs, Eigen::VectorXcd(), opts.tolerance, cg_max);
        if (!cg.converged)
            throw SolverError("augmented solve: CG stalled at relative residual " +
                              std::to_string(cg.relative_residual));
        x = std::move(cg.x);
    }
    out.wavefield = x.head(n);
    out.signatures = x.tail(p);
    return out;
}

StackedSolverCache::StackedSolverCache(double lambda, double gamma, SolveOptions opts)
    : lambda_(lambda), gamma_(gamma), opts_(opts) {}

void StackedSolverCache::update_model(const Model& model, const std::vector<double>& omegas,
                                      const SamplingOperator& sampling, int threads) {
    sampling_ = &sampling;
    const int q = static_cast<int>(omegas.size());
    ops_.clear();
    solvers_.clear();
    ops_.resize(q);
    solvers_.resize(q);
    parallel_for(q, threads, [&](int iw) {
        ops_[iw] = std::make_unique<HelmholtzOperator>(model, omegas[iw]);
        solvers_[iw] = std::make_unique<StackedSolver>(lambda_, *ops_[iw], gamma_, sampling, opts_);
    });
    ++version_;
}

}  // namespace msfwi
