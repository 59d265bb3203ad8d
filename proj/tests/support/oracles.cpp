#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msfwi::oracles {

Eigen::MatrixXcd dense_from_sparse(const SpMatC& mat) {
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(mat.rows(), mat.cols());
    for (int col = 0; col < mat.outerSize(); ++col)
        for (SpMatC::InnerIterator it(mat, col); it; ++it)
            dense(it.row(), col) = it.value();
    return dense;
}

Eigen::VectorXcd dense_least_squares_qr(Eigen::MatrixXcd M, Eigen::VectorXcd b) {
    const long rows = M.rows(), cols = M.cols();
    if (rows < cols) throw std::invalid_argument("dense_least_squares_qr: underdetermined");
    using cd = std::complex<double>;

    for (long k = 0; k < cols; ++k) {
        // Householder reflector annihilating M(k+1.., k).
        const long len = rows - k;
        Eigen::VectorXcd x = M.block(k, k, len, 1);
        const double xnorm = x.norm();
        if (xnorm == 0.0) continue;
        const cd pivot = x[0];
        const cd phase = std::abs(pivot) > 0.0 ? pivot / std::abs(pivot) : cd(1.0, 0.0);
        Eigen::VectorXcd v = x;
        v[0] += phase * xnorm;
        const double vnorm = v.norm();
        if (vnorm == 0.0) continue;
        v /= vnorm;
        M.block(k, k, len, cols - k) -= 2.0 * v * (v.adjoint() * M.block(k, k, len, cols - k));
        b.segment(k, len) -= 2.0 * v * (v.adjoint() * b.segment(k, len));
    }
    // Back-substitute the upper-triangular system.
    Eigen::VectorXcd x(cols);
    for (long i = cols - 1; i >= 0; --i) {
        cd acc = b[i];
        for (long j = i + 1; j < cols; ++j) acc -= M(i, j) * x[j];
        if (std::abs(M(i, i)) == 0.0)
            throw std::invalid_argument("dense_least_squares_qr: rank deficient");
        x[i] = acc / M(i, i);
    }
    return x;
}

Eigen::VectorXcd dense_cholesky_solve(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
    const long n = A.rows();
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
    for (long j = 0; j < n; ++j) {
        std::complex<double> diag = A(j, j);
        for (long k = 0; k < j; ++k) diag -= L(j, k) * std::conj(L(j, k));
        if (!(diag.real() > 0.0))
            throw std::invalid_argument("dense_cholesky_solve: not positive definite");
        L(j, j) = std::sqrt(diag.real());
        for (long i = j + 1; i < n; ++i) {
            std::complex<double> acc = A(i, j);
            for (long k = 0; k < j; ++k) acc -= L(i, k) * std::conj(L(j, k));
            L(i, j) = acc / L(j, j);
        }
    }
    Eigen::VectorXcd y(n), x(n);
    for (long i = 0; i < n; ++i) {
        std::complex<double> acc = b[i];
        for (long k = 0; k < i; ++k) acc -= L(i, k) * y[k];
        y[i] = acc / L(i, i);
    }
    for (long i = n - 1; i >= 0; --i) {
        std::complex<double> acc = y[i];
        for (long k = i + 1; k < n; ++k) acc -= std::conj(L(k, i)) * x[k];
        x[i] = acc / L(i, i);
    }
    return x;
}

Eigen::VectorXd tv_denoise_1d(const Eigen::VectorXd& y, double w) {
    const int n = static_cast<int>(y.size());
    Eigen::VectorXd x(n);
    if (n == 0) return x;
    if (n == 1 || w <= 0.0) {
        x = y;
        return x;
    }
    // Direct taut-string walk (Condat, 2013), 0-based indices.
    int k = 0, k0 = 0, km = 0, kp = 0;
    double vmin = y[0] - w, vmax = y[0] + w;
    double umin = w, umax = -w;
    for (;;) {
        if (k == n - 1) {
            if (umin < 0.0) {
                for (int i = k0; i <= km; ++i) x[i] = vmin;
                k = k0 = km = km + 1;
                vmin = y[k];
                umin = w;
                umax = y[k] + w - vmax;
            } else if (umax > 0.0) {
                for (int i = k0; i <= kp; ++i) x[i] = vmax;
                k = k0 = kp = kp + 1;
                vmax = y[k];
                umax = -w;
                umin = y[k] - w - vmin;
            } else {
                const double level = vmin + umin / (k - k0 + 1);
                for (int i = k0; i <= k; ++i) x[i] = level;
                return x;
            }
        }
        if (k == n - 1) continue;
        if (y[k + 1] + umin < vmin - w) {
            for (int i = k0; i <= km; ++i) x[i] = vmin;
            k = k0 = km = kp = km + 1;
            vmin = y[k];
            vmax = y[k] + 2.0 * w;
            umin = w;
            umax = -w;
        } else if (y[k + 1] + umax > vmax + w) {
            for (int i = k0; i <= kp; ++i) x[i] = vmax;
            k = k0 = km = kp = kp + 1;
            vmin = y[k] - 2.0 * w;
            vmax = y[k];
            umin = w;
            umax = -w;
        } else {
            ++k;
            umin += y[k] - vmin;
            umax += y[k] - vmax;
            if (umin >= w) {
                vmin += (umin - w) / (k - k0 + 1);
                umin = w;
                km = k;
            }
            if (umax <= -w) {
                vmax += (umax + w) / (k - k0 + 1);
                umax = -w;
                kp = k;
            }
        }
    }
}

bool tv_denoise_1d_certificate(const Eigen::VectorXd& y, const Eigen::VectorXd& m,
                               double w, double tol) {
    const int n = static_cast<int>(y.size());
    double cumulative = 0.0;
    for (int i = 0; i < n; ++i) {
        cumulative += m[i] - y[i];
        if (i == n - 1) {
            if (std::abs(cumulative) > tol) return false;
            break;
        }
        if (std::abs(cumulative) > w + tol) return false;
        const double jump = m[i + 1] - m[i];
        if (jump > tol && std::abs(cumulative - w) > tol) return false;
        if (jump < -tol && std::abs(cumulative + w) > tol) return false;
    }
    return true;
}

double berhu_prox_bruteforce(double x, double alpha, double eps) {
    auto objective = [&](double z) {
        const double a = std::abs(z);
        const double berhu = a <= eps ? a : (z * z + eps * eps) / (2.0 * eps);
        return alpha * berhu + 0.5 * (z - x) * (z - x);
    };
    // Coarse scan over a bracket that surely contains the minimizer.
    const double span = std::abs(x) + alpha + eps + 1.0;
    double best = 0.0, best_val = objective(0.0);
    const int samples = 4000;
    for (int i = 0; i <= samples; ++i) {
        const double z = -span + 2.0 * span * i / samples;
        const double val = objective(z);
        if (val < best_val) {
            best_val = val;
            best = z;
        }
    }
    // Golden-section refinement around the best sample.
    double lo = best - 2.0 * span / samples, hi = best + 2.0 * span / samples;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = objective(a), fb = objective(b);
    for (int it = 0; it < 200; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = objective(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = objective(b);
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<int> local_maxima_bruteforce(const Eigen::VectorXd& amplitude, int nz, int nx) {
    std::vector<int> out;
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nx; ++j) {
            const double v = amplitude[i * nx + j];
            if (v <= 0.0) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1 && is_max; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || ii >= nz || jj < 0 || jj >= nx) continue;
                    if (amplitude[ii * nx + jj] > v) is_max = false;
                }
            if (is_max) out.push_back(i * nx + j);
        }
    return out;
}

}  // namespace msfwi::oracles
