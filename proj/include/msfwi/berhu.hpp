#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace msfwi {

/// Parameters of the Berhu (reverse Huber) proximity operator.
struct BerhuParams {
    double epsilon = 1.0;  // l1 -> l2 crossover, in source-amplitude units
    double alpha = 1.0;    // prox step, 1/(lambda q) in the mean-source update

    BerhuParams(double eps, double a) : epsilon(eps), alpha(a) {
        if (!(epsilon > 0.0) || !(alpha > 0.0))
            throw std::invalid_argument("BerhuParams: epsilon and alpha must be positive");
    }
};

/// Berhu penalty: |x| for |x| <= eps, (x^2 + eps^2)/(2 eps) beyond.
/// Continuous and convex; l1 near zero (sparsifying), l2 for large values.
inline double berhu_value(double x, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("berhu_value: eps must be positive");
    const double a = std::abs(x);
    return a <= eps ? a : (x * x + eps * eps) / (2.0 * eps);
}

/// prox of alpha * Berhu: soft threshold up to |x| = alpha + epsilon, then a
/// linear shrink by epsilon/(alpha + epsilon).
inline double berhu_prox(double x, const BerhuParams& p) {
    const double a = std::abs(x);
    if (a <= p.alpha) return 0.0;
    if (a <= p.alpha + p.epsilon) return (1.0 - p.alpha / a) * x;
    return p.epsilon / (p.alpha + p.epsilon) * x;
}

/// Complex extension: the modulus is thresholded, the phase preserved.
inline std::complex<double> berhu_prox(std::complex<double> x, const BerhuParams& p) {
    const double a = std::abs(x);
    if (a <= p.alpha) return {0.0, 0.0};
    if (a <= p.alpha + p.epsilon) return (1.0 - p.alpha / a) * x;
    return p.epsilon / (p.alpha + p.epsilon) * x;
}

inline void berhu_prox_in_place(Eigen::VectorXcd& v, const BerhuParams& p) {
    for (long k = 0; k < v.size(); ++k) v[k] = berhu_prox(v[k], p);
}

}  // namespace msfwi
