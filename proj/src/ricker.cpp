#include "msfwi/ricker.hpp"

#include <cmath>
#include <stdexcept>

namespace msfwi {

std::complex<double> ricker_spectrum(double f_central_hz, double t_central_s, double omega) {
    if (!(f_central_hz > 0.0))
        throw std::invalid_argument("ricker_spectrum: central frequency must be positive");
    const double wp = 2.0 * M_PI * f_central_hz;
    const double ratio = (omega / wp) * (omega / wp);
    const double amplitude = ratio * std::exp(1.0 - ratio);
    return amplitude * std::exp(std::complex<double>(0.0, -omega * t_central_s));
}

Eigen::MatrixXd synthesize_seismograms(const Eigen::MatrixXcd& spectra,
                                       const std::vector<double>& omegas,
                                       const Eigen::VectorXd& times) {
    if (spectra.cols() != static_cast<long>(omegas.size()))
        throw std::invalid_argument("synthesize_seismograms: spectra/frequency count mismatch");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spectra.rows(), times.size());
    for (long it = 0; it < times.size(); ++it) {
        const double t = times[it];
        for (size_t k = 0; k < omegas.size(); ++k) {
            const std::complex<double> carrier = std::exp(std::complex<double>(0.0, omegas[k] * t));
            for (long r = 0; r < spectra.rows(); ++r)
                out(r, it) += (spectra(r, k) * carrier).real();
        }
    }
    return out;
}

Eigen::VectorXd uniform_time_axis(double duration_s, double dt_s) {
    if (!(duration_s > 0.0) || !(dt_s > 0.0))
        throw std::invalid_argument("uniform_time_axis: duration and dt must be positive");
    const long n = static_cast<long>(std::floor(duration_s / dt_s)) + 1;
    Eigen::VectorXd t(n);
    for (long k = 0; k < n; ++k) t[k] = k * dt_s;
    return t;
}

}  // namespace msfwi
