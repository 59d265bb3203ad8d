#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace msfwi {

/// Ricker amplitude spectrum with unit peak, delayed by t_central:
///   W(omega) = (omega/omega_p)^2 exp(1 - (omega/omega_p)^2) exp(-i omega t_c)
/// with omega_p = 2 pi f_central.  |W| peaks at omega = omega_p.
std::complex<double> ricker_spectrum(double f_central_hz, double t_central_s, double omega);

/// Hermitian-symmetric inverse synthesis over the sampled band:
///   x_r(t) = sum_k Re[ X_k(r) exp(i omega_k t) ].
/// spectra is n_receivers x n_frequencies; the result is n_receivers x n_times.
Eigen::MatrixXd synthesize_seismograms(const Eigen::MatrixXcd& spectra,
                                       const std::vector<double>& omegas,
                                       const Eigen::VectorXd& times);

/// Uniform time axis [0, duration) with the given step.
Eigen::VectorXd uniform_time_axis(double duration_s, double dt_s);

}  // namespace msfwi
