#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace msfwi {

/// One planted event as recorded in the provenance sidecar.
struct TrueEvent {
    double z_m = 0.0;
    double x_m = 0.0;
    double f_central_hz = 0.0;
    double t_central_s = 0.0;
};

/// Frequency-domain records of one blended-source experiment.
struct SpectraData {
    std::vector<double> omegas;                  // rad/s, strictly increasing
    std::vector<std::pair<int, int>> receivers;  // interior (iz, ix)
    std::vector<Eigen::VectorXcd> records;       // one length-Nr vector per frequency

    // Provenance (kept in a JSON sidecar next to the binary file).
    std::optional<std::uint64_t> seed;
    std::optional<double> snr_db;
    std::vector<TrueEvent> true_events;

    int n_frequencies() const { return static_cast<int>(omegas.size()); }
    int n_receivers() const { return static_cast<int>(receivers.size()); }
    void validate() const;
};

/// Binary layout: the 64-byte "MSFWI01 spc <q> <nr>" header, then q float64
/// angular frequencies, 2*nr int64 receiver indices, then q blocks of nr
/// complex128 samples.  Provenance goes to `path + ".meta.json"`.
void write_spectra(const SpectraData& data, const std::string& path);
SpectraData read_spectra(const std::string& path);

}  // namespace msfwi
