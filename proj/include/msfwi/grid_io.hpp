#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "msfwi/model.hpp"

namespace msfwi {

/// Gridded quantities share one container format: a 64-byte text header
/// ("MSFWI01 <dtype> <nz> <nx> <h>" padded with spaces) followed by raw
/// little-endian float64 payload, interleaved re/im pairs for c128.
struct GridData {
    int nz = 0;
    int nx = 0;
    double h = 0.0;
    bool is_complex = false;
    Eigen::VectorXd real_values;
    Eigen::VectorXcd complex_values;
};

void write_grid_file(const std::string& path, int nz, int nx, double h,
                     const Eigen::VectorXd& values);
void write_grid_file(const std::string& path, int nz, int nx, double h,
                     const Eigen::VectorXcd& values);

/// Rejects malformed headers, payload size mismatches and non-finite data.
GridData read_grid_file(const std::string& path);

void write_model(const Model& model, const std::string& path);

/// Reads the interior squared-slowness grid; pml_width and the velocity
/// bounds are run-configuration, not file, properties.
Model read_model(const std::string& path, int pml_width,
                 double v_min_mps, double v_max_mps);

}  // namespace msfwi
