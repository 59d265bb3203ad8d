#include "msfwi/grid_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "msfwi/errors.hpp"

namespace msfwi {

namespace {

constexpr int kHeaderSize = 64;
constexpr const char* kMagic = "MSFWI01";

std::string format_header(const char* dtype, int nz, int nx, double h) {
    char buf[kHeaderSize + 1];
    std::snprintf(buf, sizeof(buf), "%s %s %d %d %.17g", kMagic, dtype, nz, nx, h);
    std::string header(buf);
    if (header.size() >= kHeaderSize)
        throw IoError("grid header overflow");
    header.resize(kHeaderSize, ' ');
    header[kHeaderSize - 1] = '\n';
    return header;
}

void write_payload(const std::string& path, const std::string& header,
                   const double* data, size_t count) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out.write(header.data(), kHeaderSize);
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

}  // namespace

void write_grid_file(const std::string& path, int nz, int nx, double h,
                     const Eigen::VectorXd& values) {
    if (values.size() != static_cast<long>(nz) * nx)
        throw IoError("write_grid_file: value count does not match nz*nx");
    write_payload(path, format_header("f64", nz, nx, h), values.data(), values.size());
}

void write_grid_file(const std::string& path, int nz, int nx, double h,
                     const Eigen::VectorXcd& values) {
    if (values.size() != static_cast<long>(nz) * nx)
        throw IoError("write_grid_file: value count does not match nz*nx");
    write_payload(path, format_header("c128", nz, nx, h),
                  reinterpret_cast<const double*>(values.data()), 2 * values.size());
}

GridData read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");

    char header[kHeaderSize + 1] = {};
    in.read(header, kHeaderSize);
    if (in.gcount() != kHeaderSize)
        throw IoError("'" + path + "': truncated header");

    char magic[16] = {}, dtype[16] = {};
    GridData g;
    if (std::sscanf(header, "%15s %15s %d %d %lg", magic, dtype, &g.nz, &g.nx, &g.h) != 5)
        throw IoError("'" + path + "': malformed header");
    if (std::strcmp(magic, kMagic) != 0)
        throw IoError("'" + path + "': bad magic '" + magic + "'");
    if (g.nz <= 0 || g.nx <= 0 || !(g.h > 0.0) || !std::isfinite(g.h))
        throw IoError("'" + path + "': invalid header dimensions");

    const long n = static_cast<long>(g.nz) * g.nx;
    if (std::strcmp(dtype, "f64") == 0)
        g.is_complex = false;
    else if (std::strcmp(dtype, "c128") == 0)
        g.is_complex = true;
    else
        throw IoError("'" + path + "': unknown dtype '" + dtype + "'");

    const long doubles = g.is_complex ? 2 * n : n;
    in.seekg(0, std::ios::end);
    const long payload_bytes = static_cast<long>(in.tellg()) - kHeaderSize;
    if (payload_bytes != doubles * static_cast<long>(sizeof(double)))
        throw IoError("'" + path + "': dimension mismatch, header declares " +
                      std::to_string(g.nz) + "x" + std::to_string(g.nx) + " but payload holds " +
                      std::to_string(payload_bytes / sizeof(double)) + " float64 values");
    in.seekg(kHeaderSize);

    if (g.is_complex) {
        g.complex_values.resize(n);
        in.read(reinterpret_cast<char*>(g.complex_values.data()), doubles * sizeof(double));
    } else {
        g.real_values.resize(n);
        in.read(reinterpret_cast<char*>(g.real_values.data()), doubles * sizeof(double));
    }
    if (!in)
        throw IoError("'" + path + "': truncated payload");

    const double* raw = g.is_complex ? reinterpret_cast<const double*>(g.complex_values.data())
                                     : g.real_values.data();
    for (long k = 0; k < doubles; ++k)
        if (!std::isfinite(raw[k]))
            throw IoError("'" + path + "': non-finite value at element " + std::to_string(k));
    return g;
}

void write_model(const Model& model, const std::string& path) {
    write_grid_file(path, model.grid.nz, model.grid.nx, model.grid.h, model.m);
}

Model read_model(const std::string& path, int pml_width,
                 double v_min_mps, double v_max_mps) {
    GridData g = read_grid_file(path);
    if (g.is_complex)
        throw IoError("'" + path + "': model files must be real (f64)");
    Grid grid(g.nz, g.nx, g.h, pml_width);
    return Model::with_velocity_bounds(grid, std::move(g.real_values), v_min_mps, v_max_mps);
}

}  // namespace msfwi
