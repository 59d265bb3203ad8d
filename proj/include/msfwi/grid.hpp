#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace msfwi {

/// 2D regular grid of square cells.
///
/// The interior (the region where the model is defined and where sources
/// and receivers may live) is nz x nx.  Absorbing layers of `pml_width`
/// cells are appended on the left, right and bottom sides; the top row is
/// a free surface and carries no padding.  All operators act on the padded
/// grid; indexing is row-major: flat = i * nx_pad() + j with i the depth
/// row and j the horizontal column.
struct Grid {
    int nz = 0;          // interior depth samples
    int nx = 0;          // interior horizontal samples
    double h = 0.0;      // grid spacing [m], square cells
    int pml_width = 20;  // absorbing cells on left/right/bottom

    Grid() = default;
    Grid(int nz_, int nx_, double h_, int pml_width_ = 20)
        : nz(nz_), nx(nx_), h(h_), pml_width(pml_width_) {
        if (nz < 3 || nx < 3)
            throw std::invalid_argument("Grid: need nz >= 3 and nx >= 3");
        if (!(h > 0.0))
            throw std::invalid_argument("Grid: spacing h must be positive");
        if (pml_width < 0)
            throw std::invalid_argument("Grid: pml_width must be >= 0");
    }

    int nz_pad() const { return nz + pml_width; }
    int nx_pad() const { return nx + 2 * pml_width; }
    int n_interior() const { return nz * nx; }
    int n_pad() const { return nz_pad() * nx_pad(); }

    /// Row-major flat index on the padded grid.
    int flat(int i, int j) const {
        if (i < 0 || i >= nz_pad() || j < 0 || j >= nx_pad())
            throw std::out_of_range("Grid::flat: padded index (" + std::to_string(i) +
                                    "," + std::to_string(j) + ") out of range");
        return i * nx_pad() + j;
    }

    /// Inverse of flat(): padded (i, j) from a flat index.
    std::pair<int, int> unflat(int k) const {
        if (k < 0 || k >= n_pad())
            throw std::out_of_range("Grid::unflat: flat index out of range");
        return {k / nx_pad(), k % nx_pad()};
    }

    /// Row-major flat index on the interior grid.
    int interior_flat(int iz, int ix) const {
        if (!is_interior(iz, ix))
            throw std::out_of_range("Grid::interior_flat: index out of range");
        return iz * nx + ix;
    }

    std::pair<int, int> interior_unflat(int k) const {
        if (k < 0 || k >= n_interior())
            throw std::out_of_range("Grid::interior_unflat: flat index out of range");
        return {k / nx, k % nx};
    }

    bool is_interior(int iz, int ix) const {
        return iz >= 0 && iz < nz && ix >= 0 && ix < nx;
    }

    /// Maps an interior cell to its flat index on the padded grid.
    int interior_to_padded(int iz, int ix) const {
        if (!is_interior(iz, ix))
            throw std::out_of_range("Grid::interior_to_padded: index out of range");
        return iz * nx_pad() + (ix + pml_width);
    }

    /// Whether a padded cell lies in the interior region.
    bool padded_is_interior(int i, int j) const {
        return i >= 0 && i < nz && j >= pml_width && j < pml_width + nx;
    }

    bool operator==(const Grid&) const = default;
};

/// m = 1/v^2 [s^2/m^2] from velocity [m/s].
inline double velocity_to_slowness_squared(double v) { return 1.0 / (v * v); }

/// v = 1/sqrt(m) [m/s] from squared slowness [s^2/m^2].
inline double slowness_squared_to_velocity(double m) { return 1.0 / std::sqrt(m); }

}  // namespace msfwi
