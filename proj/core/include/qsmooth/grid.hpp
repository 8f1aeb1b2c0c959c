#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "qsmooth/errors.hpp"

namespace qsmooth {

using cplx = std::complex<double>;

using Vec3 = std::array<double, 3>;

inline Vec3 vec3(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline double dot(const Vec3& a, const Vec3& b, int dim) {
    double s = 0;
    for (int j = 0; j < dim; ++j) s += a[j] * b[j];
    return s;
}

inline double norm2(const Vec3& a, int dim) {
    double s = 0;
    for (int j = 0; j < dim; ++j) s += a[j] * a[j];
    return s;
}

// Periodic uniform grid on the centered box [-L/2, L/2)^dim, row-major with
// the last axis contiguous (FFTW layout). Unused trailing axes have n = 1.
struct Grid {
    int dim = 0;
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> extent{0, 0, 0};

    Grid() = default;
    Grid(int dim_, std::array<int, 3> n_, std::array<double, 3> extent_);

    // Isotropic shorthand: n points and extent L per axis.
    static Grid cubic(int dim, int n, double extent);

    std::int64_t size() const {
        return std::int64_t(n[0]) * n[1] * n[2];
    }
    double spacing(int axis) const { return extent[axis] / n[axis]; }
    double min_spacing() const;
    // Smallest half-width of the box over axes.
    double half_width() const;
    double cell_volume() const;

    std::int64_t index(int i0, int i1, int i2) const {
        return (std::int64_t(i0) * n[1] + i1) * n[2] + i2;
    }
    // Coordinate of grid point along one axis: -L/2 + i*h.
    double coord(int axis, int i) const {
        return -0.5 * extent[axis] + spacing(axis) * i;
    }
    Vec3 point(std::int64_t flat) const;

    // Wavenumber along axis for FFT index i (2*pi*m/L, m in [-n/2, n/2)).
    double wavenumber(int axis, int i) const;
    // Same but with the Nyquist plane zeroed; used by derivative multipliers
    // so spectral differentiation maps real fields to real fields.
    double wavenumber_deriv(int axis, int i) const;
    // Largest |k| representable (Nyquist magnitude, max over axes).
    double k_max() const;

    bool operator==(const Grid& o) const {
        return dim == o.dim && n == o.n && extent == o.extent;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (a != b) throw GridMismatchError("grid mismatch between fields");
}

// Iterate all grid points, calling f(flat_index, x).
template <typename F>
void for_each_point(const Grid& g, F&& f) {
    std::int64_t idx = 0;
    for (int i0 = 0; i0 < g.n[0]; ++i0) {
        const double x0 = g.coord(0, i0);
        for (int i1 = 0; i1 < g.n[1]; ++i1) {
            const double x1 = g.dim > 1 ? g.coord(1, i1) : 0.0;
            for (int i2 = 0; i2 < g.n[2]; ++i2, ++idx) {
                const double x2 = g.dim > 2 ? g.coord(2, i2) : 0.0;
                f(idx, Vec3{x0, x1, x2});
            }
        }
    }
}

// Iterate all lattice wavenumbers, calling f(flat_index, k) with the
// derivative convention (Nyquist zeroed).
template <typename F>
void for_each_wavenumber(const Grid& g, F&& f) {
    std::int64_t idx = 0;
    for (int i0 = 0; i0 < g.n[0]; ++i0) {
        const double k0 = g.wavenumber_deriv(0, i0);
        for (int i1 = 0; i1 < g.n[1]; ++i1) {
            const double k1 = g.dim > 1 ? g.wavenumber_deriv(1, i1) : 0.0;
            for (int i2 = 0; i2 < g.n[2]; ++i2, ++idx) {
                const double k2 = g.dim > 2 ? g.wavenumber_deriv(2, i2) : 0.0;
                f(idx, Vec3{k0, k1, k2});
            }
        }
    }
}

}  // namespace qsmooth
