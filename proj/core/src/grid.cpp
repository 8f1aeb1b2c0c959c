#include "qsmooth/grid.hpp"

#include <algorithm>
#include <cmath>

namespace qsmooth {

Grid::Grid(int dim_, std::array<int, 3> n_, std::array<double, 3> extent_)
    : dim(dim_), n(n_), extent(extent_) {
    if (dim < 1 || dim > 3) throw InvalidArgumentError("grid dim must be 1, 2 or 3");
    for (int a = 0; a < 3; ++a) {
        if (a < dim) {
            if (n[a] < 2) throw InvalidArgumentError("grid needs >= 2 points per axis");
            if (extent[a] <= 0) throw InvalidArgumentError("grid extent must be positive");
        } else {
            n[a] = 1;
            extent[a] = 0;
        }
    }
}

Grid Grid::cubic(int dim, int nn, double L) {
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> e{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        n[a] = nn;
        e[a] = L;
    }
    return Grid(dim, n, e);
}

double Grid::min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim; ++a) h = std::min(h, spacing(a));
    return h;
}

double Grid::half_width() const {
    double w = 0.5 * extent[0];
    for (int a = 1; a < dim; ++a) w = std::min(w, 0.5 * extent[a]);
    return w;
}

double Grid::cell_volume() const {
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
}

Vec3 Grid::point(std::int64_t flat) const {
    const int i2 = int(flat % n[2]);
    const int i1 = int((flat / n[2]) % n[1]);
    const int i0 = int(flat / (std::int64_t(n[1]) * n[2]));
    Vec3 x{coord(0, i0), 0, 0};
    if (dim > 1) x[1] = coord(1, i1);
    if (dim > 2) x[2] = coord(2, i2);
    return x;
}

double Grid::wavenumber(int axis, int i) const {
    const int nn = n[axis];
    const int m = (i <= nn / 2 - 1 || nn == 1) ? i : i - nn;
    return 2.0 * M_PI * m / extent[axis];
}

double Grid::wavenumber_deriv(int axis, int i) const {
    const int nn = n[axis];
    if (nn % 2 == 0 && i == nn / 2) return 0.0;  // Nyquist zeroed
    return wavenumber(axis, i);
}

double Grid::k_max() const {
    double km = 0;
    for (int a = 0; a < dim; ++a) km = std::max(km, M_PI / spacing(a));
    return km;
}

}  // namespace qsmooth
