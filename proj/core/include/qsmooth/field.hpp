#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qsmooth/metric.hpp"

namespace qsmooth {

// Complex grid function with its metric context (the grid lives on the
// metric). Plain value semantics; all operations leave inputs untouched.
struct WaveField {
    std::shared_ptr<const MetricField> metric;
    std::vector<cplx> v;

    WaveField() = default;
    explicit WaveField(std::shared_ptr<const MetricField> m)
        : metric(std::move(m)), v(metric->grid().size(), cplx(0, 0)) {}

    const Grid& grid() const { return metric->grid(); }
    std::int64_t size() const { return std::int64_t(v.size()); }

    WaveField& operator*=(cplx a) {
        for (auto& x : v) x *= a;
        return *this;
    }
    WaveField& operator+=(const WaveField& o) {
        require_same_grid(grid(), o.grid());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    WaveField& operator-=(const WaveField& o) {
        require_same_grid(grid(), o.grid());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    // this += a * o
    WaveField& axpy(cplx a, const WaveField& o) {
        require_same_grid(grid(), o.grid());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * o.v[i];
        return *this;
    }
    // pointwise multiply by a real mask
    WaveField& mask(const std::vector<double>& w) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
        return *this;
    }
};

inline WaveField operator+(WaveField a, const WaveField& b) { return a += b; }
inline WaveField operator-(WaveField a, const WaveField& b) { return a -= b; }
inline WaveField operator*(cplx s, WaveField a) { return a *= s; }

// Gaussian bump exp(-|x-c|^2 / (4 w^2)) * exp(i k.x).
WaveField gaussian_packet(std::shared_ptr<const MetricField> m, const Vec3& center,
                          double width, const Vec3& modulation = {0, 0, 0});

// Plane wave exp(i k.x) with k = 2 pi modes / L (grid-commensurate).
WaveField plane_wave(std::shared_ptr<const MetricField> m,
                     const std::array<int, 3>& modes);

// Complex white noise, deterministic in the seed.
WaveField random_field(std::shared_ptr<const MetricField> m, std::uint64_t seed);

// Coherent state riding the circle of radius r_orbit with angular index mm:
// (x0 + i x1)^mm * exp(-mm |x|^2 / (2 r_orbit^2)), dim >= 2. Peaks on
// |x| = r_orbit with tangential phase velocity; used as the orbit probe.
WaveField orbital_packet(std::shared_ptr<const MetricField> m, double r_orbit,
                         int mm);

}  // namespace qsmooth
