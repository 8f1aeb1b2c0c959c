#include "qsmooth/probes.hpp"

#include <cmath>
#include <random>

namespace qsmooth {

std::vector<WaveField> smoothing_probe_set(int version,
                                           std::shared_ptr<const MetricField> m) {
    if (version != 1)
        throw InvalidArgumentError("unknown smoothing probe-set version");
    const double R0 = m->R0();
    const std::array<Vec3, 3> centers = {
        Vec3{0, 0, 0}, Vec3{1.5 * R0, 0, 0}, Vec3{0, -2.0 * R0, 0}};
    const std::array<double, 2> widths = {0.5 * R0, 1.0 * R0};
    const std::array<Vec3, 2> mods = {Vec3{1.2 / R0, 0, 0},
                                      Vec3{0, 2.0 / R0, 0}};
    std::vector<WaveField> out;
    for (const auto& c : centers)
        for (double w : widths)
            for (const auto& k : mods) {
                Vec3 kk = k;
                if (m->grid().dim == 1) kk = {std::sqrt(norm2(k, 2)), 0, 0};
                Vec3 cc = c;
                if (m->grid().dim == 1) cc = {c[0] != 0 ? c[0] : c[1], 0, 0};
                out.push_back(gaussian_packet(m, cc, w, kk));
            }
    return out;
}

WaveField orbit_probe(std::shared_ptr<const MetricField> m, double r_orbit,
                      int angular_index) {
    return orbital_packet(std::move(m), r_orbit, angular_index);
}

WaveField band_limited_noise(std::shared_ptr<const MetricField> m, double k0,
                             std::uint64_t seed) {
    WaveField u = random_field(m, seed);
    const Grid& g = u.grid();
    Fft fft(g);
    fft.apply_symbol(u.v, [&](const Vec3& k) {
        return cplx(std::exp(-norm2(k, g.dim) / (k0 * k0)), 0);
    });
    const double n = l2_norm(u);
    if (n > 0) u *= cplx(1.0 / n, 0);
    return u;
}

std::vector<WaveField> decay_probe_set(int version,
                                       std::shared_ptr<const MetricField> m,
                                       const CutoffFamily& cutoffs, double R,
                                       std::uint64_t seed) {
    if (version != 1) throw InvalidArgumentError("unknown decay probe-set version");
    const Grid& g = m->grid();
    const BallCutoff ball = cutoffs.psi(R);
    const double width = 0.5 * ball.profile.r_zero;  // bump scale on the ball
    std::vector<WaveField> out;
    const std::array<double, 3> freqs = {0.0, 1.0, 2.0};
    for (double q : freqs) {
        WaveField u = gaussian_packet(m, ball.center, 0.5 * width,
                                      Vec3{q, 0.3 * q, 0});
        out.push_back(std::move(u));
    }
    // medium-band random field restricted to the ball
    WaveField noise = band_limited_noise(m, 1.5, seed);
    const auto mask = sample_ball(g, ball);
    noise.mask(mask);
    out.push_back(std::move(noise));
    for (auto& u : out) {
        const double n = l2_norm(u);
        if (n > 0) u *= cplx(1.0 / n, 0);
    }
    return out;
}

std::array<WaveField, 3> rage_vector_probe(std::shared_ptr<const MetricField> m,
                                           std::uint64_t seed) {
    const double R0 = m->R0();
    std::array<WaveField, 3> f{WaveField(m), WaveField(m), WaveField(m)};
    const int d = m->grid().dim;
    for (int a = 0; a < d; ++a) {
        Vec3 mod{0, 0, 0};
        mod[a] = 1.5 / R0;
        f[a] = gaussian_packet(m, Vec3{0.5 * R0 * a, 0, 0}, R0, mod);
        // small seeded perturbation so components are not aligned
        WaveField n = band_limited_noise(m, 2.0, seed + a);
        f[a].axpy(cplx(0.1, 0), n);
    }
    return f;
}

}  // namespace qsmooth
