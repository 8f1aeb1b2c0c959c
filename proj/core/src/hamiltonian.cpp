#include "qsmooth/hamiltonian.hpp"

#include <cmath>
#include <random>

namespace qsmooth {

WaveField gaussian_packet(std::shared_ptr<const MetricField> m, const Vec3& center,
                          double width, const Vec3& modulation) {
    WaveField u(std::move(m));
    const Grid& g = u.grid();
    const double inv4w2 = 1.0 / (4.0 * width * width);
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
        const double r2 = norm2(d, g.dim);
        const double ph = dot(modulation, x, g.dim);
        u.v[idx] = std::exp(-r2 * inv4w2) * cplx(std::cos(ph), std::sin(ph));
    });
    return u;
}

WaveField plane_wave(std::shared_ptr<const MetricField> m,
                     const std::array<int, 3>& modes) {
    WaveField u(std::move(m));
    const Grid& g = u.grid();
    Vec3 k{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) k[a] = 2.0 * M_PI * modes[a] / g.extent[a];
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        const double ph = dot(k, x, g.dim);
        u.v[idx] = cplx(std::cos(ph), std::sin(ph));
    });
    return u;
}

WaveField random_field(std::shared_ptr<const MetricField> m, std::uint64_t seed) {
    WaveField u(std::move(m));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& x : u.v) x = cplx(nd(rng), nd(rng));
    return u;
}

WaveField orbital_packet(std::shared_ptr<const MetricField> m, double r_orbit,
                         int mm) {
    WaveField u(std::move(m));
    const Grid& g = u.grid();
    if (g.dim < 2) throw InvalidArgumentError("orbital_packet needs dim >= 2");
    const double a = double(mm) / (2.0 * r_orbit * r_orbit);
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        const cplx z(x[0], x[1]);
        u.v[idx] = std::pow(z / r_orbit, mm) * std::exp(-a * norm2(x, g.dim));
    });
    return u;
}

Hamiltonian::Hamiltonian(std::shared_ptr<const MetricField> m)
    : metric_(std::move(m)), fft_(metric_->grid()) {
    const Grid& g = grid();
    resolution_warning_ = metric_->points_across_bump() < 8.0;
    // lambda <= 1/2 max_eig(g^-1) k_max^2 (Rayleigh bound, all axes)
    double k2 = 0;
    for (int a = 0; a < g.dim; ++a) {
        const double kn = M_PI / g.spacing(a);
        k2 += kn * kn;
    }
    lambda_max_ = 0.5 * metric_->max_inverse_eigenvalue() * k2;
    if (!metric_->is_flat()) {
        const auto& rho = metric_->sqrt_det();
        for (int p = 0; p < 6; ++p) {
            const auto& gi = metric_->inverse_component(p);
            weight_[p].resize(g.size());
            for (std::int64_t i = 0; i < g.size(); ++i)
                weight_[p][i] = rho[i] * gi[i];
        }
    }
}

WaveField Hamiltonian::apply(const WaveField& u) const {
    require_same_grid(grid(), u.grid());
    const Grid& g = grid();
    WaveField out(u.metric ? u.metric : metric_);

    if (metric_->is_flat()) {
        out.v = u.v;
        fft_.apply_symbol(out.v, [&](const Vec3& k) {
            return cplx(0.5 * norm2(k, g.dim), 0.0);
        });
        return out;
    }

    const int d = g.dim;
    std::array<std::vector<cplx>, 3> grad;
    fft_.gradient(u.v, grad);

    // w_j = sqrt(det g) g^{jk} D_k u
    std::array<std::vector<cplx>, 3> w;
    for (int j = 0; j < d; ++j) {
        w[j].assign(g.size(), cplx(0, 0));
        for (int k = 0; k < d; ++k) {
            const auto& wt = weight_[sym_index(j, k)];
            for (std::int64_t i = 0; i < g.size(); ++i)
                w[j][i] += wt[i] * grad[k][i];
        }
    }

    // Hu = -(1/(2 rho)) D_j w_j
    std::vector<cplx> acc(g.size(), cplx(0, 0)), wh, tmp;
    for (int j = 0; j < d; ++j) {
        fft_.forward(w[j], wh);
        for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
            acc[idx] += cplx(0.0, k[j]) * wh[idx];
        });
    }
    fft_.backward(acc, out.v);
    const auto& rho = metric_->sqrt_det();
    for (std::int64_t i = 0; i < g.size(); ++i) out.v[i] *= -0.5 / rho[i];
    return out;
}

cplx inner_product(const WaveField& u, const WaveField& v) {
    require_same_grid(u.grid(), v.grid());
    const auto& rho = u.metric->sqrt_det();
    const double dv = u.grid().cell_volume();
    cplx acc(0, 0);
    for (std::size_t i = 0; i < u.v.size(); ++i)
        acc += u.v[i] * std::conj(v.v[i]) * rho[i];
    return acc * dv;
}

double l2_norm(const WaveField& u) {
    const auto& rho = u.metric->sqrt_det();
    double acc = 0;
    for (std::size_t i = 0; i < u.v.size(); ++i)
        acc += std::norm(u.v[i]) * rho[i];
    return std::sqrt(acc * u.grid().cell_volume());
}

double weighted_l2_norm(const WaveField& u, const std::vector<double>& w) {
    const auto& rho = u.metric->sqrt_det();
    double acc = 0;
    for (std::size_t i = 0; i < u.v.size(); ++i)
        acc += std::norm(u.v[i]) * w[i] * w[i] * rho[i];
    return std::sqrt(acc * u.grid().cell_volume());
}

std::vector<double> covariant_grad_sq(const Hamiltonian& H, const WaveField& u) {
    const Grid& g = H.grid();
    require_same_grid(g, u.grid());
    std::array<std::vector<cplx>, 3> grad;
    H.fft().gradient(u.v, grad);
    std::vector<double> out(g.size(), 0.0);
    const int d = g.dim;
    const MetricField& m = H.metric();
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const auto& gi = m.inverse_component(sym_index(j, k));
            for (std::int64_t i = 0; i < g.size(); ++i)
                out[i] += gi[i] *
                          (grad[k][i] * std::conj(grad[j][i])).real();
        }
    return out;
}

double weighted_grad_norm(const Hamiltonian& H, const WaveField& u,
                          const std::vector<double>& w) {
    const auto gsq = covariant_grad_sq(H, u);
    const auto& rho = H.metric().sqrt_det();
    double acc = 0;
    for (std::size_t i = 0; i < gsq.size(); ++i)
        acc += std::max(0.0, gsq[i]) * w[i] * w[i] * rho[i];
    return std::sqrt(acc * H.grid().cell_volume());
}

WaveField weighted_divergence(const Hamiltonian& H,
                              const std::array<WaveField, 3>& f,
                              const std::vector<double>& phi) {
    const Grid& g = H.grid();
    const auto& rho = H.metric().sqrt_det();
    std::vector<cplx> acc(g.size(), cplx(0, 0)), comp, ch;
    for (int j = 0; j < g.dim; ++j) {
        require_same_grid(g, f[j].grid());
        comp.resize(g.size());
        for (std::int64_t i = 0; i < g.size(); ++i)
            comp[i] = rho[i] * phi[i] * f[j].v[i];
        H.fft().forward(comp, ch);
        for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
            acc[idx] += cplx(0.0, k[j]) * ch[idx];
        });
    }
    WaveField out(f[0].metric);
    H.fft().backward(acc, out.v);
    for (std::int64_t i = 0; i < g.size(); ++i) out.v[i] /= rho[i];
    return out;
}

double spectral_mass_above(const Fft& fft, const WaveField& u, double kc) {
    std::vector<cplx> uh;
    fft.forward(u.v, uh);
    double total = 0, above = 0;
    const double kc2 = kc * kc;
    for_each_wavenumber(fft.grid(), [&](std::int64_t idx, const Vec3& k) {
        const double m = std::norm(uh[idx]);
        total += m;
        if (norm2(k, fft.grid().dim) > kc2) above += m;
    });
    return total > 0 ? above / total : 0.0;
}

double occupied_band(const Fft& fft, const WaveField& u, double frac) {
    std::vector<cplx> uh;
    fft.forward(u.v, uh);
    // histogram mass by |k|, then scan for the (1-frac) quantile
    const Grid& g = fft.grid();
    const double kmax = g.k_max() * std::sqrt(double(g.dim));
    const int nb = 512;
    std::vector<double> hist(nb + 1, 0.0);
    double total = 0;
    for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
        const double m = std::norm(uh[idx]);
        const double kk = std::sqrt(norm2(k, g.dim));
        int b = int(kk / kmax * nb);
        b = std::min(b, nb);
        hist[b] += m;
        total += m;
    });
    if (total <= 0) return 0.0;
    double acc = 0;
    for (int b = nb; b >= 0; --b) {
        acc += hist[b];
        if (acc > frac * total) return (b + 1) * kmax / nb;
    }
    return 0.0;
}

}  // namespace qsmooth
