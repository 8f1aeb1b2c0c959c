#include "qsmooth/multiplier.hpp"

#include <cmath>

namespace qsmooth {

MultiplierField::MultiplierField(std::shared_ptr<const MetricField> metric,
                                 double eps)
    : metric_(std::move(metric)), eps_(eps), R0_(metric_->R0()) {
    collar_ = RadialCutoff::ascend(2.0 * R0_, 3.0 * R0_, Transition::C4);
    const Grid& g = metric_->grid();
    a_.resize(g.size());
    for (int ax = 0; ax < g.dim; ++ax) grad_[ax].resize(g.size());
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        a_[idx] = value(x, g.dim);
        const Vec3 gr = grad(x, g.dim);
        for (int ax = 0; ax < g.dim; ++ax) grad_[ax][idx] = gr[ax];
    });
}

double MultiplierField::radial(double r, int order) const {
    // A = c(r) p(r), p = r - eps r^(1-eps); Leibniz with closed-form p
    if (r <= 2.0 * R0_) return 0.0;
    const double e = eps_;
    double p[5];
    p[0] = r - e * std::pow(r, 1.0 - e);
    p[1] = 1.0 - e * (1.0 - e) * std::pow(r, -e);
    p[2] = e * e * (1.0 - e) * std::pow(r, -1.0 - e);
    p[3] = -e * e * (1.0 - e) * (1.0 + e) * std::pow(r, -2.0 - e);
    p[4] = e * e * (1.0 - e) * (1.0 + e) * (2.0 + e) * std::pow(r, -3.0 - e);
    if (r >= 3.0 * R0_) return p[order];
    double c[5];
    for (int i = 0; i <= 4; ++i) c[i] = collar_.deriv(r, i);
    static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    double acc = 0;
    for (int i = 0; i <= order; ++i)
        acc += binom[order][i] * c[i] * p[order - i];
    return acc;
}

double MultiplierField::value(const Vec3& x, int dim) const {
    return radial(std::sqrt(norm2(x, dim)));
}

Vec3 MultiplierField::grad(const Vec3& x, int dim) const {
    const double r = std::sqrt(norm2(x, dim));
    Vec3 g{0, 0, 0};
    if (r <= 2.0 * R0_) return g;
    const double d = radial(r, 1) / r;
    for (int a = 0; a < dim; ++a) g[a] = d * x[a];
    return g;
}

double MultiplierField::hess_tangential(double r) const {
    return radial(r, 1) / r;
}

double MultiplierField::hess_radial(double r) const { return radial(r, 2); }

double MultiplierField::laplacian3(double r) const {
    return radial(r, 2) + 2.0 * radial(r, 1) / r;
}

double MultiplierField::bilaplacian3(double r) const {
    return radial(r, 4) + 4.0 * radial(r, 3) / r;
}

MultiplierField build_multiplier(std::shared_ptr<const MetricField> metric,
                                 double eps) {
    if (!(eps > 0 && eps <= 0.1))
        throw InvalidArgumentError("build_multiplier: need 0 < eps <= 0.1");
    const Grid& g = metric->grid();
    const double R0 = metric->R0();
    if (g.min_spacing() > R0 / 6.0)
        throw ResolutionError(
            "build_multiplier: < 6 grid points across the collar [2R0, 3R0]");
    return MultiplierField(std::move(metric), eps);
}

WaveField apply_commutator_multiplier(const Hamiltonian& H,
                                      const MultiplierField& a,
                                      const WaveField& u) {
    const Grid& g = H.grid();
    require_same_grid(g, u.grid());
    const int d = g.dim;

    std::array<std::vector<cplx>, 3> grad_u;
    H.fft().gradient(u.v, grad_u);

    // first term: a_{,k} D_k u ; second term: D_k (a_{,k} u)
    WaveField out(u.metric);
    std::vector<cplx> prod(g.size()), acc(g.size(), cplx(0, 0)), ph;
    for (int k = 0; k < d; ++k) {
        const auto& ak = a.grad_component(k);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            out.v[i] += ak[i] * grad_u[k][i];
            prod[i] = ak[i] * u.v[i];
        }
        H.fft().forward(prod, ph);
        for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& kk) {
            acc[idx] += cplx(0.0, kk[k]) * ph[idx];
        });
    }
    std::vector<cplx> div;
    H.fft().backward(acc, div);
    for (std::int64_t i = 0; i < g.size(); ++i)
        out.v[i] = cplx(0, -1) * (out.v[i] + div[i]);
    return out;
}

std::vector<double> multiplier_pairing_series(const MultiplierField& a,
                                              const WaveField& u0, double t0,
                                              double dt, int nt,
                                              const Propagator& prop) {
    const Hamiltonian& H = prop.hamiltonian();
    std::vector<double> q(nt);
    Evolution ev(prop, u0);
    for (int j = 0; j < nt; ++j) {
        ev.advance_to(t0 + j * dt);
        const WaveField Au = apply_commutator_multiplier(H, a, ev.state());
        q[j] = inner_product(Au, ev.state()).real();
    }
    return q;
}

double heisenberg_residual(const MultiplierField& a, const WaveField& u0,
                           double t0, double dt, int nt,
                           const Propagator& prop) {
    if (nt < 3)
        throw InvalidArgumentError("heisenberg_residual: need >= 3 grid times");
    const Hamiltonian& H = prop.hamiltonian();

    std::vector<double> q(nt), c(nt);
    Evolution ev(prop, u0);
    for (int j = 0; j < nt; ++j) {
        ev.advance_to(t0 + j * dt);
        const WaveField& u = ev.state();
        const WaveField Au = apply_commutator_multiplier(H, a, u);
        q[j] = inner_product(Au, u).real();
        // <i[H,A]u, u> = i(<HAu,u> - <AHu,u>)
        const WaveField HAu = H.apply(Au);
        const WaveField AHu = apply_commutator_multiplier(H, a, H.apply(u));
        const cplx comm = cplx(0, 1) * (inner_product(HAu, u) - inner_product(AHu, u));
        c[j] = comm.real();
    }
    double res = 0;
    for (int j = 1; j + 1 < nt; ++j) {
        const double dq = (q[j + 1] - q[j - 1]) / (2.0 * dt);
        res = std::max(res, std::abs(dq - c[j]));
    }
    return res;
}

SignScanReport bilaplacian_sign_scan(const MultiplierField& a,
                                     const std::vector<double>& radii) {
    SignScanReport rep;
    const double e = a.eps();
    rep.c_eps = e * e * (1.0 - e) * (2.0 - e) * (1.0 + e);
    rep.pass = true;
    for (double r : radii) {
        if (r < 3.0 * a.R0())
            throw InvalidArgumentError("bilaplacian_sign_scan: radius < 3 R0");
        SignScanRow row;
        row.radius = r;
        row.bilaplacian = a.bilaplacian3(r);
        row.weighted = row.bilaplacian * std::pow(r, 3.0 + e);
        // degenerate eps -> 0 limit reports FAIL-by-zero
        row.pass = row.weighted <= -rep.c_eps + 1e-12 && row.weighted < 0;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace qsmooth
