#include "qsmooth/propagator.hpp"

#include <cmath>

namespace qsmooth {

Propagator::Propagator(std::shared_ptr<const Hamiltonian> H, PropagatorConfig cfg)
    : H_(std::move(H)), cfg_(cfg) {
    if (cfg_.dt <= 0) throw InvalidArgumentError("propagator dt must be > 0");
    if (cfg_.scheme == Scheme::SplitStep && !H_->flat())
        throw InvalidArgumentError(
            "split-step scheme is exact only for the flat metric; use "
            "krylov or chebyshev on curved metrics");
    if (cfg_.sponge.on) {
        const Grid& g = H_->grid();
        const double hw = g.half_width();
        if (cfg_.sponge.onset >= hw)
            throw InvalidArgumentError("sponge onset beyond the box half-width");
        sponge_half_.resize(g.size());
        const double w = hw - cfg_.sponge.onset;
        for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
            const double r = std::sqrt(norm2(x, g.dim));
            const double q = std::max(0.0, (r - cfg_.sponge.onset) / w);
            sponge_half_[idx] =
                std::exp(-0.5 * cfg_.sponge.strength * q * q * cfg_.dt);
        });
    }
}

double Propagator::horizon_guard(double v) const {
    if (cfg_.sponge.on) return std::numeric_limits<double>::infinity();
    const double margin = H_->grid().half_width() - 8.0 * H_->metric().R0();
    if (margin <= 0) return 0.0;
    return margin / std::max(v, 1e-12);
}

double Propagator::velocity_bound(const WaveField& u0) const {
    if (cfg_.v_max > 0) return cfg_.v_max;
    const double k_occ = occupied_band(H_->fft(), u0);
    return std::max(1e-12, k_occ * H_->metric().max_inverse_eigenvalue());
}

double Propagator::horizon_guard(const WaveField& u0) const {
    return horizon_guard(velocity_bound(u0));
}

void Propagator::step_chebyshev(WaveField& u, double dt) const {
    // expansion of exp(-i dt lambda) on [0, lmax] in Chebyshev polynomials:
    // coefficients from Bessel functions of the first kind.
    const double lmax = H_->lambda_max_bound() * 1.02;
    const double half = 0.5 * lmax;
    const double z = dt * half;  // sign carried separately
    const double az = std::abs(z);
    const cplx phase = std::exp(cplx(0, -z));
    const int mmax = int(az + 40.0 + 12.0 * std::log(1.0 + az));

    // T_k recurrence on Hs = H/half - 1
    auto apply_hs = [&](const WaveField& x) {
        WaveField y = H_->apply(x);
        y *= cplx(1.0 / half, 0);
        y.axpy(cplx(-1, 0), x);
        return y;
    };
    WaveField tkm1 = u;            // T_0 u
    WaveField tk = apply_hs(u);    // T_1 u
    const cplx mi = z >= 0 ? cplx(0, -1) : cplx(0, 1);
    WaveField acc = u;
    acc *= phase * cplx(std::cyl_bessel_j(0, az), 0);
    cplx ik = mi;
    acc.axpy(phase * 2.0 * ik * std::cyl_bessel_j(1, az), tk);
    for (int k = 2; k <= mmax; ++k) {
        WaveField tkp1 = apply_hs(tk);
        tkp1 *= cplx(2, 0);
        tkp1.axpy(cplx(-1, 0), tkm1);
        tkm1 = std::move(tk);
        tk = std::move(tkp1);
        ik *= mi;
        const double J = std::cyl_bessel_j(k, az);
        acc.axpy(phase * 2.0 * ik * J, tk);
        if (k > int(az) && std::abs(J) < 0.25 * cfg_.tol) break;
    }
    u = std::move(acc);
}

void Propagator::step_unitary(WaveField& u, double dt) const {
    switch (cfg_.scheme) {
        case Scheme::SplitStep: {
            const Grid& g = H_->grid();
            H_->fft().apply_symbol(u.v, [&](const Vec3& k) {
                return std::exp(cplx(0, -dt * 0.5 * norm2(k, g.dim)));
            });
            return;
        }
        case Scheme::Chebyshev:
            step_chebyshev(u, dt);
            return;
        case Scheme::KrylovExpm: {
            std::vector<WaveField> res;
            lanczos_apply(*H_, u, {evolution_profile(dt)}, res, cfg_.tol,
                          cfg_.max_rank, nullptr, /*strict=*/true);
            u = std::move(res[0]);
            return;
        }
    }
}

void Propagator::step(WaveField& u, double dt) const {
    if (!cfg_.sponge.on) {
        step_unitary(u, dt);
        return;
    }
    // Strang split of the absorbing potential around the unitary step; the
    // cached ramp is for cfg_.dt, rescale for partial steps.
    const double frac = std::abs(dt) / cfg_.dt;
    auto damp = [&]() {
        if (frac == 1.0) {
            u.mask(sponge_half_);
        } else {
            for (std::size_t i = 0; i < u.v.size(); ++i)
                u.v[i] *= std::pow(sponge_half_[i], frac);
        }
    };
    damp();
    step_unitary(u, dt);
    damp();
}

WaveField Propagator::evolve(const WaveField& u0, double t) const {
    require_same_grid(H_->grid(), u0.grid());
    if (!cfg_.sponge.on) {
        const double guard = horizon_guard(u0);
        if (std::abs(t) > guard)
            throw ContaminationError(
                "evolve: |t| exceeds horizon_guard without a sponge");
    }
    WaveField u = u0;
    if (t == 0.0) return u;
    const double dir = t > 0 ? 1.0 : -1.0;
    double remaining = std::abs(t);
    while (remaining > 1e-14 * std::abs(t)) {
        const double dt = std::min(cfg_.dt, remaining);
        step(u, dir * dt);
        remaining -= dt;
    }
    return u;
}

WaveField evolve_free(const WaveField& u0, double t) {
    const Grid& g = u0.grid();
    Fft fft(g);
    WaveField u = u0;
    fft.apply_symbol(u.v, [&](const Vec3& k) {
        return std::exp(cplx(0, -t * 0.5 * norm2(k, g.dim)));
    });
    return u;
}

Evolution::Evolution(const Propagator& prop, WaveField u0)
    : prop_(prop), state_(std::move(u0)) {}

void Evolution::advance_to(double t) {
    const double dt = prop_.config().dt;
    while (std::abs(t - t_) > 1e-12 * std::max(1.0, std::abs(t))) {
        const double step = std::min(dt, std::abs(t - t_));
        const double s = t > t_ ? step : -step;
        prop_.step(state_, s);
        t_ += s;
    }
    t_ = t;
}

DuhamelResult duhamel_difference(const WaveField& u0, double t,
                                 const Propagator& prop) {
    const Hamiltonian& H = prop.hamiltonian();
    require_same_grid(H.grid(), u0.grid());

    // direct subtraction
    DuhamelResult out;
    out.difference = prop.evolve(u0, t) - evolve_free(u0, t);

    // composite-Simpson accumulation of
    //   -i int_0^t exp(-i(t-s)H) (H - H0) exp(-isH0) u0 ds
    // on the step grid: K <- U_dt K + node terms, two steps per Simpson cell.
    const Grid& g = H.grid();
    Fft fft(g);
    auto v_apply = [&](const WaveField& w) {
        WaveField hw = H.apply(w);
        WaveField h0w = w;
        fft.apply_symbol(h0w.v, [&](const Vec3& k) {
            return cplx(0.5 * norm2(k, g.dim), 0);
        });
        return hw - h0w;
    };

    int ncells = std::max<int>(1, int(std::ceil(std::abs(t) / (2.0 * prop.config().dt))));
    const double h = t / (2.0 * ncells);  // signed substep

    WaveField K(u0.metric);
    WaveField uf = u0;  // exp(-isH0) u0, advanced exactly
    WaveField a = v_apply(uf);
    for (int c = 0; c < ncells; ++c) {
        // nodes s, s+h, s+2h with weights h/3 (1, 4, 1)
        K.axpy(cplx(h / 3.0, 0), a);
        prop.step(K, h);
        uf = evolve_free(uf, h);
        WaveField b = v_apply(uf);
        K.axpy(cplx(4.0 * h / 3.0, 0), b);
        prop.step(K, h);
        uf = evolve_free(uf, h);
        a = v_apply(uf);
        K.axpy(cplx(h / 3.0, 0), a);
    }
    K *= cplx(0, -1);

    WaveField diff = out.difference - K;
    const double ref = l2_norm(out.difference);
    const double base = l2_norm(u0);
    out.discrepancy = l2_norm(diff) / std::max(ref, 1e-12 * std::max(base, 1e-300));
    out.nodes = 2 * ncells + 1;
    return out;
}

}  // namespace qsmooth
