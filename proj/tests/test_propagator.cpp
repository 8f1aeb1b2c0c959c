#include <doctest.h>

#include <cmath>

#include "qsmooth/propagator.hpp"

using namespace qsmooth;

namespace {

// independent oracle: one-shot discrete Fourier propagation of the flat
// operator, written against the raw FFT rather than the propagator path
WaveField fourier_oracle(const WaveField& u0, double t) {
    const Grid& g = u0.grid();
    Fft fft(g);
    std::vector<cplx> uh;
    fft.forward(u0.v, uh);
    for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
        uh[idx] *= std::exp(cplx(0, -t * 0.5 * norm2(k, g.dim)));
    });
    WaveField out(u0.metric);
    fft.backward(uh, out.v);
    return out;
}

PropagatorConfig cfg_with(Scheme s, double dt = 0.05, bool sponge = false) {
    PropagatorConfig c;
    c.scheme = s;
    c.dt = dt;
    c.tol = 1e-10;
    c.sponge.on = sponge;
    return c;
}

}  // namespace

TEST_CASE("evolve at t = 0 returns the datum exactly") {
    auto m = MetricField::flat(Grid::cubic(2, 32, 16.0), 0.5);
    auto H = std::make_shared<Hamiltonian>(m);
    Propagator prop(H, cfg_with(Scheme::KrylovExpm));
    const WaveField u0 = gaussian_packet(m, {1, 0, 0}, 1.0);
    const WaveField u = prop.evolve(u0, 0.0);
    for (std::int64_t i = 0; i < u0.size(); ++i) CHECK(u.v[i] == u0.v[i]);
}

TEST_CASE("plane-wave phase rotation at the discrete eigenvalue") {
    auto m = MetricField::flat(Grid::cubic(2, 32, 16.0), 0.5);
    auto H = std::make_shared<Hamiltonian>(m);
    const WaveField pw = plane_wave(m, {2, -3, 0});
    const double lam =
        0.5 * (std::pow(2 * M_PI * 2 / 16.0, 2) + std::pow(2 * M_PI * 3 / 16.0, 2));
    const double t = 0.7;
    for (Scheme s : {Scheme::KrylovExpm, Scheme::Chebyshev, Scheme::SplitStep}) {
        Propagator prop(H, cfg_with(s));
        const WaveField u = prop.evolve(pw, t);
        const cplx phase = std::exp(cplx(0, -t * lam));
        double err = 0;
        for (std::int64_t i = 0; i < u.size(); ++i)
            err = std::max(err, std::abs(u.v[i] - phase * pw.v[i]));
        CHECK(err < 1e-8);
    }
}

TEST_CASE("flat Gaussian packet matches the discrete Fourier oracle to 1e-8") {
    auto m = MetricField::flat(Grid::cubic(2, 48, 24.0), 0.5);
    auto H = std::make_shared<Hamiltonian>(m);
    const WaveField u0 = gaussian_packet(m, {0.5, -0.5, 0}, 1.0, {1.0, 0.5, 0});
    const double t = 1.3;
    const WaveField want = fourier_oracle(u0, t);
    for (Scheme s : {Scheme::KrylovExpm, Scheme::Chebyshev, Scheme::SplitStep}) {
        Propagator prop(H, cfg_with(s));
        const WaveField u = prop.evolve(u0, t);
        CHECK(l2_norm(u - want) < 1e-8 * l2_norm(u0));
    }
    // evolve_free is the same diagonal unitary
    const WaveField uf = evolve_free(u0, t);
    CHECK(l2_norm(uf - want) < 1e-12 * l2_norm(u0));
    // exact norm preservation of the diagonal step
    CHECK(l2_norm(uf) == doctest::Approx(l2_norm(u0)).epsilon(1e-13));
}

TEST_CASE("curved metric: unitarity, energy conservation, group, reversal") {
    auto m = MetricField::conformal_bump(Grid::cubic(2, 64, 32.0), 1.0, 0.6, 0.4);
    auto H = std::make_shared<Hamiltonian>(m);
    auto calc = std::make_shared<SpectralCalculus>(H, CalcMode::Lanczos, 1e-10);
    auto cfg = cfg_with(Scheme::KrylovExpm, 0.05);
    cfg.v_max = 5.0;  // the datum band is < 4.5; pin the guard for reversal
    Propagator prop(H, cfg);
    const WaveField u0 = gaussian_packet(m, {0.5, 0.3, 0}, 1.0, {1.5, 0, 0});

    const double t = 1.0;
    const WaveField u1 = prop.evolve(u0, t);
    CHECK(std::abs(l2_norm(u1) - l2_norm(u0)) <= 1e-8 * l2_norm(u0));

    const double e0 = calc->sobolev_norm(u0, 0.5);
    const double e1 = calc->sobolev_norm(u1, 0.5);
    CHECK(std::abs(e1 - e0) <= 1e-7 * e0);

    // group property
    const WaveField a = prop.evolve(prop.evolve(u0, 0.3), 0.7);
    CHECK(l2_norm(a - u1) < 1e-8 * l2_norm(u0));

    // time reversal
    const WaveField back = prop.evolve(u1, -t);
    CHECK(l2_norm(back - u0) < 1e-8 * l2_norm(u0));

    // flat-metric consistency: evolve equals evolve_free when g = Id
    auto flat2 = MetricField::flat(Grid::cubic(2, 32, 16.0), 0.5);
    auto Hf = std::make_shared<Hamiltonian>(flat2);
    Propagator pf(Hf, cfg_with(Scheme::KrylovExpm, 0.1));
    const WaveField w0 = gaussian_packet(flat2, {0, 0, 0}, 1.2);
    CHECK(l2_norm(pf.evolve(w0, 0.8) - evolve_free(w0, 0.8)) <
          1e-8 * l2_norm(w0));
}

TEST_CASE("horizon guard: contamination error without a sponge") {
    auto m = MetricField::flat(Grid::cubic(2, 32, 20.0), 1.0);
    auto H = std::make_shared<Hamiltonian>(m);
    Propagator prop(H, cfg_with(Scheme::SplitStep));
    const WaveField u0 = gaussian_packet(m, {0, 0, 0}, 1.0, {2.0, 0, 0});
    const double guard = prop.horizon_guard(u0);
    CHECK(guard > 0);
    CHECK(guard < 1e6);
    CHECK_THROWS_AS(prop.evolve(u0, 2.0 * guard + 1.0), ContaminationError);
    CHECK_NOTHROW(prop.evolve(u0, 0.5 * guard));

    // sponge lifts the horizon and decays the norm once the wave reaches it
    auto cfg = cfg_with(Scheme::SplitStep, 0.05, true);
    cfg.sponge.onset = 6.0;
    cfg.sponge.strength = 2.0;
    Propagator sprop(H, cfg);
    CHECK(sprop.horizon_guard(u0) == std::numeric_limits<double>::infinity());
    const WaveField late = sprop.evolve(u0, 6.0);
    CHECK(l2_norm(late) < 0.8 * l2_norm(u0));
}

TEST_CASE("split-step demands a flat metric") {
    auto m = MetricField::conformal_bump(Grid::cubic(2, 32, 16.0), 1.0, 0.5, 0.4);
    auto H = std::make_shared<Hamiltonian>(m);
    CHECK_THROWS_AS(Propagator(H, cfg_with(Scheme::SplitStep)),
                    InvalidArgumentError);
}

TEST_CASE("duhamel difference: flat vanishes, quadrature matches direct") {
    // flat: H = H0, difference is the zero field
    auto flat = MetricField::flat(Grid::cubic(2, 32, 20.0), 0.5);
    auto Hf = std::make_shared<Hamiltonian>(flat);
    Propagator pf(Hf, cfg_with(Scheme::KrylovExpm, 0.05));
    const WaveField w0 = gaussian_packet(flat, {0, 0, 0}, 1.0);
    const auto flat_res = duhamel_difference(w0, 1.0, pf);
    CHECK(l2_norm(flat_res.difference) < 1e-9 * l2_norm(w0));

    // curved metric, generic band-limited datum
    auto m = MetricField::conformal_bump(Grid::cubic(2, 64, 32.0), 1.0, 0.6, 0.4);
    auto H = std::make_shared<Hamiltonian>(m);
    Propagator prop(H, cfg_with(Scheme::KrylovExpm, 0.01));
    const WaveField u0 = gaussian_packet(m, {0.8, 0, 0}, 0.9, {1.0, 0.5, 0});
    const auto res = duhamel_difference(u0, 1.0, prop);
    CHECK(res.nodes <= 256);
    CHECK(res.discrepancy < 1e-6);
    CHECK(l2_norm(res.difference) > 1e-4 * l2_norm(u0));  // genuinely nonzero

    // datum supported away from the bump, time too short to reach it
    const WaveField far = gaussian_packet(m, {6.0, 0, 0}, 0.6);
    const auto far_res = duhamel_difference(far, 0.2, prop);
    CHECK(l2_norm(far_res.difference) <= 1e-6 * l2_norm(far));
}

TEST_CASE("dispersive sup-norm decay: fitted exponent near -dim/2 (2D)") {
    // wide Gaussian on a big flat grid; exact one-shot Fourier steps
    auto m = MetricField::flat(Grid::cubic(2, 256, 102.0), 1.0);
    const WaveField u0 = gaussian_packet(m, {0, 0, 0}, 1.0);
    std::vector<double> lt, ls;
    for (double t = 4.5; t <= 45.0; t *= 1.4) {
        const WaveField u = evolve_free(u0, t);
        double sup = 0;
        for (const auto& v : u.v) sup = std::max(sup, std::abs(v));
        lt.push_back(std::log(t));
        ls.push_back(std::log(sup));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        sx += lt[i];
        sy += ls[i];
        sxx += lt[i] * lt[i];
        sxy += lt[i] * ls[i];
    }
    const double n = double(lt.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope > -1.1);
    CHECK(slope < -0.9);
}
