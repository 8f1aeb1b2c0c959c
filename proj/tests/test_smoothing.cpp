#include <doctest.h>

#include <cmath>

#include "qsmooth/smoothing.hpp"

using namespace qsmooth;

namespace {

struct Rig {
    std::shared_ptr<const MetricField> metric;
    std::shared_ptr<Hamiltonian> H;
    std::shared_ptr<SpectralCalculus> calc;
    std::shared_ptr<Propagator> prop;
    CutoffFamily cutoffs;
};

Rig make_rig(std::shared_ptr<const MetricField> m, Scheme scheme,
             bool sponge = true, double dt = 0.05) {
    Rig r;
    r.metric = std::move(m);
    r.H = std::make_shared<Hamiltonian>(r.metric);
    r.calc = std::make_shared<SpectralCalculus>(
        r.H, r.metric->grid().size() <= 2500 ? CalcMode::FullEigen
                                             : CalcMode::Lanczos,
        1e-10);
    PropagatorConfig pc;
    pc.scheme = scheme;
    pc.dt = dt;
    pc.tol = 1e-10;
    pc.sponge.on = sponge;
    pc.sponge.onset = 0.68 * r.metric->grid().half_width();
    pc.sponge.strength = 1.5;
    r.prop = std::make_shared<Propagator>(r.H, pc);
    r.cutoffs.R0 = r.metric->R0();
    return r;
}

}  // namespace

TEST_CASE("spacetime norm: zero datum, quadratic homogeneity") {
    auto rig = make_rig(MetricField::flat(Grid::cubic(2, 64, 32.0), 1.0),
                        Scheme::SplitStep);
    SmoothingParams p;
    p.sigma = 0.1;

    WaveField zero(rig.metric);
    CHECK(spacetime_norm(zero, p, 1.0, *rig.prop) == 0.0);

    const WaveField u = gaussian_packet(rig.metric, {0.5, 0, 0}, 1.0, {1, 0, 0});
    WaveField u2 = u;
    u2 *= cplx(2, 0);
    const double v1 = spacetime_norm(u, p, 2.0, *rig.prop);
    const double v2 = spacetime_norm(u2, p, 2.0, *rig.prop);
    CHECK(v2 == doctest::Approx(4.0 * v1).epsilon(1e-12));
    CHECK(v1 > 0.0);
}

TEST_CASE("flat-space series: increasing in T, plateau, resolution check") {
    SmoothingParams p;
    p.sigma = 0.1;
    const std::vector<double> T_list = {1, 2, 4, 8, 16};

    auto run = [&](int n) {
        auto rig = make_rig(MetricField::flat(Grid::cubic(2, n, 32.0), 1.0),
                            Scheme::SplitStep);
        const WaveField u =
            gaussian_packet(rig.metric, {0, 0, 0}, 1.0, {1.5, 0, 0});
        return spacetime_series(u, p, T_list, *rig.prop, *rig.calc,
                                rig.cutoffs);
    };
    const auto lo = run(64);
    // monotone nondecreasing, converging (increments shrink)
    for (std::size_t j = 1; j < lo.full.size(); ++j)
        CHECK(lo.full[j] >= lo.full[j - 1]);
    const double inc1 = lo.full[2] - lo.full[1];
    const double inc3 = lo.full[4] - lo.full[3];
    CHECK(inc3 < 0.5 * inc1);
    // desk-scale stand-in for the Euclidean constant: finite and positive
    const double c_sigma = lo.full.back() / std::pow(lo.h_half, 2);
    CHECK(c_sigma > 0.0);
    CHECK(c_sigma < 1e3);

    // doubled resolution agrees within 1%
    const auto hi = run(128);
    CHECK(hi.full.back() ==
          doctest::Approx(lo.full.back()).epsilon(0.01));
}

TEST_CASE("estimate_K: single ratio, scaling invariance, errors") {
    auto rig = make_rig(MetricField::flat(Grid::cubic(2, 64, 32.0), 1.0),
                        Scheme::SplitStep);
    SmoothingParams p;
    p.sigma = 0.1;
    const std::vector<double> T_list = {1, 4};
    const WaveField u = gaussian_packet(rig.metric, {0.5, 0.5, 0}, 0.9);

    const auto one = estimate_K({u}, p, T_list, *rig.prop, *rig.calc,
                                rig.cutoffs);
    REQUIRE(one.rows.size() == 2);
    CHECK(one.K[0] == doctest::Approx(one.rows[0].ratio));

    // multiplying the datum by a nonzero scalar leaves the estimate unchanged
    WaveField u3 = u;
    u3 *= cplx(0, 3);
    const auto three = estimate_K({u3}, p, T_list, *rig.prop, *rig.calc,
                                  rig.cutoffs);
    CHECK(three.K[0] == doctest::Approx(one.K[0]).epsilon(1e-9));
    CHECK(three.K[1] == doctest::Approx(one.K[1]).epsilon(1e-9));

    CHECK_THROWS_AS(
        estimate_K({}, p, T_list, *rig.prop, *rig.calc, rig.cutoffs),
        InvalidArgumentError);

    // K nondecreasing in T
    CHECK(one.K[1] >= one.K[0]);
}

TEST_CASE("K_phi: outgoing far datum contributes nothing, domination by K") {
    auto rig = make_rig(MetricField::flat(Grid::cubic(2, 96, 30.0), 1.0),
                        Scheme::SplitStep);
    SmoothingParams p;
    p.sigma = 0.1;
    const std::vector<double> T_list = {1.0};

    // supported and staying outside supp(phi) = B(0, 8): |x| ~ 11.5, outgoing
    const WaveField far =
        gaussian_packet(rig.metric, {11.5, 0, 0}, 0.5, {2.0, 0, 0});
    const auto series =
        spacetime_series(far, p, T_list, *rig.prop, *rig.calc, rig.cutoffs);
    CHECK(series.phi_only[0] <= 1e-6 * series.full[0]);

    // pointwise domination: K_phi <= C_phi K with C_phi = max phi <x>^(1/2+s)
    const WaveField mid = gaussian_packet(rig.metric, {1.0, 0, 0}, 0.8,
                                          {1.0, 0.5, 0});
    const auto kf = estimate_K({mid}, p, T_list, *rig.prop, *rig.calc,
                               rig.cutoffs, false);
    const auto kp = estimate_K({mid}, p, T_list, *rig.prop, *rig.calc,
                               rig.cutoffs, true);
    const double C_phi = std::pow(1.0 + 64.0, 0.5 * (0.5 + p.sigma));
    CHECK(kp.K[0] <= C_phi * kf.K[0] * (1 + 1e-9));
}

TEST_CASE("poincare constant: finite, monotone in eps, domination sanity") {
    for (auto metric :
         {MetricField::flat(Grid::cubic(2, 32, 20.0), 1.0),
          MetricField::conformal_bump(Grid::cubic(2, 32, 20.0), 1.0, 0.6, 0.4)}) {
        Hamiltonian H(metric);
        CutoffFamily cutoffs;
        cutoffs.R0 = 1.0;
        const std::vector<double> eps_list = {1.0, 0.3, 0.1, 0.03};
        const auto vals = poincare_constants(H, cutoffs, eps_list, 0.1);
        for (double v : vals) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
        for (std::size_t i = 1; i < vals.size(); ++i)
            CHECK(vals[i] <= vals[i - 1] * (1 + 1e-9));
    }

    // first-term-only ratio bounded by max over supp(phi) of <x>^(1/2+sigma)
    auto m = MetricField::flat(Grid::cubic(2, 32, 20.0), 1.0);
    Hamiltonian H(m);
    CutoffFamily cutoffs;
    cutoffs.R0 = 1.0;
    const double bound = std::pow(1.0 + 64.0, 0.5 * 0.6);
    const double v = poincare_constant(H, cutoffs, 1.0, 0.1, true);
    CHECK(v <= bound * (1 + 1e-6));

    CHECK_THROWS_AS(poincare_constant(H, cutoffs, 0.0, 0.1),
                    InvalidArgumentError);
}

TEST_CASE("greens functional: -4pi anchor, delta linearity, refinement") {
    auto m = MetricField::flat(Grid::cubic(2, 128, 20.0), 1.0);
    MultiplierField a = build_multiplier(m, 0.01);

    const double v0 = greens_functional(a, 0.0, 4096);
    CHECK(v0 > -4.0 * M_PI - 0.5);
    CHECK(v0 < -4.0 * M_PI + 0.5);

    // adding delta shifts by delta * vol(B(0, 3 R0)) exactly (same grid)
    const double v1 = greens_functional(a, 0.1, 4096);
    const double v05 = greens_functional(a, 0.05, 4096);
    CHECK(v1 - v0 == doctest::Approx(2.0 * (v05 - v0)).epsilon(1e-12));
    const double vol = (v1 - v0) / 0.1;
    CHECK(vol == doctest::Approx(4.0 / 3.0 * M_PI * 27.0).epsilon(0.01));

    // refinement x2 changes the value by <= 2%
    const double fine = greens_functional(a, 0.0, 8192);
    CHECK(std::abs(fine - v0) <= 0.02 * std::abs(fine));

    // negative across the (eps, delta) grid
    for (double eps : {0.01, 0.05}) {
        MultiplierField ae = build_multiplier(m, eps);
        for (double delta : {0.0, 0.05}) {
            CHECK(greens_functional(ae, delta, 2048) < 0.0);
        }
    }

    CHECK_THROWS_AS(greens_functional(a, 0.0, 20), ResolutionError);
}
