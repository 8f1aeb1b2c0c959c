#include <doctest.h>

#include <cmath>

#include "qsmooth/escape.hpp"
#include "qsmooth/multiplier.hpp"

using namespace qsmooth;

namespace {

std::shared_ptr<const MetricField> flat_grid(int n = 128, double L = 20.0,
                                             double R0 = 1.0) {
    return MetricField::flat(Grid::cubic(2, n, L), R0);
}

PropagatorConfig krylov_cfg(double dt) {
    PropagatorConfig c;
    c.scheme = Scheme::KrylovExpm;
    c.dt = dt;
    c.tol = 1e-11;
    return c;
}

}  // namespace

TEST_CASE("multiplier profile: collar support and the eps -> 0 limit") {
    auto m = flat_grid();
    MultiplierField a = build_multiplier(m, 0.05);

    // a vanishes identically on |x| <= 2 R0
    for (double r : {0.0, 0.5, 1.0, 1.7, 2.0}) CHECK(a.radial(r) == 0.0);
    for_each_point(m->grid(), [&](std::int64_t idx, const Vec3& x) {
        if (norm2(x, 2) <= 4.0) CHECK(a.a()[idx] == 0.0);
    });

    // beyond the collar a = |x| - eps |x|^(1-eps) exactly
    for (double r : {3.0, 4.5, 7.0}) {
        CHECK(a.radial(r) ==
              doctest::Approx(r - 0.05 * std::pow(r, 0.95)).epsilon(1e-14));
    }

    // eps -> 0: a -> |x| and |grad a| -> 1 outside the collar
    MultiplierField small(m, 1e-6);
    CHECK(small.radial(5.0) == doctest::Approx(5.0).epsilon(1e-5));
    CHECK(small.radial(5.0, 1) == doctest::Approx(1.0).epsilon(1e-5));

    // gradient bounded, Hessian decays like 1/|x| (sampled)
    for (double r = 3.0; r < 9.0; r += 0.25) {
        CHECK(std::abs(a.radial(r, 1)) < 1.1);
        CHECK(std::abs(a.radial(r, 2)) < 2.0 / r);
    }
}

TEST_CASE("build_multiplier validates eps and collar resolution") {
    auto m = flat_grid();
    CHECK_THROWS_AS(build_multiplier(m, 0.0), InvalidArgumentError);
    CHECK_THROWS_AS(build_multiplier(m, 0.2), InvalidArgumentError);
    auto coarse = flat_grid(16, 20.0);  // h = 1.25 > R0/6
    CHECK_THROWS_AS(build_multiplier(coarse, 0.05), ResolutionError);
}

TEST_CASE("hessian eigenvalue floor matches the closed-form oracle") {
    auto m = flat_grid();
    const double eps = 0.05;
    MultiplierField a = build_multiplier(m, eps);

    double floor = 1e300;
    for (double r = 3.0; r <= 10.0; r += 0.05) {
        // oracle: tangential (1 - eps(1-eps) r^-eps)/r, radial eps^2(1-eps)r^(-1-eps)
        const double tang = (1.0 - eps * (1 - eps) * std::pow(r, -eps)) / r;
        const double rad = eps * eps * (1 - eps) * std::pow(r, -1 - eps);
        CHECK(a.hess_tangential(r) == doctest::Approx(tang).epsilon(1e-12));
        CHECK(a.hess_radial(r) == doctest::Approx(rad).epsilon(1e-12));
        floor = std::min(floor, std::min(tang, rad) * std::pow(r, 1 + eps));
    }
    CHECK(floor > 0.0);  // the convexity floor driving the positive commutator
}

TEST_CASE("bilaplacian sign scan: symbolic values, scaling, degenerate eps") {
    auto m = flat_grid();
    const double eps = 0.05;
    MultiplierField a = build_multiplier(m, eps);

    // symbolic oracle: Delta^2 a = -eps^2 (1-eps)(1+eps)(2-eps) r^(-3-eps)
    const double c = eps * eps * (1 - eps) * (1 + eps) * (2 - eps);
    for (double r : {3.0, 5.0, 8.0}) {
        CHECK(a.bilaplacian3(r) ==
              doctest::Approx(-c * std::pow(r, -3 - eps)).epsilon(1e-10));
    }

    const auto scan = bilaplacian_sign_scan(a, {3.0, 5.0, 8.0});
    CHECK(scan.pass);
    for (const auto& row : scan.rows) {
        CHECK(row.bilaplacian < 0.0);
        CHECK(row.weighted == doctest::Approx(-scan.c_eps).epsilon(1e-9));
    }

    // doubling radii scales the unweighted values by 2^(-3-eps)
    CHECK(a.bilaplacian3(6.0) / a.bilaplacian3(3.0) ==
          doctest::Approx(std::pow(2.0, -3 - eps)).epsilon(1e-12));

    // eps = 0 degenerates: Delta^2 |x| = 0 away from the origin in 3D
    MultiplierField zero(m, 0.0);
    CHECK(zero.bilaplacian3(4.0) == doctest::Approx(0.0));
    const auto zscan = bilaplacian_sign_scan(zero, {4.0});
    CHECK(!zscan.pass);  // FAIL-by-zero

    CHECK_THROWS_AS(bilaplacian_sign_scan(a, {2.5}), InvalidArgumentError);
}

TEST_CASE("quantized A is symmetric for the flat inner product") {
    auto m = flat_grid(128, 20.0);
    Hamiltonian H(m);
    MultiplierField a = build_multiplier(m, 0.05);
    for (std::uint64_t seed : {1ull, 2ull}) {
        const WaveField u = random_field(m, seed);
        const WaveField v = random_field(m, seed + 9);
        const WaveField Au = apply_commutator_multiplier(H, a, u);
        const WaveField Av = apply_commutator_multiplier(H, a, v);
        const cplx asym = inner_product(Au, v) - inner_product(u, Av);
        CHECK(std::abs(asym) <= 1e-10 * l2_norm(u) * l2_norm(v));
    }
}

TEST_CASE("heisenberg identity with A = Id: both sides vanish") {
    // [H, Id] = 0 and d/dt <u, u> = 0: norm conservation is the identity
    auto m = flat_grid(64, 20.0);
    auto H = std::make_shared<Hamiltonian>(m);
    Propagator prop(H, krylov_cfg(2e-3));
    const WaveField u0 = gaussian_packet(m, {0, 0, 0}, 1.0);
    Evolution ev(prop, u0);
    std::vector<double> q;
    for (int j = 0; j < 5; ++j) {
        ev.advance_to(j * 2e-3);
        q.push_back(inner_product(ev.state(), ev.state()).real());
    }
    for (int j = 1; j + 1 < 5; ++j) {
        const double dq = (q[j + 1] - q[j - 1]) / (4e-3);
        CHECK(std::abs(dq) < 1e-8 * q[j]);
        // <i[H, Id] u, u> = i(<Hu,u> - <Hu,u>) = 0 identically
        const cplx c = cplx(0, 1) * (inner_product(H->apply(ev.state()), ev.state()) -
                                     inner_product(H->apply(ev.state()), ev.state()));
        CHECK(std::abs(c) == 0.0);
    }
}

TEST_CASE("heisenberg residual: small at dt = 1e-3 and second order in dt") {
    auto m = flat_grid(128, 20.0);
    auto H = std::make_shared<Hamiltonian>(m);
    MultiplierField a = build_multiplier(m, 0.05);
    const WaveField u0 = gaussian_packet(m, {1.0, 0, 0}, 1.0);

    std::vector<double> dts = {1.6e-2, 8e-3, 4e-3};
    std::vector<double> res;
    for (double dt : dts) {
        Propagator prop(H, krylov_cfg(dt));
        res.push_back(heisenberg_residual(a, u0, 0.0, dt, 7, prop));
    }
    // the residual anchor at dt = 1e-3
    Propagator prop(H, krylov_cfg(1e-3));
    const double r1em3 = heisenberg_residual(a, u0, 0.0, 1e-3, 7, prop);
    CHECK(r1em3 <= 1e-6);

    // Richardson consistency: log-residual slope vs log-dt in [1.8, 2.2]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double lx = std::log(dts[i]), ly = std::log(res[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = double(dts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope > 1.8);
    CHECK(slope < 2.2);
}

TEST_CASE("outgoing data: <Au, u> nondecreasing along the flow") {
    auto m = flat_grid(160, 24.0);
    auto H = std::make_shared<Hamiltonian>(m);
    Propagator prop(H, krylov_cfg(0.01));
    MultiplierField a = build_multiplier(m, 0.05);
    // outgoing packet kept inside r >= 3 R0 where the convexity bounds hold
    const WaveField u0 = gaussian_packet(m, {4.5, 0, 0}, 0.5, {2.0, 0, 0});
    const auto q = multiplier_pairing_series(a, u0, 0.0, 0.05, 10, prop);
    for (std::size_t j = 1; j < q.size(); ++j)
        CHECK(q[j] >= q[j - 1] - 1e-6 * std::abs(q[j]));
}

TEST_CASE("escape symbol: flat-line oracle, trapped-orbit failure, scaling") {
    auto m = flat_grid(32, 40.0);
    CutoffFamily cutoffs;
    cutoffs.R0 = 1.0;

    // straight-line trajectories: d/ds [(x.xi)/<x>] has the closed form
    // [|xi|^2 <x>^2 - (x.xi)^2] / <x>^3 > 0; compare sampled derivative
    FlowOptions fo;
    fo.tol = 1e-10;
    fo.max_step = 0.01;
    GeodesicState init;
    init.x = {1.2, -0.4, 0};
    init.xi = {0.8, 0.6, 0};
    const auto tr = geodesic_flow(*m, init, 6.0, fo);
    REQUIRE(!tr.failed);

    const auto sym = EscapeSymbol::euclidean_default(2.0);
    const auto rep = escape_monotonicity(sym, *m, {tr}, cutoffs);
    CHECK(rep.monotone);
    CHECK(rep.min_flow_derivative > 0.0);

    // oracle at the mid-trajectory point via the closed form
    const std::size_t i = tr.points.size() / 2;
    const auto& mid = tr.points[i];
    const double jb2 = 1.0 + norm2(mid.x, 2);
    const double oracle =
        2.0 * (norm2(mid.xi, 2) * jb2 - std::pow(dot(mid.x, mid.xi, 2), 2)) /
        std::pow(jb2, 1.5);
    std::vector<double> vals(tr.points.size());
    for (std::size_t j = 0; j < tr.points.size(); ++j)
        vals[j] = sym(tr.points[j].x, tr.points[j].xi, 2);
    const double dds = (vals[i + 1] - vals[i - 1]) /
                       (tr.points[i + 1].s - tr.points[i - 1].s);
    CHECK(dds == doctest::Approx(oracle).epsilon(1e-3));

    // scaling: doubling the symbol doubles every derivative
    const auto sym2 = EscapeSymbol::euclidean_default(4.0);
    const auto rep2 = escape_monotonicity(sym2, *m, {tr}, cutoffs);
    CHECK(rep2.min_flow_derivative ==
          doctest::Approx(2.0 * rep.min_flow_derivative).epsilon(1e-12));

    // trapped orbit on a trapping metric: monotonicity must fail somewhere
    auto trap = MetricField::conformal_bump(Grid::cubic(2, 32, 20.0), 1.0, 2.2,
                                            0.35);
    GeodesicState orbit;
    orbit.x = {0.27, 0, 0};
    orbit.xi = {0, 1.0, 0};
    const auto trapped = geodesic_flow(*trap, orbit, 40.0, fo);
    REQUIRE(!trapped.failed);
    const auto trep = escape_monotonicity(sym, *trap, {trapped}, cutoffs);
    CHECK(trep.min_flow_derivative <= 0.0);
}
