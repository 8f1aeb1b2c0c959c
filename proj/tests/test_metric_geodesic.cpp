#include <doctest.h>

#include <cmath>

#include "qsmooth/geodesic.hpp"

using namespace qsmooth;

namespace {

// Orbit-radius oracle: for a radial conformal factor, a circular geodesic
// sits where r lambda'(r) = -1 (critical point of the effective potential
// e^{-2 lambda} L^2 / r^2). Solved by bisection on the library's closed-form
// lambda with an independent finite-difference derivative.
double dlambda_fd(const MetricField& m, double r) {
    const double h = 1e-6;
    return (m.lambda_at(r + h) - m.lambda_at(r - h)) / (2 * h);
}

double orbit_condition(const MetricField& m, double r) {
    return -r * dlambda_fd(m, r) - 1.0;
}

// smallest root of the orbit condition (the stable circular orbit)
double oracle_orbit_radius(const MetricField& m) {
    double lo = 1e-3, hi = 1e-3;
    double prev = orbit_condition(m, lo);
    // bracket the first sign change
    for (double r = 2e-3; r < m.R0(); r += 1e-3) {
        const double cur = orbit_condition(m, r);
        if (prev < 0 && cur >= 0) {
            lo = r - 1e-3;
            hi = r;
            break;
        }
        prev = cur;
    }
    REQUIRE(hi > lo);
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (orbit_condition(m, mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// amplitude-normalized trapping threshold: max_r of -r lambda'(r) / A
double trapping_margin(const MetricField& m) {
    double q = 0;
    for (double r = 1e-3; r < m.R0(); r += 1e-3)
        q = std::max(q, -r * dlambda_fd(m, r));
    return q;
}

}  // namespace

TEST_CASE("metric invariants: exterior identity, SPD, smooth refinement") {
    const Grid g = Grid::cubic(2, 48, 12.0);
    auto m = MetricField::conformal_bump(g, 1.0, 0.7, 0.4);

    // g == Id exactly on every grid point with |x| >= R0
    double dev = 0;
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        if (norm2(x, 2) < 1.0) return;
        for (int p = 0; p < 6; ++p) {
            const double want = p < 3 ? 1.0 : 0.0;
            dev = std::max(dev, std::abs(m->metric_component(p)[idx] - want));
        }
    });
    CHECK(dev == 0.0);

    // SPD at every grid point
    for_each_point(g, [&](std::int64_t, const Vec3& x) {
        CHECK(m->g_at(x).min_eigenvalue(2) > 0.0);
    });

    // second differences of lambda bounded uniformly under refinement
    auto second_diff_max = [&](int n) {
        const Grid gg = Grid::cubic(1, n, 12.0);
        const double h = gg.spacing(0);
        double mx = 0;
        for (int i = 1; i + 1 < n; ++i) {
            const double r0 = std::abs(gg.coord(0, i - 1));
            const double r1 = std::abs(gg.coord(0, i));
            const double r2 = std::abs(gg.coord(0, i + 1));
            const double d2 = (m->lambda_at(r2) - 2 * m->lambda_at(r1) +
                               m->lambda_at(r0)) /
                              (h * h);
            mx = std::max(mx, std::abs(d2));
        }
        return mx;
    };
    const double c1 = second_diff_max(128), c2 = second_diff_max(256);
    CHECK(c2 < 1.5 * c1 + 1.0);  // bounded, not blowing up with refinement
}

TEST_CASE("christoffel: flat metric vanishes everywhere") {
    const Grid g = Grid::cubic(3, 8, 8.0);
    auto m = MetricField::flat(g, 1.0);
    const auto c = christoffel(*m, {0.3, -0.7, 1.1});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) CHECK(c(i, j, k) == 0.0);
}

TEST_CASE("christoffel: any metric is flat at |x| = 2 R0") {
    const Grid g = Grid::cubic(2, 32, 12.0);
    auto m = MetricField::conformal_bump(g, 1.0, 1.2, 0.4);
    const auto c = christoffel(*m, {2.0, 0, 0});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                CHECK(std::abs(c(i, j, k)) < 1e-14);
}

TEST_CASE("christoffel: conformal closed form matches the symbolic oracle") {
    const Grid g = Grid::cubic(3, 16, 8.0);
    const double A = 0.8, w = 0.35;
    auto m = MetricField::conformal_bump(g, 1.0, A, w);
    // oracle: Gamma^i_jk = d^i_j l_k + d^i_k l_j - d_jk l_i with
    // l_i = lambda'(r) x_i / r, lambda' by independent finite differences
    const Vec3 x{0.31, -0.22, 0.18};
    const double r = std::sqrt(norm2(x, 3));
    const double lp = dlambda_fd(*m, r);
    Vec3 l{lp * x[0] / r, lp * x[1] / r, lp * x[2] / r};
    const auto c = christoffel(*m, x);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                double want = 0;
                if (i == j) want += l[k];
                if (i == k) want += l[j];
                if (j == k) want -= l[i];
                CHECK(c(i, j, k) == doctest::Approx(want).epsilon(1e-6));
            }
}

TEST_CASE("christoffel: out-of-domain point raises DomainError") {
    const Grid g = Grid::cubic(2, 16, 8.0);
    auto m = MetricField::flat(g, 1.0);
    CHECK_THROWS_AS(christoffel(*m, {10.0, 0, 0}), DomainError);
}

TEST_CASE("geodesic flow on the flat metric: straight line, monotone escape") {
    const Grid g = Grid::cubic(3, 8, 64.0);
    auto m = MetricField::flat(g, 1.0);
    GeodesicState init;
    init.x = {1, 0, 0};
    init.xi = {1, 0, 0};
    FlowOptions opts;
    opts.tol = 1e-10;
    const auto tr = geodesic_flow(*m, init, 10.0, opts);
    REQUIRE(!tr.failed);
    CHECK(tr.energy_drift <= 10 * opts.tol);
    for (const auto& st : tr.points) {
        CHECK(st.x[0] == doctest::Approx(1.0 + st.s).epsilon(1e-9));
        CHECK(std::abs(st.x[1]) < 1e-10);
    }
    // |x| monotone once x.xi > 0
    for (std::size_t i = 1; i < tr.points.size(); ++i)
        CHECK(norm2(tr.points[i].x, 3) >= norm2(tr.points[i - 1].x, 3) - 1e-12);
}

TEST_CASE("geodesic flow: exterior straightness and time reversibility") {
    const Grid g = Grid::cubic(2, 32, 40.0);
    auto m = MetricField::conformal_bump(g, 1.0, 0.5, 0.4);
    GeodesicState init;
    init.x = {0.4, -0.2, 0};
    init.xi = {0.8, 0.6, 0};
    FlowOptions opts;
    opts.tol = 1e-11;
    const double s_max = 8.0;
    const auto fwd = geodesic_flow(*m, init, s_max, opts);
    REQUIRE(!fwd.failed);
    CHECK(fwd.energy_drift <= 10 * opts.tol);

    // segments entirely outside R0 are affine in s
    for (std::size_t i = 2; i < fwd.points.size(); ++i) {
        const auto &a = fwd.points[i - 2], &b = fwd.points[i - 1],
                   &c = fwd.points[i];
        const double ra = std::sqrt(norm2(a.x, 2));
        if (ra < 1.5) continue;
        // b should lie on the chord between a and c (affine check)
        const double t = (b.s - a.s) / (c.s - a.s);
        for (int ax = 0; ax < 2; ++ax) {
            const double lin = a.x[ax] + t * (c.x[ax] - a.x[ax]);
            CHECK(b.x[ax] == doctest::Approx(lin).epsilon(1e-6));
        }
    }

    // flow forward then backward returns to the initial state
    GeodesicState end;
    end.x = fwd.points.back().x;
    end.xi = fwd.points.back().xi;
    const auto bwd = geodesic_flow(*m, end, -fwd.points.back().s, opts);
    REQUIRE(!bwd.failed);
    const auto& last = bwd.points.back();
    for (int ax = 0; ax < 2; ++ax) {
        CHECK(std::abs(last.x[ax] - init.x[ax]) < 100 * opts.tol + 1e-8);
        CHECK(std::abs(last.xi[ax] - init.xi[ax]) < 100 * opts.tol + 1e-8);
    }
}

TEST_CASE("trapped circular orbit stays bounded (effective-potential oracle)") {
    const Grid g = Grid::cubic(2, 32, 20.0);
    auto m = MetricField::conformal_bump(g, 1.0, 2.2, 0.35);
    REQUIRE(trapping_margin(*m) * 1.0 > 1.0);  // above the trapping threshold

    const double r_orbit = oracle_orbit_radius(*m);
    CHECK(r_orbit > 0.1);
    CHECK(r_orbit < 0.6);

    GeodesicState init;
    init.x = {r_orbit, 0, 0};
    init.xi = {0, 1.0, 0};  // tangential
    FlowOptions opts;
    opts.tol = 1e-9;
    const auto tr = geodesic_flow(*m, init, 60.0, opts);
    REQUIRE(!tr.failed);
    double rmax = 0;
    for (const auto& st : tr.points)
        rmax = std::max(rmax, std::sqrt(norm2(st.x, 2)));
    CHECK(rmax < 1.0);  // bounded, never escapes the perturbation region
}

TEST_CASE("certify_nontrapping: flat PASS with escape bound, trapping FAIL") {
    const Grid g = Grid::cubic(2, 16, 24.0);
    auto flat = MetricField::flat(g, 1.0);
    const double escape_radius = 3.0, s_max = 30.0;
    const auto cert =
        certify_nontrapping(*flat, 0.5, 2.0, 128, escape_radius, s_max, 1e-9, 3);
    CHECK(cert.pass);
    CHECK(cert.n_trapped == 0);
    // unit-speed bound: escape by escape_radius + 2 R0 of arc length, and
    // the shell floor 0.5 means speed >= 1
    CHECK(cert.max_escape_param <= escape_radius + 2.0);
    CHECK(cert.seed == 3);

    auto trap = MetricField::conformal_bump(g, 1.0, 2.2, 0.35);
    const auto tcert =
        certify_nontrapping(*trap, 0.015, 0.025, 1024, escape_radius, s_max,
                            1e-9, 3);
    CHECK(!tcert.pass);
    CHECK(tcert.n_trapped > 0);
    // the representative offending state sits near the oracle orbit
    const double r_orbit = oracle_orbit_radius(*trap);
    const double r_off = std::sqrt(norm2(tcert.offending.x, 2));
    CHECK(r_off < 2.0 * r_orbit + 0.3);
}

TEST_CASE("certify_nontrapping: mild bump below threshold passes") {
    const Grid g = Grid::cubic(2, 16, 24.0);
    // threshold located via the amplitude-normalized margin: A* = 1/q
    auto probe = MetricField::conformal_bump(g, 1.0, 1.0, 0.35);
    const double q = trapping_margin(*probe);
    const double A_star = 1.0 / q;
    auto mild = MetricField::conformal_bump(g, 1.0, 0.5 * A_star, 0.35);
    const auto cert =
        certify_nontrapping(*mild, 0.05, 1.0, 256, 3.0, 40.0, 1e-9, 5);
    CHECK(cert.pass);
}

TEST_CASE("certify determinism: same seed, same certificate") {
    const Grid g = Grid::cubic(2, 16, 24.0);
    auto m = MetricField::conformal_bump(g, 1.0, 2.2, 0.35);
    const auto a = certify_nontrapping(*m, 0.015, 0.025, 64, 3.0, 20.0, 1e-9, 11);
    const auto b = certify_nontrapping(*m, 0.015, 0.025, 64, 3.0, 20.0, 1e-9, 11);
    CHECK(a.n_trapped == b.n_trapped);
    CHECK(a.max_escape_param == b.max_escape_param);
    for (int ax = 0; ax < 2; ++ax)
        CHECK(a.offending.x[ax] == b.offending.x[ax]);
}

TEST_CASE("certify preconditions") {
    const Grid g = Grid::cubic(2, 16, 24.0);
    auto m = MetricField::flat(g, 1.0);
    CHECK_THROWS_AS(certify_nontrapping(*m, 0.5, 1.0, 8, 1.5, 10.0),
                    InvalidArgumentError);  // escape_radius < 2 R0
    CHECK_THROWS_AS(certify_nontrapping(*m, 0.5, 1.0, 0, 3.0, 10.0),
                    InvalidArgumentError);  // samples < 1
}

TEST_CASE("geodesic_flow rejects zero covector and nonpositive tol") {
    const Grid g = Grid::cubic(2, 16, 24.0);
    auto m = MetricField::flat(g, 1.0);
    GeodesicState z;
    z.x = {0.5, 0, 0};
    CHECK_THROWS_AS(geodesic_flow(*m, z, 1.0), InvalidArgumentError);
    z.xi = {1, 0, 0};
    FlowOptions bad;
    bad.tol = 0;
    CHECK_THROWS_AS(geodesic_flow(*m, z, 1.0, bad), InvalidArgumentError);
}
