#include "qsmooth/geodesic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>

namespace qsmooth {

double geodesic_energy(const MetricField& m, const GeodesicState& st) {
    const SymMat gi = m.ginv_at(st.x);
    double e = 0;
    const int d = m.dim();
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) e += gi(j, k) * st.xi[j] * st.xi[k];
    return 0.5 * e;
}

namespace {

// dx^i/ds = g^{ik} xi_k ;  dxi_i/ds = -1/2 d_i g^{jk} xi_j xi_k
void flow_rhs(const MetricField& m, const double* y, double* dy) {
    const int d = m.dim();
    Vec3 x{y[0], y[1], y[2]}, xi{y[3], y[4], y[5]};
    const SymMat gi = m.ginv_at(x);
    std::array<SymMat, 3> dg;
    m.dg_at(x, dg);
    for (int i = 0; i < 6; ++i) dy[i] = 0;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) dy[i] += gi(i, k) * xi[k];
    // d_i g^{jk} = -(g^-1 d_i g g^-1)^{jk}
    for (int i = 0; i < d; ++i) {
        double acc = 0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double dgi = 0;
                for (int p = 0; p < d; ++p)
                    for (int q = 0; q < d; ++q)
                        dgi -= gi(j, p) * dg[i](p, q) * gi(q, k);
                acc += dgi * xi[j] * xi[k];
            }
        dy[3 + i] = -0.5 * acc;
    }
}

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

Trajectory integrate_once(const MetricField& m, const GeodesicState& init,
                          double s_max, double local_tol,
                          const FlowOptions& opts) {
    Trajectory tr;
    const double dir = s_max >= 0 ? 1.0 : -1.0;
    const double s_end = std::abs(s_max);
    const double E0 = geodesic_energy(m, init);
    const double scale0 = std::max(1e-12, std::abs(E0));

    double y[6] = {init.x[0], init.x[1], init.x[2],
                   init.xi[0], init.xi[1], init.xi[2]};
    double s = 0;
    double h = std::min(0.01, s_end > 0 ? s_end : 0.01);
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    double k1[6], k2[6], k3[6], k4[6], k5[6], k6[6], k7[6];
    double yt[6], y5[6];

    auto record = [&](const double* yy, double ss) {
        GeodesicState st;
        st.x = {yy[0], yy[1], yy[2]};
        st.xi = {yy[3], yy[4], yy[5]};
        st.s = dir * ss;
        const double E = geodesic_energy(m, st);
        tr.energy_drift = std::max(tr.energy_drift, std::abs(E - E0) / scale0);
        const double rad = std::sqrt(norm2(st.x, m.dim()));
        if (!tr.escaped && rad >= opts.stop_radius) {
            tr.escaped = true;
            // interpolate the crossing parameter within the last step
            tr.escape_param = ss;
            if (!tr.points.empty()) {
                const auto& prev = tr.points.back();
                const double r_prev = std::sqrt(norm2(prev.x, m.dim()));
                const double s_prev = std::abs(prev.s);
                if (rad > r_prev + 1e-14)
                    tr.escape_param =
                        s_prev + (opts.stop_radius - r_prev) / (rad - r_prev) *
                                     (ss - s_prev);
            }
        }
        tr.points.push_back(st);
    };

    record(y, 0.0);

    auto rhs = [&](const double* yy, double* dy) {
        flow_rhs(m, yy, dy);
        for (int i = 0; i < 6; ++i) dy[i] *= dir;
    };

    rhs(y, k1);
    int consecutive_rejects = 0;
    while (s < s_end && !tr.escaped) {
        h = std::min(h, s_end - s);
        for (int i = 0; i < 6; ++i) yt[i] = y[i] + h * A21 * k1[i];
        rhs(yt, k2);
        for (int i = 0; i < 6; ++i) yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        rhs(yt, k3);
        for (int i = 0; i < 6; ++i)
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        rhs(yt, k4);
        for (int i = 0; i < 6; ++i)
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        rhs(yt, k5);
        for (int i = 0; i < 6; ++i)
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] +
                                A64 * k4[i] + A65 * k5[i]);
        rhs(yt, k6);
        for (int i = 0; i < 6; ++i)
            y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] +
                                B6 * k6[i]);
        rhs(y5, k7);

        double err = 0;
        for (int i = 0; i < 6; ++i) {
            const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] +
                                  E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            const double sc = local_tol * (1.0 + std::abs(y[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / 6.0);

        if (err <= 1.0) {
            s += h;
            std::copy(y5, y5 + 6, y);
            std::copy(k7, k7 + 6, k1);  // FSAL
            record(y, s);
            consecutive_rejects = 0;
        } else {
            ++consecutive_rejects;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (opts.max_step > 0) h = std::min(h, opts.max_step);
        if (h < 1e-14 * std::max(1.0, s_end) || consecutive_rejects > 60) {
            tr.failed = true;
            tr.failure = "geodesic step size underflow";
            return tr;
        }
    }
    return tr;
}

}  // namespace

Trajectory geodesic_flow(const MetricField& m, const GeodesicState& init,
                         double s_max, const FlowOptions& opts) {
    if (opts.tol <= 0) throw InvalidArgumentError("geodesic_flow: tol must be > 0");
    if (norm2(init.xi, m.dim()) == 0)
        throw InvalidArgumentError("geodesic_flow: initial covector is zero");
    double local = std::min(1e-8, 0.1 * opts.tol);
    Trajectory tr;
    for (int attempt = 0; attempt < 5; ++attempt) {
        tr = integrate_once(m, init, s_max, local, opts);
        if (tr.failed || tr.energy_drift <= opts.tol) return tr;
        local *= 0.03;
    }
    return tr;
}

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * double(index % base);
        index /= base;
    }
    return r;
}

namespace {

// radial libration of the trajectory tail; small = close to a circular orbit
double libration(const Trajectory& tr, int dim) {
    if (tr.points.size() < 4) return 1e30;
    double rmin = 1e300, rmax = 0;
    const std::size_t from = tr.points.size() / 2;
    for (std::size_t i = from; i < tr.points.size(); ++i) {
        const double r = std::sqrt(norm2(tr.points[i].x, dim));
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    return (rmax - rmin) / std::max(0.5 * (rmax + rmin), 1e-12);
}

}  // namespace

TrappingCertificate certify_nontrapping(const MetricField& m, double shell_lo,
                                        double shell_hi, int samples,
                                        double escape_radius, double s_max,
                                        double tol, std::uint64_t seed,
                                        int threads) {
    if (escape_radius < 2.0 * m.R0())
        throw InvalidArgumentError("certify_nontrapping: escape_radius < 2 R0");
    if (samples < 1) throw InvalidArgumentError("certify_nontrapping: samples < 1");

    TrappingCertificate cert;
    cert.samples = samples;
    cert.shell_lo = shell_lo;
    cert.shell_hi = shell_hi;
    cert.escape_radius = escape_radius;
    cert.s_max = s_max;
    cert.seed = seed;

    const int d = m.dim();

    auto draw = [&](std::uint64_t i) {
        GeodesicState st;
        // position: Halton in the cube, rejection into the ball of radius 2 R0
        std::uint64_t idx = seed + i + 1;
        for (;;) {
            Vec3 p{0, 0, 0};
            p[0] = 2 * halton(idx, 2) - 1;
            if (d > 1) p[1] = 2 * halton(idx, 3) - 1;
            if (d > 2) p[2] = 2 * halton(idx, 5) - 1;
            if (norm2(p, d) <= 1.0) {
                for (int a = 0; a < d; ++a) st.x[a] = 2.0 * m.R0() * p[a];
                break;
            }
            idx += samples + 1;  // leap to a fresh sequence point
        }
        // direction on the sphere
        Vec3 eta{1, 0, 0};
        if (d == 2) {
            const double th = 2 * M_PI * halton(seed + i + 1, 7);
            eta = {std::cos(th), std::sin(th), 0};
        } else if (d == 3) {
            const double z = 2 * halton(seed + i + 1, 7) - 1;
            const double ph = 2 * M_PI * halton(seed + i + 1, 11);
            const double rr = std::sqrt(std::max(0.0, 1 - z * z));
            eta = {rr * std::cos(ph), rr * std::sin(ph), z};
        }
        // energy in the shell
        const double E =
            shell_lo + (shell_hi - shell_lo) * halton(seed + i + 1, 13);
        const SymMat gi = m.ginv_at(st.x);
        double q = 0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) q += gi(j, k) * eta[j] * eta[k];
        const double alpha = std::sqrt(2.0 * std::max(E, 1e-12) / q);
        for (int a = 0; a < d; ++a) st.xi[a] = alpha * eta[a];
        return st;
    };

    struct Outcome {
        int status = 0;  // 0 escaped, 1 trapped, 2 undecided
        double escape_param = 0;
        double libr = 1e30;
        GeodesicState init;
    };

    FlowOptions opts;
    opts.tol = tol;
    opts.stop_radius = escape_radius;

    auto run_one = [&](int i) {
        Outcome oc;
        oc.init = draw(std::uint64_t(i));
        double worst_libr = 0;
        for (double sign : {1.0, -1.0}) {
            Trajectory tr = geodesic_flow(m, oc.init, sign * s_max, opts);
            if (tr.failed) {
                oc.status = 2;
                return oc;
            }
            if (!tr.escaped) {
                oc.status = 1;
                worst_libr = std::max(worst_libr, libration(tr, d));
            } else {
                oc.escape_param = std::max(oc.escape_param, tr.escape_param);
            }
        }
        oc.libr = oc.status == 1 ? worst_libr : 1e30;
        return oc;
    };

    std::vector<Outcome> outcomes(samples);
    if (threads <= 1) {
        for (int i = 0; i < samples; ++i) outcomes[i] = run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= samples) return;
                    outcomes[i] = run_one(i);
                }
            }));
        for (auto& f : futs) f.get();
    }

    double best_libr = 1e30;
    for (const auto& oc : outcomes) {
        if (oc.status == 0) {
            cert.max_escape_param = std::max(cert.max_escape_param, oc.escape_param);
        } else if (oc.status == 1) {
            ++cert.n_trapped;
            if (cert.trapped_states.size() < 64)
                cert.trapped_states.push_back(oc.init);
            if (oc.libr < best_libr) {
                best_libr = oc.libr;
                cert.offending = oc.init;
                cert.offending_libration = oc.libr;
            }
        } else {
            ++cert.n_undecided;
        }
    }
    cert.pass = (cert.n_trapped == 0 && cert.n_undecided == 0);
    return cert;
}

}  // namespace qsmooth
