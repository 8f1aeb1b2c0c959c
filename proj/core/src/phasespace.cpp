#include "qsmooth/phasespace.hpp"

#include <cmath>

namespace qsmooth {

HalfSpaceProjector make_half_projector(const CutoffFamily& cutoffs, double R,
                                       int side) {
    HalfSpaceProjector p;
    p.R = R;
    p.psi_tilde = cutoffs.psi_tilde(R);
    p.side = side;
    return p;
}

namespace {

// half-space weight of a lattice mode: 1 on sign(k.e) = side, 0 on the other
// side, 1/2 on the k.e = 0 plane (Nyquist modes land here via the derivative
// wavenumber convention).
double half_weight(const Vec3& k, const Vec3& e, int dim, int side) {
    const double d = dot(k, e, dim);
    if (d == 0.0) return 0.5;
    return (d > 0) == (side > 0) ? 1.0 : 0.0;
}

}  // namespace

WaveField apply_half_projector(const HalfSpaceProjector& p, const WaveField& f) {
    const Grid& g = f.grid();
    Fft fft(g);
    WaveField out = f;
    const auto mask = sample_ball(g, p.psi_tilde);
    out.mask(mask);
    std::vector<cplx> fh;
    fft.forward(out.v, fh);
    for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
        fh[idx] *= half_weight(k, p.direction, g.dim, p.side);
    });
    fft.backward(fh, out.v);
    return out;
}

namespace {

double flat_h2_symbol(const Vec3& k, int dim) {
    const double l = 0.5 * norm2(k, dim);
    return l * l;
}

// clamped-erf ascent centered at c with width w
double asc(double r, double c, double w) {
    return transition_eval(Transition::Gauss, (r - c) / w + 0.5);
}

struct Piece {
    std::vector<double> w;          // partition mask w_b
    std::vector<double> psi_tilde;  // cover, 1 on ess-supp(w_b)
    Vec3 direction;
};

std::vector<Vec3> sector_directions(int dim, int sectors) {
    std::vector<Vec3> dirs;
    if (dim == 1) {
        dirs.push_back({1, 0, 0});
        dirs.push_back({-1, 0, 0});
        return dirs;
    }
    auto plane = [&](int a, int b) {
        for (int j = 0; j < sectors; ++j) {
            const double th = 2.0 * M_PI * j / sectors;
            Vec3 e{0, 0, 0};
            e[a] = std::cos(th);
            e[b] = std::sin(th);
            dirs.push_back(e);
        }
    };
    plane(0, 1);
    if (dim == 3) {
        plane(0, 2);
        plane(1, 2);
    }
    return dirs;
}

std::vector<Piece> build_pieces(const Grid& g, double R,
                                const CutoffFamily& cutoffs,
                                const DyadicConfig& cfg) {
    const auto one_minus_phiR = [&] {
        auto v = sample_radial(g, cutoffs.phi_R(R));
        for (auto& x : v) x = 1.0 - x;
        return v;
    }();

    const auto dirs = sector_directions(g.dim, cfg.sectors);
    const int ndir = int(dirs.size());
    const double sig = (g.dim == 2) ? M_PI / cfg.sectors : 0.6;

    // angular weights, normalized pointwise over all directions
    std::vector<std::vector<double>> ang(ndir, std::vector<double>(g.size(), 1.0));
    if (g.dim >= 2) {
        std::vector<double> total(g.size(), 0.0);
        for (int j = 0; j < ndir; ++j) {
            for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
                const double r = std::sqrt(norm2(x, g.dim));
                double q;
                if (r < 1e-12) {
                    q = 1.0;
                } else {
                    double c = dot(x, dirs[j], g.dim) / r;
                    c = std::clamp(c, -1.0, 1.0);
                    const double dtheta = std::acos(c);
                    q = std::exp(-(dtheta * dtheta) / (sig * sig));
                }
                ang[j][idx] = q;
                total[idx] += q;
            });
        }
        for (int j = 0; j < ndir; ++j)
            for (std::int64_t i = 0; i < g.size(); ++i) ang[j][i] /= total[i];
    }

    // radial telescoping windows: shells [2^m R, 2^(m+1) R], last open-ended
    const int M = cfg.shells;
    std::vector<Piece> pieces;
    std::vector<double> radius(g.size());
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        radius[idx] = std::sqrt(norm2(x, g.dim));
    });

    for (int m = 0; m < M; ++m) {
        const double b_lo = R * std::pow(2.0, m);
        const double b_hi = R * std::pow(2.0, m + 1);
        const double w_lo = cfg.radial_smooth * b_lo;
        const double w_hi = cfg.radial_smooth * b_hi;
        for (int j = 0; j < ndir; ++j) {
            Piece pc;
            pc.direction = dirs[j];
            pc.w.resize(g.size());
            pc.psi_tilde.resize(g.size());
            for (std::int64_t i = 0; i < g.size(); ++i) {
                const double r = radius[i];
                double shell = asc(r, b_lo, w_lo);
                if (m + 1 < M) shell -= asc(r, b_hi, w_hi);
                pc.w[i] = one_minus_phiR[i] * shell * ang[j][i];
            }
            // cover: radial window with margin, wide angular window
            const double lo_edge = (m == 0 ? 0.6 * R : b_lo - w_lo) -
                                   cfg.cover_margin * b_lo;
            const double hi_edge =
                (m + 1 < M) ? b_hi + w_hi + cfg.cover_margin * b_hi : -1.0;
            const double ang_max =
                (g.dim >= 2) ? (M_PI * 2.0 / cfg.sectors + 3.2 * sig) : 10.0;
            for (std::int64_t i = 0; i < g.size(); ++i) {
                const double r = radius[i];
                double v = asc(r, lo_edge, cfg.cover_margin * b_lo);
                if (hi_edge > 0)
                    v *= 1.0 - asc(r, hi_edge, cfg.cover_margin * b_hi);
                if (g.dim >= 2 && ang_max < M_PI) {
                    double c = r < 1e-12
                                   ? 1.0
                                   : dot(g.point(i), pc.direction, g.dim) / r;
                    c = std::clamp(c, -1.0, 1.0);
                    const double dtheta = std::acos(c);
                    v *= 1.0 - asc(dtheta, ang_max, 0.25 * sig);
                }
                pc.psi_tilde[i] = v;
            }
            pieces.push_back(std::move(pc));
        }
    }
    return pieces;
}

}  // namespace

double decomposition_residual(const WaveField& f, double R,
                              const CutoffFamily& cutoffs,
                              const DyadicConfig& cfg) {
    const Grid& g = f.grid();
    Fft fft(g);

    // reference: (1 - phi_R) H0^2 f
    std::vector<cplx> h2f = f.v, fh;
    fft.forward(h2f, fh);
    std::vector<cplx> work = fh;
    for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
        work[idx] *= flat_h2_symbol(k, g.dim);
    });
    fft.backward(work, h2f);
    auto phiR = sample_radial(g, cutoffs.phi_R(R));
    double den2 = 0;
    std::vector<cplx> ref(g.size());
    for (std::int64_t i = 0; i < g.size(); ++i) {
        ref[i] = (1.0 - phiR[i]) * h2f[i];
        den2 += std::norm(ref[i]);
    }
    const double den = std::sqrt(den2 * g.cell_volume());
    if (den < 1e-13 * std::max(1.0, l2_norm(f)))
        throw InvalidArgumentError(
            "decomposition_residual: ||(1-phi_R) H^2 f|| below floor");

    const auto pieces = build_pieces(g, R, cutoffs, cfg);
    std::vector<cplx> accum(g.size(), cplx(0, 0));
    std::vector<cplx> masked(g.size()), mh, side, part;
    for (const auto& pc : pieces) {
        for (std::int64_t i = 0; i < g.size(); ++i)
            masked[i] = pc.psi_tilde[i] * f.v[i];
        fft.forward(masked, mh);
        for (int s : {+1, -1}) {
            side = mh;
            for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
                side[idx] *= half_weight(k, pc.direction, g.dim, s) *
                             flat_h2_symbol(k, g.dim);
            });
            fft.backward(side, part);
            for (std::int64_t i = 0; i < g.size(); ++i)
                accum[i] += pc.w[i] * part[i];
        }
    }
    double num2 = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) num2 += std::norm(ref[i] - accum[i]);
    return std::sqrt(num2 * g.cell_volume()) / den;
}

double decomposition_residual_single_ball(const WaveField& f, double R,
                                          const CutoffFamily& cutoffs) {
    const Grid& g = f.grid();
    Fft fft(g);
    const auto psi = sample_ball(g, cutoffs.psi(R));

    std::vector<cplx> fh;
    fft.forward(f.v, fh);
    std::vector<cplx> work = fh, h2f;
    for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
        work[idx] *= flat_h2_symbol(k, g.dim);
    });
    fft.backward(work, h2f);

    double den2 = 0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        den2 += std::norm(psi[i] * h2f[i]);
    const double den = std::sqrt(den2 * g.cell_volume());
    if (den < 1e-13 * std::max(1.0, l2_norm(f)))
        throw InvalidArgumentError(
            "decomposition_residual: ||psi H^2 f|| below floor");

    const auto pin = make_half_projector(cutoffs, R, -1);
    const auto pout = make_half_projector(cutoffs, R, +1);
    const WaveField fin = apply_half_projector(pin, f);
    const WaveField fout = apply_half_projector(pout, f);

    auto h2 = [&](const WaveField& u) {
        std::vector<cplx> uh, res;
        fft.forward(u.v, uh);
        for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
            uh[idx] *= flat_h2_symbol(k, g.dim);
        });
        fft.backward(uh, res);
        return res;
    };
    const auto h2in = h2(fin), h2out = h2(fout);
    double num2 = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const cplx r = psi[i] * (h2f[i] - h2in[i] - h2out[i]);
        num2 += std::norm(r);
    }
    return std::sqrt(num2 * g.cell_volume()) / den;
}

namespace {

struct FitResult {
    double slope = 0, intercept = 0, rms = 0;
    int points = 0;
};

FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    FitResult r;
    r.points = int(x.size());
    if (r.points < 2) return r;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < r.points; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double n = r.points;
    const double det = n * sxx - sx * sx;
    r.slope = (n * sxy - sx * sy) / det;
    r.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0;
    for (int i = 0; i < r.points; ++i) {
        const double e = y[i] - (r.intercept + r.slope * x[i]);
        ss += e * e;
    }
    r.rms = std::sqrt(ss / n);
    return r;
}

DecayScan finish_scan(std::vector<DecayRow> rows, const DecayScanConfig& cfg,
                      int n_probes) {
    DecayScan scan;
    scan.rows = std::move(rows);
    scan.m_cap = cfg.m_cap;
    scan.l_cap = cfg.l_cap;
    scan.floor = cfg.floor;
    scan.exponent = -std::numeric_limits<double>::infinity();
    scan.log_rms = 0;
    scan.constant = 0;
    for (int p = 0; p < n_probes; ++p) {
        std::vector<double> x, y;
        for (auto& row : scan.rows) {
            if (row.probe != p) continue;
            if (row.value <= cfg.floor) {
                row.used = false;
                continue;
            }
            x.push_back(std::log(row.R * row.R + row.s));
            y.push_back(std::log(row.value));
        }
        if (int(x.size()) < 6)
            throw InvalidArgumentError(
                "decay scan: fewer than 6 points above the floor for a probe "
                "(fit degeneracy)");
        const FitResult f = loglog_fit(x, y);
        scan.probe_exponent.push_back(f.slope);
        scan.probe_constant.push_back(std::exp(f.intercept));
        scan.probe_rms.push_back(f.rms);
        scan.exponent = std::max(scan.exponent, f.slope);
        scan.log_rms = std::max(scan.log_rms, f.rms);
        scan.constant = std::max(scan.constant, std::exp(f.intercept));
    }
    return scan;
}

double capped_weighted_norm(const Fft& fft, const WaveField& u, int m_cap,
                            double l_exponent) {
    // || <x>^l (1+H0)^(m/2) u ||, flat metric
    const Grid& g = fft.grid();
    WaveField w = u;
    if (m_cap != 0)
        fft.apply_symbol(w.v, [&](const Vec3& k) {
            return cplx(std::pow(1.0 + 0.5 * norm2(k, g.dim), 0.5 * m_cap), 0);
        });
    const auto jb = sample_japanese_bracket(g, l_exponent);
    double acc = 0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        acc += std::norm(w.v[i]) * jb[i] * jb[i];
    return std::sqrt(acc * g.cell_volume());
}

}  // namespace

DecayScan outgoing_decay_scan(const DecayScanConfig& cfg,
                              const CutoffFamily& cutoffs,
                              const Propagator& flat_prop,
                              const std::vector<std::vector<WaveField>>& probes) {
    if (!flat_prop.hamiltonian().flat())
        throw InvalidArgumentError("decay scans run on the flat operator");
    const Grid& g = flat_prop.hamiltonian().grid();
    Fft fft(g);
    const auto wt = sample_japanese_bracket(g, 1.5 + cfg.sigma);

    std::vector<DecayRow> rows;
    for (std::size_t ri = 0; ri < cfg.R_list.size(); ++ri) {
        const double R = cfg.R_list[ri];
        const auto psi = sample_ball(g, cutoffs.psi(R));
        const auto psit = sample_ball(g, cutoffs.psi_tilde(R));
        const Vec3 e1{1, 0, 0};
        for (std::size_t pi = 0; pi < probes[ri].size(); ++pi) {
            const WaveField& f = probes[ri][pi];
            const double nrm =
                capped_weighted_norm(fft, f, cfg.m_cap, double(cfg.l_cap));
            Evolution ev(flat_prop, f);
            std::vector<cplx> masked(g.size()), mh, out;
            for (double s : cfg.s_list) {
                ev.advance_to(s);
                const auto& us = ev.state().v;
                for (std::int64_t i = 0; i < g.size(); ++i)
                    masked[i] = psit[i] * us[i];
                fft.forward(masked, mh);
                for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
                    mh[idx] *= half_weight(k, e1, g.dim, +1) *
                               flat_h2_symbol(k, g.dim);
                });
                fft.backward(mh, out);
                double acc = 0;
                for (std::int64_t i = 0; i < g.size(); ++i)
                    acc += std::norm(out[i]) * psi[i] * psi[i] * wt[i] * wt[i];
                DecayRow row;
                row.probe = int(pi);
                row.R = R;
                row.s = s;
                row.value = std::sqrt(acc * g.cell_volume()) / nrm;
                rows.push_back(row);
            }
        }
    }
    return finish_scan(std::move(rows), cfg,
                       probes.empty() ? 0 : int(probes[0].size()));
}

DecayScan incoming_decay_scan(const DecayScanConfig& cfg,
                              const CutoffFamily& cutoffs,
                              const Propagator& flat_prop,
                              const std::vector<std::vector<WaveField>>& probes) {
    if (!flat_prop.hamiltonian().flat())
        throw InvalidArgumentError("decay scans run on the flat operator");
    const Grid& g = flat_prop.hamiltonian().grid();
    Fft fft(g);
    const auto wt = sample_japanese_bracket(g, -double(cfg.l_cap));
    const int m_in = 2;  // H^{2,-8} realization keeps its own order

    std::vector<DecayRow> rows;
    for (std::size_t ri = 0; ri < cfg.R_list.size(); ++ri) {
        const double R = cfg.R_list[ri];
        const auto psi = sample_ball(g, cutoffs.psi(R));
        const auto psit = sample_ball(g, cutoffs.psi_tilde(R));
        const Vec3 e1{1, 0, 0};
        for (std::size_t pi = 0; pi < probes[ri].size(); ++pi) {
            const WaveField& f = probes[ri][pi];
            const double nrm = capped_weighted_norm(fft, f, cfg.m_cap, 0.0);
            // psi H0^2 P_in f
            std::vector<cplx> masked(g.size()), mh;
            for (std::int64_t i = 0; i < g.size(); ++i)
                masked[i] = psit[i] * f.v[i];
            fft.forward(masked, mh);
            for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& k) {
                mh[idx] *= half_weight(k, e1, g.dim, -1) *
                           flat_h2_symbol(k, g.dim);
            });
            WaveField q(f.metric);
            fft.backward(mh, q.v);
            q.mask(psi);
            // exp(isH0): backward evolution, stepped with the sponge on
            Evolution ev(flat_prop, q);
            std::vector<cplx> w(g.size());
            for (double s : cfg.s_list) {
                ev.advance_to(-s);
                w = ev.state().v;
                fft.apply_symbol(w, [&](const Vec3& k) {
                    return cplx(
                        std::pow(1.0 + 0.5 * norm2(k, g.dim), 0.5 * m_in), 0);
                });
                double acc = 0;
                for (std::int64_t i = 0; i < g.size(); ++i)
                    acc += std::norm(w[i]) * wt[i] * wt[i];
                DecayRow row;
                row.probe = int(pi);
                row.R = R;
                row.s = s;
                row.value = std::sqrt(acc * g.cell_volume()) / nrm;
                rows.push_back(row);
            }
        }
    }
    return finish_scan(std::move(rows), cfg,
                       probes.empty() ? 0 : int(probes[0].size()));
}

std::vector<RageRow> rage_average(const CompactLocalizer& c, const WaveField& u0,
                                  const std::vector<double>& T_grid,
                                  const Propagator& prop,
                                  const SpectralCalculus& calc,
                                  const CutoffFamily& cutoffs,
                                  double dt_report) {
    if (T_grid.empty()) throw InvalidArgumentError("rage_average: empty T grid");
    const Hamiltonian& H = prop.hamiltonian();
    const Grid& g = H.grid();
    const double Tmax = T_grid.back();
    if (!prop.config().sponge.on && Tmax > prop.horizon_guard(u0))
        throw ContaminationError("rage_average: T beyond horizon, sponge off");

    // P_med commutes with exp(-itH): filter once
    WaveField w0 = u0;
    if (c.med_eps0) w0 = calc.apply(chi_band_profile('m', *c.med_eps0), u0);
    const auto mask = sample_radial(g, cutoffs.phi_R(c.R));

    auto localized_sq = [&](const WaveField& u) {
        return std::pow(weighted_l2_norm(u, mask), 2);
    };

    std::vector<RageRow> out;
    Evolution ev(prop, w0);
    double acc = 0, t = 0, prev = localized_sq(w0);
    std::size_t next_T = 0;
    while (next_T < T_grid.size()) {
        const double t_next = std::min(t + dt_report, Tmax);
        ev.advance_to(t_next);
        const double cur = localized_sq(ev.state());
        acc += 0.5 * (t_next - t) * (prev + cur);
        prev = cur;
        t = t_next;
        while (next_T < T_grid.size() && t >= T_grid[next_T] - 1e-9) {
            out.push_back({T_grid[next_T], acc / T_grid[next_T]});
            ++next_T;
        }
    }
    return out;
}

std::vector<RageLocalizedRow> rage_localized(
    double R, const std::vector<double>& tau_grid, double eps0,
    const std::array<WaveField, 3>& f_vec, const SpectralCalculus& calc,
    const CutoffFamily& cutoffs, const Propagator& prop) {
    const Hamiltonian& H = prop.hamiltonian();
    const Grid& g = H.grid();
    const auto phi = sample_radial(g, cutoffs.phi());
    const auto phiR = sample_radial(g, cutoffs.phi_R(R));

    double f_norm2 = 0;
    for (int a = 0; a < g.dim; ++a) f_norm2 += std::pow(l2_norm(f_vec[a]), 2);
    const double f_norm = std::sqrt(f_norm2);
    if (f_norm == 0) throw InvalidArgumentError("rage_localized: zero probe");

    WaveField div = weighted_divergence(H, f_vec, phi);
    WaveField med = calc.apply(chi_band_profile('m', eps0), div);

    std::vector<RageLocalizedRow> out;
    Evolution ev(prop, med);
    for (double tau : tau_grid) {
        ev.advance_to(-tau);  // exp(+i tau H)
        out.push_back({tau, weighted_l2_norm(ev.state(), phiR) / f_norm});
    }
    return out;
}

}  // namespace qsmooth
