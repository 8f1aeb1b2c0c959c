#include "qsmooth/smoothing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>

namespace qsmooth {

namespace {

struct Integrands {
    double full;
    double phi_only;
};

Integrands integrands_at(const Hamiltonian& H, const WaveField& u,
                         const std::vector<double>& w_grad,
                         const std::vector<double>& w_field,
                         const std::vector<double>& phi) {
    const auto gsq = covariant_grad_sq(H, u);
    const auto& rho = H.metric().sqrt_det();
    double acc_g = 0, acc_f = 0, acc_p = 0;
    for (std::size_t i = 0; i < gsq.size(); ++i) {
        const double gs = std::max(0.0, gsq[i]) * rho[i];
        acc_g += w_grad[i] * w_grad[i] * gs;
        acc_p += phi[i] * phi[i] * gs;
        acc_f += w_field[i] * w_field[i] * std::norm(u.v[i]) * rho[i];
    }
    const double dv = H.grid().cell_volume();
    return {(acc_g + acc_f) * dv, acc_p * dv};
}

}  // namespace

SpaceTimeSeries spacetime_series(const WaveField& u0, const SmoothingParams& p,
                                 const std::vector<double>& T_list,
                                 const Propagator& prop,
                                 const SpectralCalculus& calc,
                                 const CutoffFamily& cutoffs) {
    if (T_list.empty()) throw InvalidArgumentError("empty T list");
    for (std::size_t i = 1; i < T_list.size(); ++i)
        if (T_list[i] <= T_list[i - 1])
            throw InvalidArgumentError("T list must be strictly increasing");
    if (p.sigma <= 0) throw InvalidArgumentError("sigma must be > 0");

    const Hamiltonian& H = prop.hamiltonian();
    const Grid& g = H.grid();
    const double Tmax = T_list.back();
    if (!prop.config().sponge.on && Tmax > prop.horizon_guard(u0))
        throw ContaminationError("spacetime_series: T beyond horizon, sponge off");

    const auto w_grad = sample_japanese_bracket(g, -0.5 - p.sigma);
    const auto w_field = sample_japanese_bracket(g, -1.5 - p.sigma);
    const auto phi = sample_radial(g, cutoffs.phi());

    SpaceTimeSeries out;
    out.T = T_list;
    out.full.assign(T_list.size(), 0.0);
    out.phi_only.assign(T_list.size(), 0.0);
    out.h_half = calc.sobolev_norm(u0, 0.5);

    const double dt = std::min(p.dt_report, prop.config().dt);
    Evolution ev(prop, u0);
    Integrands prev = integrands_at(H, u0, w_grad, w_field, phi);
    double acc_full = 0, acc_phi = 0, t = 0;
    std::size_t next_T = 0;
    const double tol = 1e-9;
    while (next_T < T_list.size()) {
        const double t_next = std::min(t + dt, Tmax);
        ev.advance_to(t_next);
        const Integrands cur =
            integrands_at(H, ev.state(), w_grad, w_field, phi);
        const double h = t_next - t;
        acc_full += 0.5 * h * (prev.full + cur.full);
        acc_phi += 0.5 * h * (prev.phi_only + cur.phi_only);
        prev = cur;
        t = t_next;
        while (next_T < T_list.size() && t >= T_list[next_T] - tol) {
            out.full[next_T] = acc_full;
            out.phi_only[next_T] = acc_phi;
            ++next_T;
        }
    }
    return out;
}

double spacetime_norm(const WaveField& u0, const SmoothingParams& p, double T,
                      const Propagator& prop) {
    // standalone variant without the H^1/2 normalization
    const Hamiltonian& H = prop.hamiltonian();
    const Grid& g = H.grid();
    if (!prop.config().sponge.on && T > prop.horizon_guard(u0))
        throw ContaminationError("spacetime_norm: T beyond horizon, sponge off");
    const auto w_grad = sample_japanese_bracket(g, -0.5 - p.sigma);
    const auto w_field = sample_japanese_bracket(g, -1.5 - p.sigma);
    const std::vector<double> phi(g.size(), 0.0);

    const double dt = std::min(p.dt_report, prop.config().dt);
    Evolution ev(prop, u0);
    Integrands prev = integrands_at(H, u0, w_grad, w_field, phi);
    double acc = 0, t = 0;
    while (t < T - 1e-12) {
        const double t_next = std::min(t + dt, T);
        ev.advance_to(t_next);
        const Integrands cur =
            integrands_at(H, ev.state(), w_grad, w_field, phi);
        acc += 0.5 * (t_next - t) * (prev.full + cur.full);
        prev = cur;
        t = t_next;
    }
    return acc;
}

KEstimate estimate_K(const std::vector<WaveField>& data,
                     const SmoothingParams& p, const std::vector<double>& T_list,
                     const Propagator& prop, const SpectralCalculus& calc,
                     const CutoffFamily& cutoffs, bool phi_localized,
                     int threads) {
    if (data.empty()) throw InvalidArgumentError("estimate_K: empty data set");
    KEstimate est;
    est.T = T_list;
    est.K.assign(T_list.size(), 0.0);

    std::vector<SpaceTimeSeries> series(data.size());
    auto run_one = [&](std::size_t i) {
        series[i] = spacetime_series(data[i], p, T_list, prop, calc, cutoffs);
    };
    if (threads <= 1) {
        for (std::size_t i = 0; i < data.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> futs;
        for (int t = 0; t < threads; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= data.size()) return;
                    run_one(i);
                }
            }));
        for (auto& f : futs) f.get();
    }

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = series[i];
        if (s.h_half <= 0)
            throw InvalidArgumentError("estimate_K: datum with zero H^1/2 norm");
        for (std::size_t j = 0; j < T_list.size(); ++j) {
            KEstimateRow row;
            row.datum = int(i);
            row.T = T_list[j];
            row.spacetime = phi_localized ? s.phi_only[j] : s.full[j];
            row.h_half = s.h_half;
            row.ratio = std::sqrt(row.spacetime) / s.h_half;
            est.K[j] = std::max(est.K[j], row.ratio);
            est.rows.push_back(row);
        }
    }
    return est;
}

namespace {

// dense matrix of a real linear operator, column by column
Eigen::MatrixXd dense_operator(
    const Grid& g, const std::function<void(const std::vector<double>&,
                                            std::vector<double>&)>& op) {
    const std::int64_t N = g.size();
    Eigen::MatrixXd M(N, N);
    std::vector<double> e(N, 0.0), col(N);
    for (std::int64_t j = 0; j < N; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        op(e, col);
        for (std::int64_t i = 0; i < N; ++i) M(i, j) = col[i];
    }
    return M;
}

}  // namespace

namespace {

struct PoincareForms {
    Eigen::MatrixXd A, B0, B1;
};

// Dense matrices of the two quadratic forms. Assembly is one operator
// application per basis column; B is positive definite through the w2 mass
// term (constants included), while A annihilates constants, so the top
// generalized eigenpair automatically lives in the complement of the
// constant mode.
PoincareForms assemble_poincare_forms(const Hamiltonian& H,
                                      const CutoffFamily& cutoffs, double sigma,
                                      bool first_term_only) {
    const Grid& g = H.grid();
    const std::int64_t N = g.size();
    if (N > 6000)
        throw InvalidArgumentError(
            "poincare_constant: grid too large for dense GEVP");

    const Fft& fft = H.fft();
    const auto& rho = H.metric().sqrt_det();
    const double dv = g.cell_volume();
    const auto phi = sample_radial(g, cutoffs.phi());
    const auto w1 = sample_japanese_bracket(g, -0.5 - sigma);
    const auto w2 = sample_japanese_bracket(g, -1.5 - sigma);

    // weighted gradient form: f -> sum_jk D_j^T (w^2 rho g^{jk} D_k f)
    auto grad_form_apply = [&](const std::vector<double>& w,
                               const std::vector<double>& fin,
                               std::vector<double>& fout) {
        std::vector<cplx> u(N);
        for (std::int64_t i = 0; i < N; ++i) u[i] = fin[i];
        std::array<std::vector<cplx>, 3> grad;
        fft.gradient(u, grad);
        const int d = g.dim;
        std::vector<cplx> acc(N, cplx(0, 0)), prod(N), ph;
        for (int j = 0; j < d; ++j) {
            std::fill(prod.begin(), prod.end(), cplx(0, 0));
            for (int k = 0; k < d; ++k) {
                const auto& gi = H.metric().inverse_component(sym_index(j, k));
                for (std::int64_t i = 0; i < N; ++i)
                    prod[i] += w[i] * w[i] * rho[i] * gi[i] * grad[k][i];
            }
            fft.forward(prod, ph);
            for_each_wavenumber(g, [&](std::int64_t idx, const Vec3& kk) {
                acc[idx] += cplx(0.0, -kk[j]) * ph[idx];  // D_j^T = -D_j
            });
        }
        std::vector<cplx> res;
        fft.backward(acc, res);
        fout.resize(N);
        for (std::int64_t i = 0; i < N; ++i) fout[i] = res[i].real() * dv;
    };

    PoincareForms forms;
    forms.A = dense_operator(
        g, [&](const std::vector<double>& fin, std::vector<double>& fout) {
            grad_form_apply(phi, fin, fout);
        });
    forms.A = 0.5 * (forms.A + forms.A.transpose()).eval();

    forms.B0 = dense_operator(
        g, [&](const std::vector<double>& fin, std::vector<double>& fout) {
            grad_form_apply(w1, fin, fout);
            if (!first_term_only)
                for (std::int64_t i = 0; i < N; ++i)
                    fout[i] += w2[i] * w2[i] * rho[i] * dv * fin[i];
        });
    forms.B0 = 0.5 * (forms.B0 + forms.B0.transpose()).eval();

    if (first_term_only) {
        forms.B1 = Eigen::MatrixXd::Zero(N, N);
    } else {
        // the Hf terms reuse the same weighted form: B1 = H^T B0 H
        Eigen::MatrixXd Hd = dense_operator(
            g, [&](const std::vector<double>& fin, std::vector<double>& fout) {
                WaveField u(H.metric_ptr());
                for (std::int64_t i = 0; i < N; ++i) u.v[i] = fin[i];
                const WaveField Hu = H.apply(u);
                fout.resize(N);
                for (std::int64_t i = 0; i < N; ++i) fout[i] = Hu.v[i].real();
            });
        forms.B1 = Hd.transpose() * forms.B0 * Hd;
        forms.B1 = (0.5 * (forms.B1 + forms.B1.transpose())).eval();
    }
    return forms;
}

}  // namespace

std::vector<double> poincare_constants(const Hamiltonian& H,
                                       const CutoffFamily& cutoffs,
                                       const std::vector<double>& eps_list,
                                       double sigma) {
    std::vector<double> out;
    PoincareForms forms = assemble_poincare_forms(H, cutoffs, sigma, false);
    for (double eps : eps_list) {
        if (eps <= 0)
            throw InvalidArgumentError("poincare_constant: eps must be > 0");
        Eigen::MatrixXd B = forms.B0 + (1.0 / (eps * eps)) * forms.B1;
        B = 0.5 * (B + B.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(forms.A, B);
        if (ges.info() != Eigen::Success)
            throw ConvergenceError("poincare_constant: generalized eigensolve failed");
        out.push_back(std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff())));
    }
    return out;
}

double poincare_constant(const Hamiltonian& H, const CutoffFamily& cutoffs,
                         double eps, double sigma, bool first_term_only) {
    if (eps <= 0) throw InvalidArgumentError("poincare_constant: eps must be > 0");
    if (!first_term_only) return poincare_constants(H, cutoffs, {eps}, sigma)[0];

    PoincareForms forms = assemble_poincare_forms(H, cutoffs, sigma, true);
    // both forms annihilate constants here: deflate with a tiny mass term so
    // the pencil stays definite
    const std::int64_t N = H.grid().size();
    const auto& rho = H.metric().sqrt_det();
    const double dv = H.grid().cell_volume();
    Eigen::MatrixXd B = forms.B0;
    for (std::int64_t i = 0; i < N; ++i) B(i, i) += 1e-10 * rho[i] * dv;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(forms.A, B);
    if (ges.info() != Eigen::Success)
        throw ConvergenceError("poincare_constant: generalized eigensolve failed");
    return std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
}

double greens_functional(const MultiplierField& a, double delta, int n_quad) {
    if (n_quad < 40)
        throw ResolutionError(
            "greens_functional: radial quadrature under-resolves the collar "
            "(need n >= 40)");
    const double R0 = a.R0();
    const double r_ball = 3.0 * R0;
    // the integrand is radial by construction: 3D ball quadrature reduces to
    // 4 pi int r^2 (1/2 Delta^2 a) dr, composite Simpson on [2 R0, 3 R0]
    // (the profile vanishes identically below the collar)
    int n = n_quad + (n_quad % 2);
    const double lo = 2.0 * R0;
    const double h = (r_ball - lo) / n;
    double acc = 0;
    for (int i = 0; i <= n; ++i) {
        const double r = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * r * r * a.bilaplacian3(r);
    }
    acc *= h / 3.0;
    const double vol = 4.0 / 3.0 * M_PI * r_ball * r_ball * r_ball;
    return delta * vol + 0.5 * 4.0 * M_PI * acc;
}

}  // namespace qsmooth
