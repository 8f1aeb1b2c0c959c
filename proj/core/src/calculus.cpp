#include "qsmooth/calculus.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "qsmooth/cutoffs.hpp"

namespace qsmooth {

Profile identity_profile() {
    return {"id", [](double) { return cplx(1, 0); }};
}

Profile power_profile(double p) {
    return {"pow(" + std::to_string(p) + ")", [p](double l) {
                return cplx(std::pow(std::max(l, 0.0), p), 0.0);
            }};
}

Profile evolution_profile(double t) {
    return {"expm(" + std::to_string(t) + ")", [t](double l) {
                return std::exp(cplx(0.0, -t * l));
            }};
}

Profile chi_band_profile(char band, double eps0, bool sharp) {
    if (!(eps0 > 0 && eps0 < 1))
        throw InvalidArgumentError("band projector needs 0 < eps0 < 1");
    auto chi = sharp ? chi_sharp : chi_profile;
    switch (band) {
        case 'l':
            return {"P_lo", [chi, eps0](double l) { return cplx(chi(l / eps0), 0); }};
        case 'm':
            return {"P_med", [chi, eps0](double l) {
                        return cplx(chi(eps0 * l) - chi(l / eps0), 0);
                    }};
        case 'h':
            return {"P_hi", [chi, eps0](double l) { return cplx(1.0 - chi(eps0 * l), 0); }};
    }
    throw InvalidArgumentError("band must be 'l', 'm' or 'h'");
}

Profile inverse_sq_med_profile(double eps0) {
    auto med = chi_band_profile('m', eps0);
    return {"H^-2 P_med", [f = med.f](double l) {
                const cplx m = f(l);
                if (m == cplx(0, 0)) return cplx(0, 0);
                return m / cplx(l * l, 0);
            }};
}

BandProjector spectral_projector(char band, double eps0,
                                 std::shared_ptr<const SpectralCalculus> calc,
                                 bool sharp) {
    return BandProjector{band, eps0, sharp, std::move(calc)};
}

namespace {

void check_profile_bounded(const Profile& p, const std::vector<double>& lambdas) {
    for (double l : lambdas) {
        const cplx v = p.f(l);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
            std::abs(v) > 1e14)
            throw SingularProfileError("profile '" + p.name +
                                       "' singular on the resolved spectrum");
    }
}

}  // namespace

struct SpectralCalculus::Eig {
    Eigen::MatrixXd V;          // eigenvectors of W H W^-1 (columns)
    Eigen::VectorXd lambda;     // ascending
    std::vector<double> lambda_v;
    std::vector<double> w;      // sqrt(sqrt(det g)) per point
};

SpectralCalculus::SpectralCalculus(std::shared_ptr<const Hamiltonian> H,
                                   CalcMode mode, double tol, int max_rank)
    : H_(std::move(H)), mode_(mode), tol_(tol), max_rank_(max_rank) {
    const Grid& g = H_->grid();
    double lmin = 1e300;
    for (int a = 0; a < g.dim; ++a) {
        const double k1 = 2.0 * M_PI / g.extent[a];
        lmin = std::min(lmin, 0.5 * k1 * k1);
    }
    lambda_floor_ = 0.25 * lmin;
    if (mode_ == CalcMode::FullEigen) build_eigen();
}

void SpectralCalculus::build_eigen() {
    const Grid& g = H_->grid();
    const std::int64_t N = g.size();
    if (N > 6000)
        throw InvalidArgumentError(
            "FullEigen calculus capped at 6000 unknowns; use Lanczos");
    eig_ = std::make_shared<Eig>();
    eig_->w.resize(N);
    const auto& rho = H_->metric().sqrt_det();
    for (std::int64_t i = 0; i < N; ++i) eig_->w[i] = std::sqrt(rho[i]);

    // A = W H W^-1 column by column; H is a real operator in this basis.
    Eigen::MatrixXd A(N, N);
    WaveField e(H_->metric_ptr());
    for (std::int64_t c = 0; c < N; ++c) {
        std::fill(e.v.begin(), e.v.end(), cplx(0, 0));
        e.v[c] = cplx(1.0 / eig_->w[c], 0.0);
        WaveField He = H_->apply(e);
        for (std::int64_t r = 0; r < N; ++r)
            A(r, c) = He.v[r].real() * eig_->w[r];
    }
    // kill roundoff asymmetry so the eigensolver sees an exactly sym matrix
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("dense eigensolve failed");
    eig_->V = es.eigenvectors();
    eig_->lambda = es.eigenvalues();
    eig_->lambda_v.assign(eig_->lambda.data(), eig_->lambda.data() + N);
}

const std::vector<double>& SpectralCalculus::eigenvalues() const {
    if (mode_ != CalcMode::FullEigen)
        throw InvalidArgumentError("eigenvalues(): FullEigen mode only");
    return eig_->lambda_v;
}

WaveField SpectralCalculus::apply(const Profile& p, const WaveField& u) const {
    return apply_multi({p}, u)[0];
}

std::vector<WaveField> SpectralCalculus::apply_multi(
    const std::vector<Profile>& ps, const WaveField& u) const {
    require_same_grid(H_->grid(), u.grid());
    std::vector<WaveField> out;
    if (mode_ == CalcMode::FullEigen) {
        for (const auto& p : ps) check_profile_bounded(p, eig_->lambda_v);
        const std::int64_t N = u.size();
        Eigen::VectorXd xr(N), xi(N);
        for (std::int64_t i = 0; i < N; ++i) {
            xr[i] = u.v[i].real() * eig_->w[i];
            xi[i] = u.v[i].imag() * eig_->w[i];
        }
        const Eigen::VectorXd cr = eig_->V.transpose() * xr;
        const Eigen::VectorXd ci = eig_->V.transpose() * xi;
        for (const auto& p : ps) {
            Eigen::VectorXd yr(N), yi(N);
            for (std::int64_t i = 0; i < N; ++i) {
                const cplx f = p.f(eig_->lambda[i]);
                const cplx c = f * cplx(cr[i], ci[i]);
                yr[i] = c.real();
                yi[i] = c.imag();
            }
            const Eigen::VectorXd zr = eig_->V * yr;
            const Eigen::VectorXd zi = eig_->V * yi;
            WaveField w(u.metric);
            for (std::int64_t i = 0; i < N; ++i)
                w.v[i] = cplx(zr[i], zi[i]) / eig_->w[i];
            out.push_back(std::move(w));
        }
        return out;
    }
    std::vector<double> ritz;
    lanczos_apply(*H_, u, ps, out, tol_, max_rank_, &ritz);
    for (const auto& p : ps) check_profile_bounded(p, ritz);
    return out;
}

std::array<WaveField, 3> SpectralCalculus::band_partition(const WaveField& u,
                                                          double eps0,
                                                          bool sharp) const {
    auto r = apply_multi({chi_band_profile('l', eps0, sharp),
                          chi_band_profile('m', eps0, sharp),
                          chi_band_profile('h', eps0, sharp)},
                         u);
    return {std::move(r[0]), std::move(r[1]), std::move(r[2])};
}

double SpectralCalculus::sobolev_norm(const WaveField& u, double s) const {
    if (s < -1.0 || s > 1.0)
        throw InvalidArgumentError("sobolev_norm: s must lie in [-1, 1]");
    if (s == 0.0) return l2_norm(u);

    WaveField w = u;
    if (s < 0) {
        // homogeneous negative norms blow up on constants
        WaveField one(u.metric);
        std::fill(one.v.begin(), one.v.end(), cplx(1, 0));
        const double vol = std::pow(l2_norm(one), 2);
        const cplx mean = inner_product(u, one) / vol;
        const double un = l2_norm(u);
        if (std::abs(mean) * std::sqrt(vol) > 1e-6 * std::max(un, 1e-300))
            throw ZeroModeError(
                "sobolev_norm: s < 0 on data with zero-mode mass above tolerance");
        w.axpy(-mean, one);
    }
    const double floor = lambda_floor_;
    if (mode_ == CalcMode::Lanczos) {
        // ||H^{s/2} u||^2 = <H^s u, u>: scalar Gauss quadrature of the
        // spectral measure converges far faster than forming the field
        const double q = lanczos_quadrature(
            *H_, w,
            [s, floor](double l) {
                return std::pow(std::max(l, s < 0 ? floor : 0.0), s);
            },
            tol_, max_rank_);
        return std::sqrt(std::max(0.0, q));
    }
    Profile p{"sobolev(" + std::to_string(s) + ")", [s, floor](double l) {
                  return cplx(std::pow(std::max(l, s < 0 ? floor : 0.0), 0.5 * s),
                              0.0);
              }};
    return l2_norm(apply(p, w));
}

WaveField lanczos_apply(const Hamiltonian& H, const WaveField& b,
                        const std::vector<Profile>& profiles,
                        std::vector<WaveField>& results, double tol,
                        int max_rank, std::vector<double>* ritz_out,
                        bool strict, double* achieved) {
    results.clear();
    const double beta0 = l2_norm(b);
    if (beta0 == 0.0) {
        for (std::size_t p = 0; p < profiles.size(); ++p) results.push_back(b);
        if (ritz_out) ritz_out->clear();
        return b;
    }

    const std::int64_t N = b.size();
    max_rank = int(std::min<std::int64_t>(max_rank, N));
    std::vector<WaveField> Q;
    Q.reserve(64);
    Q.push_back(b);
    Q[0] *= cplx(1.0 / beta0, 0.0);

    std::vector<double> alpha, beta;
    std::vector<Eigen::VectorXcd> prev(profiles.size());
    bool have_prev = false;

    auto evaluate = [&](int m, std::vector<Eigen::VectorXcd>& coef) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const Eigen::VectorXd& lam = es.eigenvalues();
        const Eigen::MatrixXd& S = es.eigenvectors();
        if (ritz_out) ritz_out->assign(lam.data(), lam.data() + m);
        coef.resize(profiles.size());
        const Eigen::VectorXd e1 = S.row(0).transpose();
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            Eigen::VectorXcd f(m);
            for (int i = 0; i < m; ++i) f[i] = profiles[p].f(lam[i]) * e1[i];
            coef[p] = (S * f) * beta0;
        }
    };

    auto assemble = [&](const std::vector<Eigen::VectorXcd>& coef, int m) {
        results.clear();
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            WaveField r(b.metric);
            for (int j = 0; j < m; ++j)
                for (std::int64_t i = 0; i < N; ++i)
                    r.v[i] += coef[p][j] * Q[j].v[i];
            results.push_back(std::move(r));
        }
    };

    int m = 0;
    bool converged = false;
    double last_diff = std::numeric_limits<double>::infinity();
    while (m < max_rank) {
        WaveField w = H.apply(Q[m]);
        if (m > 0) w.axpy(cplx(-beta[m - 1], 0), Q[m - 1]);
        double a = inner_product(w, Q[m]).real();
        w.axpy(cplx(-a, 0), Q[m]);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= m; ++j) {
                const cplx c = inner_product(w, Q[j]);
                if (j == m && pass == 0) a += c.real();
                w.axpy(-c, Q[j]);
            }
        alpha.push_back(a);
        const double bnorm = l2_norm(w);
        ++m;

        const bool breakdown = bnorm < 1e-13 * beta0;
        const bool check = breakdown || m == max_rank || (m % 6 == 0 && m >= 12);
        if (check) {
            std::vector<Eigen::VectorXcd> coef;
            evaluate(m, coef);
            if (have_prev) {
                double diff = 0;
                for (std::size_t p = 0; p < profiles.size(); ++p) {
                    double d2 = 0;
                    for (Eigen::Index i = 0; i < coef[p].size(); ++i) {
                        const cplx pv =
                            i < prev[p].size() ? prev[p][i] : cplx(0, 0);
                        d2 += std::norm(coef[p][i] - pv);
                    }
                    diff = std::max(diff, std::sqrt(d2));
                }
                last_diff = diff;
                if (diff <= tol * beta0 || breakdown) {
                    assemble(coef, m);
                    converged = diff <= tol * beta0 || breakdown;
                    break;
                }
            } else if (breakdown) {
                assemble(coef, m);
                converged = true;
                break;
            }
            prev = coef;
            have_prev = true;
            if (m == max_rank) {
                assemble(coef, m);
                break;
            }
        }
        if (m < max_rank) {
            beta.push_back(bnorm);
            w *= cplx(1.0 / bnorm, 0.0);
            Q.push_back(std::move(w));
        }
    }
    if (achieved) *achieved = converged ? std::min(last_diff, tol * beta0) / beta0
                                        : last_diff / beta0;
    if (!converged && strict)
        throw ConvergenceError("Lanczos did not converge within max rank");
    return results[0];
}

double lanczos_quadrature(const Hamiltonian& H, const WaveField& u,
                          const std::function<double(double)>& f, double tol,
                          int max_rank) {
    const double beta0 = l2_norm(u);
    if (beta0 == 0.0) return 0.0;
    max_rank = int(std::min<std::int64_t>(max_rank, u.size()));

    std::vector<WaveField> Q;
    Q.push_back(u);
    Q[0] *= cplx(1.0 / beta0, 0.0);
    std::vector<double> alpha, beta;

    auto quad = [&](int m) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        double acc = 0;
        for (int i = 0; i < m; ++i) {
            const double w1 = es.eigenvectors()(0, i);
            acc += w1 * w1 * f(es.eigenvalues()[i]);
        }
        return acc * beta0 * beta0;
    };

    int m = 0;
    double prev_val = 0;
    bool have_prev = false;
    while (m < max_rank) {
        WaveField w = H.apply(Q[m]);
        if (m > 0) w.axpy(cplx(-beta[m - 1], 0), Q[m - 1]);
        double a = inner_product(w, Q[m]).real();
        w.axpy(cplx(-a, 0), Q[m]);
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= m; ++j) {
                const cplx c = inner_product(w, Q[j]);
                if (j == m && pass == 0) a += c.real();
                w.axpy(-c, Q[j]);
            }
        alpha.push_back(a);
        const double bnorm = l2_norm(w);
        ++m;
        const bool breakdown = bnorm < 1e-13 * beta0;
        if (breakdown || m == max_rank || (m % 4 == 0 && m >= 8)) {
            const double val = quad(m);
            if (breakdown || m == max_rank ||
                (have_prev &&
                 std::abs(val - prev_val) <= tol * std::max(std::abs(val), 1e-300)))
                return val;
            prev_val = val;
            have_prev = true;
        }
        beta.push_back(bnorm);
        w *= cplx(1.0 / bnorm, 0.0);
        Q.push_back(std::move(w));
    }
    return prev_val;
}

}  // namespace qsmooth
