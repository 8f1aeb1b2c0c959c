#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qsmooth/hamiltonian.hpp"

namespace qsmooth {

// Scalar symbol for f(H). `name` shows up in diagnostics and reports.
struct Profile {
    std::string name;
    std::function<cplx(double)> f;
};

Profile identity_profile();
Profile power_profile(double p);              // lambda^p (clamped below floor)
Profile evolution_profile(double t);          // exp(-i t lambda)
Profile chi_band_profile(char band, double eps0, bool sharp = false);
// lambda^-2 restricted to the medium band: H^-2 P_med in one pass.
Profile inverse_sq_med_profile(double eps0);

enum class CalcMode { FullEigen, Lanczos };

// Reusable factorization/expansion of the discrete H for applying spectral
// multipliers. FullEigen densely diagonalizes W H W^-1 (W = sqrt(sqrt(det g)))
// and serves as the oracle; Lanczos runs weighted-inner-product iterations
// with full reorthogonalization and adaptive rank.
class SpectralCalculus {
  public:
    SpectralCalculus(std::shared_ptr<const Hamiltonian> H, CalcMode mode,
                     double tol = 1e-10, int max_rank = 400);

    CalcMode mode() const { return mode_; }
    double tolerance() const { return tol_; }
    const Hamiltonian& hamiltonian() const { return *H_; }
    std::shared_ptr<const Hamiltonian> hamiltonian_ptr() const { return H_; }

    // f(H) u. Throws SingularProfileError if |f| exceeds 1e14 anywhere on the
    // resolved spectrum (eigenvalues or Ritz values).
    WaveField apply(const Profile& p, const WaveField& u) const;

    // Several profiles from one factorization; in Lanczos mode this shares
    // the Krylov basis so algebraic identities between profiles hold exactly.
    std::vector<WaveField> apply_multi(const std::vector<Profile>& ps,
                                       const WaveField& u) const;

    // P_lo, P_med, P_hi from shared evaluations: the three sum to u exactly.
    std::array<WaveField, 3> band_partition(const WaveField& u, double eps0,
                                            bool sharp = false) const;

    // || H^{s/2} u ||_L2(M) for s in [-1, 1]. For s < 0 the constant mode is
    // projected out; data with zero-mode mass above tolerance is rejected.
    double sobolev_norm(const WaveField& u, double s) const;

    // FullEigen only: ascending eigenvalues of the discrete H.
    const std::vector<double>& eigenvalues() const;

    // Spectral floor used to clamp negative powers: a quarter of the smallest
    // positive eigenvalue of the flat operator on this grid.
    double lambda_floor() const { return lambda_floor_; }

  private:
    struct Eig;
    std::shared_ptr<const Hamiltonian> H_;
    CalcMode mode_;
    double tol_;
    int max_rank_;
    double lambda_floor_;
    std::shared_ptr<Eig> eig_;  // FullEigen factorization

    void build_eigen();
};

// Operator handle for one Littlewood-Paley band chi-projector.
struct BandProjector {
    char band;  // 'l', 'm', 'h'
    double eps0;
    bool sharp = false;
    std::shared_ptr<const SpectralCalculus> calc;

    WaveField apply(const WaveField& u) const {
        return calc->apply(chi_band_profile(band, eps0, sharp), u);
    }
    WaveField operator()(const WaveField& u) const { return apply(u); }
};

BandProjector spectral_projector(char band, double eps0,
                                 std::shared_ptr<const SpectralCalculus> calc,
                                 bool sharp = false);

// Weighted-inner-product Lanczos f(H) b with full reorthogonalization;
// adaptive rank, stops when successive evaluations differ by < tol * |b|.
// Shared by the calculus and the Krylov propagator. With strict = true a
// run that hits max_rank unconverged throws ConvergenceError; otherwise the
// best-effort result is returned and *achieved reports the final residual.
// Non-analytic profiles (the chi bands have C2 kinks) converge only
// algebraically on full-spectrum data, so the calculus path is non-strict;
// the propagator exponential is entire and runs strict.
WaveField lanczos_apply(const Hamiltonian& H, const WaveField& b,
                        const std::vector<Profile>& profiles,
                        std::vector<WaveField>& results, double tol,
                        int max_rank, std::vector<double>* ritz = nullptr,
                        bool strict = false, double* achieved = nullptr);

// <f(H) u, u> via the Lanczos-Gauss quadrature of the spectral measure of u
// (scalar convergence; much faster than forming f(H) u).
double lanczos_quadrature(const Hamiltonian& H, const WaveField& u,
                          const std::function<double(double)>& f, double tol,
                          int max_rank);

}  // namespace qsmooth
