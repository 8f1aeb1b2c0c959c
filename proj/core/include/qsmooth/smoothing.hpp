#pragma once

#include <string>
#include <vector>

#include "qsmooth/calculus.hpp"
#include "qsmooth/cutoffs.hpp"
#include "qsmooth/multiplier.hpp"
#include "qsmooth/propagator.hpp"

namespace qsmooth {

struct SmoothingParams {
    double sigma = 0.1;          // weight exponent
    double dt_report = 0.05;     // time-quadrature stride (trapezoid)
};

// Space-time integrals along one evolution, truncated at each requested T:
//   full integrand: ||<x>^(-1/2-s) |grad u|_g||^2 + ||<x>^(-3/2-s) u||^2
//   phi integrand:  ||phi |grad u|_g||^2
// One sweep to max(T_list); values are cumulative trapezoid sums.
struct SpaceTimeSeries {
    std::vector<double> T;
    std::vector<double> full;      // per T
    std::vector<double> phi_only;  // per T
    double h_half = 0;             // || u0 ||_{H^1/2-dot}
};

SpaceTimeSeries spacetime_series(const WaveField& u0, const SmoothingParams& p,
                                 const std::vector<double>& T_list,
                                 const Propagator& prop,
                                 const SpectralCalculus& calc,
                                 const CutoffFamily& cutoffs);

// Single-T variant of the full integrand.
double spacetime_norm(const WaveField& u0, const SmoothingParams& p, double T,
                      const Propagator& prop);

struct KEstimateRow {
    int datum = 0;
    double T = 0;
    double spacetime = 0;   // integral value (full or phi-localized)
    double h_half = 0;
    double ratio = 0;       // sqrt(spacetime) / h_half
};

struct KEstimate {
    std::vector<double> T;
    std::vector<double> K;        // max ratio over the data set, per T
    std::vector<KEstimateRow> rows;
};

// Lower bound for the best constant over the probe set (max of per-datum
// ratios). K_phi uses the phi-localized gradient-only integrand.
KEstimate estimate_K(const std::vector<WaveField>& data,
                     const SmoothingParams& p, const std::vector<double>& T_list,
                     const Propagator& prop, const SpectralCalculus& calc,
                     const CutoffFamily& cutoffs, bool phi_localized = false,
                     int threads = 1);

// Maximal ratio || phi |grad f| ||^2 / Q2(f) over grid functions orthogonal
// to constants, where Q2 is the quadratic form
//   ||<x>^(-1/2-s) grad f||^2 + ||<x>^(-3/2-s) f||^2
//   + eps^-2 ( ||<x>^(-1/2-s) grad Hf||^2 + ||<x>^(-3/2-s) Hf||^2 ),
// solved as a dense generalized eigenvalue problem (the sum of norms in the
// source inequality is replaced by the sum of squares; constants agree within
// a factor of two). Returns sqrt(max eigenvalue).
// first_term_only retains just the weighted-gradient term of Q2; the ratio is
// then dominated pointwise by max over supp(phi) of <x>^(1/2+sigma).
double poincare_constant(const Hamiltonian& H, const CutoffFamily& cutoffs,
                         double eps, double sigma,
                         bool first_term_only = false);

// Shared-assembly variant: the dense forms are built once, one generalized
// eigensolve per eps.
std::vector<double> poincare_constants(const Hamiltonian& H,
                                       const CutoffFamily& cutoffs,
                                       const std::vector<double>& eps_list,
                                       double sigma);

// Quadrature of delta + 1/2 Delta^2 a over the 3D ball {|x| <= 3 R0}, the
// bi-Laplacian in closed form; the profile is radial, so the ball integral
// reduces to a composite Simpson rule across the collar with n_quad points.
// The 1/2 is the coefficient the commutator identity attaches to Delta^2 a;
// with it the integral lands at -4 pi + O(eps) + O(delta).
double greens_functional(const MultiplierField& a, double delta,
                         int n_quad = 4096);

}  // namespace qsmooth
