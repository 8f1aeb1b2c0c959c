#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qsmooth/grid.hpp"

namespace qsmooth {

// Monotone transition kernels on [0,1] with s(0)=0, s(1)=1.
//   C2  : quintic smoothstep, C^2 at both ends.
//   C4  : ninth-degree smoothstep, C^4 at both ends (collar-grade: fourth
//         derivatives of cutoffs stay continuous).
//   Gauss: clamped erf ramp; quasi-C-infinity, ends match 0/1 to ~1e-16.
//         Used where spectral tails matter (phase-space partitions).
enum class Transition { C2, C4, Gauss };

// Value and derivatives (order <= 4) of the transition kernel. Gauss supports
// order 0 only.
double transition_eval(Transition k, double t, int order = 0);

// Radial cutoff equal to `inside` for r <= r_plateau and `outside` for
// r >= r_zero, transitioning in between. Descending: 1 -> 0. Ascending: 0 -> 1.
struct RadialCutoff {
    double r_plateau = 0;
    double r_zero = 0;
    Transition kind = Transition::C4;
    bool ascending = false;

    static RadialCutoff descend(double r1, double r2,
                                Transition k = Transition::C4) {
        return {r1, r2, k, false};
    }
    static RadialCutoff ascend(double r1, double r2,
                               Transition k = Transition::C4) {
        return {r1, r2, k, true};
    }

    double operator()(double r) const { return deriv(r, 0); }
    // d^order/dr^order, exact for polynomial kinds.
    double deriv(double r, int order) const;
};

// Smooth bump on a ball: plateau 1 on |x-c| <= r_plateau, 0 outside r_zero.
struct BallCutoff {
    Vec3 center{0, 0, 0};
    RadialCutoff profile;

    double operator()(const Vec3& x, int dim) const {
        Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
        return profile(std::sqrt(norm2(d, dim)));
    }
};

// Spectral bump chi: 1 on [-1/2,1/2], 0 outside [-1,1], C2 polynomial
// transition on [1/2,1]. The sharp variant is the indicator of |t| <= 3/4
// (midpoint of the transition band); used by exact-projector tests.
double chi_profile(double t);
double chi_sharp(double t);

// The radial cutoff family of the smoothing/phase-space experiments, tied to
// the perturbation radius R0. Radii follow the fixed conventions:
//   phi        : 1 on |x| <= 4 R0, 0 on |x| >= 8 R0
//   phi_R(R)   : 1 on B(0,R), 0 outside B(0,2R)
//   psi(R)     : ball at R*e1, plateau R*f/2, support R*f      (f = ball_frac)
//   psi_tilde(R): ball at R*e1, plateau R*f,  support 2*R*f
// ball_frac defaults to 1/100 so psi is supported on |x - R e1| <= R/100 and
// psi_tilde on |x - R e1| <= R/50.
struct CutoffFamily {
    double R0 = 1.0;
    double ball_frac = 0.01;
    Transition kind = Transition::C4;

    RadialCutoff phi() const {
        return RadialCutoff::descend(4 * R0, 8 * R0, kind);
    }
    RadialCutoff phi_R(double R) const {
        return RadialCutoff::descend(R, 2 * R, kind);
    }
    BallCutoff psi(double R) const {
        return {{R, 0, 0},
                RadialCutoff::descend(0.5 * ball_frac * R, ball_frac * R, kind)};
    }
    BallCutoff psi_tilde(double R) const {
        return {{R, 0, 0},
                RadialCutoff::descend(ball_frac * R, 2 * ball_frac * R, kind)};
    }
    double chi(double t) const { return chi_profile(t); }
};

// Sample a radial cutoff (or any radial function) onto a grid.
std::vector<double> sample_radial(const Grid& g, const RadialCutoff& c);
std::vector<double> sample_ball(const Grid& g, const BallCutoff& c);

// <x>^p = (1+|x|^2)^(p/2) sampled on the grid.
std::vector<double> sample_japanese_bracket(const Grid& g, double p);

}  // namespace qsmooth
