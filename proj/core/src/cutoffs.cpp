#include "qsmooth/cutoffs.hpp"

#include <algorithm>

#include "qsmooth/errors.hpp"

namespace qsmooth {

namespace {

// Polynomial kernels stored as coefficient arrays (ascending powers);
// derivatives are exact coefficient shifts.
// C2: 10 t^3 - 15 t^4 + 6 t^5
constexpr std::array<double, 10> kC2 = {0, 0, 0, 10, -15, 6, 0, 0, 0, 0};
// C4: 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9
constexpr std::array<double, 10> kC4 = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

double poly_eval(const std::array<double, 10>& c, double t, int order) {
    // differentiate the coefficient array `order` times, then Horner
    std::array<double, 10> d = c;
    for (int o = 0; o < order; ++o) {
        for (int i = 0; i + 1 < int(d.size()); ++i) d[i] = (i + 1) * d[i + 1];
        d[9] = 0;
    }
    double acc = 0;
    for (int i = 9; i >= 0; --i) acc = acc * t + d[i];
    return acc;
}

// erf ramp scaled so that the clamped ends match to ~1e-16: alpha = 5.8
// gives erf(alpha) = 1 - 2.4e-16.
constexpr double kErfAlpha = 5.8;

double gauss_eval(double t) {
    const double e = std::erf(kErfAlpha * (2.0 * t - 1.0));
    return std::clamp(0.5 * (e / std::erf(kErfAlpha) + 1.0), 0.0, 1.0);
}

}  // namespace

double transition_eval(Transition k, double t, int order) {
    if (t <= 0.0) return order == 0 ? 0.0 : 0.0;
    if (t >= 1.0) return order == 0 ? 1.0 : 0.0;
    switch (k) {
        case Transition::C2:
            return poly_eval(kC2, t, order);
        case Transition::C4:
            return poly_eval(kC4, t, order);
        case Transition::Gauss:
            if (order != 0)
                throw InvalidArgumentError("Gauss transition: derivatives unsupported");
            return gauss_eval(t);
    }
    return 0;
}

double RadialCutoff::deriv(double r, int order) const {
    const double w = r_zero - r_plateau;
    if (w <= 0) throw InvalidArgumentError("RadialCutoff: r_zero must exceed r_plateau");
    const double t = (r - r_plateau) / w;
    // s(t) ascends 0 -> 1 across the window; chain rule gives w^-order
    double v = transition_eval(kind, t, order) / std::pow(w, order);
    if (!ascending) {
        v = (order == 0) ? 1.0 - v : -v;
    }
    return v;
}

double chi_profile(double t) {
    const double a = std::abs(t);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return 1.0 - transition_eval(Transition::C2, 2.0 * a - 1.0);
}

double chi_sharp(double t) { return std::abs(t) <= 0.75 ? 1.0 : 0.0; }

std::vector<double> sample_radial(const Grid& g, const RadialCutoff& c) {
    std::vector<double> out(g.size());
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        out[idx] = c(std::sqrt(norm2(x, g.dim)));
    });
    return out;
}

std::vector<double> sample_ball(const Grid& g, const BallCutoff& c) {
    std::vector<double> out(g.size());
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        out[idx] = c(x, g.dim);
    });
    return out;
}

std::vector<double> sample_japanese_bracket(const Grid& g, double p) {
    std::vector<double> out(g.size());
    for_each_point(g, [&](std::int64_t idx, const Vec3& x) {
        out[idx] = std::pow(1.0 + norm2(x, g.dim), 0.5 * p);
    });
    return out;
}

}  // namespace qsmooth
