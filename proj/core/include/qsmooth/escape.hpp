#pragma once

#include <functional>
#include <vector>

#include "qsmooth/cutoffs.hpp"
#include "qsmooth/geodesic.hpp"

namespace qsmooth {

// Phase-space escape symbol. Default form: C_phi (x / <x>) . xi (real, odd in
// xi). A user-supplied table overrides the form.
struct EscapeSymbol {
    double C_phi = 1.0;
    std::function<double(const Vec3& x, const Vec3& xi, int dim)> form;
    bool user_supplied = false;

    static EscapeSymbol euclidean_default(double C_phi = 1.0) {
        EscapeSymbol s;
        s.C_phi = C_phi;
        s.form = [C_phi](const Vec3& x, const Vec3& xi, int dim) {
            const double jb = std::sqrt(1.0 + norm2(x, dim));
            return C_phi * dot(x, xi, dim) / jb;
        };
        return s;
    }

    double operator()(const Vec3& x, const Vec3& xi, int dim) const {
        return form(x, xi, dim);
    }
};

struct EscapeReport {
    // min over all trajectory samples of d/ds [symbol along the flow]
    double min_flow_derivative = 0;
    // min over samples with x in supp(phi) of (Xa - phi(x) |xi|_g^2)
    double min_gap_on_phi = 0;
    int n_phi_samples = 0;
    int trajectories = 0;
    int samples = 0;
    bool monotone = false;  // min_flow_derivative >= -tolerance
};

// Evaluates d/ds[symbol(x(s), xi(s))] by centered differences on the dense
// flow output of each trajectory, and the escape-gap Xa - phi |xi|_g^2 on
// samples inside supp(phi).
EscapeReport escape_monotonicity(const EscapeSymbol& symbol,
                                 const MetricField& metric,
                                 const std::vector<Trajectory>& trajectories,
                                 const CutoffFamily& cutoffs,
                                 double tolerance = 1e-8);

}  // namespace qsmooth
