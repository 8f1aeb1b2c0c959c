#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qsmooth/metric.hpp"

namespace qsmooth {

// Point of the cogeodesic flow: position, covector, flow parameter.
struct GeodesicState {
    Vec3 x{0, 0, 0};
    Vec3 xi{0, 0, 0};
    double s = 0;
};

// Hamiltonian 1/2 g^{jk}(x) xi_j xi_k of the flow.
double geodesic_energy(const MetricField& m, const GeodesicState& st);

struct Trajectory {
    std::vector<GeodesicState> points;
    bool failed = false;          // step-size underflow; points hold the partial run
    std::string failure;
    double energy_drift = 0;      // max relative Hamiltonian drift observed
    bool escaped = false;         // crossed stop_radius
    double escape_param = 0;      // |s| at the first crossing
};

struct FlowOptions {
    double tol = 1e-10;       // relative Hamiltonian drift budget over the run
    double max_step = 0;      // 0 = uncapped; set to force dense output
    double stop_radius = std::numeric_limits<double>::infinity();
};

// Integrates the cogeodesic equations with an adaptive embedded Runge-Kutta
// scheme (Dormand-Prince 5(4)); local tolerance is tightened and the run
// repeated until the Hamiltonian drift meets opts.tol. s_max < 0 integrates
// backward.
Trajectory geodesic_flow(const MetricField& m, const GeodesicState& init,
                         double s_max, const FlowOptions& opts = {});

// Sampled non-trapping certificate: not a proof, a quasi-uniform sweep.
struct TrappingCertificate {
    bool pass = false;
    int samples = 0;
    double shell_lo = 0, shell_hi = 0;
    double escape_radius = 0;
    double s_max = 0;
    std::uint64_t seed = 0;
    double max_escape_param = 0;          // over escaping samples, both directions
    int n_trapped = 0;
    int n_undecided = 0;
    // Representative non-escaping initial state: the one whose trajectory has
    // the smallest radial libration (closest to a circular orbit).
    GeodesicState offending;
    double offending_libration = 0;
    std::vector<GeodesicState> trapped_states;  // capped at 64 entries
};

// Integrates `samples` geodesics with initial data quasi-uniform (Halton, the
// seed is a sequence offset) over {|x| <= 2 R0} x {energy shell}. PASS iff
// every trajectory reaches |x| >= escape_radius by s_max in both time
// directions.
TrappingCertificate certify_nontrapping(const MetricField& m, double shell_lo,
                                        double shell_hi, int samples,
                                        double escape_radius, double s_max,
                                        double tol = 1e-10,
                                        std::uint64_t seed = 0,
                                        int threads = 1);

// Halton low-discrepancy sequence element (prime base), index starts at 1.
double halton(std::uint64_t index, int base);

}  // namespace qsmooth
