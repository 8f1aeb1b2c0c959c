#pragma once

#include <memory>
#include <optional>

#include "qsmooth/calculus.hpp"

namespace qsmooth {

enum class Scheme { KrylovExpm, Chebyshev, SplitStep };

// Complex absorbing potential: W(x) = strength * ((r - onset)/(hw - onset))^2
// past the onset radius (hw = box half-width). Applied as Strang half-steps
// around each unitary step, so the unitary machinery is untouched.
struct SpongeConfig {
    bool on = false;
    double onset = 0;
    double strength = 1.0;
};

struct PropagatorConfig {
    double dt = 0.05;
    Scheme scheme = Scheme::KrylovExpm;
    double tol = 1e-10;
    int max_rank = 400;
    SpongeConfig sponge;
    // Group-velocity bound used by horizon_guard; 0 = estimate from the data
    // band at evolve() time.
    double v_max = 0;
};

// Unitary time evolution exp(-itH), stepped at cfg.dt.
class Propagator {
  public:
    Propagator(std::shared_ptr<const Hamiltonian> H, PropagatorConfig cfg);

    const PropagatorConfig& config() const { return cfg_; }
    const Hamiltonian& hamiltonian() const { return *H_; }

    // Maximal |t| before wrap-around contamination for data with group
    // velocity bound v (grid half-width minus 8 R0, over v). Infinite when
    // the sponge is on.
    double horizon_guard(double v) const;
    // Same, with v estimated from u0's occupied band.
    double horizon_guard(const WaveField& u0) const;

    // exp(-itH) u0. Throws ContaminationError past the horizon (sponge off).
    WaveField evolve(const WaveField& u0, double t) const;

    // One step of size dt (sign included); used by time-series drivers.
    void step(WaveField& u, double dt) const;

    double velocity_bound(const WaveField& u0) const;

  private:
    void step_unitary(WaveField& u, double dt) const;
    void step_chebyshev(WaveField& u, double dt) const;

    std::shared_ptr<const Hamiltonian> H_;
    PropagatorConfig cfg_;
    std::vector<double> sponge_half_;  // exp(-W dt/2), cached for cfg.dt
};

// Free comparison flow exp(-itH0): Fourier diagonalization of the flat
// operator on u0's grid, exact in one application (sponge ignored).
WaveField evolve_free(const WaveField& u0, double t);

// Stepping driver: holds the state and advances to requested times; sampling
// times must be nondecreasing multiples of the step grid.
class Evolution {
  public:
    Evolution(const Propagator& prop, WaveField u0);
    const WaveField& state() const { return state_; }
    double time() const { return t_; }
    // advance to t (forward or backward from current time)
    void advance_to(double t);

  private:
    const Propagator& prop_;
    WaveField state_;
    double t_ = 0;
};

struct DuhamelResult {
    WaveField difference;   // (exp(-itH) - exp(-itH0)) u0, direct subtraction
    double discrepancy;     // vs the Duhamel quadrature, relative
    int nodes;              // quadrature nodes used
};

// Computes the interacting-vs-free difference two independent ways: direct
// subtraction and the Duhamel integral accumulated with composite Simpson on
// the step grid. The returned field is the direct subtraction.
DuhamelResult duhamel_difference(const WaveField& u0, double t,
                                 const Propagator& prop);

}  // namespace qsmooth
