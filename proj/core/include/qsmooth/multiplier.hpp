#pragma once

#include <memory>

#include "qsmooth/cutoffs.hpp"
#include "qsmooth/field.hpp"
#include "qsmooth/hamiltonian.hpp"
#include "qsmooth/propagator.hpp"

namespace qsmooth {

// The physical-space multiplier a = collar(|x|) * (|x| - eps |x|^(1-eps)) and
// its Euclidean derivatives. Everything is evaluated in closed form (the
// bi-Laplacian needs fourth derivatives; grid differentiation would drown the
// sign in noise). The collar is a C4 spline, 0 for |x| <= 2 R0 and 1 for
// |x| >= 3 R0, so the bi-Laplacian stays continuous.
class MultiplierField {
  public:
    MultiplierField(std::shared_ptr<const MetricField> metric, double eps);

    double eps() const { return eps_; }
    double R0() const { return R0_; }
    const MetricField& metric() const { return *metric_; }
    std::shared_ptr<const MetricField> metric_ptr() const { return metric_; }

    // radial profile A(r) = collar(r) p(r), derivatives up to order 4
    double radial(double r, int order = 0) const;
    double value(const Vec3& x, int dim) const;
    Vec3 grad(const Vec3& x, int dim) const;
    // Hessian eigenvalues of the radial profile: tangential A'(r)/r
    // (multiplicity dim-1) and radial A''(r).
    double hess_tangential(double r) const;
    double hess_radial(double r) const;
    // Flat 3D Laplacian and bi-Laplacian of the radial profile:
    // A'' + 2A'/r and A'''' + 4A'''/r.
    double laplacian3(double r) const;
    double bilaplacian3(double r) const;

    // grid samples of a and its gradient
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& grad_component(int axis) const {
        return grad_[axis];
    }

  private:
    std::shared_ptr<const MetricField> metric_;
    double eps_;
    double R0_;
    RadialCutoff collar_;
    std::vector<double> a_;
    std::array<std::vector<double>, 3> grad_;
};

// pre: 0 < eps <= 0.1; the grid must put >= 6 points across the collar.
MultiplierField build_multiplier(std::shared_ptr<const MetricField> metric,
                                 double eps);

// A u = -i a_{,k} D_k u - i D_k (a_{,k} u), spectral derivatives.
WaveField apply_commutator_multiplier(const Hamiltonian& H,
                                      const MultiplierField& a,
                                      const WaveField& u);

// max_t | d/dt <A u, u> - <i[H,A] u, u> | over the interior of a uniform time
// grid t = t0 + j dt, j = 0..nt-1; the derivative is a centered difference.
double heisenberg_residual(const MultiplierField& a, const WaveField& u0,
                           double t0, double dt, int nt,
                           const Propagator& prop);

// The pairing <A u(t), u(t)> along the evolution, one value per grid time.
std::vector<double> multiplier_pairing_series(const MultiplierField& a,
                                              const WaveField& u0, double t0,
                                              double dt, int nt,
                                              const Propagator& prop);

struct SignScanRow {
    double radius;
    double bilaplacian;  // Delta^2 a at the radius
    double weighted;     // Delta^2 a * r^(3+eps)
    bool pass;           // weighted <= -c_eps < 0
};

struct SignScanReport {
    std::vector<SignScanRow> rows;
    double c_eps;  // eps^2 (1-eps)(1+eps)(2-eps), the analytic floor
    bool pass;
};

// Samples Delta^2 a * r^(3+eps) on the given radii (closed form); PASS iff
// every value is <= -c_eps. Radii must lie in [3 R0, boundary - collar].
SignScanReport bilaplacian_sign_scan(const MultiplierField& a,
                                     const std::vector<double>& radii);

}  // namespace qsmooth
