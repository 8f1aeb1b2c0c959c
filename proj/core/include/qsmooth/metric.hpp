#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsmooth/cutoffs.hpp"
#include "qsmooth/grid.hpp"

namespace qsmooth {

// Packed index of the (j,k) component of a symmetric matrix stored as
// [00, 11, 22, 01, 02, 12].
inline int sym_index(int j, int k) { return j == k ? j : 2 + j + k; }

// Symmetric dim x dim matrix, packed [00, 11, 22, 01, 02, 12].
struct SymMat {
    std::array<double, 6> a{1, 1, 1, 0, 0, 0};

    static SymMat identity() { return SymMat{}; }
    double operator()(int i, int j) const;
    void set(int i, int j, double v);
    double det(int dim) const;
    SymMat inverse(int dim) const;
    double min_eigenvalue(int dim) const;
};

enum class MetricKind { Flat, ConformalBump, WarpedRadial, CustomTable };

// Radial profile lambda(r): amplitude * gauss(r; width) * cutoff(r), exactly
// zero for r >= 0.95 * R0 so the metric is Euclidean outside B(0, R0) to the
// last bit. Closed-form first/second derivatives.
struct BumpProfile {
    double amplitude = 0;
    double width = 1;
    double R0 = 1;
    RadialCutoff cut;  // descending C4, plateau 0.6 R0, zero 0.95 R0

    double value(double r) const;
    double deriv(double r) const;
    // value'(r)/r, finite at r = 0.
    double deriv_over_r(double r) const;
};

// Compactly supported metric perturbation of flat space: g = Id for
// |x| >= R0, smooth and SPD everywhere. Stores grid samples of g, g^-1 and
// sqrt(det g), and keeps the closed-form evaluator for off-grid queries
// (geodesic flow integrates the closed form; grid interpolation is too noisy
// near the trapping threshold).
class MetricField {
  public:
    // Flat metric on a grid.
    static std::shared_ptr<MetricField> flat(const Grid& g, double R0 = 1.0);
    // g = exp(2 lambda(|x|)) Id.
    static std::shared_ptr<MetricField> conformal_bump(const Grid& g, double R0,
                                                       double amplitude,
                                                       double width);
    // g = Id + nu(|x|) x x^T with nu = (amplitude/R0^2) gauss * cutoff.
    static std::shared_ptr<MetricField> warped_radial(const Grid& g, double R0,
                                                      double amplitude,
                                                      double width);
    // Conformal metric with lambda given by a radial table (natural cubic
    // spline through (r_i, lambda_i), clamped to zero at r >= R0).
    static std::shared_ptr<MetricField> custom_table(
        const Grid& g, double R0, const std::vector<double>& r,
        const std::vector<double>& lambda);

    const Grid& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    double R0() const { return R0_; }
    MetricKind kind() const { return kind_; }
    bool is_flat() const { return kind_ == MetricKind::Flat; }

    // Grid samples.
    const std::vector<double>& sqrt_det() const { return sqrt_det_; }
    // Packed component p of g^{jk} over the grid (p indexes SymMat packing).
    const std::vector<double>& inverse_component(int p) const { return ginv_[p]; }
    const std::vector<double>& metric_component(int p) const { return g_[p]; }

    // Closed-form evaluation at arbitrary points.
    SymMat g_at(const Vec3& x) const;
    SymMat ginv_at(const Vec3& x) const;
    double sqrt_det_at(const Vec3& x) const;
    // d g_jk / d x_l, closed form (analytic lambda derivatives for conformal,
    // small-step finite differences of the evaluator otherwise).
    void dg_at(const Vec3& x, std::array<SymMat, 3>& dg) const;

    // Conformal factor access (ConformalBump / CustomTable); lambda = 0 for
    // other kinds.
    double lambda_at(double r) const;
    double dlambda_at(double r) const;
    // lambda'(r)/r, finite at r = 0.
    double dlambda_over_r_at(double r) const;

    // Largest |g^{jk} xi_j xi_k| / |xi|^2 over the grid; bounds wave speeds.
    double max_inverse_eigenvalue() const { return max_ginv_eig_; }

    // Smallest number of grid points across the perturbation feature width;
    // used for resolution warnings.
    double points_across_bump() const;

    std::string describe() const;

  private:
    MetricField(const Grid& g, double R0, MetricKind kind);
    void tabulate();  // fills grid arrays from the evaluator, checks SPD

    Grid grid_;
    double R0_;
    MetricKind kind_;
    BumpProfile profile_;                       // conformal / warped parameter
    std::function<double(double)> table_lambda_;   // CustomTable
    std::function<double(double)> table_dlambda_;
    std::vector<std::vector<double>> g_, ginv_;
    std::vector<double> sqrt_det_;
    double max_ginv_eig_ = 1.0;
};

// Levi-Civita connection coefficients Gamma^i_{jk}(x), symmetric in (j,k).
// Uses the closed-form conformal expression when available, otherwise centered
// finite differences of the metric evaluator. Throws DomainError outside the
// grid box.
struct Christoffel {
    int dim;
    // gamma[i][packed(j,k)] with SymMat packing over (j,k)
    std::array<SymMat, 3> gamma;

    double operator()(int i, int j, int k) const { return gamma[i](j, k); }
};

Christoffel christoffel(const MetricField& m, const Vec3& x);

}  // namespace qsmooth
