#pragma once

#include <memory>

#include "qsmooth/fft.hpp"
#include "qsmooth/field.hpp"

namespace qsmooth {

// H = -1/2 Delta_M in divergence form, discretized as D* W D with D the
// spectral gradient and W = sqrt(det g) g^{jk}: exactly self-adjoint for the
// weighted inner product and positive semi-definite, with H 1 = 0.
class Hamiltonian {
  public:
    explicit Hamiltonian(std::shared_ptr<const MetricField> m);

    const MetricField& metric() const { return *metric_; }
    std::shared_ptr<const MetricField> metric_ptr() const { return metric_; }
    const Grid& grid() const { return metric_->grid(); }
    const Fft& fft() const { return fft_; }
    bool flat() const { return metric_->is_flat(); }
    // Attached when the grid has < 8 points across the bump width.
    bool resolution_warning() const { return resolution_warning_; }

    WaveField apply(const WaveField& u) const;
    WaveField operator()(const WaveField& u) const { return apply(u); }

    // Dispersion of the flat operator: 1/2 |k|^2 with the derivative
    // wavenumber convention.
    double flat_symbol(const Vec3& k) const { return 0.5 * norm2(k, grid().dim); }

    // Upper bound for the spectrum of the discrete H.
    double lambda_max_bound() const { return lambda_max_; }

  private:
    std::shared_ptr<const MetricField> metric_;
    Fft fft_;
    bool resolution_warning_ = false;
    double lambda_max_ = 0;
    std::vector<double> weight_[6];  // sqrt(det g) * g^{jk}, packed
};

// Discrete metric inner product: sum u conj(v) sqrt(det g) h^dim. Linear in
// the first argument.
cplx inner_product(const WaveField& u, const WaveField& v);

double l2_norm(const WaveField& u);

// || w u ||_L2(M) for a real pointwise weight w.
double weighted_l2_norm(const WaveField& u, const std::vector<double>& w);

// |grad u|_g^2 = g^{jk} (D_k u) conj(D_j u) pointwise (real part).
std::vector<double> covariant_grad_sq(const Hamiltonian& H, const WaveField& u);

// || w |grad u|_g ||_L2(M).
double weighted_grad_norm(const Hamiltonian& H, const WaveField& u,
                          const std::vector<double>& w);

// Covariant divergence with weight: (1/rho) D_j (rho phi f^j).
WaveField weighted_divergence(const Hamiltonian& H,
                              const std::array<WaveField, 3>& f,
                              const std::vector<double>& phi);

// Fraction of |u|^2 mass at wavenumbers |k| > kc (flat Fourier diagnostics).
double spectral_mass_above(const Fft& fft, const WaveField& u, double kc);

// Smallest kc such that the spectral mass above kc is <= frac (bisection on
// the lattice); bounds the group velocity of band-limited data.
double occupied_band(const Fft& fft, const WaveField& u, double frac = 1e-8);

}  // namespace qsmooth
