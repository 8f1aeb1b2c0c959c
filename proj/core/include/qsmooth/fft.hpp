#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "qsmooth/grid.hpp"

namespace qsmooth {

// Thin wrapper over FFTW c2c transforms for one grid. Plans are created once
// per grid shape (guarded by a global mutex) and shared; execution uses the
// new-array interface and is safe to call concurrently on distinct buffers.
class Fft {
  public:
    explicit Fft(const Grid& grid);

    const Grid& grid() const { return grid_; }

    // Unnormalized forward DFT.
    void forward(const std::vector<cplx>& in, std::vector<cplx>& out) const;
    // Inverse DFT scaled by 1/size, so backward(forward(u)) == u.
    void backward(const std::vector<cplx>& in, std::vector<cplx>& out) const;

    // u <- F^-1 [ s(k) F u ] with s evaluated on derivative-convention
    // wavenumbers (Nyquist zeroed).
    void apply_symbol(std::vector<cplx>& u,
                      const std::function<cplx(const Vec3&)>& s) const;

    // Spectral partial derivative along axis (multiplier i*k_axis).
    void derivative(const std::vector<cplx>& u, int axis,
                    std::vector<cplx>& du) const;

    // All dim spectral partials from a single forward transform.
    void gradient(const std::vector<cplx>& u,
                  std::array<std::vector<cplx>, 3>& grad) const;

    struct Plans;  // FFTW plan pair, shared per grid shape

  private:
    Grid grid_;
    std::shared_ptr<Plans> plans_;
};

}  // namespace qsmooth
