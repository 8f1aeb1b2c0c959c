#include "qsmooth/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace qsmooth {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Fft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::int64_t size = 0;

    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

namespace {
// Plans are cached per grid shape; FFTW_UNALIGNED lets us execute on any
// heap buffer via the new-array interface.
std::shared_ptr<Fft::Plans> get_plans(const Grid& g) {
    static std::map<std::array<int, 3>, std::weak_ptr<Fft::Plans>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto& slot = cache[g.n];
    if (auto p = slot.lock()) return p;

    auto plans = std::make_shared<Fft::Plans>();
    plans->size = g.size();
    std::vector<cplx> a(g.size()), b(g.size());
    auto* ap = reinterpret_cast<fftw_complex*>(a.data());
    auto* bp = reinterpret_cast<fftw_complex*>(b.data());
    int rank = g.dim;
    int dims[3] = {g.n[0], g.n[1], g.n[2]};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->fwd = fftw_plan_dft(rank, dims, ap, bp, FFTW_FORWARD, flags);
    plans->bwd = fftw_plan_dft(rank, dims, ap, bp, FFTW_BACKWARD, flags);
    if (!plans->fwd || !plans->bwd) throw Error("FFTW planning failed");
    slot = plans;
    return plans;
}
}  // namespace

Fft::Fft(const Grid& grid) : grid_(grid), plans_(get_plans(grid)) {}

void Fft::forward(const std::vector<cplx>& in, std::vector<cplx>& out) const {
    out.resize(in.size());
    fftw_execute_dft(plans_->fwd,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

void Fft::backward(const std::vector<cplx>& in, std::vector<cplx>& out) const {
    out.resize(in.size());
    fftw_execute_dft(plans_->bwd,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / double(plans_->size);
    for (auto& v : out) v *= scale;
}

void Fft::apply_symbol(std::vector<cplx>& u,
                       const std::function<cplx(const Vec3&)>& s) const {
    std::vector<cplx> uh;
    forward(u, uh);
    for_each_wavenumber(grid_, [&](std::int64_t idx, const Vec3& k) {
        uh[idx] *= s(k);
    });
    backward(uh, u);
}

void Fft::derivative(const std::vector<cplx>& u, int axis,
                     std::vector<cplx>& du) const {
    std::vector<cplx> uh;
    forward(u, uh);
    for_each_wavenumber(grid_, [&](std::int64_t idx, const Vec3& k) {
        uh[idx] *= cplx(0.0, k[axis]);
    });
    backward(uh, du);
}

void Fft::gradient(const std::vector<cplx>& u,
                   std::array<std::vector<cplx>, 3>& grad) const {
    std::vector<cplx> uh, work;
    forward(u, uh);
    for (int a = 0; a < grid_.dim; ++a) {
        work = uh;
        for_each_wavenumber(grid_, [&](std::int64_t idx, const Vec3& k) {
            work[idx] *= cplx(0.0, k[a]);
        });
        backward(work, grad[a]);
    }
}

}  // namespace qsmooth
