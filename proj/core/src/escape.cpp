#include "qsmooth/escape.hpp"

#include <cmath>

namespace qsmooth {

EscapeReport escape_monotonicity(const EscapeSymbol& symbol,
                                 const MetricField& metric,
                                 const std::vector<Trajectory>& trajectories,
                                 const CutoffFamily& cutoffs,
                                 double tolerance) {
    EscapeReport rep;
    rep.min_flow_derivative = std::numeric_limits<double>::infinity();
    rep.min_gap_on_phi = std::numeric_limits<double>::infinity();
    const int d = metric.dim();
    const RadialCutoff phi = cutoffs.phi();

    for (const auto& tr : trajectories) {
        if (tr.points.size() < 3) continue;
        ++rep.trajectories;
        std::vector<double> vals(tr.points.size());
        for (std::size_t i = 0; i < tr.points.size(); ++i)
            vals[i] = symbol(tr.points[i].x, tr.points[i].xi, d);
        for (std::size_t i = 1; i + 1 < tr.points.size(); ++i) {
            const double ds = tr.points[i + 1].s - tr.points[i - 1].s;
            if (std::abs(ds) < 1e-14) continue;
            const double dds = (vals[i + 1] - vals[i - 1]) / ds;
            ++rep.samples;
            rep.min_flow_derivative = std::min(rep.min_flow_derivative, dds);

            const auto& st = tr.points[i];
            const double r = std::sqrt(norm2(st.x, d));
            const double ph = phi(r);
            if (ph > 0) {
                const SymMat gi = metric.ginv_at(st.x);
                double xig = 0;
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        xig += gi(j, k) * st.xi[j] * st.xi[k];
                ++rep.n_phi_samples;
                rep.min_gap_on_phi =
                    std::min(rep.min_gap_on_phi, dds - ph * xig);
            }
        }
    }
    rep.monotone = rep.samples > 0 && rep.min_flow_derivative >= -tolerance;
    return rep;
}

}  // namespace qsmooth
