#include "qsmooth/metric.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace qsmooth {

namespace {
constexpr int kPack[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
}

double SymMat::operator()(int i, int j) const { return a[kPack[i][j]]; }
void SymMat::set(int i, int j, double v) { a[kPack[i][j]] = v; }

double SymMat::det(int dim) const {
    if (dim == 1) return a[0];
    if (dim == 2) return a[0] * a[1] - a[3] * a[3];
    return a[0] * (a[1] * a[2] - a[5] * a[5]) - a[3] * (a[3] * a[2] - a[5] * a[4]) +
           a[4] * (a[3] * a[5] - a[1] * a[4]);
}

SymMat SymMat::inverse(int dim) const {
    const double d = det(dim);
    if (d <= 0) throw MetricConstructionError("metric not positive definite");
    SymMat r;
    if (dim == 1) {
        r.a[0] = 1.0 / a[0];
    } else if (dim == 2) {
        r.a[0] = a[1] / d;
        r.a[1] = a[0] / d;
        r.a[3] = -a[3] / d;
    } else {
        r.a[0] = (a[1] * a[2] - a[5] * a[5]) / d;
        r.a[1] = (a[0] * a[2] - a[4] * a[4]) / d;
        r.a[2] = (a[0] * a[1] - a[3] * a[3]) / d;
        r.a[3] = (a[4] * a[5] - a[3] * a[2]) / d;
        r.a[4] = (a[3] * a[5] - a[4] * a[1]) / d;
        r.a[5] = (a[3] * a[4] - a[0] * a[5]) / d;
    }
    return r;
}

double SymMat::min_eigenvalue(int dim) const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = (*this)(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
    double mn = es.eigenvalues()[0];
    for (int i = 1; i < dim; ++i) mn = std::min(mn, es.eigenvalues()[i]);
    return mn;
}

double BumpProfile::value(double r) const {
    if (amplitude == 0.0) return 0.0;
    const double c = cut(r);
    if (c == 0.0) return 0.0;
    return amplitude * std::exp(-0.5 * r * r / (width * width)) * c;
}

double BumpProfile::deriv(double r) const {
    if (amplitude == 0.0) return 0.0;
    const double c = cut(r);
    const double dc = cut.deriv(r, 1);
    if (c == 0.0 && dc == 0.0) return 0.0;
    const double e = std::exp(-0.5 * r * r / (width * width));
    return amplitude * e * (dc - c * r / (width * width));
}

double BumpProfile::deriv_over_r(double r) const {
    if (r > 1e-8) return deriv(r) / r;
    // near zero the cutoff is flat: lambda'(r)/r -> -amplitude/width^2
    return -amplitude / (width * width) *
           std::exp(-0.5 * r * r / (width * width));
}

MetricField::MetricField(const Grid& g, double R0, MetricKind kind)
    : grid_(g), R0_(R0), kind_(kind) {
    if (R0 <= 0) throw InvalidArgumentError("R0 must be positive");
}

std::shared_ptr<MetricField> MetricField::flat(const Grid& g, double R0) {
    auto m = std::shared_ptr<MetricField>(new MetricField(g, R0, MetricKind::Flat));
    m->tabulate();
    return m;
}

std::shared_ptr<MetricField> MetricField::conformal_bump(const Grid& g, double R0,
                                                         double amplitude,
                                                         double width) {
    auto m = std::shared_ptr<MetricField>(
        new MetricField(g, R0, MetricKind::ConformalBump));
    m->profile_ = {amplitude, width, R0,
                   RadialCutoff::descend(0.6 * R0, 0.95 * R0, Transition::C4)};
    m->tabulate();
    return m;
}

std::shared_ptr<MetricField> MetricField::warped_radial(const Grid& g, double R0,
                                                        double amplitude,
                                                        double width) {
    auto m = std::shared_ptr<MetricField>(
        new MetricField(g, R0, MetricKind::WarpedRadial));
    m->profile_ = {amplitude, width, R0,
                   RadialCutoff::descend(0.6 * R0, 0.95 * R0, Transition::C4)};
    m->tabulate();
    return m;
}

namespace {
// Natural cubic spline y(r) on [r0..rn] with y = 0 outside the table range.
struct Spline {
    std::vector<double> x, y, m;  // m = second derivatives

    double eval(double r, int deriv) const {
        if (r <= x.front() || r >= x.back()) return 0.0;
        std::size_t hi = 1;
        while (hi + 1 < x.size() && x[hi] < r) ++hi;
        const std::size_t lo = hi - 1;
        const double h = x[hi] - x[lo];
        const double A = (x[hi] - r) / h, B = (r - x[lo]) / h;
        if (deriv == 0)
            return A * y[lo] + B * y[hi] +
                   ((A * A * A - A) * m[lo] + (B * B * B - B) * m[hi]) * h * h / 6.0;
        return (y[hi] - y[lo]) / h +
               ((1 - 3 * A * A) * m[lo] + (3 * B * B - 1) * m[hi]) * h / 6.0;
    }
};

Spline build_spline(std::vector<double> x, std::vector<double> y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n)
        throw InvalidArgumentError("metric table needs >= 3 (r, lambda) rows");
    std::vector<double> m(n, 0.0), l(n, 1.0), mu(n, 0.0), z(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hi = x[i] - x[i - 1], hj = x[i + 1] - x[i];
        if (hi <= 0 || hj <= 0)
            throw InvalidArgumentError("metric table radii must increase");
        l[i] = 2 * (x[i + 1] - x[i - 1]) - hi * mu[i - 1];
        mu[i] = hj / l[i];
        const double d =
            3.0 * ((y[i + 1] - y[i]) / hj - (y[i] - y[i - 1]) / hi);
        z[i] = (d - hi * z[i - 1]) / l[i];
    }
    for (std::size_t i = n - 1; i-- > 1;) m[i] = z[i] - mu[i] * m[i + 1];
    // store 2nd derivatives (natural: zero at ends)
    Spline s;
    s.x = std::move(x);
    s.y = std::move(y);
    s.m.assign(m.begin(), m.end());
    for (auto& v : s.m) v *= 2.0;
    return s;
}
}  // namespace

std::shared_ptr<MetricField> MetricField::custom_table(
    const Grid& g, double R0, const std::vector<double>& r,
    const std::vector<double>& lambda) {
    auto m = std::shared_ptr<MetricField>(
        new MetricField(g, R0, MetricKind::CustomTable));
    // clamp the table to zero at r = R0 so the exterior is exactly flat
    std::vector<double> rr = r, ll = lambda;
    if (rr.empty() || rr.front() > 0) {
        rr.insert(rr.begin(), 0.0);
        ll.insert(ll.begin(), ll.empty() ? 0.0 : ll.front());
    }
    if (rr.back() < R0) {
        rr.push_back(R0);
        ll.push_back(0.0);
    } else {
        ll.back() = 0.0;
    }
    auto spline = std::make_shared<Spline>(build_spline(rr, ll));
    m->table_lambda_ = [spline](double rad) { return spline->eval(rad, 0); };
    m->table_dlambda_ = [spline](double rad) { return spline->eval(rad, 1); };
    m->tabulate();
    return m;
}

double MetricField::lambda_at(double r) const {
    switch (kind_) {
        case MetricKind::ConformalBump:
            return profile_.value(r);
        case MetricKind::CustomTable:
            return table_lambda_(r);
        default:
            return 0.0;
    }
}

double MetricField::dlambda_at(double r) const {
    switch (kind_) {
        case MetricKind::ConformalBump:
            return profile_.deriv(r);
        case MetricKind::CustomTable:
            return table_dlambda_(r);
        default:
            return 0.0;
    }
}

double MetricField::dlambda_over_r_at(double r) const {
    if (kind_ == MetricKind::ConformalBump) return profile_.deriv_over_r(r);
    return r > 1e-10 ? dlambda_at(r) / r : 0.0;
}

SymMat MetricField::g_at(const Vec3& x) const {
    const int d = grid_.dim;
    SymMat g = SymMat::identity();
    const double r = std::sqrt(norm2(x, d));
    switch (kind_) {
        case MetricKind::Flat:
            break;
        case MetricKind::ConformalBump:
        case MetricKind::CustomTable: {
            const double f = std::exp(2.0 * lambda_at(r));
            for (int i = 0; i < d; ++i) g.set(i, i, f);
            break;
        }
        case MetricKind::WarpedRadial: {
            const double nu = profile_.value(r) / (R0_ * R0_);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    g.set(i, j, (i == j ? 1.0 : 0.0) + nu * x[i] * x[j]);
            break;
        }
    }
    return g;
}

SymMat MetricField::ginv_at(const Vec3& x) const {
    return g_at(x).inverse(grid_.dim);
}

double MetricField::sqrt_det_at(const Vec3& x) const {
    return std::sqrt(g_at(x).det(grid_.dim));
}

void MetricField::dg_at(const Vec3& x, std::array<SymMat, 3>& dg) const {
    const int d = grid_.dim;
    if (kind_ == MetricKind::Flat) {
        for (int l = 0; l < d; ++l)
            for (auto& v : dg[l].a) v = 0;
        return;
    }
    if (kind_ == MetricKind::ConformalBump || kind_ == MetricKind::CustomTable) {
        // d_l g_jk = 2 lambda_{,l} e^{2 lambda} delta_jk
        const double r = std::sqrt(norm2(x, d));
        const double f = std::exp(2.0 * lambda_at(r));
        const double dl_over_r = dlambda_over_r_at(r);
        for (int l = 0; l < d; ++l) {
            const double dl = dl_over_r * x[l];
            for (auto& v : dg[l].a) v = 0;
            for (int i = 0; i < d; ++i) dg[l].set(i, i, 2.0 * dl * f);
        }
        return;
    }
    // generic: centered differences of the evaluator
    const double h = 1e-6 * std::max(1.0, R0_);
    for (int l = 0; l < d; ++l) {
        Vec3 xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        const SymMat gp = g_at(xp), gm = g_at(xm);
        for (int p = 0; p < 6; ++p) dg[l].a[p] = (gp.a[p] - gm.a[p]) / (2 * h);
    }
}

void MetricField::tabulate() {
    const std::int64_t N = grid_.size();
    g_.assign(6, std::vector<double>(N));
    ginv_.assign(6, std::vector<double>(N));
    sqrt_det_.assign(N, 0.0);
    double max_eig = 0;
    const int d = grid_.dim;
    for_each_point(grid_, [&](std::int64_t idx, const Vec3& x) {
        const SymMat g = g_at(x);
        if (g.min_eigenvalue(d) <= 0)
            throw MetricConstructionError("metric not SPD at a grid point");
        const SymMat gi = g.inverse(d);
        for (int p = 0; p < 6; ++p) {
            g_[p][idx] = g.a[p];
            ginv_[p][idx] = gi.a[p];
        }
        sqrt_det_[idx] = std::sqrt(g.det(d));
        // largest eigenvalue of g^{-1} = 1 / (smallest eigenvalue of g)
        max_eig = std::max(max_eig, 1.0 / g.min_eigenvalue(d));
    });
    max_ginv_eig_ = std::max(1.0, max_eig);
}

double MetricField::points_across_bump() const {
    if (kind_ == MetricKind::Flat) return 1e30;
    // full bump width ~ 4 x the Gaussian width parameter (capped at 2 R0)
    const double w = profile_.width > 0 ? profile_.width : 0.5 * R0_;
    const double feature = std::min(4.0 * w, 2.0 * R0_);
    return feature / grid_.min_spacing();
}

std::string MetricField::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case MetricKind::Flat:
            os << "flat";
            break;
        case MetricKind::ConformalBump:
            os << "conformal-bump(A=" << profile_.amplitude
               << ",w=" << profile_.width << ")";
            break;
        case MetricKind::WarpedRadial:
            os << "warped-radial(A=" << profile_.amplitude
               << ",w=" << profile_.width << ")";
            break;
        case MetricKind::CustomTable:
            os << "custom-table";
            break;
    }
    os << ",R0=" << R0_;
    return os.str();
}

Christoffel christoffel(const MetricField& m, const Vec3& x) {
    const int d = m.dim();
    for (int a = 0; a < d; ++a)
        if (std::abs(x[a]) > 0.5 * m.grid().extent[a])
            throw DomainError("christoffel: point outside grid domain");

    Christoffel out;
    out.dim = d;
    const double r = std::sqrt(norm2(x, d));
    if (m.kind() == MetricKind::ConformalBump ||
        m.kind() == MetricKind::CustomTable) {
        // Gamma^i_jk = delta^i_j l_k + delta^i_k l_j - delta_jk l_i
        // with l_i = lambda_{,i} = (lambda'(r)/r) x_i, regular at r = 0.
        const double s = m.dlambda_over_r_at(r);
        std::array<double, 3> lam{0, 0, 0};
        for (int i = 0; i < d; ++i) lam[i] = s * x[i];
        for (int i = 0; i < d; ++i) {
            for (auto& v : out.gamma[i].a) v = 0;
            for (int j = 0; j < d; ++j)
                for (int k = j; k < d; ++k) {
                    double val = 0;
                    if (i == j) val += lam[k];
                    if (i == k) val += lam[j];
                    if (j == k) val -= lam[i];
                    out.gamma[i].set(j, k, val);
                }
        }
        return out;
    }

    // generic: Gamma^i_jk = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)
    const SymMat gi = m.ginv_at(x);
    std::array<SymMat, 3> dg;
    m.dg_at(x, dg);
    for (int i = 0; i < d; ++i) {
        for (auto& v : out.gamma[i].a) v = 0;
        for (int j = 0; j < d; ++j)
            for (int k = j; k < d; ++k) {
                double val = 0;
                for (int l = 0; l < d; ++l)
                    val += gi(i, l) *
                           (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
                out.gamma[i].set(j, k, 0.5 * val);
            }
    }
    return out;
}

}  // namespace qsmooth
