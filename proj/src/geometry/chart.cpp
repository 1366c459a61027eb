#include "lightray/geometry/chart.hpp"

#include <algorithm>
#include <cmath>

namespace lightray {

Domain Domain::disk(double radius, Vec2 center)
{
    if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
    Domain d;
    d.kind = DomainKind::Disk;
    d.radius = radius;
    d.center = center;
    return d;
}

Domain Domain::rect(Vec2 lo, Vec2 hi)
{
    if (!(hi.x() > lo.x() && hi.y() > lo.y())) throw ConfigError("rectangle corners out of order");
    Domain d;
    d.kind = DomainKind::Rect;
    d.lo = lo;
    d.hi = hi;
    d.center = 0.5 * (lo + hi);
    return d;
}

bool Domain::contains(const Vec2& x, double tol) const
{
    return defining_function(x) <= tol;
}

double Domain::defining_function(const Vec2& x) const
{
    if (kind == DomainKind::Disk)
        return ((x - center).squaredNorm() - radius * radius) / (2.0 * radius);
    return std::max({lo.x() - x.x(), x.x() - hi.x(), lo.y() - x.y(), x.y() - hi.y()});
}

Vec2 Domain::outward_normal(const Vec2& x) const
{
    if (kind == DomainKind::Disk) return (x - center).normalized();
    const double d[4] = {lo.x() - x.x(), x.x() - hi.x(), lo.y() - x.y(), x.y() - hi.y()};
    const int k = int(std::max_element(d, d + 4) - d);
    static const Vec2 n[4] = {Vec2(-1, 0), Vec2(1, 0), Vec2(0, -1), Vec2(0, 1)};
    return n[k];
}

double Domain::diameter() const
{
    if (kind == DomainKind::Disk) return 2.0 * radius;
    return (hi - lo).norm();
}

Vec2 Domain::box_lo() const { return kind == DomainKind::Disk ? Vec2(center.array() - radius) : lo; }
Vec2 Domain::box_hi() const { return kind == DomainKind::Disk ? Vec2(center.array() + radius) : hi; }

namespace {

class EuclideanMetric : public MetricSource {
public:
    MetricJet jet(const Vec2&) const override
    {
        MetricJet j;
        j.g.setIdentity();
        for (auto& m : j.dg) m.setZero();
        for (auto& r : j.d2g)
            for (auto& m : r) m.setZero();
        return j;
    }
    bool is_euclidean() const override { return true; }
    std::string name() const override { return "euclidean"; }
};

class ConformalMetric : public MetricSource {
public:
    ConformalMetric(double a, Vec2 c) : a_(a), c_(c) {}
    MetricJet jet(const Vec2& x) const override
    {
        const Vec2 y = x - c_;
        const double e = std::exp(2.0 * a_ * y.squaredNorm());
        const Vec2 dl = 2.0 * a_ * y;
        MetricJet j;
        j.g = e * Mat2::Identity();
        for (int k = 0; k < 2; ++k) j.dg[k] = 2.0 * dl[k] * e * Mat2::Identity();
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                j.d2g[k][l] = (4.0 * dl[k] * dl[l] + (k == l ? 4.0 * a_ : 0.0)) * e * Mat2::Identity();
        return j;
    }
    std::string name() const override { return "conformal"; }

private:
    double a_;
    Vec2 c_;
};

/// Blending weight w (0 inside, 1 beyond the collar) with gradient and Hessian.
struct Weight {
    double w;
    Vec2 dw;
    Mat2 hw;
};

Weight collar_weight(const Domain& d, const Vec2& x)
{
    Weight r{0.0, Vec2::Zero(), Mat2::Zero()};
    const double c = kCollarWidth;
    if (d.kind == DomainKind::Disk) {
        const Vec2 y = x - d.center;
        const double n = y.norm();
        if (n <= d.radius) return r;
        const Vec2 u = y / n;
        auto s = smoothstep5((n - d.radius) / c);
        r.w = s.v;
        r.dw = s.d1 / c * u;
        r.hw = s.d2 / (c * c) * u * u.transpose() + s.d1 / c * (Mat2::Identity() - u * u.transpose()) / n;
        return r;
    }
    // product of per-axis complements
    Smooth3 s[2];
    double sign[2];
    for (int k = 0; k < 2; ++k) {
        double dist = 0.0;
        sign[k] = 0.0;
        if (x[k] < d.lo[k]) { dist = d.lo[k] - x[k]; sign[k] = -1.0; }
        else if (x[k] > d.hi[k]) { dist = x[k] - d.hi[k]; sign[k] = 1.0; }
        s[k] = smoothstep5(dist / c);
    }
    const double p0 = 1.0 - s[0].v, p1 = 1.0 - s[1].v;
    const double d0 = -s[0].d1 * sign[0] / c, d1 = -s[1].d1 * sign[1] / c;
    const double dd0 = -s[0].d2 / (c * c), dd1 = -s[1].d2 / (c * c);
    r.w = 1.0 - p0 * p1;
    r.dw = Vec2(-d0 * p1, -p0 * d1);
    r.hw << -dd0 * p1, -d0 * d1, -d0 * d1, -p0 * dd1;
    return r;
}

} // namespace

RiemannianChart::RiemannianChart(Domain domain, std::shared_ptr<const MetricSource> source)
    : domain_(domain), source_(std::move(source))
{
    if (!source_) throw ConfigError("RiemannianChart: null metric source");
}

RiemannianChart RiemannianChart::euclidean(const Domain& domain)
{
    return RiemannianChart(domain, std::make_shared<EuclideanMetric>());
}

RiemannianChart RiemannianChart::conformal(const Domain& domain, double amplitude, Vec2 center)
{
    return RiemannianChart(domain, std::make_shared<ConformalMetric>(amplitude, center));
}

RiemannianChart RiemannianChart::sampled(const RiemannianChart& source, int n)
{
    const double m = kCollarWidth + 0.1;
    const Vec2 lo = source.domain().box_lo().array() - m;
    const Vec2 hi = source.domain().box_hi().array() + m;
    std::vector<Mat2> samples(size_t(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 x(lo.x() + (hi.x() - lo.x()) * i / (n - 1), lo.y() + (hi.y() - lo.y()) * j / (n - 1));
            samples[size_t(j) * n + i] = source.source_->jet(x).g;
        }
    return RiemannianChart(source.domain(), std::make_shared<GridMetric>(lo, hi, n, std::move(samples)));
}

std::string RiemannianChart::mode() const
{
    return source_->name() == "grid" ? "grid-sampled" : "analytic";
}

MetricJet RiemannianChart::jet(const Vec2& x) const
{
    MetricJet j = source_->jet(x);
    if (source_->is_euclidean()) return j;
    const Weight w = collar_weight(domain_, x);
    if (w.w == 0.0 && w.dw.isZero() && w.hw.isZero()) return j;
    const Mat2 diff = Mat2::Identity() - j.g;
    MetricJet e;
    e.g = j.g + w.w * diff;
    for (int k = 0; k < 2; ++k) e.dg[k] = (1.0 - w.w) * j.dg[k] + w.dw[k] * diff;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            e.d2g[k][l] = (1.0 - w.w) * j.d2g[k][l] - w.dw[k] * j.dg[l] - w.dw[l] * j.dg[k] + w.hw(k, l) * diff;
    return e;
}

Mat2 RiemannianChart::metric(const Vec2& x) const { return jet(x).g; }

MetricJet RiemannianChart::jet_checked(const Vec2& x) const
{
    if (!domain_.contains(x, 1e-12))
        throw DomainError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ") outside the domain");
    return jet(x);
}

std::pair<double, double> RiemannianChart::eigen_bounds(int n) const
{
    double lmin = 1e300, lmax = 0.0;
    const Vec2 lo = domain_.box_lo(), hi = domain_.box_hi();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 x(lo.x() + (hi.x() - lo.x()) * i / (n - 1), lo.y() + (hi.y() - lo.y()) * j / (n - 1));
            if (!domain_.contains(x, 1e-12)) continue;
            Eigen::SelfAdjointEigenSolver<Mat2> es(metric(x));
            lmin = std::min(lmin, es.eigenvalues()[0]);
            lmax = std::max(lmax, es.eigenvalues()[1]);
        }
    return {lmin, lmax};
}

double RiemannianChart::norm(const Vec2& x, const Vec2& v) const
{
    return std::sqrt(v.dot(metric(x) * v));
}

// ---------------------------------------------------------------------------

GridMetric::GridMetric(Vec2 lo, Vec2 hi, int n, std::vector<Mat2> samples)
    : lo_(lo), hi_(hi), n_(n)
{
    if (n < 8) throw ConfigError("GridMetric: need at least 8 samples per axis");
    if (samples.size() != size_t(n) * n) throw ConfigError("GridMetric: sample count mismatch");
    h_[0] = (hi.x() - lo.x()) / (n - 1);
    h_[1] = (hi.y() - lo.y()) / (n - 1);
    const size_t N = samples.size();
    g_.resize(N);
    for (size_t i = 0; i < N; ++i) {
        const Mat2& m = samples[i];
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * m.norm())
            throw ConfigError("GridMetric: sample is not symmetric");
        g_[i] = {m(0, 0), m(0, 1), m(1, 1)};
    }
    auto at = [&](const std::vector<std::array<double, 3>>& f, int i, int j, int c) {
        return f[size_t(j) * n_ + i][c];
    };
    // 4th order first derivative along axis, one-sided 2nd order near edges
    auto d1 = [&](const std::vector<std::array<double, 3>>& f, int i, int j, int c, int axis) {
        auto F = [&](int o) { return axis == 0 ? at(f, i + o, j, c) : at(f, i, j + o, c); };
        const int idx = axis == 0 ? i : j;
        const double h = h_[axis];
        if (idx >= 2 && idx <= n_ - 3) return (F(-2) - 8.0 * F(-1) + 8.0 * F(1) - F(2)) / (12.0 * h);
        if (idx == 0) return (-3.0 * F(0) + 4.0 * F(1) - F(2)) / (2.0 * h);
        if (idx == n_ - 1) return (3.0 * F(0) - 4.0 * F(-1) + F(-2)) / (2.0 * h);
        return (F(1) - F(-1)) / (2.0 * h);
    };
    dg0_.resize(N);
    dg1_.resize(N);
    d00_.resize(N);
    d01_.resize(N);
    d11_.resize(N);
    for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i)
            for (int c = 0; c < 3; ++c) {
                const size_t k = size_t(j) * n_ + i;
                dg0_[k][c] = d1(g_, i, j, c, 0);
                dg1_[k][c] = d1(g_, i, j, c, 1);
                const int ic = std::clamp(i, 1, n_ - 2), jc = std::clamp(j, 1, n_ - 2);
                d00_[k][c] = (at(g_, ic + 1, j, c) - 2.0 * at(g_, ic, j, c) + at(g_, ic - 1, j, c)) / (h_[0] * h_[0]);
                d11_[k][c] = (at(g_, i, jc + 1, c) - 2.0 * at(g_, i, jc, c) + at(g_, i, jc - 1, c)) / (h_[1] * h_[1]);
                d01_[k][c] = (at(g_, ic + 1, jc + 1, c) - at(g_, ic + 1, jc - 1, c) - at(g_, ic - 1, jc + 1, c)
                              + at(g_, ic - 1, jc - 1, c)) / (4.0 * h_[0] * h_[1]);
            }
}

double GridMetric::interp(const std::vector<std::array<double, 3>>& f, int comp, const Vec2& x) const
{
    double u = (x.x() - lo_.x()) / h_[0], v = (x.y() - lo_.y()) / h_[1];
    u = std::clamp(u, 0.0, double(n_ - 1));
    v = std::clamp(v, 0.0, double(n_ - 1));
    const int i = std::min(int(u), n_ - 2), j = std::min(int(v), n_ - 2);
    const double fu = u - i, fv = v - j;
    // Catmull-Rom weights
    auto w = [](double t, double out[4]) {
        const double t2 = t * t, t3 = t2 * t;
        out[0] = 0.5 * (-t3 + 2.0 * t2 - t);
        out[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
        out[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
        out[3] = 0.5 * (t3 - t2);
    };
    double wu[4], wv[4];
    w(fu, wu);
    w(fv, wv);
    double s = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int jj = std::clamp(j - 1 + b, 0, n_ - 1);
        for (int a = 0; a < 4; ++a) {
            const int ii = std::clamp(i - 1 + a, 0, n_ - 1);
            s += wu[a] * wv[b] * f[size_t(jj) * n_ + ii][comp];
        }
    }
    return s;
}

MetricJet GridMetric::jet(const Vec2& x) const
{
    auto mat = [&](const std::vector<std::array<double, 3>>& f) {
        Mat2 m;
        m(0, 0) = interp(f, 0, x);
        m(0, 1) = m(1, 0) = interp(f, 1, x);
        m(1, 1) = interp(f, 2, x);
        return m;
    };
    MetricJet j;
    j.g = mat(g_);
    j.dg[0] = mat(dg0_);
    j.dg[1] = mat(dg1_);
    j.d2g[0][0] = mat(d00_);
    j.d2g[0][1] = j.d2g[1][0] = mat(d01_);
    j.d2g[1][1] = mat(d11_);
    return j;
}

} // namespace lightray
