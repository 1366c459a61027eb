#include "lightray/geometry/geodesic.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace lightray {

namespace {

Mat2 checked_inverse(const Mat2& g)
{
    const double det = g.determinant();
    Eigen::SelfAdjointEigenSolver<Mat2> es(g);
    const double lmin = es.eigenvalues()[0], lmax = es.eigenvalues()[1];
    if (!(det > 0.0) || !(lmin > 0.0) || lmax / lmin > 1e12) {
        std::ostringstream os;
        os << "singular metric matrix, condition number " << (lmin > 0.0 ? lmax / lmin : INFINITY);
        throw NumericalError(os.str());
    }
    return g.inverse();
}

} // namespace

Christoffel christoffel_from_jet(const MetricJet& j)
{
    const Mat2 gi = checked_inverse(j.g);
    Christoffel G;
    for (int i = 0; i < 2; ++i)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += gi(i, l) * (j.dg[a](l, b) + j.dg[b](l, a) - j.dg[l](a, b));
                G[i](a, b) = 0.5 * s;
            }
    return G;
}

ChristoffelJet christoffel_jet(const MetricJet& j)
{
    ChristoffelJet out;
    out.G = christoffel_from_jet(j);
    const Mat2 gi = j.g.inverse();
    for (int m = 0; m < 2; ++m) {
        const Mat2 dgi = -gi * j.dg[m] * gi;
        for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double s = 0.0;
                    for (int l = 0; l < 2; ++l) {
                        s += dgi(i, l) * (j.dg[a](l, b) + j.dg[b](l, a) - j.dg[l](a, b));
                        s += gi(i, l) * (j.d2g[m][a](l, b) + j.d2g[m][b](l, a) - j.d2g[m][l](a, b));
                    }
                    out.dG[m][i](a, b) = 0.5 * s;
                }
    }
    return out;
}

Christoffel christoffel(const RiemannianChart& chart, const Vec2& x)
{
    return christoffel_from_jet(chart.jet_checked(x));
}

RiemannTensor riemann(const RiemannianChart& chart, const Vec2& x)
{
    const ChristoffelJet cj = christoffel_jet(chart.jet(x));
    const auto& G = cj.G;
    RiemannTensor R;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    double s = cj.dG[k][i](l, j) - cj.dG[l][i](k, j);
                    for (int m = 0; m < 2; ++m) s += G[i](k, m) * G[m](l, j) - G[i](l, m) * G[m](k, j);
                    R[i][j](k, l) = s;
                }
    return R;
}

Vec2 contract_christoffel(const Christoffel& G, const Vec2& a, const Vec2& b)
{
    return Vec2(-a.dot(G[0] * b), -a.dot(G[1] * b));
}

namespace {

/// Geodesic state with an optional transported frame.
struct State {
    Vec2 x, v;
    Mat2 e;
};

State rhs(const RiemannianChart& chart, const State& s, bool frame)
{
    const Christoffel G = christoffel_from_jet(chart.jet(s.x));
    State d;
    d.x = s.v;
    d.v = contract_christoffel(G, s.v, s.v);
    if (frame)
        for (int c = 0; c < 2; ++c) d.e.col(c) = contract_christoffel(G, s.v, s.e.col(c));
    else
        d.e.setZero();
    return d;
}

State axpy(const State& s, double h, const State& d)
{
    return {s.x + h * d.x, s.v + h * d.v, s.e + h * d.e};
}

State rk4(const RiemannianChart& chart, const State& s, double h, bool frame)
{
    const State k1 = rhs(chart, s, frame);
    const State k2 = rhs(chart, axpy(s, 0.5 * h, k1), frame);
    const State k3 = rhs(chart, axpy(s, 0.5 * h, k2), frame);
    const State k4 = rhs(chart, axpy(s, h, k3), frame);
    State out;
    out.x = s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    out.v = s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    out.e = s.e + h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
    return out;
}

void check_unit(const RiemannianChart& chart, const Vec2& y, const Vec2& v)
{
    const double n = chart.norm(y, v);
    if (std::abs(n - 1.0) > 1e-6)
        throw PreconditionError("geodesic start velocity is not unit length (|v|_g = " + std::to_string(n) + ")");
}

} // namespace

GeodesicPath integrate_geodesic(const RiemannianChart& chart, const Vec2& y, const Vec2& v, double h)
{
    if (!(h > 0.0)) throw PreconditionError("integrate_geodesic: step must be positive");
    check_unit(chart, y, v);
    const Domain& dom = chart.domain();
    if (dom.defining_function(y) > 1e-10) throw DomainError("integrate_geodesic: start point outside the domain");
    const double cap = 50.0 * dom.diameter();

    GeodesicPath p;
    p.start_point = y;
    p.start_velocity = v;
    p.step = h;
    State s{y, v, Mat2::Zero()};
    double t = 0.0;
    p.samples.push_back({0.0, y, v});
    bool left_start = dom.defining_function(y) < -1e-12;
    while (true) {
        State n = rk4(chart, s, h, false);
        const double f = dom.defining_function(n.x);
        if (f < 0.0) left_start = true;
        if (f > 0.0 && left_start) {
            double lo = 0.0, hi = 1.0;
            State best = n;
            while ((hi - lo) * h > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                State m = rk4(chart, s, mid * h, false);
                if (dom.defining_function(m.x) > 0.0) { hi = mid; best = m; }
                else lo = mid;
            }
            best = rk4(chart, s, hi * h, false);
            t += hi * h;
            p.samples.push_back({t, best.x, best.v});
            break;
        }
        if (f > 0.0 && !left_start && t > 0.0)
            throw DomainError("integrate_geodesic: start direction points out of the domain");
        s = n;
        t += h;
        p.samples.push_back({t, s.x, s.v});
        if (t > cap)
            throw TrappingError("geodesic did not exit after arc length " + std::to_string(t) + " (cap 50 diam)");
    }
    p.exit_time = t;
    p.maximal = true;
    return p;
}

GeodesicPath integrate_maximal_geodesic(const RiemannianChart& chart, const Vec2& y, const Vec2& v, int n_steps)
{
    if (n_steps < 2) throw PreconditionError("integrate_maximal_geodesic: need at least 2 steps");
    const GeodesicPath first = integrate_geodesic(chart, y, v, chart.domain().diameter() / n_steps);
    // the tiny tolerance keeps the last full node inside the domain
    return integrate_geodesic(chart, y, v, first.exit_time / n_steps * (1.0 - 1e-9));
}

GeodesicPath integrate_geodesic_length(const RiemannianChart& chart, const Vec2& y, const Vec2& v, double length,
                                       int n_steps)
{
    GeodesicPath p;
    p.start_point = y;
    p.start_velocity = v;
    p.step = length / n_steps;
    State s{y, v, Mat2::Zero()};
    p.samples.push_back({0.0, y, v});
    for (int k = 1; k <= n_steps; ++k) {
        s = rk4(chart, s, p.step, false);
        p.samples.push_back({k * p.step, s.x, s.v});
    }
    p.exit_time = length;
    return p;
}

std::vector<Mat2> parallel_transport(const RiemannianChart& chart, const GeodesicPath& path, const Mat2& frame0)
{
    const Mat2 g0 = chart.metric(path.start_point);
    const Mat2 gram = frame0.transpose() * g0 * frame0;
    if ((gram - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-8)
        throw PreconditionError("parallel_transport: frame0 is not orthonormal");
    std::vector<Mat2> out;
    out.reserve(path.samples.size());
    State s{path.start_point, path.start_velocity, frame0};
    out.push_back(frame0);
    for (size_t k = 1; k < path.samples.size(); ++k) {
        s = rk4(chart, s, path.samples[k].t - path.samples[k - 1].t, true);
        out.push_back(s.e);
    }
    return out;
}

Vec2 normalize_velocity(const RiemannianChart& chart, const Vec2& y, const Vec2& v)
{
    return v / chart.norm(y, v);
}

Vec2 orthonormal_complement(const Mat2& g, const Vec2& v)
{
    const Vec2 w = g * v;
    const Vec2 e(-w.y(), w.x());
    const double n = std::sqrt(e.dot(g * e));
    return e / n;
}

void write_geodesic_csv(const GeodesicPath& path, std::ostream& out)
{
    out << "t,x1,x2,v1,v2\n" << std::setprecision(17);
    for (const auto& s : path.samples)
        out << s.t << ',' << s.x.x() << ',' << s.x.y() << ',' << s.v.x() << ',' << s.v.y() << '\n';
}

} // namespace lightray
