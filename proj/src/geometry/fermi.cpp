#include "lightray/geometry/fermi.hpp"

#include <cmath>
#include <sstream>

namespace lightray {

NullGeodesic NullGeodesic::make(double time_offset, GeodesicPath spatial, double eps)
{
    if (!(eps > 0.0)) throw PreconditionError("NullGeodesic: eps must be positive");
    NullGeodesic r;
    r.time_offset = time_offset;
    r.window.tau_minus = 0.0;
    r.window.tau_plus = spatial.exit_time;
    r.window.eps = eps;
    r.spatial = std::move(spatial);
    return r;
}

MatS FermiChart::metric_fermi(const VecS& z) const
{
    const FermiPoint fp = from_fermi(z);
    return fp.jac.transpose() * spacetime_metric(fp.p) * fp.jac;
}

VecS FermiChart::beta(double t) const
{
    const int m = n() + 1;
    VecS p(m);
    p[0] = time_offset() + t;
    const Vec2 x = gamma_point(t);
    for (int i = 1; i < m; ++i) p[i] = x[i - 1];
    return p;
}

VecS FermiChart::beta_velocity(double t) const
{
    const int m = n() + 1;
    VecS p(m);
    p[0] = 1.0;
    const Vec2 v = gamma_velocity(t);
    for (int i = 1; i < m; ++i) p[i] = v[i - 1];
    return p;
}

namespace {

/// d y / d z for y = (t, y1, y'') and z = (s, r, z'').
MatS fermi_linear_part(int m)
{
    MatS L = MatS::Identity(m, m);
    const double c = 1.0 / kSqrt2;
    L(0, 0) = c;
    L(0, 1) = -c;
    L(1, 0) = c;
    L(1, 1) = c;
    return L;
}

struct BaseState {
    Vec2 x, v, e;
};

BaseState base_rhs(const RiemannianChart& chart, const BaseState& s)
{
    const Christoffel G = christoffel_from_jet(chart.jet(s.x));
    return {s.v, contract_christoffel(G, s.v, s.v), contract_christoffel(G, s.v, s.e)};
}

BaseState base_step(const RiemannianChart& chart, const BaseState& s, double h)
{
    auto add = [](const BaseState& a, double c, const BaseState& d) {
        return BaseState{a.x + c * d.x, a.v + c * d.v, a.e + c * d.e};
    };
    const BaseState k1 = base_rhs(chart, s);
    const BaseState k2 = base_rhs(chart, add(s, 0.5 * h, k1));
    const BaseState k3 = base_rhs(chart, add(s, 0.5 * h, k2));
    const BaseState k4 = base_rhs(chart, add(s, h, k3));
    return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            s.e + h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e)};
}

/// Geodesic with two variation fields.
struct ExpState {
    Vec2 x, w, X1, W1, X2, W2;
};

ExpState exp_rhs(const RiemannianChart& chart, const ExpState& s)
{
    const ChristoffelJet cj = christoffel_jet(chart.jet(s.x));
    auto dgamma = [&](const Vec2& X) {
        Christoffel d;
        for (int i = 0; i < 2; ++i) d[i] = X[0] * cj.dG[0][i] + X[1] * cj.dG[1][i];
        return d;
    };
    ExpState d;
    d.x = s.w;
    d.w = contract_christoffel(cj.G, s.w, s.w);
    d.X1 = s.W1;
    d.W1 = contract_christoffel(dgamma(s.X1), s.w, s.w) + 2.0 * contract_christoffel(cj.G, s.w, s.W1);
    d.X2 = s.W2;
    d.W2 = contract_christoffel(dgamma(s.X2), s.w, s.w) + 2.0 * contract_christoffel(cj.G, s.w, s.W2);
    return d;
}

ExpState exp_add(const ExpState& a, double c, const ExpState& d)
{
    return {a.x + c * d.x, a.w + c * d.w, a.X1 + c * d.X1, a.W1 + c * d.W1, a.X2 + c * d.X2, a.W2 + c * d.W2};
}

} // namespace

FermiChart2D::FermiChart2D(const RiemannianChart& chart, const NullGeodesic& ray, const FermiOptions& opt)
    : chart_(chart), opt_(opt), ttilde_(ray.time_offset)
{
    window_ = ray.window;
    const auto& sp = ray.spatial;
    if (sp.samples.empty()) throw ConstructionError("build_fermi_chart: empty spatial geodesic");
    const double eps = window_.eps;
    // table over y1 in [-margin, L + margin], L = tau_plus - tau_minus + 2 eps, built outwards
    // from the path start (y1 = eps - tau_minus) so the frame is exact inside M
    const double back = eps + margin_ - window_.tau_minus;
    const double len = window_.tau_plus - window_.tau_minus + 2.0 * eps + 2.0 * margin_;
    const int nb = std::max(4, int(std::ceil(back / 0.002)));
    dy_ = back / nb;
    const int nsteps = int(std::ceil(len / dy_));
    y_lo_ = -margin_;

    const Mat2 g0 = chart_.metric(sp.start_point);
    const Vec2 v0 = sp.start_velocity;
    const Vec2 e0 = orthonormal_complement(g0, v0);
    tx_.assign(nsteps + 1, Vec2::Zero());
    tv_ = tx_;
    te_ = tx_;
    BaseState s{sp.start_point, v0, e0};
    tx_[nb] = s.x;
    tv_[nb] = s.v;
    te_[nb] = s.e;
    for (int k = nb - 1; k >= 0; --k) {
        s = base_step(chart_, s, -dy_);
        tx_[k] = s.x;
        tv_[k] = s.v;
        te_[k] = s.e;
    }
    s = BaseState{sp.start_point, v0, e0};
    for (int k = nb + 1; k <= nsteps; ++k) {
        s = base_step(chart_, s, dy_);
        tx_[k] = s.x;
        tv_[k] = s.v;
        te_[k] = s.e;
    }

    // self-intersection of the base curve
    const int stride = 5;
    for (size_t i = 0; i < tx_.size(); i += stride)
        for (size_t j = i + stride; j < tx_.size(); j += stride) {
            if (double(j - i) * dy_ < 0.5) continue;
            if ((tx_[i] - tx_[j]).norm() < 1e-3)
                throw ConstructionError("build_fermi_chart: spatial geodesic self-intersects");
        }

    // largest admissible tube radius
    const double a = window_.a(), b = window_.b();
    std::string report;
    for (double cand : opt_.radius_candidates) {
        double worst = 0.0;
        bool ok = true;
        for (int i = 0; i <= 24 && ok; ++i) {
            const double sv = a + (b - a) * i / 24.0;
            for (int k = 0; k < 8 && ok; ++k) {
                const double th = 2.0 * kPi * k / 8.0;
                VecS z(3);
                z << sv, cand * std::cos(th), cand * std::sin(th);
                try {
                    const FermiPoint fp = from_fermi(z);
                    Eigen::JacobiSVD<MatS> svd(fp.jac);
                    const auto sv3 = svd.singularValues();
                    const double c = sv3[0] / sv3[2];
                    worst = std::max(worst, std::isfinite(c) ? c : 1e300);
                } catch (const Error&) {
                    ok = false;
                }
                if (worst >= opt_.max_condition) ok = false;
            }
        }
        if (ok) {
            delta_prime_ = cand;
            tube_cond_ = worst;
            return;
        }
        std::ostringstream os;
        os << " radius " << cand << ": condition " << worst << ";";
        report += os.str();
    }
    throw ConstructionError("build_fermi_chart: Jacobian degenerates inside every candidate tube, shrink delta'." +
                            report);
}

FermiChart2D::Base FermiChart2D::base(double y1) const
{
    const double u = (y1 - y_lo_) / dy_;
    if (u < -1e-9 || u > double(tx_.size() - 1) + 1e-9)
        throw DomainError("Fermi chart: longitudinal coordinate outside the ray table");
    const int k = std::clamp(int(std::floor(u)), 0, int(tx_.size()) - 2);
    const double dh = (u - k) * dy_;
    BaseState s{tx_[k], tv_[k], te_[k]};
    if (dh != 0.0) {
        s = base_step(chart_, s, 0.5 * dh);
        s = base_step(chart_, s, 0.5 * dh);
    }
    const Christoffel G = christoffel_from_jet(chart_.jet(s.x));
    return {s.x, s.v, s.e, contract_christoffel(G, s.v, s.e)};
}

std::pair<Vec2, Mat2> FermiChart2D::exp_map(double y1, double y2) const
{
    const Base bs = base(y1);
    ExpState s{bs.x, y2 * bs.e, bs.v, y2 * bs.de, Vec2::Zero(), bs.e};
    if (y2 != 0.0) {
        const double h = 1.0 / opt_.exp_steps;
        for (int k = 0; k < opt_.exp_steps; ++k) {
            const ExpState k1 = exp_rhs(chart_, s);
            const ExpState k2 = exp_rhs(chart_, exp_add(s, 0.5 * h, k1));
            const ExpState k3 = exp_rhs(chart_, exp_add(s, 0.5 * h, k2));
            const ExpState k4 = exp_rhs(chart_, exp_add(s, h, k3));
            s = exp_add(s, h / 6.0, k1);
            s = exp_add(s, h / 3.0, k2);
            s = exp_add(s, h / 3.0, k3);
            s = exp_add(s, h / 6.0, k4);
        }
    } else {
        s.X2 = bs.e;
    }
    Mat2 J;
    J.col(0) = s.X1;
    J.col(1) = s.X2;
    return {s.x, J};
}

FermiPoint FermiChart2D::from_fermi(const VecS& z) const
{
    const double a = window_.a();
    const double t = (z[0] - z[1]) / kSqrt2;
    const double y1 = (z[0] + z[1] - a) / kSqrt2;
    const auto [x, Jy] = exp_map(y1, z[2]);
    FermiPoint fp;
    fp.p.resize(3);
    fp.p << ttilde_ + t, x.x(), x.y();
    MatS dpdy = MatS::Zero(3, 3);
    dpdy(0, 0) = 1.0;
    dpdy.block(1, 1, 2, 2) = Jy;
    fp.jac = dpdy * fermi_linear_part(3);
    return fp;
}

VecS FermiChart2D::to_fermi(const VecS& p) const
{
    const double t = p[0] - ttilde_;
    const Vec2 x(p[1], p[2]);
    size_t best = 0;
    double bd = 1e300;
    for (size_t k = 0; k < tx_.size(); ++k) {
        const double d = (tx_[k] - x).squaredNorm();
        if (d < bd) { bd = d; best = k; }
    }
    const Vec2 dx = x - tx_[best];
    const Mat2 g = chart_.metric(tx_[best]);
    double y1 = y_lo_ + best * dy_ + dx.dot(g * tv_[best]);
    double y2 = dx.dot(g * te_[best]);
    bool done = false;
    for (int it = 0; it < 40; ++it) {
        const auto [xe, J] = exp_map(y1, y2);
        const Vec2 d = J.partialPivLu().solve(x - xe);
        y1 += d.x();
        y2 += d.y();
        if (d.norm() < 1e-14) { done = true; break; }
    }
    if (!done) {
        const auto [xe, J] = exp_map(y1, y2);
        if ((xe - x).norm() > 1e-11) throw AccuracyError("Fermi chart inversion did not converge");
    }
    const double a = window_.a();
    VecS z(3);
    z << (t + y1) / kSqrt2 + 0.5 * a, (-t + y1) / kSqrt2 + 0.5 * a, y2;
    return z;
}

MatS FermiChart2D::spacetime_metric(const VecS& p) const
{
    MatS G = MatS::Zero(3, 3);
    G(0, 0) = -1.0;
    G.block(1, 1, 2, 2) = chart_.metric(Vec2(p[1], p[2]));
    return G;
}

Vec2 FermiChart2D::gamma_point(double t) const
{
    return base(t - window_.tau_minus + window_.eps).x;
}

Vec2 FermiChart2D::gamma_velocity(double t) const
{
    return base(t - window_.tau_minus + window_.eps).v;
}

Mat2 FermiChart2D::frame(double t) const
{
    const Base b = base(t - window_.tau_minus + window_.eps);
    Mat2 F;
    F.col(0) = b.v;
    F.col(1) = b.e;
    return F;
}

// ---------------------------------------------------------------------------

FlatFermiChart1D::FlatFermiChart1D(double time_offset, double entry, int direction, RayWindow window,
                                   double tube_radius)
    : ttilde_(time_offset), entry_(entry), dir_(direction >= 0 ? 1 : -1)
{
    window_ = window;
    delta_prime_ = tube_radius;
}

FermiPoint FlatFermiChart1D::from_fermi(const VecS& z) const
{
    const double a = window_.a();
    const double t = (z[0] - z[1]) / kSqrt2;
    const double y1 = (z[0] + z[1] - a) / kSqrt2;
    FermiPoint fp;
    fp.p.resize(2);
    fp.p << ttilde_ + t, entry_ + dir_ * (y1 + window_.tau_minus - window_.eps);
    MatS dpdy = MatS::Zero(2, 2);
    dpdy(0, 0) = 1.0;
    dpdy(1, 1) = dir_;
    fp.jac = dpdy * fermi_linear_part(2);
    return fp;
}

VecS FlatFermiChart1D::to_fermi(const VecS& p) const
{
    const double a = window_.a();
    const double t = p[0] - ttilde_;
    const double y1 = dir_ * (p[1] - entry_) - window_.tau_minus + window_.eps;
    VecS z(2);
    z << (t + y1) / kSqrt2 + 0.5 * a, (-t + y1) / kSqrt2 + 0.5 * a;
    return z;
}

MatS FlatFermiChart1D::spacetime_metric(const VecS&) const
{
    MatS G = MatS::Identity(2, 2);
    G(0, 0) = -1.0;
    return G;
}

// ---------------------------------------------------------------------------

std::shared_ptr<FermiChart> build_fermi_chart(const RiemannianChart& chart, const NullGeodesic& ray,
                                              const FermiOptions& opt)
{
    return std::make_shared<FermiChart2D>(chart, ray, opt);
}

MatX curvature_D(const FermiChart& fc, double s, double h)
{
    if (!(h > 1e-7)) throw AccuracyError("curvature_D: finite-difference step underflow (h = " + std::to_string(h) + ")");
    const int n = fc.n();
    auto grr = [&](const VecS& dz) {
        VecS z = VecS::Zero(n + 1);
        z[0] = s;
        z.tail(n) = dz;
        const MatS gi = fc.metric_fermi(z).inverse();
        return gi(1, 1);
    };
    MatX D(n, n);
    const VecS zero = VecS::Zero(n);
    const double f0 = grr(zero);
    for (int i = 0; i < n; ++i) {
        VecS e = VecS::Zero(n);
        e[i] = h;
        D(i, i) = 0.25 * (grr(e) - 2.0 * f0 + grr(VecS(-e))) / (h * h);
        for (int j = 0; j < i; ++j) {
            VecS f = VecS::Zero(n);
            f[j] = h;
            const double v = (grr(VecS(e + f)) - grr(VecS(e - f)) - grr(VecS(f - e)) + grr(VecS(-e - f))) / (4.0 * h * h);
            D(i, j) = D(j, i) = 0.25 * v;
        }
    }
    return D;
}

MatX curvature_D_from_riemann(const FermiChart2D& fc, double s)
{
    const double t = s / kSqrt2;
    const Mat2 F = fc.frame(t);
    const Vec2 x = fc.gamma_point(t);
    const RiemannTensor R = riemann(fc.chart(), x);
    const Mat2 g = fc.chart().metric(x);
    // spatial parts of E_0 = d_s, E_1 = d_r, E_2 = e2
    const Vec2 P[3] = {F.col(0) / kSqrt2, F.col(0) / kSqrt2, F.col(1)};
    auto Rlow = [&](const Vec2& U, const Vec2& V, const Vec2& W, const Vec2& Z) {
        // <R(U,V)W, Z> = g_im R^i_{jkl} W^j U^k V^l Z^m
        Vec2 out = Vec2::Zero();
        for (int i = 0; i < 2; ++i) out[i] = W.dot(Vec2(U.dot(R[i][0] * V), U.dot(R[i][1] * V)));
        return out.dot(g * Z);
    };
    MatX D(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) D(i, j) = -0.5 * Rlow(P[0], P[i + 1], P[0], P[j + 1]);
    return D;
}

} // namespace lightray
