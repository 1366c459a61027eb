#include "lightray/transforms/phantoms.hpp"

#include <algorithm>
#include <cmath>

namespace lightray {

Smooth3 poly_bump(double u)
{
    if (std::abs(u) >= 1.0) return {0.0, 0.0, 0.0};
    const double w = 1.0 - u * u;
    const double w4 = w * w * w * w;
    return {w4 * w * w, -12.0 * u * w4 * w, -12.0 * w4 * w + 120.0 * u * u * w4};
}

namespace {

struct Parts {
    Smooth3 T, S;
    Vec2 e;       ///< unit radial direction
    double rho;   ///< |x - c|
};

Parts parts(const SpaceTimeBump& b, double t, const Vec2& x)
{
    Parts p;
    p.T = poly_bump((t - b.t0) / b.tau);
    const Vec2 d = x - b.c;
    p.rho = d.norm();
    p.S = poly_bump(p.rho / b.r);
    p.e = p.rho > 0.0 ? Vec2(d / p.rho) : Vec2(Vec2::Zero());
    return p;
}

/// Spatial gradient and Hessian of P(|x - c|/r). P is even with P'(0) = 0, so the radial
/// formula is regular at the center where P''(0)/r^2 I is used.
void spatial(const SpaceTimeBump& b, const Parts& p, Vec2& g, Mat2& H)
{
    g = p.S.d1 / b.r * p.e;
    if (p.rho < 1e-12) {
        H = p.S.d2 / (b.r * b.r) * Mat2::Identity();
        return;
    }
    H = p.S.d2 / (b.r * b.r) * p.e * p.e.transpose() + p.S.d1 / (b.r * p.rho) * (Mat2::Identity() - p.e * p.e.transpose());
}

} // namespace

double BumpField::value(double t, const Vec2& x) const
{
    double s = 0.0;
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        s += b.a * p.T.v * p.S.v;
    }
    return s;
}

double BumpField::dt(double t, const Vec2& x) const
{
    double s = 0.0;
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        s += b.a * p.T.d1 / b.tau * p.S.v;
    }
    return s;
}

double BumpField::dtt(double t, const Vec2& x) const
{
    double s = 0.0;
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        s += b.a * p.T.d2 / (b.tau * b.tau) * p.S.v;
    }
    return s;
}

Vec2 BumpField::grad(double t, const Vec2& x) const
{
    Vec2 s = Vec2::Zero();
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        Vec2 g;
        Mat2 H;
        spatial(b, p, g, H);
        s += b.a * p.T.v * g;
    }
    return s;
}

Mat2 BumpField::hess(double t, const Vec2& x) const
{
    Mat2 s = Mat2::Zero();
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        Vec2 g;
        Mat2 H;
        spatial(b, p, g, H);
        s += b.a * p.T.v * H;
    }
    return s;
}

Vec2 BumpField::dt_grad(double t, const Vec2& x) const
{
    Vec2 s = Vec2::Zero();
    for (const auto& b : terms) {
        const Parts p = parts(b, t, x);
        Vec2 g;
        Mat2 H;
        spatial(b, p, g, H);
        s += b.a * p.T.d1 / b.tau * g;
    }
    return s;
}

SupportBox BumpField::support() const
{
    SupportBox box;
    if (terms.empty()) {
        box.t_lo = 0.0;
        box.t_hi = -1.0;
        return box;
    }
    box.t_lo = box.x_lo.x() = box.x_lo.y() = 1e300;
    box.t_hi = box.x_hi.x() = box.x_hi.y() = -1e300;
    for (const auto& b : terms) {
        box.t_lo = std::min(box.t_lo, b.t0 - b.tau);
        box.t_hi = std::max(box.t_hi, b.t0 + b.tau);
        box.x_lo = box.x_lo.cwiseMin(b.c - Vec2::Constant(b.r));
        box.x_hi = box.x_hi.cwiseMax(b.c + Vec2::Constant(b.r));
    }
    return box;
}

BumpField random_bump_field(std::mt19937& rng, int n_terms, double R, double t_lo, double t_hi)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    BumpField f;
    for (int k = 0; k < n_terms; ++k) {
        SpaceTimeBump b;
        b.a = 2.0 * U(rng) - 1.0;
        b.r = 0.2 + 0.3 * U(rng) * R;
        b.r = std::min(b.r, 0.8 * R);
        const double rc = (R - b.r) * std::sqrt(U(rng)) * 0.95;
        const double th = 2.0 * kPi * U(rng);
        b.c = rc * Vec2(std::cos(th), std::sin(th));
        b.tau = (0.1 + 0.3 * U(rng)) * (t_hi - t_lo);
        b.t0 = t_lo + b.tau + (t_hi - t_lo - 2.0 * b.tau) * U(rng);
        f.terms.push_back(b);
    }
    return f;
}

CoefficientPair gauge_oneform(const BumpField& psi)
{
    CoefficientPair c;
    c.b = [psi](double t, const Vec2& x) { return cd(psi.dt(t, x)); };
    c.omega = [psi](double t, const Vec2& x) { return Vec2c(psi.grad(t, x).cast<cd>()); };
    c.support = psi.support();
    return c;
}

Smooth3 time_window(double t, double t1, double t2, double ramp)
{
    if (!(t2 - t1 >= 2.0 * ramp) || !(ramp > 0.0)) throw PreconditionError("time_window: need t2 - t1 >= 2 ramp > 0");
    if (t <= t1 || t >= t2) return {0.0, 0.0, 0.0};
    if (t < t1 + ramp) {
        const Smooth3 s = smoothstep5((t - t1) / ramp);
        return {s.v, s.d1 / ramp, s.d2 / (ramp * ramp)};
    }
    if (t > t2 - ramp) {
        const Smooth3 s = smoothstep5((t2 - t) / ramp);
        return {s.v, -s.d1 / ramp, s.d2 / (ramp * ramp)};
    }
    return {1.0, 0.0, 0.0};
}

} // namespace lightray
