#pragma once

#include "lightray/common.hpp"

#include <functional>

namespace lightray {

/// Axis-aligned space-time box outside of which the coefficients vanish.
struct SupportBox {
    double t_lo = -1e300, t_hi = 1e300;
    Vec2 x_lo = Vec2::Constant(-1e300), x_hi = Vec2::Constant(1e300);

    bool contains(double t, const Vec2& x) const
    {
        return t >= t_lo && t <= t_hi && x.x() >= x_lo.x() && x.x() <= x_hi.x() && x.y() >= x_lo.y() &&
               x.y() <= x_hi.y();
    }
};

using ScalarField = std::function<cd(double t, const Vec2& x)>;
using OneFormField = std::function<Vec2c(double t, const Vec2& x)>;

/// Scalar potential q and one-form A = b dt + omega on [0,T] x M. Empty callbacks
/// are zero. In one space dimension only the first component of x and omega is used.
struct CoefficientPair {
    ScalarField q;
    ScalarField b;
    OneFormField omega;
    SupportBox support;

    cd eval_q(double t, const Vec2& x) const { return q && support.contains(t, x) ? q(t, x) : cd(0.0); }
    cd eval_b(double t, const Vec2& x) const { return b && support.contains(t, x) ? b(t, x) : cd(0.0); }
    Vec2c eval_omega(double t, const Vec2& x) const
    {
        return omega && support.contains(t, x) ? omega(t, x) : Vec2c(Vec2c::Zero());
    }
    bool has_oneform() const { return bool(b) || bool(omega); }
};

} // namespace lightray
