#pragma once

#include "lightray/transforms/coefficients.hpp"

#include <random>

namespace lightray {

/// P(u) = (1 - u^2)^6 for |u| < 1, zero otherwise, with two derivatives.
Smooth3 poly_bump(double u);

/// a * P((t - t0)/tau) * P(|x - c|/r).
struct SpaceTimeBump {
    double a = 1.0;
    double t0 = 0.0, tau = 1.0;
    Vec2 c = Vec2::Zero();
    double r = 0.5;
};

/// Sum of space-time bumps with analytic first and second derivatives.
struct BumpField {
    std::vector<SpaceTimeBump> terms;

    double value(double t, const Vec2& x) const;
    double dt(double t, const Vec2& x) const;
    double dtt(double t, const Vec2& x) const;
    Vec2 grad(double t, const Vec2& x) const;
    Mat2 hess(double t, const Vec2& x) const;
    Vec2 dt_grad(double t, const Vec2& x) const;

    /// Bounding box of the union of supports.
    SupportBox support() const;
};

/// Random bumps with centers inside a disk of radius R - r and times inside (t_lo + tau, t_hi - tau),
/// so the field vanishes on the space-time boundary of [t_lo, t_hi] x disk(R).
BumpField random_bump_field(std::mt19937& rng, int n_terms, double R, double t_lo, double t_hi);

/// The exact one-form A = d psi = psi_t dt + grad psi (no scalar part).
CoefficientPair gauge_oneform(const BumpField& psi);

/// Smooth time window equal to 1 on [t1 + ramp, t2 - ramp] and 0 outside (t1, t2).
Smooth3 time_window(double t, double t1, double t2, double ramp);

} // namespace lightray
