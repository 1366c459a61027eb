#pragma once

#include "lightray/transforms/coefficients.hpp"

#include <iosfwd>

namespace lightray {

/// Uniform grid on an interval (dim 1) or a square (dim 2) with time step dt over [0, T].
/// Space points are Vec2 with a zero second entry in one dimension.
struct SpaceTimeGrid {
    int dim = 1;
    Vec2 lo = Vec2::Zero(), hi = Vec2(1.0, 0.0);
    int cells = 64; ///< cells per side
    double hx = 1.0 / 64;
    double dt = 0.5 / 64;
    double T = 1.0;
    int steps = 128;

    /// dt = cfl * hx rounded down so that steps * dt = T.
    static SpaceTimeGrid interval(double a, double b, int cells, double T, double cfl = 0.5);
    static SpaceTimeGrid square(const Vec2& lo, const Vec2& hi, int cells, double T, double cfl = 0.5);
    /// Throws ConfigError unless dt <= 0.5 hx (unit wave speed) and the sizes are positive.
    void validate() const;

    int per_side() const { return cells + 1; }
    int nodes() const { return dim == 1 ? cells + 1 : (cells + 1) * (cells + 1); }
    Vec2 node(int k) const;
    double time(int n) const { return n * dt; }
    /// Boundary nodes in a fixed order; for the square counterclockwise from lo.
    const std::vector<int>& boundary() const;
    /// Arc length parameter of a boundary node (0 or 1 on the interval ends).
    double boundary_param(int k) const;
    /// Outward unit normal at a boundary node (corner nodes use the x-side normal).
    Vec2 normal(int k) const;
    bool on_boundary(int k) const;

private:
    mutable std::vector<int> boundary_;
};

using SpaceTimeFunction = std::function<cd(double t, const Vec2& x)>;

/// Dirichlet datum h(t, x) on the lateral boundary; zero initial data is assumed.
struct BoundaryDatum {
    SpaceTimeFunction h;
    std::string name;

    cd operator()(double t, const Vec2& x) const { return h ? h(t, x) : cd(0.0); }
    /// Throws PreconditionError unless |h(0)| <= 1e-12 and |h(eps)| <= 1e-12 + 1e-3 eps at every boundary node,
    /// which catches a nonzero d_t h(0).
    void check_compatibility(const SpaceTimeGrid& grid) const;
};

enum class Direction { Forward, Backward };

struct SolveOptions {
    int store_stride = 1;        ///< keep every stride-th time level
    bool check_compatibility = true;
    double blowup_ratio = 10.0;  ///< energy growth per step that counts towards the detector
    int blowup_steps = 20;       ///< consecutive growing steps that raise InstabilityError
};

/// Solution levels and the normal derivative on the boundary at every time level.
struct WaveSolution {
    SpaceTimeGrid grid;
    Direction direction = Direction::Forward;
    std::vector<double> t;      ///< stored times
    std::vector<VecXc> u;       ///< stored levels, all nodes
    MatXc dnu;                  ///< d_nu u, rows time levels 0..steps, cols boundary nodes
    std::vector<double> energy; ///< discrete energy per step

    /// L2 norm over [0,T] x M from the stored levels (trapezoid in t).
    double l2_norm() const;
    /// H1 norm over [0,T] x M from the stored levels (needs stride 1).
    double h1_norm() const;
};

/// Leapfrog for d_t^2 u - Delta u - b d_t u + omega . grad u + q u = F (the operator
/// -Delta_gbar + A grad_gbar + q with gbar = -dt^2 + g and A = b dt + omega).
/// Forward: zero data at t = 0. Backward: zero data at t = T, solved in reversed time.
WaveSolution solve_ibvp(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const BoundaryDatum& datum,
                        const SpaceTimeFunction& source, Direction direction = Direction::Forward,
                        const SolveOptions& opt = {});

/// Lambda h = d_nu u - (A nu) u / 2 on (0,T) x boundary, rows time levels.
struct DNSample {
    std::vector<double> t;
    std::vector<double> param; ///< boundary parameter per column
    MatXc values;

    double norm() const; ///< discrete L2 over (0,T) x boundary
};

DNSample dn_map(const WaveSolution& sol, const CoefficientPair& coeffs, const BoundaryDatum& datum);
/// Solves and extracts in one call.
DNSample dn_map(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const BoundaryDatum& datum);

/// CSV "t,x1[,x2],Re_u,Im_u" over the stored levels.
void write_field_csv(const WaveSolution& sol, std::ostream& out);
/// CSV "t,boundary_param,Re,Im".
void write_dn_csv(const DNSample& dn, std::ostream& out);

} // namespace lightray
