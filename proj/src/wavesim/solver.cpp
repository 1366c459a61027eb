#include "lightray/wavesim/solver.hpp"

#include <iomanip>
#include <ostream>

namespace lightray {

// ---------------------------------------------------------------- grid

namespace {

SpaceTimeGrid make_grid(int dim, const Vec2& lo, const Vec2& hi, int cells, double T, double cfl)
{
    if (cells < 4) throw ConfigError("SpaceTimeGrid: need at least 4 cells");
    if (!(T > 0.0)) throw ConfigError("SpaceTimeGrid: T must be positive");
    SpaceTimeGrid g;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    g.cells = cells;
    g.hx = (hi.x() - lo.x()) / cells;
    g.T = T;
    g.steps = int(std::ceil(T / (cfl * g.hx) - 1e-9));
    g.dt = T / g.steps;
    g.validate();
    return g;
}

} // namespace

SpaceTimeGrid SpaceTimeGrid::interval(double a, double b, int cells, double T, double cfl)
{
    if (!(b > a)) throw ConfigError("SpaceTimeGrid::interval: empty interval");
    return make_grid(1, Vec2(a, 0.0), Vec2(b, 0.0), cells, T, cfl);
}

SpaceTimeGrid SpaceTimeGrid::square(const Vec2& lo, const Vec2& hi, int cells, double T, double cfl)
{
    if (std::abs((hi.x() - lo.x()) - (hi.y() - lo.y())) > 1e-12 || !(hi.x() > lo.x()))
        throw ConfigError("SpaceTimeGrid::square: sides must be equal and positive");
    return make_grid(2, lo, hi, cells, T, cfl);
}

void SpaceTimeGrid::validate() const
{
    if (dim != 1 && dim != 2) throw ConfigError("SpaceTimeGrid: dim must be 1 or 2");
    if (cells < 4 || steps < 1 || !(hx > 0.0) || !(dt > 0.0)) throw ConfigError("SpaceTimeGrid: nonpositive sizes");
    // unit wave speed for the Euclidean metric, so sqrt(lambda_max g^{-1}) = 1
    if (dt > 0.5 * hx * (1.0 + 1e-12))
        throw ConfigError("SpaceTimeGrid: CFL violated, dt = " + std::to_string(dt) + " > 0.5 hx = " +
                          std::to_string(0.5 * hx));
    if (std::abs(steps * dt - T) > 1e-9 * T) throw ConfigError("SpaceTimeGrid: steps * dt must equal T");
}

Vec2 SpaceTimeGrid::node(int k) const
{
    if (dim == 1) return Vec2(lo.x() + k * hx, 0.0);
    const int n = per_side();
    return Vec2(lo.x() + (k % n) * hx, lo.y() + (k / n) * hx);
}

const std::vector<int>& SpaceTimeGrid::boundary() const
{
    if (!boundary_.empty()) return boundary_;
    if (dim == 1) {
        boundary_ = {0, cells};
        return boundary_;
    }
    const int n = per_side(), N = cells;
    for (int i = 0; i <= N; ++i) boundary_.push_back(i);
    for (int j = 1; j <= N; ++j) boundary_.push_back(N + n * j);
    for (int i = N - 1; i >= 0; --i) boundary_.push_back(i + n * N);
    for (int j = N - 1; j >= 1; --j) boundary_.push_back(n * j);
    return boundary_;
}

bool SpaceTimeGrid::on_boundary(int k) const
{
    if (dim == 1) return k == 0 || k == cells;
    const int n = per_side(), i = k % n, j = k / n;
    return i == 0 || j == 0 || i == cells || j == cells;
}

double SpaceTimeGrid::boundary_param(int k) const
{
    if (dim == 1) return k == 0 ? 0.0 : 1.0;
    const int n = per_side(), i = k % n, j = k / n, N = cells;
    const double side = hi.x() - lo.x();
    if (j == 0) return i * hx;
    if (i == N) return side + j * hx;
    if (j == N) return 2.0 * side + (N - i) * hx;
    return 3.0 * side + (N - j) * hx;
}

Vec2 SpaceTimeGrid::normal(int k) const
{
    if (dim == 1) return Vec2(k == 0 ? -1.0 : 1.0, 0.0);
    const int n = per_side(), i = k % n, j = k / n;
    if (i == 0) return Vec2(-1.0, 0.0);
    if (i == cells) return Vec2(1.0, 0.0);
    return Vec2(0.0, j == 0 ? -1.0 : 1.0);
}

void BoundaryDatum::check_compatibility(const SpaceTimeGrid& grid) const
{
    const double eps = 1e-4;
    for (int k : grid.boundary()) {
        const Vec2 x = grid.node(k);
        if (std::abs((*this)(0.0, x)) > 1e-12)
            throw PreconditionError("BoundaryDatum '" + name + "': h(0) != 0 at boundary parameter " +
                                    std::to_string(grid.boundary_param(k)));
        if (std::abs((*this)(eps, x)) > 1e-12 + 1e-3 * eps)
            throw PreconditionError("BoundaryDatum '" + name + "': d_t h(0) != 0 at boundary parameter " +
                                    std::to_string(grid.boundary_param(k)));
    }
}

// ---------------------------------------------------------------- solver

namespace {

/// Normal derivative by the one-sided second order stencil along the inward normal.
cd normal_derivative(const SpaceTimeGrid& g, const VecXc& u, int k)
{
    const Vec2 nu = g.normal(k);
    int step;
    if (g.dim == 1)
        step = nu.x() < 0.0 ? 1 : -1;
    else if (nu.x() != 0.0)
        step = nu.x() < 0.0 ? 1 : -1;
    else
        step = nu.y() < 0.0 ? g.per_side() : -g.per_side();
    // d/dn = -(d/d inward)
    return -(-3.0 * u[k] + 4.0 * u[k + step] - u[k + 2 * step]) / (2.0 * g.hx);
}

double energy_of(const SpaceTimeGrid& g, const VecXc& un, const VecXc& up)
{
    // leapfrog energy with the gradient cross term between consecutive levels; it is
    // conserved exactly for the free equation and positive under the CFL bound
    double e = (up - un).squaredNorm() / (g.dt * g.dt);
    const double vol = std::pow(g.hx, g.dim);
    auto edge = [&](int a, int b) { return std::real((up[b] - up[a]) * std::conj(un[b] - un[a])) / (g.hx * g.hx); };
    if (g.dim == 1) {
        for (int k = 0; k < g.cells; ++k) e += edge(k, k + 1);
    } else {
        const int n = g.per_side();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = i + n * j;
                if (i + 1 < n) e += edge(k, k + 1);
                if (j + 1 < n) e += edge(k, k + n);
            }
    }
    return e * vol;
}

} // namespace

WaveSolution solve_ibvp(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const BoundaryDatum& datum,
                        const SpaceTimeFunction& source, Direction direction, const SolveOptions& opt)
{
    grid.validate();
    if (opt.store_stride < 1) throw ConfigError("solve_ibvp: store_stride must be positive");
    const bool backward = direction == Direction::Backward;
    // backward problems are solved in s = T - t, which flips the sign of the d_t term
    auto tt = [&](int n) { return backward ? grid.T - grid.time(n) : grid.time(n); };
    if (opt.check_compatibility) {
        BoundaryDatum d = datum;
        if (backward) d.h = [&](double s, const Vec2& x) { return datum(grid.T - s, x); };
        d.check_compatibility(grid);
    }

    const int N = grid.nodes();
    const int np = grid.per_side();
    const double dt = grid.dt, h2 = grid.hx * grid.hx;
    const double bsign = backward ? -1.0 : 1.0;
    const bool has_b = bool(coeffs.b), has_w = bool(coeffs.omega), has_q = bool(coeffs.q);
    const std::vector<int>& bnd = grid.boundary();
    std::vector<char> is_bnd(N, 0);
    for (int k : bnd) is_bnd[k] = 1;
    std::vector<Vec2> X(N);
    for (int k = 0; k < N; ++k) X[k] = grid.node(k);

    WaveSolution sol;
    sol.grid = grid;
    sol.direction = direction;
    sol.dnu = MatXc::Zero(grid.steps + 1, Eigen::Index(bnd.size()));

    VecXc prev = VecXc::Zero(N), cur = VecXc::Zero(N), next(N);
    auto store = [&](int n, const VecXc& u) {
        for (size_t c = 0; c < bnd.size(); ++c) sol.dnu(n, Eigen::Index(c)) = normal_derivative(grid, u, bnd[c]);
        if (n % opt.store_stride == 0 || n == grid.steps) {
            sol.t.push_back(grid.time(n));
            sol.u.push_back(u);
        }
    };
    auto rhs_source = [&](double t, int k) { return source ? source(t, X[k]) : cd(0.0); };

    store(0, cur);
    // first level from the Taylor expansion with zero Cauchy data
    {
        const double t0 = tt(0), t1 = tt(1);
        for (int k = 0; k < N; ++k) next[k] = is_bnd[k] ? datum(t1, X[k]) : 0.5 * dt * dt * rhs_source(t0, k);
        prev = cur;
        cur = next;
        store(1, cur);
    }
    int growing = 0;
    double e_prev = energy_of(grid, prev, cur);
    sol.energy.push_back(e_prev);
    for (int n = 1; n < grid.steps; ++n) {
        const double t = tt(n), tn = tt(n + 1);
        for (int k = 0; k < N; ++k) {
            if (is_bnd[k]) {
                next[k] = datum(tn, X[k]);
                continue;
            }
            cd lap, gx, gy = 0.0;
            if (grid.dim == 1) {
                lap = (cur[k + 1] - 2.0 * cur[k] + cur[k - 1]) / h2;
                gx = (cur[k + 1] - cur[k - 1]) / (2.0 * grid.hx);
            } else {
                lap = (cur[k + 1] + cur[k - 1] + cur[k + np] + cur[k - np] - 4.0 * cur[k]) / h2;
                gx = (cur[k + 1] - cur[k - 1]) / (2.0 * grid.hx);
                gy = (cur[k + np] - cur[k - np]) / (2.0 * grid.hx);
            }
            cd rhs = rhs_source(t, k) + (2.0 * cur[k] - prev[k]) / (dt * dt) + lap;
            cd b = 0.0;
            if (has_b) b = bsign * coeffs.eval_b(t, X[k]);
            if (has_w) {
                const Vec2c w = coeffs.eval_omega(t, X[k]);
                rhs -= w[0] * gx + (grid.dim == 2 ? w[1] * gy : cd(0.0));
            }
            if (has_q) rhs -= coeffs.eval_q(t, X[k]) * cur[k];
            rhs -= b * prev[k] / (2.0 * dt);
            next[k] = rhs / (1.0 / (dt * dt) - b / (2.0 * dt));
        }
        prev.swap(cur);
        cur.swap(next);
        store(n + 1, cur);

        const double e = energy_of(grid, prev, cur);
        if (!std::isfinite(e)) throw InstabilityError("solve_ibvp: non-finite solution at step " + std::to_string(n + 1));
        sol.energy.push_back(e);
        growing = (n > 10 && e > opt.blowup_ratio * e_prev && e_prev > 0.0) ? growing + 1 : 0;
        if (growing >= opt.blowup_steps)
            throw InstabilityError("solve_ibvp: energy grew more than " + std::to_string(opt.blowup_ratio) + "x for " +
                                   std::to_string(opt.blowup_steps) + " consecutive steps");
        e_prev = e;
    }

    if (backward) {
        std::reverse(sol.u.begin(), sol.u.end());
        for (double& x : sol.t) x = grid.T - x;
        std::reverse(sol.t.begin(), sol.t.end());
        sol.dnu = sol.dnu.colwise().reverse().eval();
        std::reverse(sol.energy.begin(), sol.energy.end());
    }
    return sol;
}

double WaveSolution::l2_norm() const
{
    if (u.size() < 2) return 0.0;
    const double vol = std::pow(grid.hx, grid.dim);
    double s = 0.0;
    for (size_t n = 0; n < u.size(); ++n) {
        const double w = (n == 0 || n + 1 == u.size()) ? 0.5 : 1.0;
        const double dtn = n + 1 < u.size() ? t[n + 1] - t[n] : t[n] - t[n - 1];
        s += w * dtn * u[n].squaredNorm() * vol;
    }
    return std::sqrt(s);
}

double WaveSolution::h1_norm() const
{
    if (int(u.size()) != grid.steps + 1) throw PreconditionError("h1_norm: needs every time level (stride 1)");
    const double vol = std::pow(grid.hx, grid.dim);
    double s = 0.0;
    for (size_t n = 0; n + 1 < u.size(); ++n) {
        const VecXc mid = 0.5 * (u[n] + u[n + 1]);
        s += ((u[n + 1] - u[n]).squaredNorm() / (grid.dt * grid.dt) + mid.squaredNorm()) * vol * grid.dt;
        s += energy_of(grid, mid, mid) * grid.dt;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------- DN map

DNSample dn_map(const WaveSolution& sol, const CoefficientPair& coeffs, const BoundaryDatum& datum)
{
    const SpaceTimeGrid& g = sol.grid;
    const std::vector<int>& bnd = g.boundary();
    DNSample dn;
    dn.values = sol.dnu;
    for (int n = 0; n <= g.steps; ++n) dn.t.push_back(g.time(n));
    for (int k : bnd) dn.param.push_back(g.boundary_param(k));
    for (int n = 0; n <= g.steps; ++n)
        for (size_t c = 0; c < bnd.size(); ++c) {
            const Vec2 x = g.node(bnd[c]), nu = g.normal(bnd[c]);
            const Vec2c w = coeffs.eval_omega(dn.t[n], x);
            const cd a_nu = w[0] * nu.x() + (g.dim == 2 ? w[1] * nu.y() : cd(0.0));
            dn.values(n, Eigen::Index(c)) -= 0.5 * a_nu * datum(dn.t[n], x);
        }
    return dn;
}

DNSample dn_map(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const BoundaryDatum& datum)
{
    SolveOptions opt;
    opt.store_stride = grid.steps;
    return dn_map(solve_ibvp(grid, coeffs, datum, {}, Direction::Forward, opt), coeffs, datum);
}

double DNSample::norm() const
{
    if (t.size() < 2) return 0.0;
    const double dt = t[1] - t[0];
    double ds = 1.0;
    if (param.size() > 2) ds = param[1] - param[0];
    return std::sqrt(values.squaredNorm() * dt * ds);
}

void write_field_csv(const WaveSolution& sol, std::ostream& out)
{
    const SpaceTimeGrid& g = sol.grid;
    out << (g.dim == 1 ? "t,x1,Re_u,Im_u\n" : "t,x1,x2,Re_u,Im_u\n") << std::setprecision(12);
    for (size_t n = 0; n < sol.u.size(); ++n)
        for (int k = 0; k < g.nodes(); ++k) {
            const Vec2 x = g.node(k);
            out << sol.t[n] << ',' << x.x();
            if (g.dim == 2) out << ',' << x.y();
            out << ',' << sol.u[n][k].real() << ',' << sol.u[n][k].imag() << '\n';
        }
}

void write_dn_csv(const DNSample& dn, std::ostream& out)
{
    out << "t,boundary_param,Re,Im\n" << std::setprecision(12);
    for (Eigen::Index n = 0; n < dn.values.rows(); ++n)
        for (Eigen::Index c = 0; c < dn.values.cols(); ++c)
            out << dn.t[n] << ',' << dn.param[c] << ',' << dn.values(n, c).real() << ',' << dn.values(n, c).imag() << '\n';
}

} // namespace lightray
