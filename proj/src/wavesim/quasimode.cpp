#include "lightray/wavesim/quasimode.hpp"

#include <numbers>

#include <exception>

namespace lightray {

SpaceTimeFunction beam_source(const GaussianBeam& beam, const CoefficientPair& coeffs)
{
    if (beam.variant != BeamVariant::Forward) throw PreconditionError("beam_source: needs a forward beam");
    const int n = beam.n();
    return [beam, coeffs, n](double t, const Vec2& x) -> cd {
        VecS p(n + 1);
        p[0] = t;
        p[1] = x.x();
        if (n == 2) p[2] = x.y();
        const VecS z = beam.fchart->to_fermi(p);
        const auto& w = beam.fchart->window();
        if (z.tail(n).norm() >= 0.5 * beam.delta() || z[0] < w.a() || z[0] > w.b()) return 0.0;
        return beam_residual(beam, coeffs, z).F;
    };
}

QuasimodeReport quasimode_check(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const GaussianBeam& beam,
                                const std::vector<double>& rho_ladder)
{
    if (beam.n() != grid.dim) throw PreconditionError("quasimode_check: beam and grid dimensions differ");
    for (double rho : rho_ladder)
        if (grid.hx > 1.0 / (20.0 * std::numbers::pi * rho))
            throw ResolutionError("quasimode_check: hx = " + std::to_string(grid.hx) + " does not resolve rho = " +
                                  std::to_string(rho) + " (need hx <= " +
                                  std::to_string(1.0 / (20.0 * std::numbers::pi * rho)) + ")");
    QuasimodeReport rep;
    rep.rows.resize(rho_ladder.size());
    const double vol = std::pow(grid.hx, grid.dim);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < int(rho_ladder.size()); ++i) {
        try {
            const double rho = rho_ladder[i];
            const SpaceTimeFunction F = beam_source(with_rho(beam, rho), coeffs);
            SolveOptions opt;
            opt.check_compatibility = false; // zero datum
            BoundaryDatum zero{[](double, const Vec2&) { return cd(0.0); }, "zero"};
            const WaveSolution R = solve_ibvp(grid, coeffs, zero, F, Direction::Forward, opt);
            QuasimodeRow row;
            row.rho = rho;
            double f2 = 0.0;
            for (int n = 0; n <= grid.steps; ++n)
                for (int k = 0; k < grid.nodes(); ++k) f2 += std::norm(F(grid.time(n), grid.node(k))) * vol * grid.dt;
            row.source_norm = std::sqrt(f2);
            row.R_l2 = R.l2_norm();
            row.R_h1_scaled = R.h1_norm() / rho;
            rep.rows[i] = row;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    rep.l2_decreasing = rep.h1_decreasing = true;
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        rep.l2_decreasing = rep.l2_decreasing && rep.rows[i].R_l2 < rep.rows[i - 1].R_l2;
        rep.h1_decreasing = rep.h1_decreasing && rep.rows[i].R_h1_scaled < rep.rows[i - 1].R_h1_scaled;
    }
    return rep;
}

ReductionIntegral reduction_integral(const WaveSolution& u1, const WaveSolution& u2, const CoefficientPair& diff)
{
    const SpaceTimeGrid& g = u1.grid;
    if (int(u1.u.size()) != g.steps + 1 || int(u2.u.size()) != g.steps + 1)
        throw PreconditionError("reduction_integral: solutions must store every time level");
    if (u2.grid.nodes() != g.nodes() || u2.grid.steps != g.steps)
        throw PreconditionError("reduction_integral: solutions live on different grids");
    const int np = g.per_side();
    const double vol = std::pow(g.hx, g.dim);
    ReductionIntegral out;
    for (int n = 0; n <= g.steps; ++n) {
        const double t = g.time(n);
        const double wt = (n == 0 || n == g.steps) ? 0.5 * g.dt : g.dt;
        for (int k = 0; k < g.nodes(); ++k) {
            const Vec2 x = g.node(k);
            cd ut;
            if (n == 0)
                ut = (-3.0 * u1.u[0][k] + 4.0 * u1.u[1][k] - u1.u[2][k]) / (2.0 * g.dt);
            else if (n == g.steps)
                ut = (3.0 * u1.u[n][k] - 4.0 * u1.u[n - 1][k] + u1.u[n - 2][k]) / (2.0 * g.dt);
            else
                ut = (u1.u[n + 1][k] - u1.u[n - 1][k]) / (2.0 * g.dt);
            // spatial derivatives, one-sided at the boundary
            auto dspace = [&](int stride, int idx, int last) -> cd {
                const VecXc& u = u1.u[n];
                if (idx == 0) return (-3.0 * u[k] + 4.0 * u[k + stride] - u[k + 2 * stride]) / (2.0 * g.hx);
                if (idx == last) return (3.0 * u[k] - 4.0 * u[k - stride] + u[k - 2 * stride]) / (2.0 * g.hx);
                return (u[k + stride] - u[k - stride]) / (2.0 * g.hx);
            };
            const int i = g.dim == 1 ? k : k % np;
            const cd ux = dspace(1, i, g.cells);
            const cd uy = g.dim == 2 ? dspace(np, k / np, g.cells) : cd(0.0);
            const Vec2c w = diff.eval_omega(t, x);
            const cd agrad = -diff.eval_b(t, x) * ut + w[0] * ux + (g.dim == 2 ? w[1] * uy : cd(0.0));
            const cd integrand = (agrad + diff.eval_q(t, x) * u1.u[n][k]) * u2.u[n][k];
            // trapezoid weights in space: halve on each boundary coordinate
            double ws = vol;
            if (i == 0 || i == g.cells) ws *= 0.5;
            if (g.dim == 2 && (k / np == 0 || k / np == g.cells)) ws *= 0.5;
            out.value += wt * ws * integrand;
            out.magnitude += wt * ws * std::abs(integrand);
        }
    }
    return out;
}

LimitCheck reduction_limit_check(const GaussianBeam& forward, const GaussianBeam& adjoint, const CoefficientPair& diff,
                                 int n_s, int n_z)
{
    if (forward.variant != BeamVariant::Forward || adjoint.variant != BeamVariant::Adjoint)
        throw PreconditionError("reduction_limit_check: needs a forward and an adjoint beam");
    if (forward.fchart != adjoint.fchart || forward.rho != adjoint.rho)
        throw PreconditionError("reduction_limit_check: beams must share chart and frequency");
    if (n_s < 5 || n_s % 2 == 0 || n_z < 5 || n_z % 2 == 0)
        throw PreconditionError("reduction_limit_check: node counts must be odd and at least 5");
    const FermiChart& fc = *forward.fchart;
    const int n = fc.n(), m = n + 1;
    const double rho = forward.rho;
    const auto& w = fc.window();
    const double hw = 0.5 * std::min(forward.delta(), adjoint.delta());
    const auto ws = simpson_weights(n_s, (w.b0() - w.a0()) / (n_s - 1));
    const auto wz = simpson_weights(n_z, 2.0 * hw / (n_z - 1));
    const int nzt = n == 1 ? n_z : n_z * n_z;

    LimitCheck out;
    out.rho = rho;
    for (int i = 0; i < n_s; ++i)
        for (int k = 0; k < nzt; ++k) {
            const int k1 = k % n_z, k2 = k / n_z;
            VecS z(m);
            z[0] = w.a0() + (w.b0() - w.a0()) * i / (n_s - 1);
            z[1] = -hw + 2.0 * hw * k1 / (n_z - 1);
            if (n == 2) z[2] = -hw + 2.0 * hw * k2 / (n_z - 1);
            if (z.tail(n).norm() >= hw) continue;
            const FermiPoint fp = fc.from_fermi(z);
            const VecS& p = fp.p;
            const double t = p[0];
            const Vec2 x(p[1], n == 2 ? p[2] : 0.0);
            const double wq = ws[i] * wz[k1] * (n == 2 ? wz[k2] : 1.0) * std::sqrt(std::abs(fc.metric_fermi(z).determinant()));

            // contravariant A: ginv (b, omega)
            const MatS ginv = fc.spacetime_metric(p).inverse();
            VecSc A(m);
            A[0] = diff.eval_b(t, x);
            const Vec2c om = diff.eval_omega(t, x);
            for (int j = 0; j < n; ++j) A[1 + j] = om[j];
            const VecSc Aup = ginv.cast<cd>() * A;

            const BeamValue u1 = evaluate_beam(forward, p);
            const BeamValue u2 = evaluate_beam(adjoint, p);
            const cd a_grad = (Aup.transpose() * u1.grad)(0);
            out.lhs += wq * (a_grad + diff.eval_q(t, x) * u1.u) * u2.u / rho;

            const BeamLocal L1 = beam_local(forward, z);
            const BeamLocal L2 = beam_local(adjoint, z);
            // d phi in (t, x) from d phi / dz through the Jacobian of the Fermi map
            const VecSc dphi = fp.jac.transpose().cast<cd>().fullPivLu().solve(L1.dpsi);
            const cd a_dphi = (Aup.transpose() * dphi)(0);
            out.rhs += wq * kI * a_dphi * std::exp(kI * rho * (L1.psi + L2.psi)) * L1.W * L2.W;
        }
    return out;
}

} // namespace lightray
