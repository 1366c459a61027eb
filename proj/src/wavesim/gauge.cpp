#include "lightray/wavesim/gauge.hpp"

#include <exception>

namespace lightray {

namespace {

SupportBox hull(const SupportBox& a, const SupportBox& b)
{
    SupportBox s;
    s.t_lo = std::min(a.t_lo, b.t_lo);
    s.t_hi = std::max(a.t_hi, b.t_hi);
    s.x_lo = a.x_lo.cwiseMin(b.x_lo);
    s.x_hi = a.x_hi.cwiseMax(b.x_hi);
    return s;
}

} // namespace

CoefficientPair gauge_transform(const CoefficientPair& c2, const BumpField& psi, const SpaceTimeGrid& grid)
{
    const int checks = std::min(grid.steps, 400);
    for (int n = 0; n <= checks; ++n) {
        const double t = grid.T * n / checks;
        for (int k : grid.boundary()) {
            const double v = psi.value(t, grid.node(k));
            if (std::abs(v) > 1e-12)
                throw PreconditionError("gauge_transform: psi = " + std::to_string(v) + " on the boundary at t = " +
                                        std::to_string(t) + ", parameter " + std::to_string(grid.boundary_param(k)));
        }
    }
    if (psi.terms.empty()) return c2;

    const bool one_d = grid.dim == 1;
    // in one space dimension only the first spatial component is active
    auto spatial_grad = [one_d](const BumpField& p, double t, const Vec2& x) {
        Vec2 g = p.grad(t, x);
        if (one_d) g.y() = 0.0;
        return g;
    };
    auto laplacian = [one_d](const BumpField& p, double t, const Vec2& x) {
        const Mat2 H = p.hess(t, x);
        return one_d ? H(0, 0) : H.trace();
    };

    CoefficientPair c1;
    c1.support = (c2.q || c2.b || c2.omega) ? hull(c2.support, psi.support()) : psi.support();
    c1.b = [c2, psi](double t, const Vec2& x) { return c2.eval_b(t, x) + 2.0 * psi.dt(t, x); };
    c1.omega = [c2, psi, spatial_grad](double t, const Vec2& x) {
        return Vec2c(c2.eval_omega(t, x) + 2.0 * spatial_grad(psi, t, x).cast<cd>());
    };
    c1.q = [c2, psi, spatial_grad, laplacian](double t, const Vec2& x) {
        const double pt = psi.dt(t, x);
        const Vec2 gx = spatial_grad(psi, t, x);
        const double box = -psi.dtt(t, x) + laplacian(psi, t, x);
        const Vec2c w2 = c2.eval_omega(t, x);
        const cd a_grad = -c2.eval_b(t, x) * pt + w2[0] * gx.x() + w2[1] * gx.y();
        const double grad2 = -pt * pt + gx.squaredNorm();
        return c2.eval_q(t, x) + box - a_grad - grad2;
    };
    return c1;
}

GaugeReport verify_gauge_invariance(const SpaceTimeGrid& grid, const CoefficientPair& c2, const BumpField& psi,
                                    const std::vector<BoundaryDatum>& data)
{
    const CoefficientPair c1 = gauge_transform(c2, psi, grid);
    SolveOptions opt;
    opt.store_stride = std::max(1, grid.steps / 100);
    GaugeReport rep;
    rep.data.resize(data.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int d = 0; d < int(data.size()); ++d) {
        try {
            const WaveSolution u1 = solve_ibvp(grid, c1, data[d], {}, Direction::Forward, opt);
            const WaveSolution u2 = solve_ibvp(grid, c2, data[d], {}, Direction::Forward, opt);
            const DNSample l1 = dn_map(u1, c1, data[d]);
            const DNSample l2 = dn_map(u2, c2, data[d]);
            GaugeDatumResult r;
            r.name = data[d].name;
            r.dn_norm = l1.norm();
            DNSample diff = l1;
            diff.values -= l2.values;
            r.dn_rel_error = r.dn_norm > 0.0 ? diff.norm() / r.dn_norm : diff.norm();
            double num = 0.0, den = 0.0;
            for (size_t n = 0; n < u1.u.size(); ++n)
                for (int k = 0; k < grid.nodes(); ++k) {
                    const cd conj = std::exp(psi.value(u1.t[n], grid.node(k))) * u2.u[n][k];
                    num += std::norm(u1.u[n][k] - conj);
                    den += std::norm(u1.u[n][k]);
                }
            r.conjugation_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
            rep.data[d] = r;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& r : rep.data) {
        rep.max_dn_error = std::max(rep.max_dn_error, r.dn_rel_error);
        rep.max_conjugation_error = std::max(rep.max_conjugation_error, r.conjugation_error);
    }
    return rep;
}

} // namespace lightray
