#include "lightray/inversion/xray_solver.hpp"

#include <random>

namespace lightray {

namespace {

using Trip = Eigen::Triplet<double>;

double power_norm2(const XrayProjector& A)
{
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    MatX x(A.blocks() * A.unknowns(), 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
    x /= x.norm();
    double est = 0.0;
    for (int it = 0; it < 60; ++it) {
        MatX y = A.apply_adjoint(A.apply(x));
        const double nrm = y.norm();
        if (nrm == 0.0) return 0.0;
        if (std::abs(nrm - est) <= 1e-6 * nrm) return nrm;
        est = nrm;
        x = y / nrm;
    }
    return est;
}

MatX split_complex(const std::vector<cd>& v)
{
    MatX b(v.size(), 2);
    for (size_t i = 0; i < v.size(); ++i) b(i, 0) = v[i].real(), b(i, 1) = v[i].imag();
    return b;
}

} // namespace

XrayProjector XrayProjector::build(const RayFamily& family, const DiskGrid& grid, bool with_oneform)
{
    XrayProjector A;
    A.grid = grid;
    std::vector<int> id(grid.size(), -1);
    for (int k = 0; k < grid.size(); ++k)
        if (grid.near(k, 1.5 * grid.h)) {
            id[k] = int(A.nodes.size());
            A.nodes.push_back(k);
        }
    const int rows = int(family.size()), cols = int(A.nodes.size());
    std::vector<Trip> t0, t1, t2;
    const double ox = grid.center.x() - grid.radius, oy = grid.center.y() - grid.radius;
    for (int r = 0; r < rows; ++r) {
        const RaySamples& ray = family.rays[r];
        const auto w = simpson_weights(int(ray.x.size()), ray.dt());
        for (size_t m = 0; m < ray.x.size(); ++m) {
            const double u = (ray.x[m].x() - ox) / grid.h, v = (ray.x[m].y() - oy) / grid.h;
            const int i = std::clamp(int(std::floor(u)), 0, grid.n - 2);
            const int j = std::clamp(int(std::floor(v)), 0, grid.n - 2);
            const double a = u - i, b = v - j;
            const int nb[4] = {grid.index(i, j), grid.index(i + 1, j), grid.index(i, j + 1), grid.index(i + 1, j + 1)};
            const double bw[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
            for (int c = 0; c < 4; ++c) {
                if (bw[c] == 0.0) continue;
                const int col = id[nb[c]];
                if (col < 0) throw DomainError("XrayProjector: ray sample outside the unknown region");
                t0.emplace_back(r, col, w[m] * bw[c]);
                if (with_oneform) {
                    t1.emplace_back(r, col, w[m] * bw[c] * ray.v[m].x());
                    t2.emplace_back(r, col, w[m] * bw[c] * ray.v[m].y());
                }
            }
        }
    }
    A.P.resize(rows, cols);
    A.P.setFromTriplets(t0.begin(), t0.end());
    if (with_oneform) {
        A.P1.resize(rows, cols);
        A.P1.setFromTriplets(t1.begin(), t1.end());
        A.P2.resize(rows, cols);
        A.P2.setFromTriplets(t2.begin(), t2.end());
    }
    A.norm2 = power_norm2(A);
    return A;
}

MatX XrayProjector::apply(const MatX& x) const
{
    const int N = unknowns();
    MatX y = P * x.topRows(N);
    if (has_oneform()) {
        y += P1 * x.middleRows(N, N);
        y += P2 * x.bottomRows(N);
    }
    return y;
}

MatX XrayProjector::apply_adjoint(const MatX& y) const
{
    const int N = unknowns();
    MatX x(blocks() * N, y.cols());
    x.topRows(N) = P.transpose() * y;
    if (has_oneform()) {
        x.middleRows(N, N) = P1.transpose() * y;
        x.bottomRows(N) = P2.transpose() * y;
    }
    return x;
}

GridField XrayProjector::field(const MatX& x, int block) const
{
    GridField f(grid);
    const int N = unknowns();
    for (int c = 0; c < N; ++c) f.values[nodes[c]] = cd(x(block * N + c, 0), x.cols() > 1 ? x(block * N + c, 1) : 0.0);
    return f;
}

MatX cgls(const XrayProjector& A, const MatX& b, const CglsOptions& opt, CglsReport* report)
{
    const double lambda = opt.lambda_rel * A.norm2;
    const Eigen::Index nc = b.cols();
    MatX x = MatX::Zero(A.blocks() * A.unknowns(), nc);
    MatX r = b;
    MatX s = A.apply_adjoint(r);
    MatX p = s;
    Eigen::ArrayXd gamma = s.colwise().squaredNorm().transpose().array();
    const Eigen::ArrayXd gamma0 = gamma;
    const Eigen::ArrayXd target = (opt.tol * opt.tol * gamma).max(opt.abs_tol * opt.abs_tol);
    CglsReport rep;
    rep.lambda = lambda;
    int it = 0;
    auto done = [&] { return (gamma <= target).all(); };
    while (!done()) {
        if (it >= opt.max_iter)
            throw ConditioningError("cgls: no convergence in " + std::to_string(opt.max_iter) + " iterations");
        const MatX q = A.apply(p);
        for (Eigen::Index c = 0; c < nc; ++c) {
            if (gamma[c] <= target[c]) continue;
            const double delta = q.col(c).squaredNorm() + lambda * p.col(c).squaredNorm();
            const double alpha = gamma[c] / delta;
            x.col(c) += alpha * p.col(c);
            r.col(c) -= alpha * q.col(c);
        }
        s = A.apply_adjoint(r) - lambda * x;
        for (Eigen::Index c = 0; c < nc; ++c) {
            if (gamma[c] <= target[c]) continue;
            const double gnew = s.col(c).squaredNorm();
            p.col(c) = s.col(c) + (gnew / gamma[c]) * p.col(c);
            gamma[c] = gnew;
        }
        ++it;
    }
    rep.iterations = it;
    double ratio = 0.0;
    for (Eigen::Index c = 0; c < nc; ++c)
        if (gamma0[c] > 0.0) ratio = std::max(ratio, std::sqrt(gamma[c] / gamma0[c]));
    rep.gradient_ratio = ratio;
    if (report) *report = rep;
    return x;
}

GridField xray_invert_scalar(const std::vector<cd>& data, const XrayProjector& proj, const CglsOptions& opt,
                             CglsReport* report)
{
    if (int(data.size()) != proj.P.rows()) throw PreconditionError("xray_invert_scalar: data size does not match the rays");
    if (proj.has_oneform()) throw PreconditionError("xray_invert_scalar: projector carries one-form blocks");
    const MatX x = cgls(proj, split_complex(data), opt, report);
    return proj.field(x, 0);
}

GridField xray_invert_scalar(const std::vector<cd>& data, const RayFamily& family, double lambda_rel)
{
    const XrayProjector proj = XrayProjector::build(family, DiskGrid::make(family.domain, kDefaultReconstructionGrid), false);
    CglsOptions opt;
    opt.lambda_rel = lambda_rel;
    return xray_invert_scalar(data, proj, opt);
}

PairReconstruction xray_invert_pair(const std::vector<cd>& data, const XrayProjector& proj, const CglsOptions& opt)
{
    if (int(data.size()) != proj.P.rows()) throw PreconditionError("xray_invert_pair: data size does not match the rays");
    if (!proj.has_oneform()) throw PreconditionError("xray_invert_pair: projector has no one-form blocks");
    PairReconstruction out;
    const MatX x = cgls(proj, split_complex(data), opt, &out.report);
    out.f = proj.field(x, 0);
    out.alpha = GridOneForm{proj.field(x, 1), proj.field(x, 2)};
    out.split = helmholtz_project(out.alpha);
    return out;
}

PairReconstruction xray_invert_pair(const std::vector<cd>& data, const RayFamily& family, double lambda_rel)
{
    const XrayProjector proj = XrayProjector::build(family, DiskGrid::make(family.domain, kDefaultReconstructionGrid), true);
    CglsOptions opt;
    opt.lambda_rel = lambda_rel;
    return xray_invert_pair(data, proj, opt);
}

} // namespace lightray
