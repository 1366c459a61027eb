#include "lightray/inversion/helmholtz.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace lightray {

namespace {

bool unknown(const DiskGrid& g, int i, int j)
{
    return i >= 2 && j >= 2 && i <= g.n - 3 && j <= g.n - 3 && g.inside(g.index(i, j));
}

} // namespace

HelmholtzSplit helmholtz_project(const GridOneForm& alpha, double tol)
{
    const DiskGrid& g = alpha.a1.grid;
    std::vector<int> id(g.size(), -1), nodes;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (unknown(g, i, j)) {
                id[g.index(i, j)] = int(nodes.size());
                nodes.push_back(g.index(i, j));
            }
    const int N = int(nodes.size());
    // -div grad is the wide five point stencil at unknown nodes
    std::vector<Eigen::Triplet<double>> trip;
    const double w = 1.0 / (4.0 * g.h * g.h);
    for (int r = 0; r < N; ++r) {
        const int k = nodes[r], i = k % g.n, j = k / g.n;
        trip.emplace_back(r, r, 4.0 * w);
        const int nb[4][2] = {{i + 2, j}, {i - 2, j}, {i, j + 2}, {i, j - 2}};
        for (const auto& q : nb) {
            const int c = id[g.index(q[0], q[1])];
            if (c >= 0) trip.emplace_back(r, c, -w);
        }
    }
    Eigen::SparseMatrix<double> L(N, N);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw NumericalError("helmholtz_project: factorization failed");

    const GridField div = grid_divergence(alpha);
    VecX rre(N), rim(N);
    for (int r = 0; r < N; ++r) {
        rre[r] = -div.values[nodes[r]].real();
        rim[r] = -div.values[nodes[r]].imag();
    }
    const VecX pre = solver.solve(rre), pim = solver.solve(rim);
    const double rn = std::sqrt(rre.squaredNorm() + rim.squaredNorm());
    const double res = std::sqrt((L * pre - rre).squaredNorm() + (L * pim - rim).squaredNorm()) / std::max(rn, 1e-300);

    HelmholtzSplit out;
    out.alpha = alpha;
    out.potential = GridField(g);
    for (int r = 0; r < N; ++r) out.potential.values[nodes[r]] = cd(pre[r], pim[r]);
    out.poisson_residual = rn > 0.0 ? res : 0.0;
    if (out.poisson_residual > tol)
        throw NumericalError("helmholtz_project: Poisson residual " + std::to_string(out.poisson_residual) +
                             " above tolerance");
    const GridOneForm dpsi = grid_gradient(out.potential);
    out.solenoidal = alpha;
    out.solenoidal.a1.values -= dpsi.a1.values;
    out.solenoidal.a2.values -= dpsi.a2.values;
    return out;
}

cd grid_inner(const GridOneForm& a, const GridOneForm& b)
{
    const double h2 = a.a1.grid.h * a.a1.grid.h;
    return (a.a1.values.dot(b.a1.values) + a.a2.values.dot(b.a2.values)) * h2;
}

} // namespace lightray
