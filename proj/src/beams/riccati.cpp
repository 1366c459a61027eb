#include "lightray/beams/riccati.hpp"

#include <algorithm>
#include <cmath>

namespace lightray {

MatX riccati_C(int n)
{
    MatX C = 2.0 * MatX::Identity(n, n);
    C(0, 0) = 0.0;
    return C;
}

namespace {

void check_det(const MatXc& Y, double s)
{
    if (std::abs(Y.determinant()) < 1e-12)
        throw SingularityError("Riccati: det Y vanished at s = " + std::to_string(s) + " (integrator failure)");
}

} // namespace

RiccatiSolution solve_riccati(const DField& D, const MatXc& H0, double a0, double b0, double s_minus,
                              double max_step)
{
    const int n = int(H0.rows());
    if (H0.cols() != n || n < 1) throw PreconditionError("solve_riccati: H0 must be square");
    if ((H0 - H0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + H0.cwiseAbs().maxCoeff()))
        throw PreconditionError("solve_riccati: H0 must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatX> es(H0.imag());
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw PreconditionError("solve_riccati: Im H0 must be positive definite");
    if (!(a0 <= s_minus && s_minus <= b0 && a0 < b0)) throw PreconditionError("solve_riccati: need a0 <= s_minus <= b0");
    if (!(max_step > 0.0)) throw PreconditionError("solve_riccati: step must be positive");

    const MatX C = riccati_C(n);
    RiccatiSolution sol;
    sol.n = n;
    sol.s_minus = s_minus;
    sol.H0 = H0;

    struct Node {
        double s;
        MatXc Y, Z;
    };
    std::vector<std::pair<double, MatX>> dsamples;
    auto Dat = [&](double s) {
        MatX d = D(s);
        if (d.rows() != n || d.cols() != n) throw PreconditionError("solve_riccati: D has the wrong size");
        dsamples.emplace_back(s, d);
        return d;
    };
    auto sweep = [&](double end, std::vector<Node>& out) {
        const double len = end - s_minus;
        if (len == 0.0) return;
        const int N = std::max(1, int(std::ceil(std::abs(len) / max_step)));
        const double h = len / N;
        MatXc Y = MatXc::Identity(n, n), Z = H0;
        MatX Dn = Dat(s_minus);
        for (int k = 0; k < N; ++k) {
            const double s = s_minus + k * h;
            const MatX Dm = Dat(s + 0.5 * h);
            const MatX De = Dat(s + h);
            const MatXc k1y = C * Z, k1z = -Dn * Y;
            const MatXc k2y = C * (Z + 0.5 * h * k1z), k2z = -Dm * (Y + 0.5 * h * k1y);
            const MatXc k3y = C * (Z + 0.5 * h * k2z), k3z = -Dm * (Y + 0.5 * h * k2y);
            const MatXc k4y = C * (Z + h * k3z), k4z = -De * (Y + h * k3y);
            Y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            Z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            check_det(Y, s + h);
            out.push_back({s + h, Y, Z});
            Dn = De;
        }
    };
    std::vector<Node> back, fwd;
    sweep(a0, back);
    sweep(b0, fwd);
    std::reverse(back.begin(), back.end());
    back.push_back({s_minus, MatXc::Identity(n, n), H0});
    back.insert(back.end(), fwd.begin(), fwd.end());
    for (auto& nd : back) {
        sol.s_grid.push_back(nd.s);
        sol.H.push_back(nd.Z * nd.Y.inverse());
        sol.Y.push_back(std::move(nd.Y));
        sol.Z.push_back(std::move(nd.Z));
    }
    std::sort(dsamples.begin(), dsamples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [s, d] : dsamples) {
        if (!sol.d_s.empty() && std::abs(s - sol.d_s.back()) < 1e-14) continue;
        sol.d_s.push_back(s);
        sol.d_val.push_back(d);
    }
    if (sol.d_s.size() < 4) {
        // pad with extra samples so the cubic interpolant is defined on very short ranges
        for (int k = 0; k <= 4; ++k) {
            const double s = a0 + (b0 - a0) * k / 4.0;
            if (std::find_if(sol.d_s.begin(), sol.d_s.end(), [&](double x) { return std::abs(x - s) < 1e-14; }) ==
                sol.d_s.end()) {
                sol.d_s.push_back(s);
                sol.d_val.push_back(D(s));
            }
        }
        std::vector<size_t> idx(sol.d_s.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return sol.d_s[a] < sol.d_s[b]; });
        std::vector<double> s2;
        std::vector<MatX> d2;
        for (size_t i : idx) {
            s2.push_back(sol.d_s[i]);
            d2.push_back(sol.d_val[i]);
        }
        sol.d_s = s2;
        sol.d_val = d2;
    }
    return sol;
}

size_t RiccatiSolution::nearest(double s) const
{
    auto it = std::lower_bound(s_grid.begin(), s_grid.end(), s);
    if (it == s_grid.begin()) return 0;
    if (it == s_grid.end()) return s_grid.size() - 1;
    const size_t k = size_t(it - s_grid.begin());
    return (s - s_grid[k - 1] < s_grid[k] - s) ? k - 1 : k;
}

void RiccatiSolution::yz_at(double s, MatXc& Yo, MatXc& Zo) const
{
    const double lo = s_grid.front(), hi = s_grid.back();
    if (s < lo - 1e-12 || s > hi + 1e-12) throw DomainError("RiccatiSolution: s outside [a0, b0]");
    s = std::clamp(s, lo, hi);
    size_t k = size_t(std::upper_bound(s_grid.begin(), s_grid.end(), s) - s_grid.begin());
    k = std::clamp<size_t>(k, 1, s_grid.size() - 1);
    const double s0 = s_grid[k - 1], s1 = s_grid[k], h = s1 - s0;
    const double t = (s - s0) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const MatX C = riccati_C(n);
    const MatXc dY0 = C * Z[k - 1], dY1 = C * Z[k];
    const MatXc dZ0 = -D_at(s0).cast<cd>() * Y[k - 1];
    const MatXc dZ1 = -D_at(s1).cast<cd>() * Y[k];
    Yo = h00 * Y[k - 1] + h10 * h * dY0 + h01 * Y[k] + h11 * h * dY1;
    Zo = h00 * Z[k - 1] + h10 * h * dZ0 + h01 * Z[k] + h11 * h * dZ1;
}

MatXc RiccatiSolution::H_at(double s) const
{
    MatXc Ys, Zs;
    yz_at(s, Ys, Zs);
    return Zs * Ys.inverse();
}

MatX RiccatiSolution::D_at(double s) const
{
    size_t i0;
    double w[4], dw[4];
    local_cubic_weights(d_s, s, i0, w, dw);
    MatX r = MatX::Zero(n, n);
    for (int a = 0; a < 4; ++a) r += w[a] * d_val[i0 + a];
    return r;
}

MatX RiccatiSolution::dD_at(double s) const
{
    size_t i0;
    double w[4], dw[4];
    local_cubic_weights(d_s, s, i0, w, dw);
    MatX r = MatX::Zero(n, n);
    for (int a = 0; a < 4; ++a) r += dw[a] * d_val[i0 + a];
    return r;
}

MatXc RiccatiSolution::dH_at(double s) const
{
    const MatXc H = H_at(s);
    const MatX C = riccati_C(n);
    return -H * C * H - D_at(s).cast<cd>();
}

MatXc RiccatiSolution::d2H_at(double s) const
{
    const MatXc H = H_at(s);
    const MatX C = riccati_C(n);
    const MatXc dH = -H * C * H - D_at(s).cast<cd>();
    return -dH * C * H - H * C * dH - dD_at(s).cast<cd>();
}

} // namespace lightray
