#include "lightray/inversion/moments.hpp"

namespace lightray {

MomentSequence moments_from_data(const LightRayData& data, int K, double t_center, const std::vector<double>& shift)
{
    if (K < 0) throw PreconditionError("moments_from_data: K must be non-negative");
    const Eigen::Index nt = data.values.rows(), nr = data.values.cols();
    if (nt < 2 || Eigen::Index(data.ttilde.size()) != nt) throw PreconditionError("moments_from_data: bad t~ grid");
    const double peak = data.values.cwiseAbs().maxCoeff();
    const double edge = std::max(data.values.row(0).cwiseAbs().maxCoeff(), data.values.row(nt - 1).cwiseAbs().maxCoeff());
    if (edge > 1e-10 * peak)
        throw SupportViolation("moments_from_data: data does not vanish at the ends of the t~ grid (ratio " +
                               std::to_string(edge / peak) + ")");

    if (!shift.empty() && Eigen::Index(shift.size()) != nr)
        throw PreconditionError("moments_from_data: one shift per ray expected");

    MomentSequence out;
    out.shift = shift;
    out.kind = data.kind;
    out.K = K;
    out.t_center = t_center;
    out.mu.assign(K + 1, std::vector<cd>(nr, 0.0));
    std::vector<double> w(nt);
    for (Eigen::Index i = 0; i < nt; ++i) {
        const double left = i > 0 ? data.ttilde[i] - data.ttilde[i - 1] : 0.0;
        const double right = i + 1 < nt ? data.ttilde[i + 1] - data.ttilde[i] : 0.0;
        w[i] = 0.5 * (left + right);
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < nr; ++j) {
        for (Eigen::Index i = 0; i < nt; ++i) {
            const cd x = -kI * (data.ttilde[i] + (shift.empty() ? 0.0 : shift[j]) - t_center);
            cd p = w[i] * data.values(i, j);
            for (int k = 0; k <= K; ++k) {
                out.mu[k][j] += p;
                p *= x;
            }
        }
    }
    return out;
}

std::vector<double> midpoint_shift(const RayFamily& family)
{
    std::vector<double> s;
    s.reserve(family.size());
    for (const auto& r : family.rays) s.push_back(0.5 * r.length);
    return s;
}

} // namespace lightray
