#include "lightray/inversion/recovery.hpp"

#include "lightray/transforms/phantoms.hpp"

#include <Eigen/LU>

namespace lightray {

namespace {

constexpr int kTimeNodes = 401;

std::vector<cd> subtract(std::vector<cd> a, const std::vector<cd>& b, cd scale)
{
    for (size_t i = 0; i < a.size(); ++i) a[i] -= scale * b[i];
    return a;
}

double vec_norm(const std::vector<cd>& v)
{
    double s = 0.0;
    for (const cd& x : v) s += std::norm(x);
    return std::sqrt(s);
}

std::vector<cd> moment_of(const GridField& f, int m, const RayFamily& family)
{
    return weighted_xray_moment(SpatialScalar([&f](const Vec2& x) { return f(x); }), m, family, true);
}

std::vector<cd> moment_of(const GridOneForm& a, int m, const RayFamily& family)
{
    return weighted_xray_moment(SpatialOneForm([&a](const Vec2& x) { return a(x); }), m, family, true);
}

double residual_of(const XrayProjector& proj, const GridField* f, const GridOneForm* a, const std::vector<cd>& r)
{
    const int N = proj.unknowns();
    MatX x = MatX::Zero(proj.blocks() * N, 2);
    for (int c = 0; c < N; ++c) {
        const int k = proj.nodes[c];
        if (f) x(c, 0) = f->values[k].real(), x(c, 1) = f->values[k].imag();
        if (a) {
            x(N + c, 0) = a->a1.values[k].real(), x(N + c, 1) = a->a1.values[k].imag();
            x(2 * N + c, 0) = a->a2.values[k].real(), x(2 * N + c, 1) = a->a2.values[k].imag();
        }
    }
    const MatX y = proj.apply(x);
    double num = 0.0;
    for (size_t i = 0; i < r.size(); ++i) num += std::norm(cd(y(i, 0), y(i, 1)) - r[i]);
    const double den = vec_norm(r);
    return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

/// Time range to integrate the supplied coefficients over.
std::pair<double, double> time_range(const CoefficientPair& coeffs, const ModelClass& model)
{
    double lo = coeffs.support.t_lo, hi = coeffs.support.t_hi;
    if (lo < -1e100 || hi > 1e100) lo = model.t1, hi = model.t2;
    return {lo, hi};
}

/// Moments int (-i (t - c))^k g(t) dt, k = 0..K, with Simpson on the given range.
std::vector<cd> time_moments(const std::function<cd(double)>& g, double lo, double hi, double c, int K)
{
    const double h = (hi - lo) / (kTimeNodes - 1);
    const auto w = simpson_weights(kTimeNodes, h);
    std::vector<cd> out(K + 1, 0.0);
    for (int i = 0; i < kTimeNodes; ++i) {
        const double t = lo + i * h;
        const cd v = g(t);
        if (v == 0.0) continue;
        cd p = w[i] * v;
        const cd x = -kI * (t - c);
        for (int k = 0; k <= K; ++k) {
            out[k] += p;
            p *= x;
        }
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- ModelClass

void ModelClass::validate() const
{
    if (K < 0) throw PreconditionError("ModelClass: K must be non-negative");
    if (!(t2 - t1 >= 2.0 * ramp) || ramp <= 0.0) throw PreconditionError("ModelClass: window needs t2 - t1 >= 2 ramp > 0");
}

double ModelClass::basis(int m, double t) const
{
    return std::pow((t - center()) / half_width(), m);
}

MatXc ModelClass::moment_matrix(int rows) const
{
    validate();
    MatXc M = MatXc::Zero(rows, K + 1);
    const double h = (t2 - t1) / (kTimeNodes - 1);
    const auto w = simpson_weights(kTimeNodes, h);
    for (int i = 0; i < kTimeNodes; ++i) {
        const double t = t1 + i * h;
        const double win = time_window(t, t1, t2, ramp).v;
        for (int j = 0; j < rows; ++j)
            for (int m = 0; m <= K; ++m) M(j, m) += w[i] * std::pow(-kI * (t - center()), j) * basis(m, t) * win;
    }
    return M;
}

MatX ModelClass::basis_to_monomial() const
{
    MatX B = MatX::Zero(K + 1, K + 1);
    for (int m = 0; m <= K; ++m)
        for (int l = 0; l <= m; ++l)
            B(l, m) = binomial(m, l) * std::pow(-center(), m - l) / std::pow(half_width(), m);
    return B;
}

// ---------------------------------------------------------------- scalar

double spacetime_relative_error(const ScalarRecovery& rec, const CoefficientPair& truth, int n_t)
{
    if (rec.basis.empty()) throw PreconditionError("spacetime_relative_error: empty recovery");
    if (n_t < 2) throw PreconditionError("spacetime_relative_error: need at least two times");
    const DiskGrid& g = rec.basis[0].grid;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n_t; ++i) {
        const double t = rec.model.t1 + (rec.model.t2 - rec.model.t1) * i / (n_t - 1.0);
        for (int k = 0; k < g.size(); ++k) {
            if (!g.inside(k)) continue;
            const cd tr = truth.eval_q(t, g.node(k));
            num += std::norm(rec.value(t, g.node(k)) - tr);
            den += std::norm(tr);
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

cd ScalarRecovery::value(double t, const Vec2& x) const
{
    const double win = time_window(t, model.t1, model.t2, model.ramp).v;
    if (win == 0.0) return 0.0;
    cd s = 0.0;
    for (int m = 0; m <= model.K; ++m) s += model.basis(m, t) * basis[m](x);
    return win * s;
}

ScalarRecovery recover_scalar(const LightRayData& data, const RayFamily& family, const XrayProjector& proj,
                              const ModelClass& model, const RecoveryOptions& opt)
{
    model.validate();
    if (data.kind != TransformKind::Scalar) throw PreconditionError("recover_scalar: data is not a scalar transform");
    if (data.values.cols() != Eigen::Index(family.size()))
        throw PreconditionError("recover_scalar: data and ray family differ in size");
    const int K = model.K;
    const MomentSequence mom = moments_from_data(data, K + 1, model.center(), midpoint_shift(family));

    ScalarRecovery out;
    out.model = model;
    for (int k = 0; k <= K; ++k) {
        std::vector<cd> r = mom.mu[k];
        for (int j = 0; j < k; ++j) r = subtract(r, moment_of(out.moments[j], k - j, family), binomial(k, j));
        CglsReport rep;
        out.moments.push_back(xray_invert_scalar(r, proj, opt.cgls, &rep));
        MomentStep st;
        st.k = k;
        st.iterations = rep.iterations;
        st.residual = residual_of(proj, &out.moments.back(), nullptr, r);
        out.steps.push_back(st);
    }

    const MatXc M = model.moment_matrix(K + 2);
    const MatXc Minv = M.topRows(K + 1).inverse();
    const MatX B = model.basis_to_monomial();
    const DiskGrid& g = proj.grid;
    out.basis.assign(K + 1, GridField(g));
    out.monomial.assign(K + 1, GridField(g));
    for (int m = 0; m <= K; ++m)
        for (int j = 0; j <= K; ++j) out.basis[m].values += Minv(m, j) * out.moments[j].values;
    for (int l = 0; l <= K; ++l)
        for (int m = 0; m <= K; ++m) out.monomial[l].values += B(l, m) * out.basis[m].values;

    // moment K+1 predicted by the model against the measured one, after the common lower-order terms
    GridField next(g);
    for (int m = 0; m <= K; ++m) next.values += M(K + 1, m) * out.basis[m].values;
    const std::vector<cd> pred = moment_of(next, 0, family);
    std::vector<cd> r = mom.mu[K + 1];
    for (int j = 0; j <= K; ++j) r = subtract(r, moment_of(out.moments[j], K + 1 - j, family), binomial(K + 1, j));
    const double meas = vec_norm(r);
    const double diff = vec_norm(subtract(pred, r, 1.0));
    out.model_mismatch = meas > 0.0 ? diff / meas : (diff > 0.0 ? 1.0 : 0.0);
    out.model_warning = out.model_mismatch > opt.model_tol;
    return out;
}

ScalarRecovery recover_scalar(const LightRayData& data, const RayFamily& family, const ModelClass& model,
                              const RecoveryOptions& opt)
{
    const XrayProjector proj = XrayProjector::build(family, DiskGrid::make(family.domain, opt.grid_n), false);
    return recover_scalar(data, family, proj, model, opt);
}

// ---------------------------------------------------------------- coefficient moments

std::vector<GridField> b_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid)
{
    const auto [lo, hi] = time_range(coeffs, model);
    std::vector<GridField> out(model.K + 1, GridField(grid));
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < grid.size(); ++k) {
        if (!grid.inside(k)) continue;
        const Vec2 x = grid.node(k);
        const auto mu = time_moments([&](double t) { return coeffs.eval_b(t, x); }, lo, hi, model.center(), model.K);
        for (int j = 0; j <= model.K; ++j) out[j].values[k] = mu[j];
    }
    return out;
}

std::vector<GridOneForm> omega_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid)
{
    const auto [lo, hi] = time_range(coeffs, model);
    std::vector<GridOneForm> out(model.K + 1, GridOneForm{GridField(grid), GridField(grid)});
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < grid.size(); ++k) {
        if (!grid.inside(k)) continue;
        const Vec2 x = grid.node(k);
        for (int c = 0; c < 2; ++c) {
            const auto mu = time_moments([&](double t) { return coeffs.eval_omega(t, x)[c]; }, lo, hi, model.center(),
                                         model.K);
            for (int j = 0; j <= model.K; ++j) (c == 0 ? out[j].a1 : out[j].a2).values[k] = mu[j];
        }
    }
    return out;
}

FieldStrengthMoments field_strength_moments(const CoefficientPair& coeffs, const ModelClass& model,
                                            const DiskGrid& grid, double fd)
{
    const auto [lo, hi] = time_range(coeffs, model);
    const int K = model.K;
    FieldStrengthMoments F;
    F.F01.assign(K + 1, GridField(grid));
    F.F02.assign(K + 1, GridField(grid));
    F.F12.assign(K + 1, GridField(grid));
    const double c = model.center();
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < grid.size(); ++k) {
        if (!grid.inside(k)) continue;
        const Vec2 x = grid.node(k);
        auto om = [&](const Vec2& y, int comp) {
            return time_moments([&](double t) { return coeffs.eval_omega(t, y)[comp]; }, lo, hi, c, K);
        };
        auto bm = [&](const Vec2& y) { return time_moments([&](double t) { return coeffs.eval_b(t, y); }, lo, hi, c, K); };
        const Vec2 e1(fd, 0.0), e2(0.0, fd);
        const auto w1 = om(x, 0), w2 = om(x, 1);
        const auto w2p = om(x + e1, 1), w2m = om(x - e1, 1), w1p = om(x + e2, 0), w1m = om(x - e2, 0);
        const auto bp1 = bm(x + e1), bm1 = bm(x - e1), bp2 = bm(x + e2), bm2 = bm(x - e2);
        for (int j = 0; j <= K; ++j) {
            F.F12[j].values[k] = (w2p[j] - w2m[j] - w1p[j] + w1m[j]) / (2.0 * fd);
            const cd prev1 = j > 0 ? kI * double(j) * w1[j - 1] : cd(0.0);
            const cd prev2 = j > 0 ? kI * double(j) * w2[j - 1] : cd(0.0);
            F.F01[j].values[k] = prev1 - (bp1[j] - bm1[j]) / (2.0 * fd);
            F.F02[j].values[k] = prev2 - (bp2[j] - bm2[j]) / (2.0 * fd);
        }
    }
    return F;
}

double relative_error(const FieldStrengthMoments& a, const FieldStrengthMoments& truth)
{
    double num = 0.0, den = 0.0;
    auto acc = [&](const std::vector<GridField>& x, const std::vector<GridField>& y) {
        for (size_t j = 0; j < y.size(); ++j) {
            GridField d = x[j];
            d.values -= y[j].values;
            num += std::pow(d.norm_inside(), 2);
            den += std::pow(y[j].norm_inside(), 2);
        }
    };
    acc(a.F01, truth.F01);
    acc(a.F02, truth.F02);
    acc(a.F12, truth.F12);
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

GaugePotential gauge_potential(const CoefficientPair& coeffs, const DiskGrid& grid, double T, int n_t)
{
    if (n_t < 2 || T <= 0.0) throw PreconditionError("gauge_potential: need T > 0 and at least two time levels");
    GaugePotential out;
    out.source = "psi = int_0^t b ds from the supplied b-component";
    const double dt = T / (n_t - 1);
    for (int i = 0; i < n_t; ++i) out.t.push_back(i * dt);
    out.psi.assign(n_t, GridField(grid));
    // cumulative composite Simpson with 8 panels per output interval
    constexpr int panels = 8;
    auto integrate = [&](const Vec2& x, std::vector<cd>& acc) {
        acc.assign(n_t, 0.0);
        for (int i = 1; i < n_t; ++i) {
            const double a = out.t[i - 1], hp = dt / panels;
            cd s = 0.0;
            for (int p = 0; p < panels; ++p) {
                const double l = a + p * hp;
                s += coeffs.eval_b(l, x) + 4.0 * coeffs.eval_b(l + 0.5 * hp, x) + coeffs.eval_b(l + hp, x);
            }
            acc[i] = acc[i - 1] + hp / 6.0 * s;
        }
    };
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < grid.size(); ++k) {
        if (!grid.near(k, 0.0)) continue;
        std::vector<cd> acc;
        integrate(grid.node(k), acc);
        for (int i = 0; i < n_t; ++i) out.psi[i].values[k] = acc[i];
    }
    std::vector<cd> acc;
    for (int m = 0; m < 256; ++m) {
        const double th = 2.0 * kPi * m / 256;
        integrate(grid.center + grid.radius * Vec2(std::cos(th), std::sin(th)), acc);
        for (const cd& v : acc) out.boundary_max = std::max(out.boundary_max, std::abs(v));
    }
    out.final_max = out.psi.back().values.cwiseAbs().maxCoeff();
    return out;
}

std::vector<GridField> potential_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid)
{
    DiskGrid fine = grid;
    fine.n = 2 * grid.n - 1;
    fine.h = 0.5 * grid.h;
    const auto wc = omega_moments(coeffs, model, grid);
    const auto wf = omega_moments(coeffs, model, fine);
    std::vector<GridField> out;
    for (size_t k = 0; k < wc.size(); ++k) {
        const GridField pc = helmholtz_project(wc[k]).potential;
        const GridField pf = helmholtz_project(wf[k]).potential;
        GridField p(grid);
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i) {
                const int c = grid.index(i, j);
                p.values[c] = (4.0 * pf.values[fine.index(2 * i, 2 * j)] - pc.values[c]) / 3.0;
            }
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------- one-form

OneFormRecovery recover_oneform(const LightRayData& data, const RayFamily& family, const XrayProjector& proj,
                                const ModelClass& model, const RecoveryOptions& opt, const CoefficientPair* coeffs,
                                double consistency_tol)
{
    model.validate();
    if (data.kind != TransformKind::OneForm) throw PreconditionError("recover_oneform: data is not a one-form transform");
    if (data.values.cols() != Eigen::Index(family.size()))
        throw PreconditionError("recover_oneform: data and ray family differ in size");
    if (!proj.has_oneform()) throw PreconditionError("recover_oneform: projector has no one-form blocks");
    const int K = model.K;
    const MomentSequence mom = moments_from_data(data, K, model.center(), midpoint_shift(family));

    OneFormRecovery out;
    out.model = model;
    out.data_norm = data.values.size() ? data.values.cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k <= K; ++k) {
        std::vector<cd> r = mom.mu[k];
        for (int j = 0; j < k; ++j) {
            r = subtract(r, moment_of(out.b_moments[j], k - j, family), binomial(k, j));
            r = subtract(r, moment_of(out.w_moments[j], k - j, family), binomial(k, j));
        }
        PairReconstruction pr = xray_invert_pair(r, proj, opt.cgls);
        MomentStep st;
        st.k = k;
        st.iterations = pr.report.iterations;
        st.residual = residual_of(proj, &pr.f, &pr.alpha, r);
        out.steps.push_back(st);
        out.b_moments.push_back(pr.f);
        out.w_moments.push_back(pr.split.solenoidal);
    }

    const DiskGrid& g = proj.grid;
    FieldStrengthMoments& F = out.field_strength;
    for (int k = 0; k <= K; ++k) {
        F.F12.push_back(grid_curl(out.w_moments[k]));
        const GridOneForm db = grid_gradient(out.b_moments[k]);
        GridField f01(g), f02(g);
        f01.values = -db.a1.values;
        f02.values = -db.a2.values;
        if (k > 0) {
            f01.values += kI * double(k) * out.w_moments[k - 1].a1.values;
            f02.values += kI * double(k) * out.w_moments[k - 1].a2.values;
        }
        F.F01.push_back(f01);
        F.F02.push_back(f02);
    }

    if (coeffs) {
        const auto bk = b_moments(*coeffs, model, g);
        out.psi_moments = potential_moments(*coeffs, model, g);
        double scale = 0.0;
        for (const auto& b : bk) scale = std::max(scale, b.norm_inside());
        for (int k = 1; k <= K; ++k) {
            GridField d = bk[k];
            d.values -= kI * double(k) * out.psi_moments[k - 1].values;
            out.steps[k].consistency_error = scale > 0.0 ? d.norm_inside() / scale : d.norm_inside();
        }
        if (out.data_norm <= opt.zero_data_tol) {
            for (const auto& st : out.steps)
                if (st.consistency_error > consistency_tol)
                    throw InconsistentDataError("recover_oneform: b-moment " + std::to_string(st.k) +
                                                " differs from i k psi_{k-1} by " + std::to_string(st.consistency_error));
            out.gauge = gauge_potential(*coeffs, g, family.options.T, 121);
        }
    }
    return out;
}

OneFormRecovery recover_oneform(const LightRayData& data, const RayFamily& family, const ModelClass& model,
                                const RecoveryOptions& opt, const CoefficientPair* coeffs, double consistency_tol)
{
    const XrayProjector proj = XrayProjector::build(family, DiskGrid::make(family.domain, opt.grid_n), true);
    return recover_oneform(data, family, proj, model, opt, coeffs, consistency_tol);
}

} // namespace lightray
