#include "lightray/beams/beam.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

namespace lightray {

namespace {

/// Cubic Hermite basis on [0,1] with first and second derivatives.
struct Hermite {
    double h00, h10, h01, h11;
    double d00, d10, d01, d11;
    double e00, e10, e01, e11;
};

Hermite hermite(double t)
{
    Hermite H;
    H.h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    H.h10 = t * (1 - t) * (1 - t);
    H.h01 = t * t * (3 - 2 * t);
    H.h11 = t * t * (t - 1);
    H.d00 = 6 * t * t - 6 * t;
    H.d10 = 3 * t * t - 4 * t + 1;
    H.d01 = -6 * t * t + 6 * t;
    H.d11 = 3 * t * t - 2 * t;
    H.e00 = 12 * t - 6;
    H.e10 = 6 * t - 4;
    H.e01 = -12 * t + 6;
    H.e11 = 6 * t - 2;
    return H;
}

double principal_angle(double a)
{
    while (a > kPi) a -= 2 * kPi;
    while (a <= -kPi) a += 2 * kPi;
    return a;
}

} // namespace

std::array<cd, 3> Amplitude::jet(double s) const
{
    const double lo = s_grid.front(), hi = s_grid.back();
    if (s < lo - 1e-12 || s > hi + 1e-12) throw DomainError("Amplitude: s outside the transport grid");
    s = std::clamp(s, lo, hi);
    size_t k = size_t(std::upper_bound(s_grid.begin(), s_grid.end(), s) - s_grid.begin());
    k = std::clamp<size_t>(k, 1, s_grid.size() - 1);
    const double h = s_grid[k] - s_grid[k - 1];
    const Hermite H = hermite((s - s_grid[k - 1]) / h);
    const cd L = H.h00 * log_v0[k - 1] + H.h10 * h * dlog_v0[k - 1] + H.h01 * log_v0[k] + H.h11 * h * dlog_v0[k];
    const cd dL = (H.d00 * log_v0[k - 1] + H.d01 * log_v0[k]) / h + H.d10 * dlog_v0[k - 1] + H.d11 * dlog_v0[k];
    const cd d2L = (H.e00 * log_v0[k - 1] + H.e01 * log_v0[k]) / (h * h) + (H.e10 * dlog_v0[k - 1] + H.e11 * dlog_v0[k]) / h;
    const cd v = std::exp(L);
    return {v, dL * v, (d2L + dL * dL) * v};
}

cd Amplitude::v0(double s) const { return jet(s)[0]; }

Amplitude solve_transport(const RiccatiSolution& ric, const RayOneForm& A_along_ray, int sign, double delta,
                          double rho_power)
{
    Amplitude amp;
    amp.sign = sign >= 0 ? 1 : -1;
    amp.delta = delta;
    amp.rho_power = rho_power;
    amp.s_grid = ric.s_grid;
    const size_t N = ric.s_grid.size();
    const MatX C = riccati_C(ric.n);
    auto A = [&](double s) -> cd {
        if (!A_along_ray) return 0.0;
        const cd a = A_along_ray(s);
        return amp.sign > 0 ? a : -std::conj(a);
    };
    const size_t i0 = size_t(std::find(ric.s_grid.begin(), ric.s_grid.end(), ric.s_minus) - ric.s_grid.begin());
    if (i0 >= N) throw PreconditionError("solve_transport: s_minus is not a grid node");

    std::vector<cd> logdet(N), intA(N), Anode(N);
    for (size_t k = 0; k < N; ++k) Anode[k] = A(ric.s_grid[k]);
    logdet[i0] = 0.0;
    intA[i0] = 0.0;
    auto step = [&](size_t from, size_t to) {
        const cd d = ric.Y[to].determinant();
        const cd dprev = ric.Y[from].determinant();
        const double jump = principal_angle(std::arg(d) - std::arg(dprev));
        if (std::abs(jump) > 0.5 * kPi)
            throw SingularityError("solve_transport: det Y winds too fast between nodes, refine the s grid");
        logdet[to] = cd(std::log(std::abs(d)), logdet[from].imag() + jump);
        const double s0 = ric.s_grid[from], s1 = ric.s_grid[to];
        intA[to] = intA[from] + (s1 - s0) / 6.0 * (Anode[from] + 4.0 * A(0.5 * (s0 + s1)) + Anode[to]);
    };
    for (size_t k = i0 + 1; k < N; ++k) step(k - 1, k);
    for (size_t k = i0; k-- > 0;) step(k + 1, k);

    amp.log_v0.resize(N);
    amp.dlog_v0.resize(N);
    for (size_t k = 0; k < N; ++k) {
        amp.log_v0[k] = -0.5 * logdet[k] + 0.5 * intA[k];
        const cd trCH = (C.cast<cd>() * ric.H[k]).trace();
        amp.dlog_v0[k] = -0.5 * trCH + 0.5 * Anode[k];
    }
    return amp;
}

RayOneForm ray_oneform(const FermiChart& fc, const CoefficientPair& coeffs)
{
    if (!coeffs.has_oneform()) return {};
    const FermiChart* f = &fc;
    return [f, coeffs](double s) -> cd {
        const double t = s / kSqrt2;
        const VecS p = f->beta(t);
        const VecS v = f->beta_velocity(t);
        const Vec2 x(p[1], p.size() > 2 ? p[2] : 0.0);
        const Vec2c w = coeffs.eval_omega(p[0], x);
        cd a = coeffs.eval_b(p[0], x);
        for (int i = 1; i < int(p.size()); ++i) a += w[i - 1] * v[i];
        return a / kSqrt2;
    };
}

cd GaussianBeam::phase(const VecS& z) const
{
    const int nn = n();
    const VecXc zp = z.tail(nn).cast<cd>();
    return z[1] + (zp.transpose() * riccati->H_at(z[0]) * zp)(0, 0);
}

GaussianBeam build_beam(std::shared_ptr<const FermiChart> fc, const CoefficientPair& coeffs, double rho,
                        BeamVariant variant, const BeamOptions& opt)
{
    if (!(rho > 0.0)) throw PreconditionError("build_beam: rho must be positive");
    const int n = fc->n();
    const MatXc H0 = opt.H0.size() ? opt.H0 : MatXc(kI * MatXc::Identity(n, n));
    const double fd = opt.fd_step;
    const FermiChart* raw = fc.get();
    DField D = [raw, fd](double s) { return curvature_D(*raw, s, fd); };
    const auto& w = fc->window();
    auto ric = std::make_shared<RiccatiSolution>(solve_riccati(D, H0, w.a0(), w.b0(), w.s_minus(), opt.riccati_step));
    const double delta = opt.delta > 0.0 ? opt.delta : std::min(0.5 * fc->tube_radius(), 0.1);
    if (!(delta < fc->tube_radius())) throw PreconditionError("build_beam: delta must be smaller than the tube radius");
    GaussianBeam beam;
    beam.rho = rho;
    beam.fchart = fc;
    beam.riccati = ric;
    beam.variant = variant;
    beam.amplitude = solve_transport(*ric, ray_oneform(*fc, coeffs), variant == BeamVariant::Forward ? +1 : -1, delta,
                                     n / 4.0);
    return beam;
}

GaussianBeam with_rho(const GaussianBeam& beam, double rho)
{
    GaussianBeam b = beam;
    b.rho = rho;
    return b;
}

BeamLocal beam_local(const GaussianBeam& beam, const VecS& z)
{
    const int n = beam.n(), m = n + 1;
    const RiccatiSolution& ric = *beam.riccati;
    const double s = z[0];
    const VecXc zp = z.tail(n).cast<cd>();
    const MatXc H = ric.H_at(s);
    const MatX C = riccati_C(n);
    const MatXc dH = -H * C * H - ric.D_at(s).cast<cd>();
    const MatXc d2H = -dH * C * H - H * C * dH - ric.dD_at(s).cast<cd>();

    BeamLocal L;
    L.psi = z[1] + (zp.transpose() * H * zp)(0, 0);
    L.dpsi = VecSc::Zero(m);
    L.dpsi[0] = (zp.transpose() * dH * zp)(0, 0);
    const VecXc Hz = H * zp;
    for (int i = 0; i < n; ++i) L.dpsi[1 + i] = 2.0 * Hz[i];
    L.dpsi[1] += 1.0;
    L.d2psi = MatSc::Zero(m, m);
    L.d2psi(0, 0) = (zp.transpose() * d2H * zp)(0, 0);
    const VecXc dHz = 2.0 * dH * zp;
    for (int i = 0; i < n; ++i) L.d2psi(0, 1 + i) = L.d2psi(1 + i, 0) = dHz[i];
    L.d2psi.block(1, 1, n, n) = 2.0 * H;

    auto vj = beam.amplitude.jet(s);
    if (beam.variant == BeamVariant::Adjoint) {
        L.psi = -std::conj(L.psi);
        L.dpsi = -L.dpsi.conjugate();
        L.d2psi = -L.d2psi.conjugate();
        for (auto& x : vj) x = std::conj(x);
    }

    // radial cutoff chi(|z'|/delta)
    const double delta = beam.delta();
    const VecS zr = z.tail(n);
    const double rad = zr.norm();
    const Smooth3 c = cutoff_chi(rad / delta);
    VecS dchi = VecS::Zero(n);
    MatS d2chi = MatS::Zero(n, n);
    if (c.d1 != 0.0 || c.d2 != 0.0) {
        const VecS u = zr / rad;
        dchi = c.d1 / delta * u;
        d2chi = c.d2 / (delta * delta) * u * u.transpose() +
                c.d1 / (delta * rad) * (MatS::Identity(n, n) - u * u.transpose());
    }
    const double rp = std::pow(beam.rho, beam.amplitude.rho_power);
    L.W = rp * vj[0] * c.v;
    L.dW = VecSc::Zero(m);
    L.dW[0] = rp * vj[1] * c.v;
    for (int i = 0; i < n; ++i) L.dW[1 + i] = rp * vj[0] * dchi[i];
    L.d2W = MatSc::Zero(m, m);
    L.d2W(0, 0) = rp * vj[2] * c.v;
    for (int i = 0; i < n; ++i) L.d2W(0, 1 + i) = L.d2W(1 + i, 0) = rp * vj[1] * dchi[i];
    L.d2W.block(1, 1, n, n) = rp * vj[0] * d2chi.cast<cd>();
    return L;
}

BeamValue evaluate_beam(const GaussianBeam& beam, const VecS& p)
{
    const int m = beam.n() + 1;
    BeamValue out{0.0, VecSc::Zero(m)};
    VecS z;
    try {
        z = beam.fchart->to_fermi(p);
    } catch (const DomainError&) {
        return out;
    }
    const auto& w = beam.fchart->window();
    if (z.tail(m - 1).norm() >= 0.5 * beam.delta() || z[0] < w.a0() || z[0] > w.b0()) return out;
    const BeamLocal L = beam_local(beam, z);
    const cd e = std::exp(kI * beam.rho * L.psi);
    out.u = e * L.W;
    const VecSc dz = e * (kI * beam.rho * L.dpsi * L.W + L.dW);
    // gradient in (t,x): du/dp = J^{-T} du/dz
    const MatS J = beam.fchart->from_fermi(z).jac;
    out.grad = J.transpose().cast<cd>().partialPivLu().solve(dz);
    return out;
}

FermiMetricData fermi_metric_data(const FermiChart& fc, const VecS& z, double h)
{
    const int m = int(z.size());
    FermiMetricData md;
    md.point = fc.from_fermi(z);
    md.g = md.point.jac.transpose() * fc.spacetime_metric(md.point.p) * md.point.jac;
    md.ginv = md.g.inverse();
    md.sqrt_det = std::sqrt(std::abs(md.g.determinant()));
    md.div = VecS::Zero(m);
    for (int i = 0; i < m; ++i) {
        VecS e = VecS::Zero(m);
        e[i] = h;
        const MatS gp = fc.metric_fermi(z + e), gm = fc.metric_fermi(z - e);
        const MatS ap = std::sqrt(std::abs(gp.determinant())) * gp.inverse();
        const MatS am = std::sqrt(std::abs(gm.determinant())) * gm.inverse();
        const MatS d = (ap - am) / (2.0 * h);
        for (int j = 0; j < m; ++j) md.div[j] += d(i, j);
    }
    md.div /= md.sqrt_det;
    return md;
}

cd spacetime_divergence(const FermiChart& fc, const CoefficientPair& coeffs, const VecS& p, double h)
{
    const int m = int(p.size());
    auto field = [&](const VecS& q) {
        const Vec2 x(q[1], m > 2 ? q[2] : 0.0);
        VecSc A(m);
        A[0] = coeffs.eval_b(q[0], x);
        const Vec2c w = coeffs.eval_omega(q[0], x);
        for (int i = 1; i < m; ++i) A[i] = w[i - 1];
        const MatS g = fc.spacetime_metric(q);
        return VecSc(std::sqrt(std::abs(g.determinant())) * g.inverse().cast<cd>() * A);
    };
    cd div = 0.0;
    for (int i = 0; i < m; ++i) {
        VecS e = VecS::Zero(m);
        e[i] = h;
        div += (field(p + e)[i] - field(p - e)[i]) / (2.0 * h);
    }
    return div / std::sqrt(std::abs(fc.spacetime_metric(p).determinant()));
}

ResidualTerms beam_residual(const GaussianBeam& beam, const CoefficientPair& coeffs, const VecS& z,
                            const FermiMetricData& md)
{
    const int m = beam.n() + 1;
    const VecS& p = md.point.p;
    const Vec2 x(p[1], m > 2 ? p[2] : 0.0);
    VecSc Ap(m);
    Ap[0] = coeffs.eval_b(p[0], x);
    const Vec2c w = coeffs.eval_omega(p[0], x);
    for (int i = 1; i < m; ++i) Ap[i] = w[i - 1];
    VecSc B = md.point.jac.transpose().cast<cd>() * Ap;
    cd c = coeffs.eval_q(p[0], x);
    if (beam.variant == BeamVariant::Adjoint) {
        B = -B;
        if (coeffs.has_oneform()) c -= spacetime_divergence(*beam.fchart, coeffs, p);
    }
    const BeamLocal L = beam_local(beam, z);
    const MatSc gi = md.ginv.cast<cd>();
    const VecSc div = md.div.cast<cd>();
    const VecSc gdpsi = gi * L.dpsi;
    ResidualTerms r;
    r.S = (L.dpsi.transpose() * gdpsi)(0, 0);
    const cd lap_psi = (gi.cwiseProduct(L.d2psi)).sum() + (div.transpose() * L.dpsi)(0, 0);
    const cd B_grad_psi = (B.transpose() * gdpsi)(0, 0);
    const VecSc gdW = gi * L.dW;
    r.SW = r.S * L.W;
    r.T = 2.0 * (L.dpsi.transpose() * gdW)(0, 0) + (lap_psi - B_grad_psi) * L.W;
    const cd lap_W = (gi.cwiseProduct(L.d2W)).sum() + (div.transpose() * L.dW)(0, 0);
    r.LW = -lap_W + (B.transpose() * gdW)(0, 0) + c * L.W;
    const double rho = beam.rho;
    r.F = -std::exp(kI * rho * L.psi) * (rho * rho * r.SW - kI * rho * r.T + r.LW);
    return r;
}

ResidualTerms beam_residual(const GaussianBeam& beam, const CoefficientPair& coeffs, const VecS& z)
{
    return beam_residual(beam, coeffs, z, fermi_metric_data(*beam.fchart, z));
}

EikonalReport eikonal_residual(const GaussianBeam& beam, const std::vector<double>& s_values,
                               const std::vector<double>& radii, int n_directions, double h_fd)
{
    const int n = beam.n(), m = n + 1;
    const FermiChart& fc = *beam.fchart;
    GaussianBeam fwd = beam;
    fwd.variant = BeamVariant::Forward;
    auto S_at = [&](const VecS& z) {
        const MatS gi = fc.metric_fermi(z).inverse();
        const BeamLocal L = beam_local(fwd, z);
        return (L.dpsi.transpose() * gi.cast<cd>() * L.dpsi)(0, 0);
    };
    EikonalReport rep;
    rep.radii = radii;
    rep.max_abs.assign(radii.size(), 0.0);
    for (double s : s_values) {
        VecS z0 = VecS::Zero(m);
        z0[0] = s;
        const cd S0 = S_at(z0);
        rep.max_on_beta = std::max(rep.max_on_beta, std::abs(S0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                VecS ei = VecS::Zero(m), ej = VecS::Zero(m);
                ei[1 + i] = h_fd;
                ej[1 + j] = h_fd;
                cd d2;
                if (i == j)
                    d2 = (S_at(z0 + ei) - 2.0 * S0 + S_at(z0 - ei)) / (h_fd * h_fd);
                else
                    d2 = (S_at(z0 + ei + ej) - S_at(z0 + ei - ej) - S_at(z0 - ei + ej) + S_at(z0 - ei - ej)) /
                         (4.0 * h_fd * h_fd);
                rep.transverse_hessian = std::max(rep.transverse_hessian, std::abs(d2));
            }
        for (size_t k = 0; k < radii.size(); ++k) {
            const int ndir = n == 1 ? 2 : n_directions;
            for (int d = 0; d < ndir; ++d) {
                VecS z = z0;
                if (n == 1) {
                    z[1] = d == 0 ? radii[k] : -radii[k];
                } else {
                    const double th = 2.0 * kPi * (d + 0.5) / ndir;
                    z[1] = radii[k] * std::cos(th);
                    z[2] = radii[k] * std::sin(th);
                }
                const double a = std::abs(S_at(z));
                rep.max_abs[k] = std::max(rep.max_abs[k], a);
                rep.max_ratio = std::max(rep.max_ratio, a / (radii[k] * radii[k]));
            }
        }
    }
    return rep;
}

namespace {

/// rho-independent pieces of the residual on the quadrature grid.
struct TubeTable {
    std::vector<double> weight; // Simpson weight times sqrt|g|
    std::vector<double> weight_half;
    std::vector<cd> psi, SW1, T1, LW1, S;
    std::vector<double> W1abs;
};

TubeTable tabulate(const GaussianBeam& beam, const CoefficientPair& coeffs, double half_width,
                   const QuadratureOptions& q)
{
    const int n = beam.n(), m = n + 1;
    const auto& w = beam.fchart->window();
    const int ns = q.n_s, nz = q.n_z;
    const auto ws = simpson_weights(ns, (w.b0() - w.a0()) / (ns - 1));
    const auto wz = simpson_weights(nz, 2.0 * half_width / (nz - 1));
    const auto ws2 = simpson_weights((ns + 1) / 2, 2.0 * (w.b0() - w.a0()) / (ns - 1));
    const auto wz2 = simpson_weights((nz + 1) / 2, 4.0 * half_width / (nz - 1));
    const int nzt = n == 1 ? nz : nz * nz;
    const size_t total = size_t(ns) * nzt;
    TubeTable t;
    t.weight.assign(total, 0.0);
    t.weight_half.assign(total, 0.0);
    t.psi.assign(total, 0.0);
    t.SW1 = t.T1 = t.LW1 = t.S = t.psi;
    t.W1abs.assign(total, 0.0);
    GaussianBeam unit = with_rho(beam, 1.0);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < ns; ++i) {
        for (int k = 0; k < nzt; ++k) {
            const int k1 = k % nz, k2 = k / nz;
            VecS z(m);
            z[0] = w.a0() + (w.b0() - w.a0()) * i / (ns - 1);
            z[1] = -half_width + 2.0 * half_width * k1 / (nz - 1);
            if (n == 2) z[2] = -half_width + 2.0 * half_width * k2 / (nz - 1);
            const size_t idx = size_t(i) * nzt + k;
            if (z.tail(n).norm() >= 0.5 * beam.delta()) continue;
            const FermiMetricData md = fermi_metric_data(*beam.fchart, z);
            const ResidualTerms r = beam_residual(unit, coeffs, z, md);
            const BeamLocal L = beam_local(unit, z);
            double wq = ws[i] * wz[k1] * (n == 2 ? wz[k2] : 1.0);
            t.weight[idx] = wq * md.sqrt_det;
            const bool on_half = i % 2 == 0 && k1 % 2 == 0 && (n == 1 || k2 % 2 == 0);
            if (on_half)
                t.weight_half[idx] = ws2[i / 2] * wz2[k1 / 2] * (n == 2 ? wz2[k2 / 2] : 1.0) * md.sqrt_det;
            t.psi[idx] = L.psi;
            t.S[idx] = r.S;
            t.SW1[idx] = r.SW;
            t.T1[idx] = r.T;
            t.LW1[idx] = r.LW;
            t.W1abs[idx] = std::abs(L.W);
        }
    }
    return t;
}

} // namespace

std::vector<ResidualRow> pde_residual_norm(const GaussianBeam& beam, const CoefficientPair& coeffs,
                                           const std::vector<double>& rho_list, const QuadratureOptions& q)
{
    if (q.n_s < 5 || q.n_s % 4 != 1 || q.n_z < 5 || q.n_z % 4 != 1)
        throw PreconditionError("pde_residual_norm: node counts must be 1 mod 4");
    // smallest eigenvalue of Im H over the grid bounds the Gaussian width; e^{-40} is the truncation level
    double lam = 1e300;
    for (const auto& H : beam.riccati->H) {
        Eigen::SelfAdjointEigenSolver<MatX> es(MatX(0.5 * (H.imag() + H.imag().transpose())));
        lam = std::min(lam, es.eigenvalues()[0]);
    }
    std::map<double, TubeTable> cache;
    std::vector<ResidualRow> rows;
    for (double rho : rho_list) {
        const double hw = std::min(0.5 * beam.delta(), std::sqrt(20.0 / (rho * std::max(lam, 1e-300))));
        auto it = cache.find(hw);
        if (it == cache.end()) it = cache.emplace(hw, tabulate(beam, coeffs, hw, q)).first;
        const TubeTable& t = it->second;
        const double rp = std::pow(rho, beam.amplitude.rho_power);
        double f2 = 0.0, f2h = 0.0, e2 = 0.0, t2 = 0.0;
        for (size_t k = 0; k < t.weight.size(); ++k) {
            if (t.weight[k] == 0.0 && t.weight_half[k] == 0.0) continue;
            const double g = std::exp(-2.0 * rho * t.psi[k].imag());
            const cd inner = rho * rho * t.SW1[k] - kI * rho * t.T1[k] + t.LW1[k];
            const double a = rp * rp * std::norm(inner) * g;
            f2 += t.weight[k] * a;
            f2h += t.weight_half[k] * a;
            e2 += t.weight[k] * rp * rp * std::norm(t.SW1[k]) * g;
            t2 += t.weight[k] * rp * rp * std::norm(t.T1[k]) * g;
        }
        if (q.check_refinement && std::abs(std::sqrt(f2) - std::sqrt(std::max(f2h, 0.0))) >
                                      q.refinement_tol * std::sqrt(f2) + 1e-12)
            throw AccuracyError("pde_residual_norm: quadrature not converged at rho = " + std::to_string(rho) +
                                " (full " + std::to_string(std::sqrt(f2)) + ", half " +
                                std::to_string(std::sqrt(std::max(f2h, 0.0))) + ")");
        ResidualRow row;
        row.rho = rho;
        row.F_norm = std::sqrt(f2);
        row.ratio = row.F_norm / rho;
        row.eikonal_norm = std::sqrt(e2);
        row.transport_norm = std::sqrt(t2);
        rows.push_back(row);
    }
    return rows;
}

void write_beam_csv(const GaussianBeam& beam, int n_s, int n_z, std::ostream& out)
{
    const int n = beam.n(), m = n + 1;
    const auto& w = beam.fchart->window();
    const double hw = 0.5 * beam.delta();
    out << (n == 2 ? "s,r,z2,Re_u,Im_u\n" : "s,r,Re_u,Im_u\n") << std::setprecision(12);
    const int nz2 = n == 2 ? n_z : 1;
    for (int i = 0; i < n_s; ++i)
        for (int k2 = 0; k2 < nz2; ++k2)
            for (int k1 = 0; k1 < n_z; ++k1) {
                VecS z(m);
                z[0] = w.a0() + (w.b0() - w.a0()) * i / std::max(1, n_s - 1);
                z[1] = -hw + 2.0 * hw * k1 / std::max(1, n_z - 1);
                if (n == 2) z[2] = -hw + 2.0 * hw * k2 / std::max(1, n_z - 1);
                cd u = 0.0;
                if (z.tail(n).norm() < hw) {
                    const BeamLocal L = beam_local(beam, z);
                    u = std::exp(kI * beam.rho * L.psi) * L.W;
                }
                out << z[0] << ',' << z[1] << ',';
                if (n == 2) out << z[2] << ',';
                out << u.real() << ',' << u.imag() << '\n';
            }
}

} // namespace lightray
