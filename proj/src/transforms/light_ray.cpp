#include "lightray/transforms/light_ray.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lightray {

namespace {

struct RayWeights {
    std::vector<double> full, half; ///< half is zero on odd nodes
};

RayWeights ray_weights(const RaySamples& r)
{
    const int n = int(r.x.size());
    RayWeights w;
    w.full = simpson_weights(n, r.dt());
    const auto h = simpson_weights((n + 1) / 2, 2.0 * r.dt());
    w.half.assign(n, 0.0);
    for (int k = 0; k < n; k += 2) w.half[k] = h[k / 2];
    return w;
}

bool in_box(const SupportBox& b, const Vec2& x)
{
    return x.x() >= b.x_lo.x() && x.x() <= b.x_hi.x() && x.y() >= b.x_lo.y() && x.y() <= b.x_hi.y();
}

/// Shared driver: integrand(t, k) is evaluated only at nodes inside the support box.
template <class Integrand>
LightRayData transform(const CoefficientPair& coeffs, const RayFamily& fam, TransformKind kind,
                       const TransformOptions& opt, Integrand integrand)
{
    const size_t nt = fam.ttilde.size(), nr = fam.rays.size();
    LightRayData d;
    d.kind = kind;
    d.ttilde = fam.ttilde;
    d.values = MatXc::Zero(nt, nr);
    MatXc coarse = MatXc::Zero(nt, nr);
    for (const auto& r : fam.rays) {
        d.angle.push_back(r.angle);
        d.offset.push_back(r.offset);
    }
    double peak = 0.0; // largest integrand modulus, sets the scale of the refinement check
#pragma omp parallel for schedule(dynamic, 8) reduction(max : peak)
    for (int j = 0; j < int(nr); ++j) {
        const RaySamples& r = fam.rays[j];
        const RayWeights w = ray_weights(r);
        const double dt = r.dt();
        for (int k = 0; k < int(r.x.size()); ++k) {
            if (!in_box(coeffs.support, r.x[k])) continue;
            const double tk = k * dt;
            for (size_t i = 0; i < nt; ++i) {
                const double t = fam.ttilde[i] + tk;
                if (t < coeffs.support.t_lo || t > coeffs.support.t_hi) continue;
                const cd val = integrand(t, r, k);
                peak = std::max(peak, std::abs(val));
                d.values(i, j) += w.full[k] * val;
                coarse(i, j) += w.half[k] * val;
            }
        }
    }
    if (opt.refine_tol >= 0.0) {
        const double scale = peak * fam.max_length();
        const double diff = (d.values - coarse).cwiseAbs().maxCoeff();
        if (diff > opt.refine_tol * scale + 1e-300)
            throw AccuracyError("light ray transform: Simpson refinement disagreement " + std::to_string(diff) +
                                " exceeds tolerance (scale " + std::to_string(scale) + ")");
    }
    return d;
}

LightRayData zero_data(const RayFamily& fam, TransformKind kind)
{
    LightRayData d;
    d.kind = kind;
    d.ttilde = fam.ttilde;
    d.values = MatXc::Zero(Eigen::Index(fam.ttilde.size()), Eigen::Index(fam.size()));
    for (const auto& r : fam.rays) {
        d.angle.push_back(r.angle);
        d.offset.push_back(r.offset);
    }
    return d;
}

} // namespace

LightRayData light_ray_scalar(const CoefficientPair& coeffs, const RayFamily& family, const TransformOptions& opt)
{
    if (!coeffs.q) return zero_data(family, TransformKind::Scalar);
    return transform(coeffs, family, TransformKind::Scalar, opt,
                     [&](double t, const RaySamples& r, int k) { return coeffs.q(t, r.x[k]); });
}

LightRayData light_ray_oneform(const CoefficientPair& coeffs, const RayFamily& family, const TransformOptions& opt)
{
    if (!coeffs.has_oneform()) return zero_data(family, TransformKind::OneForm);
    return transform(coeffs, family, TransformKind::OneForm, opt, [&](double t, const RaySamples& r, int k) {
        cd a = coeffs.b ? coeffs.b(t, r.x[k]) : cd(0.0);
        if (coeffs.omega) {
            const Vec2c w = coeffs.omega(t, r.x[k]);
            a += w[0] * r.v[k][0] + w[1] * r.v[k][1];
        }
        return a;
    });
}

std::vector<cd> geodesic_xray(const SpatialScalar& f, const SpatialOneForm& alpha, const RayFamily& family)
{
    std::vector<cd> out(family.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int j = 0; j < int(family.size()); ++j) {
        const RaySamples& r = family.rays[j];
        const auto w = simpson_weights(int(r.x.size()), r.dt());
        cd s = 0.0;
        for (size_t k = 0; k < r.x.size(); ++k) {
            cd v = f ? f(r.x[k]) : cd(0.0);
            if (alpha) {
                const Vec2c a = alpha(r.x[k]);
                v += a[0] * r.v[k][0] + a[1] * r.v[k][1];
            }
            s += w[k] * v;
        }
        out[j] = s;
    }
    return out;
}

namespace {

template <class Eval>
std::vector<cd> weighted(int k, const RayFamily& family, bool centered, Eval eval)
{
    if (k < 0) throw PreconditionError("weighted_xray_moment: k must be non-negative");
    std::vector<cd> out(family.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int j = 0; j < int(family.size()); ++j) {
        const RaySamples& r = family.rays[j];
        const auto w = simpson_weights(int(r.x.size()), r.dt());
        cd s = 0.0;
        for (size_t m = 0; m < r.x.size(); ++m) {
            const cd it = kI * (double(m) * r.dt() - (centered ? 0.5 * r.length : 0.0));
            s += w[m] * std::pow(it, k) * eval(r, m);
        }
        out[j] = s;
    }
    return out;
}

} // namespace

std::vector<cd> weighted_xray_moment(const SpatialScalar& f, int k, const RayFamily& family, bool centered)
{
    return weighted(k, family, centered, [&](const RaySamples& r, size_t m) { return f(r.x[m]); });
}

std::vector<cd> weighted_xray_moment(const SpatialOneForm& alpha, int k, const RayFamily& family, bool centered)
{
    return weighted(k, family, centered, [&](const RaySamples& r, size_t m) {
        const Vec2c a = alpha(r.x[m]);
        return a[0] * r.v[m][0] + a[1] * r.v[m][1];
    });
}

void write_light_ray_csv(const LightRayData& data, std::ostream& out)
{
    out << "ttilde,angle,offset,value_re,value_im\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.values.rows(); ++i)
        for (Eigen::Index j = 0; j < data.values.cols(); ++j)
            out << data.ttilde[i] << ',' << data.angle[j] << ',' << data.offset[j] << ',' << data.values(i, j).real()
                << ',' << data.values(i, j).imag() << '\n';
}

LightRayData read_light_ray_csv(std::istream& in, TransformKind kind)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("ttilde,angle,offset,value_re,value_im", 0) != 0)
        throw ConfigError("light ray CSV: missing header");
    std::vector<std::array<double, 5>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 5> r{};
        std::stringstream ss(line);
        std::string cell;
        for (int c = 0; c < 5; ++c) {
            if (!std::getline(ss, cell, ',')) throw ConfigError("light ray CSV: short row '" + line + "'");
            r[c] = std::stod(cell);
        }
        rows.push_back(r);
    }
    LightRayData d;
    d.kind = kind;
    // rays appear in a fixed order within each t~ block
    std::map<double, int> tindex;
    for (const auto& r : rows) tindex.emplace(r[0], 0);
    int i = 0;
    for (auto& [t, idx] : tindex) {
        idx = i++;
        d.ttilde.push_back(t);
    }
    if (tindex.empty() || rows.size() % tindex.size() != 0) throw ConfigError("light ray CSV: ragged table");
    const size_t nr = rows.size() / tindex.size();
    d.values = MatXc::Zero(Eigen::Index(tindex.size()), Eigen::Index(nr));
    for (size_t k = 0; k < rows.size(); ++k) {
        const size_t j = k % nr;
        if (k < nr) {
            d.angle.push_back(rows[k][1]);
            d.offset.push_back(rows[k][2]);
        }
        d.values(tindex.at(rows[k][0]), Eigen::Index(j)) = cd(rows[k][3], rows[k][4]);
    }
    return d;
}

nlohmann::json family_manifest(const RayFamily& family)
{
    const auto& o = family.options;
    nlohmann::json j;
    j["domain"] = {{"kind", family.domain.kind == DomainKind::Disk ? "disk" : "rect"},
                   {"center", {family.domain.center.x(), family.domain.center.y()}},
                   {"radius", family.domain.radius}};
    j["n_angles"] = o.n_angles;
    j["n_offsets"] = o.n_offsets;
    j["max_offset"] = o.max_offset;
    j["samples"] = o.samples;
    j["steps"] = o.steps;
    j["n_ttilde"] = o.n_ttilde;
    j["T"] = o.T;
    j["full_circle"] = o.full_circle;
    j["n_rays"] = family.size();
    j["max_length"] = family.max_length();
    j["ttilde_range"] = {family.ttilde.front(), family.ttilde.back()};
    return j;
}

RayFamilyOptions family_options_from_json(const nlohmann::json& j)
{
    RayFamilyOptions o;
    o.n_angles = j.value("n_angles", o.n_angles);
    o.n_offsets = j.value("n_offsets", o.n_offsets);
    o.max_offset = j.value("max_offset", o.max_offset);
    o.samples = j.value("samples", o.samples);
    o.steps = j.value("steps", o.steps);
    o.n_ttilde = j.value("n_ttilde", o.n_ttilde);
    o.T = j.value("T", o.T);
    o.full_circle = j.value("full_circle", o.full_circle);
    return o;
}

} // namespace lightray
